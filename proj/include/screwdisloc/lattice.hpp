#pragma once

// Geometry of the screw-dislocated lattice: height function, nearest lift,
// Burgers frames and finite truncations with their cut bonds.
//
// The planar site (x, y) carries a ladder of sites at heights n + h(x, y),
// n in Z. At fixed z-momentum each ladder collapses to one basis state, and
// the dislocation survives only as a phase on the cut bonds: the y-bonds
// (x, 0) -> (x, 1) with x < 0. Crossing one of them upward lowers the layer
// label by one.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "screwdisloc/linalg.hpp"

namespace screwdisloc {

struct Site {
  int x = 0;
  int y = 0;
  int z_index = 0;  // layer label; embedded height is z_index + height_offset(x, y)
  auto operator<=>(const Site&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// theta(x, y) / 2pi with theta on the branch [-pi, pi); the axis maps to 0.
inline double height_offset(int x, int y) {
  if (x == 0 && y == 0) return 0.0;
  double theta = std::atan2(static_cast<double>(y), static_cast<double>(x));
  if (theta >= kPi) theta -= kTwoPi;  // atan2 returns +pi on the negative x-axis
  return theta / kTwoPi;
}

inline bool is_axis(int x, int y) { return x == 0 && y == 0; }

/// Embedded height of a site.
inline double embedded_height(const Site& s) {
  return static_cast<double>(s.z_index) + height_offset(s.x, s.y);
}

/// The site above (x, y) whose height is closest to z; exact ties go up.
inline Site nearest_lift(int x, int y, double z) {
  const double h = height_offset(x, y);
  const double n = std::floor(z - h + 0.5);
  return Site{x, y, static_cast<int>(n)};
}

// ---------------------------------------------------------------------------
// Burgers frames

using IntVec3 = std::array<long long, 3>;
using IntMat3 = std::array<std::array<long long, 3>, 3>;  // row-major

inline IntMat3 identity3() { return IntMat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline long long det3(const IntMat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline IntMat3 matmul3(const IntMat3& a, const IntMat3& b) {
  IntMat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline IntVec3 apply3(const IntMat3& m, const IntVec3& v) {
  IntVec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[i] += m[i][k] * v[k];
  return r;
}

/// Inverse of a unimodular integer matrix (adjugate over the determinant).
inline IntMat3 inverse_unimodular(const IntMat3& m) {
  const long long d = det3(m);
  if (d != 1 && d != -1) throw std::invalid_argument("inverse_unimodular: determinant is not +-1");
  IntMat3 inv{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) * d;
    }
  }
  return inv;
}

struct BurgersFrame {
  IntVec3 b{0, 0, 1};
  IntMat3 T = identity3();  // columns (a, c, b)

  [[nodiscard]] IntVec3 column(int j) const { return {T[0][j], T[1][j], T[2][j]}; }
  [[nodiscard]] bool is_identity() const { return T == identity3(); }
};

/// Completes a primitive Burgers vector to a basis (a, c, b) of Z^3 with
/// det T = +1. Integer row reduction brings b to e_z while the inverse
/// operations are accumulated into T, so the output is deterministic.
inline BurgersFrame burgers_frame(const IntVec3& b) {
  if (b[0] == 0 && b[1] == 0 && b[2] == 0) throw std::invalid_argument("burgers_frame: b = 0");
  IntVec3 v = b;
  IntMat3 t = identity3();  // t = U^{-1}, maintained alongside the row operations on v
  auto row_sub = [&](int i, int p, long long q) {
    // v_i -= q v_p  <=>  column p of U^{-1} += q column i
    v[i] -= q * v[p];
    for (int r = 0; r < 3; ++r) t[r][p] += q * t[r][i];
  };
  auto row_swap = [&](int i, int j) {
    std::swap(v[i], v[j]);
    for (int r = 0; r < 3; ++r) std::swap(t[r][i], t[r][j]);
  };
  auto row_negate = [&](int i) {
    v[i] = -v[i];
    for (int r = 0; r < 3; ++r) t[r][i] = -t[r][i];
  };
  for (;;) {
    int pivot = -1;
    int nonzero = 0;
    for (int i = 0; i < 3; ++i) {
      if (v[i] == 0) continue;
      ++nonzero;
      if (pivot < 0 || std::llabs(v[i]) < std::llabs(v[pivot])) pivot = i;
    }
    if (nonzero <= 1) {
      if (std::llabs(v[pivot]) != 1) {
        throw std::invalid_argument("burgers_frame: Burgers vector is not primitive");
      }
      if (pivot != 2) row_swap(pivot, 2);
      if (v[2] < 0) row_negate(2);
      break;
    }
    for (int i = 0; i < 3; ++i) {
      if (i != pivot && v[i] != 0) row_sub(i, pivot, v[i] / v[pivot]);
    }
  }
  if (det3(t) < 0) {
    for (int r = 0; r < 3; ++r) t[r][0] = -t[r][0];
  }
  BurgersFrame frame;
  frame.b = b;
  frame.T = t;
  return frame;
}

// ---------------------------------------------------------------------------
// Finite truncations

enum class BoundaryKind { OpenSingleCore, TorusDipole };

struct Boundary {
  BoundaryKind kind = BoundaryKind::OpenSingleCore;
  int separation = 0;  // dipole only: number of cut bonds between the two cores

  static Boundary open() { return {}; }
  static Boundary dipole(int separation) { return {BoundaryKind::TorusDipole, separation}; }
};

struct CutBond {
  Index from = 0;  // site (x, 0)
  Index to = 0;    // site (x, 1)
};

struct Neighbor {
  Index site = -1;
  int layer_shift = 0;  // number of S_z^* factors picked up along the bond
};

class DislocatedLattice {
 public:
  [[nodiscard]] int half_width() const { return L_; }
  [[nodiscard]] int width() const { return 2 * L_ + 1; }
  [[nodiscard]] const Boundary& boundary() const { return boundary_; }
  [[nodiscard]] bool is_torus() const { return boundary_.kind == BoundaryKind::TorusDipole; }
  [[nodiscard]] double core_removal_radius() const { return R_; }
  [[nodiscard]] const BurgersFrame& frame() const { return frame_; }

  [[nodiscard]] Index size() const { return static_cast<Index>(sites_.size()); }
  [[nodiscard]] const std::vector<Site>& sites() const { return sites_; }
  [[nodiscard]] const Site& site(Index i) const { return sites_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::vector<Site>& removed_sites() const { return removed_; }
  [[nodiscard]] const std::vector<CutBond>& cut_bonds() const { return cut_bonds_; }

  /// Index of (x, y), or -1 when outside the truncation or removed.
  [[nodiscard]] Index index_of(int x, int y) const {
    if (is_torus()) {
      x = wrap(x);
      y = wrap(y);
    } else if (std::abs(x) > L_ || std::abs(y) > L_) {
      return -1;
    }
    return grid_[static_cast<std::size_t>((x + L_) * width() + (y + L_))];
  }

  /// Dislocation cores: the axis for the single-core lattice, the two
  /// end plaquettes of the cut segment for the dipole (core 0 at the right end).
  [[nodiscard]] const std::vector<Point2>& cores() const { return cores_; }

  /// Euclidean distance from site i to core c (minimum image on the torus).
  [[nodiscard]] double distance_to_core(const Site& s, std::size_t c = 0) const {
    const Point2 p = cores_.at(c);
    double dx = s.x - p.x;
    double dy = s.y - p.y;
    if (is_torus()) {
      const double w = width();
      dx -= w * std::round(dx / w);
      dy -= w * std::round(dy / w);
    }
    return std::hypot(dx, dy);
  }
  [[nodiscard]] double distance_to_nearest_core(const Site& s) const {
    double d = distance_to_core(s, 0);
    for (std::size_t c = 1; c < cores_.size(); ++c) d = std::min(d, distance_to_core(s, c));
    return d;
  }

  /// Whether the y-bond (x, y) -> (x, y + 1) is a cut bond.
  [[nodiscard]] bool is_cut(int x, int y) const {
    if (is_torus()) {
      x = wrap(x);
      y = wrap(y);
      return y == 0 && x >= cut_lo_ && x <= cut_hi_;
    }
    return y == 0 && x < 0;
  }

  /// Neighbour reached by one unit step (dx, dy) with |dx| + |dy| = 1.
  /// Upward crossings of a cut bond carry layer shift +1, downward -1.
  [[nodiscard]] Neighbor step(Index from, int dx, int dy) const {
    const Site& s = site(from);
    Neighbor n;
    n.site = index_of(s.x + dx, s.y + dy);
    if (n.site < 0) return n;
    if (dy == 1 && is_cut(s.x, s.y)) n.layer_shift = 1;
    if (dy == -1 && is_cut(s.x, s.y - 1)) n.layer_shift = -1;
    return n;
  }

  /// Graph distance on the retained sites (breadth-first search).
  [[nodiscard]] std::vector<int> distances_from(Index source) const {
    std::vector<int> dist(sites_.size(), -1);
    std::queue<Index> queue;
    dist[static_cast<std::size_t>(source)] = 0;
    queue.push(source);
    static constexpr std::array<std::array<int, 2>, 4> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    while (!queue.empty()) {
      const Index u = queue.front();
      queue.pop();
      for (const auto& d : kSteps) {
        const Neighbor n = step(u, d[0], d[1]);
        if (n.site < 0 || dist[static_cast<std::size_t>(n.site)] >= 0) continue;
        dist[static_cast<std::size_t>(n.site)] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push(n.site);
      }
    }
    return dist;
  }

  /// Sites within Euclidean distance rho of core c (inclusive).
  [[nodiscard]] std::vector<Index> sites_near_core(double rho, std::size_t c = 0) const {
    std::vector<Index> out;
    for (Index i = 0; i < size(); ++i) {
      if (distance_to_core(site(i), c) <= rho) out.push_back(i);
    }
    return out;
  }

  /// Same geometry without core removal.
  [[nodiscard]] DislocatedLattice without_core_removal() const;

  friend DislocatedLattice build_lattice(int L, Boundary boundary, double R, BurgersFrame frame);

 private:
  [[nodiscard]] int wrap(int v) const {
    const int w = width();
    int r = ((v + L_) % w + w) % w;
    return r - L_;
  }

  int L_ = 0;
  Boundary boundary_;
  double R_ = 0.0;
  BurgersFrame frame_;
  int cut_lo_ = 0;
  int cut_hi_ = -1;
  std::vector<Site> sites_;
  std::vector<Site> removed_;
  std::vector<Index> grid_;
  std::vector<CutBond> cut_bonds_;
  std::vector<Point2> cores_;
};

/// Finite realization of the dislocated lattice. Sites are ordered
/// lexicographically in (x, y); sites within distance R of a core are removed.
inline DislocatedLattice build_lattice(int L, Boundary boundary, double R = 0.0,
                                       BurgersFrame frame = {}) {
  if (L < 2) throw std::invalid_argument("build_lattice: half-width must be at least 2");
  if (R < 0.0) throw std::invalid_argument("build_lattice: negative core removal radius");
  if (R >= L) throw std::invalid_argument("build_lattice: core removal radius swallows the truncation");
  DislocatedLattice lat;
  lat.L_ = L;
  lat.boundary_ = boundary;
  lat.R_ = R;
  lat.frame_ = frame;
  if (boundary.kind == BoundaryKind::TorusDipole) {
    if (boundary.separation < 1 || boundary.separation >= 2 * L) {
      throw std::invalid_argument("build_lattice: dipole separation must lie in [1, 2L)");
    }
    lat.cut_lo_ = -(boundary.separation / 2);
    lat.cut_hi_ = lat.cut_lo_ + boundary.separation - 1;
    lat.cores_ = {Point2{lat.cut_hi_ + 0.5, 0.5}, Point2{lat.cut_lo_ - 0.5, 0.5}};
  } else {
    lat.cores_ = {Point2{0.0, 0.0}};
  }
  const int w = lat.width();
  lat.grid_.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(w), -1);
  for (int x = -L; x <= L; ++x) {
    for (int y = -L; y <= L; ++y) {
      const Site s{x, y, 0};
      if (R > 0.0 && lat.distance_to_nearest_core(s) <= R) {
        lat.removed_.push_back(s);
        continue;
      }
      lat.grid_[static_cast<std::size_t>((x + L) * w + (y + L))] = static_cast<Index>(lat.sites_.size());
      lat.sites_.push_back(s);
    }
  }
  for (Index i = 0; i < lat.size(); ++i) {
    const Site& s = lat.site(i);
    if (!lat.is_cut(s.x, s.y)) continue;
    const Index j = lat.index_of(s.x, s.y + 1);
    if (j >= 0) lat.cut_bonds_.push_back(CutBond{i, j});
  }
  return lat;
}

inline DislocatedLattice DislocatedLattice::without_core_removal() const {
  return build_lattice(L_, boundary_, 0.0, frame_);
}

}  // namespace screwdisloc
