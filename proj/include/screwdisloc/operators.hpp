#pragma once

// Dislocated shift operators and projections at fixed z-momentum.
//
// After Fourier transforming along z, S_z^* becomes the scalar e^{-i kz}; the
// only trace of the dislocation is that phase on the cut bonds. All operators
// act on the site basis of a DislocatedLattice, in the lattice's ordering.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "screwdisloc/lattice.hpp"
#include "screwdisloc/linalg.hpp"

namespace screwdisloc {

/// Sparse operator on the site basis of a lattice at momentum kz. The lattice
/// is referenced, not owned, and must outlive the operator.
struct MomentumOperator {
  double kz = 0.0;
  SparseC matrix;
  const DislocatedLattice* lattice = nullptr;

  [[nodiscard]] Index dim() const { return matrix.rows(); }
  [[nodiscard]] CMatrix dense() const { return CMatrix(matrix); }
};

/// Phase of a path that picked up nu factors of S_z^*.
inline cplx layer_phase(double kz, int nu) {
  if (nu == 0) return {1.0, 0.0};
  return std::polar(1.0, -kz * static_cast<double>(nu));
}

struct Walk {
  Index target = -1;  // -1 if the path left the truncation
  int layer_shift = 0;
};

/// Image of site `from` under S_x^n S_y^m: the S_y steps act first.
inline Walk walk(const DislocatedLattice& lat, Index from, int n, int m) {
  Walk w{from, 0};
  const int sy = m >= 0 ? 1 : -1;
  for (int k = 0; k < std::abs(m); ++k) {
    const Neighbor nb = lat.step(w.target, 0, sy);
    if (nb.site < 0) return Walk{};
    w.target = nb.site;
    w.layer_shift += nb.layer_shift;
  }
  const int sx = n >= 0 ? 1 : -1;
  for (int k = 0; k < std::abs(n); ++k) {
    const Neighbor nb = lat.step(w.target, sx, 0);
    if (nb.site < 0) return Walk{};
    w.target = nb.site;
    w.layer_shift += nb.layer_shift;
  }
  return w;
}

/// S_x^n S_y^m at momentum kz.
inline MomentumOperator monomial(const DislocatedLattice& lat, double kz, int n, int m) {
  std::vector<Eigen::Triplet<cplx>> entries;
  entries.reserve(static_cast<std::size_t>(lat.size()));
  for (Index j = 0; j < lat.size(); ++j) {
    const Walk w = walk(lat, j, n, m);
    if (w.target >= 0) entries.emplace_back(w.target, j, layer_phase(kz, w.layer_shift));
  }
  MomentumOperator op{kz, SparseC(lat.size(), lat.size()), &lat};
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  return op;
}

inline MomentumOperator shift_x(const DislocatedLattice& lat, double kz) { return monomial(lat, kz, 1, 0); }
inline MomentumOperator shift_y(const DislocatedLattice& lat, double kz) { return monomial(lat, kz, 0, 1); }

/// Translation by (dx, dy) that ignores the cut: the undislocated shift.
inline MomentumOperator flat_shift(const DislocatedLattice& lat, int dx, int dy) {
  std::vector<Eigen::Triplet<cplx>> entries;
  for (Index j = 0; j < lat.size(); ++j) {
    const Site& s = lat.site(j);
    const Index i = lat.index_of(s.x + dx, s.y + dy);
    if (i >= 0) entries.emplace_back(i, j, cplx(1.0, 0.0));
  }
  MomentumOperator op{0.0, SparseC(lat.size(), lat.size()), &lat};
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  return op;
}

/// Shift built from the covering itself: each site is sent to the nearest
/// lift of its translate, and layer labels are read through the
/// identification n -> nearest_lift(x, y, n). Differs from shift_x/shift_y by
/// the diagonal gauge returned by half_line_gauge.
inline MomentumOperator geometric_shift(const DislocatedLattice& lat, double kz, int dx, int dy) {
  if (lat.is_torus()) throw std::invalid_argument("geometric_shift: open single-core lattice required");
  std::vector<Eigen::Triplet<cplx>> entries;
  for (Index j = 0; j < lat.size(); ++j) {
    const Site& s = lat.site(j);
    const Index i = lat.index_of(s.x + dx, s.y + dy);
    if (i < 0) continue;
    const Site start = nearest_lift(s.x, s.y, 0.0);
    const Site target = nearest_lift(s.x + dx, s.y + dy, embedded_height(start));
    const int label = target.z_index - nearest_lift(s.x + dx, s.y + dy, 0.0).z_index;
    // label counts layers gained, i.e. factors of S_z; S_z -> e^{i kz}
    entries.emplace_back(i, j, std::polar(1.0, kz * static_cast<double>(label)));
  }
  MomentumOperator op{kz, SparseC(lat.size(), lat.size()), &lat};
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  return op;
}

/// diag(e^{i kz}) on the half-line x < 0, y = 0 and 1 elsewhere; conjugates
/// geometric shifts into the algebraic ones: G S_geo G^dagger = S.
inline CVector half_line_gauge(const DislocatedLattice& lat, double kz) {
  CVector g = CVector::Ones(lat.size());
  for (Index i = 0; i < lat.size(); ++i) {
    const Site& s = lat.site(i);
    if (s.y == 0 && s.x < 0) g[i] = std::polar(1.0, kz);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Projections

namespace detail {
template <class Pred>
MomentumOperator diagonal_projection(const DislocatedLattice& lat, Pred keep) {
  std::vector<Eigen::Triplet<cplx>> entries;
  for (Index i = 0; i < lat.size(); ++i) {
    if (keep(lat.site(i))) entries.emplace_back(i, i, cplx(1.0, 0.0));
  }
  MomentumOperator op{0.0, SparseC(lat.size(), lat.size()), &lat};
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  return op;
}
}  // namespace detail

/// P: sites whose upward y-bond is cut.
inline MomentumOperator cut_projection(const DislocatedLattice& lat) {
  return detail::diagonal_projection(lat, [&](const Site& s) { return lat.is_cut(s.x, s.y); });
}

/// Sites within Euclidean distance rho of core c. rho = 0 gives p on the axis.
inline MomentumOperator core_projection(const DislocatedLattice& lat, double rho, std::size_t c = 0) {
  return detail::diagonal_projection(lat, [&](const Site& s) { return lat.distance_to_core(s, c) <= rho; });
}

/// Pi_R: sites strictly farther than R from every core.
inline MomentumOperator ring_projection(const DislocatedLattice& lat, double R) {
  return detail::diagonal_projection(lat, [&](const Site& s) { return lat.distance_to_nearest_core(s) > R; });
}

/// The rank-one projection onto a single site.
inline MomentumOperator site_projection(const DislocatedLattice& lat, int x, int y) {
  return detail::diagonal_projection(lat, [&](const Site& s) { return s.x == x && s.y == y; });
}

// ---------------------------------------------------------------------------
// Propagation and Lemma checks

/// Largest graph distance between two sites coupled by a nonzero entry.
inline int propagation(const MomentumOperator& op, double zero_tol = 0.0) {
  const DislocatedLattice& lat = *op.lattice;
  const Index sites = lat.size();
  if (op.dim() % sites != 0) throw std::invalid_argument("propagation: dimension mismatch");
  const Index orbitals = op.dim() / sites;
  int result = 0;
  std::vector<int> cached;
  Index cached_source = -1;
  for (Index col = 0; col < op.matrix.outerSize(); ++col) {
    for (SparseC::InnerIterator it(op.matrix, col); it; ++it) {
      if (std::abs(it.value()) <= zero_tol) continue;
      const Index a = it.row() / orbitals;
      const Index b = col / orbitals;
      if (a == b) continue;
      if (cached_source != b) {
        cached = lat.distances_from(b);
        cached_source = b;
      }
      const int d = cached[static_cast<std::size_t>(a)];
      if (d < 0) throw std::runtime_error("propagation: coupled sites are disconnected");
      result = std::max(result, d);
    }
  }
  return result;
}

/// Commutator [S_x, S_y] minus its closed form (e^{-i kz} - 1)|(0,1)><(-1,0)|,
/// in operator norm, over rows and columns at graph distance > 2 from the
/// truncation boundary.
inline double commutator_check(const DislocatedLattice& lat, double kz) {
  if (lat.is_torus()) throw std::invalid_argument("commutator_check: open single-core lattice required");
  if (lat.half_width() < 3) throw std::invalid_argument("commutator_check: half-width must be at least 3");
  const SparseC sx = shift_x(lat, kz).matrix;
  const SparseC sy = shift_y(lat, kz).matrix;
  SparseC comm = sx * sy - sy * sx;
  CMatrix defect = CMatrix(comm);
  const Index to = lat.index_of(0, 1);
  const Index from = lat.index_of(-1, 0);
  if (to >= 0 && from >= 0) defect(to, from) -= layer_phase(kz, 1) - 1.0;

  std::vector<Index> interior;
  const int limit = lat.half_width() - 2;
  for (Index i = 0; i < lat.size(); ++i) {
    const Site& s = lat.site(i);
    if (std::abs(s.x) <= limit && std::abs(s.y) <= limit) interior.push_back(i);
  }
  const auto n = static_cast<Index>(interior.size());
  CMatrix restricted(n, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r)
      restricted(r, c) = defect(interior[static_cast<std::size_t>(r)], interior[static_cast<std::size_t>(c)]);
  return linalg::opnorm_fallback(restricted);
}

}  // namespace screwdisloc
