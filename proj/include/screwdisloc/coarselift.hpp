#pragma once

// Lifting finite-propagation kernels from the flat square lattice to the
// dislocated one. A kernel entry k(a, b) is copied to every lift of a that is
// within the propagation budget of the lift of b in the covering graph; at
// fixed kz the lifts are labelled by their layer shift nu and summed with
// phase e^{-i kz nu}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "screwdisloc/lattice.hpp"
#include "screwdisloc/linalg.hpp"
#include "screwdisloc/operators.hpp"

namespace screwdisloc::coarselift {

/// Operator on the flat box |x|, |y| <= L, sites in lexicographic (x, y) order,
/// `orbitals` components per site.
struct FlatKernel {
  int L = 2;
  int orbitals = 1;
  SparseC matrix;

  [[nodiscard]] int width() const { return 2 * L + 1; }
  [[nodiscard]] Index sites() const { return static_cast<Index>(width()) * width(); }
  [[nodiscard]] Index site_index(int x, int y) const { return static_cast<Index>(x + L) * width() + (y + L); }
  [[nodiscard]] std::pair<int, int> site_at(Index i) const {
    return {static_cast<int>(i / width()) - L, static_cast<int>(i % width()) - L};
  }

  /// Largest l1 distance between sites coupled by a nonzero entry.
  [[nodiscard]] int propagation() const {
    int r = 0;
    for (Index col = 0; col < matrix.outerSize(); ++col) {
      for (SparseC::InnerIterator it(matrix, col); it; ++it) {
        if (it.value() == cplx(0.0)) continue;
        const auto [xa, ya] = site_at(it.row() / orbitals);
        const auto [xb, yb] = site_at(col / orbitals);
        r = std::max(r, std::abs(xa - xb) + std::abs(ya - yb));
      }
    }
    return r;
  }

  [[nodiscard]] FlatKernel adjoint() const {
    FlatKernel k = *this;
    k.matrix = SparseC(matrix.adjoint());
    return k;
  }
};

inline FlatKernel operator*(const FlatKernel& a, const FlatKernel& b) {
  if (a.L != b.L || a.orbitals != b.orbitals) throw std::invalid_argument("FlatKernel: shape mismatch");
  FlatKernel k = a;
  k.matrix = (a.matrix * b.matrix).pruned();
  return k;
}

inline FlatKernel flat_identity(int L, int orbitals = 1) {
  FlatKernel k;
  k.L = L;
  k.orbitals = orbitals;
  k.matrix = SparseC(k.sites() * orbitals, k.sites() * orbitals);
  k.matrix.setIdentity();
  return k;
}

/// Translation by (dx, dy); bonds leaving the box are dropped.
inline FlatKernel flat_translation(int L, int dx, int dy) {
  FlatKernel k;
  k.L = L;
  std::vector<Eigen::Triplet<cplx>> t;
  for (int x = -L; x <= L; ++x) {
    for (int y = -L; y <= L; ++y) {
      const int tx = x + dx, ty = y + dy;
      if (std::abs(tx) > L || std::abs(ty) > L) continue;
      t.emplace_back(k.site_index(tx, ty), k.site_index(x, y), cplx(1.0, 0.0));
    }
  }
  k.matrix = SparseC(k.sites(), k.sites());
  k.matrix.setFromTriplets(t.begin(), t.end());
  return k;
}

/// Kernel with independent complex Gaussian entries on every pair within l1
/// distance R.
template <class Rng>
FlatKernel random_kernel(int L, int R, Rng& rng) {
  FlatKernel k;
  k.L = L;
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int x = -L; x <= L; ++x) {
    for (int y = -L; y <= L; ++y) {
      for (int dx = -R; dx <= R; ++dx) {
        for (int dy = -R + std::abs(dx); dy <= R - std::abs(dx); ++dy) {
          const int tx = x + dx, ty = y + dy;
          if (std::abs(tx) > L || std::abs(ty) > L) continue;
          const double re = g(rng);
          const double im = g(rng);
          t.emplace_back(k.site_index(tx, ty), k.site_index(x, y), cplx(re, im));
        }
      }
    }
  }
  k.matrix = SparseC(k.sites(), k.sites());
  k.matrix.setFromTriplets(t.begin(), t.end());
  return k;
}

/// Covering states (site, nu) within `budget` steps of (source, 0), with
/// their graph distance.
inline std::map<std::pair<Index, int>, int> covering_ball(const DislocatedLattice& lat, Index source, int budget) {
  std::map<std::pair<Index, int>, int> dist;
  std::queue<std::pair<Index, int>> queue;
  dist[{source, 0}] = 0;
  queue.push({source, 0});
  static constexpr int kSteps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (!queue.empty()) {
    const auto state = queue.front();
    queue.pop();
    const int d = dist[state];
    if (d == budget) continue;
    for (const auto& s : kSteps) {
      const Neighbor nb = lat.step(state.first, s[0], s[1]);
      if (nb.site < 0) continue;
      const std::pair<Index, int> next{nb.site, state.second + nb.layer_shift};
      if (dist.contains(next)) continue;
      dist[next] = d + 1;
      queue.push(next);
    }
  }
  return dist;
}

/// Lift of K at momentum kz: entry (a, b) is k(a, b) summed over the lifts
/// (a, nu) at covering distance <= budget from (b, 0), each with e^{-i kz nu}.
/// The budget defaults to the kernel's propagation.
inline MomentumOperator lift(const FlatKernel& K, const DislocatedLattice& lat, double kz, int budget = -1) {
  if (lat.is_torus() || lat.core_removal_radius() > 0.0) {
    throw std::invalid_argument("lift: open single-core lattice without core removal required");
  }
  if (lat.half_width() != K.L) throw std::invalid_argument("lift: kernel box and lattice differ");
  if (budget < 0) budget = K.propagation();
  const int N = K.orbitals;
  std::vector<Eigen::Triplet<cplx>> t;
  // lattice order equals the flat box order when nothing is removed
  for (Index b = 0; b < lat.size(); ++b) {
    const auto ball = covering_ball(lat, b, budget);
    std::map<Index, cplx> phase;
    for (const auto& [state, d] : ball) phase[state.first] += layer_phase(kz, state.second);
    for (int ob = 0; ob < N; ++ob) {
      const Index col = b * N + ob;
      for (SparseC::InnerIterator it(K.matrix, col); it; ++it) {
        const Index a = it.row() / N;
        const auto p = phase.find(a);
        if (p == phase.end()) continue;
        t.emplace_back(it.row(), col, it.value() * p->second);
      }
    }
  }
  MomentumOperator op{kz, SparseC(lat.size() * N, lat.size() * N), &lat};
  op.matrix.setFromTriplets(t.begin(), t.end());
  return op;
}

struct NormCheck {
  double lifted = 0.0;
  double bound = 0.0;
  [[nodiscard]] bool holds() const { return lifted <= bound * (1.0 + 1e-8); }
};

/// ||lift(K)|| against (2 ceil(R) + 1)^2 ||K||.
inline NormCheck norm_bound_check(const FlatKernel& K, const DislocatedLattice& lat, double kz) {
  const int R = K.propagation();
  NormCheck c;
  c.lifted = linalg::opnorm(lift(K, lat, kz, R).matrix);
  const double side = 2.0 * R + 1.0;
  c.bound = side * side * linalg::opnorm(K.matrix);
  return c;
}

struct DefectReport {
  double norm = 0.0;           // max |entry| of the defect
  double support_radius = 0.0; // largest distance from the axis of a touched site
  int budget = 0;              // R + S
};

/// D = lift(K) lift(L) - lift(K L) with budget R + S, and how far from the
/// axis its support reaches.
inline DefectReport multiplicativity_defect(const FlatKernel& K, const FlatKernel& Lk, const DislocatedLattice& lat,
                                            double kz, double zero_tol = 1e-12) {
  const int R = K.propagation();
  const int S = Lk.propagation();
  if (R + S >= lat.half_width()) throw std::invalid_argument("multiplicativity_defect: R + S must be below L");
  const SparseC prod = lift(K, lat, kz, R).matrix * lift(Lk, lat, kz, S).matrix;
  const SparseC direct = lift(K * Lk, lat, kz, R + S).matrix;
  const SparseC D = (prod - direct).pruned();
  DefectReport rep;
  rep.budget = R + S;
  const int N = K.orbitals;
  for (Index col = 0; col < D.outerSize(); ++col) {
    for (SparseC::InnerIterator it(D, col); it; ++it) {
      const double v = std::abs(it.value());
      if (v <= zero_tol) continue;
      rep.norm = std::max(rep.norm, v);
      for (Index s : {it.row() / N, col / N}) {
        rep.support_radius = std::max(rep.support_radius, lat.distance_to_core(lat.site(s), 0));
      }
    }
  }
  return rep;
}

}  // namespace screwdisloc::coarselift
