#pragma once

// Finite-range tight-binding models, their Bloch Hamiltonians and their lifts
// to the dislocated lattice at fixed z-momentum.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "screwdisloc/kalgebra.hpp"
#include "screwdisloc/lattice.hpp"
#include "screwdisloc/linalg.hpp"
#include "screwdisloc/operators.hpp"

namespace screwdisloc {

using Hop = std::array<int, 3>;

struct Disorder {
  double strength = 0.0;
  std::uint64_t seed = 0;
};

struct HoppingModel {
  std::string name = "custom";
  int orbitals = 1;
  std::map<Hop, CMatrix> hops;  // r -> A_r, including r = 0
  Disorder disorder;

  /// Largest |n| + |m| + |l| over nonzero hops.
  [[nodiscard]] int range() const {
    int r = 0;
    for (const auto& [v, a] : hops) {
      if (a.norm() > 0.0) r = std::max(r, std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]));
    }
    return r;
  }
  /// Largest |n| + |m| over nonzero hops: the reach within one layer.
  [[nodiscard]] int planar_range() const {
    int r = 0;
    for (const auto& [v, a] : hops) {
      if (a.norm() > 0.0) r = std::max(r, std::abs(v[0]) + std::abs(v[1]));
    }
    return r;
  }

  [[nodiscard]] CMatrix hop(const Hop& r) const {
    const auto it = hops.find(r);
    return it == hops.end() ? CMatrix::Zero(orbitals, orbitals) : it->second;
  }

  /// Largest violation of A_{-r} = A_r^dagger.
  [[nodiscard]] double hermiticity_defect() const {
    double worst = 0.0;
    for (const auto& [r, a] : hops) {
      const CMatrix partner = hop(Hop{-r[0], -r[1], -r[2]});
      worst = std::max(worst, (partner - a.adjoint()).cwiseAbs().maxCoeff());
    }
    return worst;
  }

  void validate() const {
    if (orbitals < 1) throw std::invalid_argument("model: orbitals must be positive");
    for (const auto& [r, a] : hops) {
      if (a.rows() != orbitals || a.cols() != orbitals) {
        throw std::invalid_argument("model: hop matrix has the wrong shape");
      }
    }
    if (hermiticity_defect() > 1e-12) throw std::invalid_argument("model: hops violate A_{-r} = A_r^dagger");
    if (disorder.strength < 0.0) throw std::invalid_argument("model: negative disorder strength");
  }
};

namespace pauli {
inline CMatrix id() { return CMatrix::Identity(2, 2); }
inline CMatrix x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline CMatrix y() {
  CMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
inline CMatrix z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

enum class Plane { xy, yz, zx };

inline std::string to_string(Plane p) {
  switch (p) {
    case Plane::xy: return "xy";
    case Plane::yz: return "yz";
    case Plane::zx: return "zx";
  }
  return "?";
}

inline Plane parse_plane(const std::string& s) {
  if (s == "xy") return Plane::xy;
  if (s == "yz") return Plane::yz;
  if (s == "zx") return Plane::zx;
  throw std::invalid_argument("unknown plane: " + s);
}

/// The two axes spanning a plane, in orientation order.
inline std::array<int, 2> plane_axes(Plane p) {
  switch (p) {
    case Plane::xy: return {0, 1};
    case Plane::yz: return {1, 2};
    case Plane::zx: return {2, 0};
  }
  return {0, 1};
}

/// Stack of two-band Chern insulator layers lying in `plane`.
inline HoppingModel qwz_stack(double m, Plane plane) {
  for (double bad : {0.0, 2.0, -2.0}) {
    if (std::abs(m - bad) < 1e-12) throw std::invalid_argument("qwz_stack: gapless mass");
  }
  HoppingModel model;
  model.name = "qwz_" + to_string(plane);
  model.orbitals = 2;
  const cplx i(0.0, 1.0);
  const auto [a1, a2] = plane_axes(plane);
  Hop e1{0, 0, 0}, e2{0, 0, 0}, m1{0, 0, 0}, m2{0, 0, 0};
  e1[static_cast<std::size_t>(a1)] = 1;
  m1[static_cast<std::size_t>(a1)] = -1;
  e2[static_cast<std::size_t>(a2)] = 1;
  m2[static_cast<std::size_t>(a2)] = -1;
  model.hops[Hop{0, 0, 0}] = m * pauli::z();
  model.hops[e1] = 0.5 * (pauli::z() - i * pauli::x());
  model.hops[m1] = 0.5 * (pauli::z() + i * pauli::x());
  model.hops[e2] = 0.5 * (pauli::z() - i * pauli::y());
  model.hops[m2] = 0.5 * (pauli::z() + i * pauli::y());
  return model;
}

/// Atomic insulator gap * diag(1, -1, 1, ...).
inline HoppingModel trivial(int orbitals, double gap) {
  if (orbitals < 1) throw std::invalid_argument("trivial: orbitals must be positive");
  if (gap <= 0.0) throw std::invalid_argument("trivial: gap must be positive");
  HoppingModel model;
  model.name = "trivial";
  model.orbitals = orbitals;
  CMatrix onsite = CMatrix::Zero(orbitals, orbitals);
  for (int k = 0; k < orbitals; ++k) onsite(k, k) = (k % 2 == 0) ? gap : -gap;
  model.hops[Hop{0, 0, 0}] = onsite;
  return model;
}

/// Complex conjugate of every hop: H(k) -> H(-k)^*.
inline HoppingModel conjugate(const HoppingModel& model) {
  HoppingModel out = model;
  out.name = model.name + "_conj";
  for (auto& [r, a] : out.hops) a = a.conjugate().eval();
  return out;
}

/// Direct sum of two models (block-diagonal orbitals).
inline HoppingModel direct_sum(const HoppingModel& a, const HoppingModel& b) {
  HoppingModel out;
  out.name = a.name + "+" + b.name;
  out.orbitals = a.orbitals + b.orbitals;
  auto place = [&](const HoppingModel& m, int offset) {
    for (const auto& [r, h] : m.hops) {
      auto it = out.hops.find(r);
      if (it == out.hops.end()) it = out.hops.emplace(r, CMatrix::Zero(out.orbitals, out.orbitals)).first;
      it->second.block(offset, offset, m.orbitals, m.orbitals) += h;
    }
  };
  place(a, 0);
  place(b, a.orbitals);
  return out;
}

/// Conjugates every hop by a fixed unitary.
inline HoppingModel rotate_orbitals(const HoppingModel& model, const CMatrix& u) {
  HoppingModel out = model;
  for (auto& [r, a] : out.hops) a = (u * a * u.adjoint()).eval();
  return out;
}

/// Model in the coordinates of a frame: A'_{r'} = A_{T r'}.
inline HoppingModel in_frame(const HoppingModel& model, const IntMat3& T) {
  if (T == identity3()) return model;
  const IntMat3 inv = inverse_unimodular(T);
  HoppingModel out = model;
  out.hops.clear();
  for (const auto& [r, a] : model.hops) {
    const IntVec3 v = apply3(inv, IntVec3{r[0], r[1], r[2]});
    out.hops[Hop{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])}] = a;
  }
  return out;
}

/// sum_r A_r e^{i k.r}, symmetrized.
inline linalg::HermitianMatrix bloch(const HoppingModel& model, const std::array<double, 3>& k) {
  CMatrix h = CMatrix::Zero(model.orbitals, model.orbitals);
  for (const auto& [r, a] : model.hops) {
    const double phase = k[0] * r[0] + k[1] * r[1] + k[2] * r[2];
    h += a * std::polar(1.0, phase);
  }
  return linalg::HermitianMatrix(h);
}

/// Onsite disorder at planar site (x, y): uniform in [-w, w] per orbital. The
/// stream depends only on (seed, x, y), so the potential is the same in every
/// layer and on every truncation.
inline std::vector<double> onsite_disorder(const Disorder& d, int orbitals, int x, int y) {
  std::vector<double> out(static_cast<std::size_t>(orbitals), 0.0);
  if (d.strength == 0.0) return out;
  std::seed_seq seq{static_cast<std::uint32_t>(d.seed & 0xffffffffu), static_cast<std::uint32_t>(d.seed >> 32),
                    static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> dist(-d.strength, d.strength);
  for (auto& v : out) v = dist(rng);
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

/// H(kz) on a truncation together with its exact kz-derivative. Basis index
/// is site * orbitals + orbital; removed core sites (if any) come last.
struct MomentumSlice {
  double kz = 0.0;
  int orbitals = 1;
  linalg::HermitianMatrix H;
  SparseC dH;
  const DislocatedLattice* lattice = nullptr;
  Index retained_dim = 0;  // rows belonging to retained lattice sites

  [[nodiscard]] Index dim() const { return H.dim(); }
};

namespace detail {

/// Hops with r > 0 in lexicographic order: one representative per +-r pair.
inline bool canonical_half(const Hop& r) { return r > Hop{0, 0, 0}; }

struct Assembly {
  SparseC H;
  SparseC dH;
};

inline Assembly assemble_sparse(const HoppingModel& model, const DislocatedLattice& lat, double kz, bool with_cut) {
  const int N = model.orbitals;
  const Index dim = lat.size() * N;
  std::vector<Eigen::Triplet<cplx>> h, dh;
  const CMatrix onsite = model.hop(Hop{0, 0, 0});
  const CMatrix onsite_sym = 0.5 * (onsite + onsite.adjoint());
  for (Index s = 0; s < lat.size(); ++s) {
    const Site& site = lat.site(s);
    const std::vector<double> w = onsite_disorder(model.disorder, N, site.x, site.y);
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) {
        cplx v = onsite_sym(a, b);
        if (a == b) v += w[static_cast<std::size_t>(a)];
        if (v != cplx(0.0)) h.emplace_back(s * N + a, s * N + b, v);
      }
    }
  }
  for (const auto& [r, A] : model.hops) {
    if (!canonical_half(r) || A.norm() == 0.0) continue;
    for (Index j = 0; j < lat.size(); ++j) {
      const Walk w = walk(lat, j, r[0], r[1]);
      if (w.target < 0) continue;
      const int nu = with_cut ? w.layer_shift : 0;
      const double p = static_cast<double>(r[2] - nu);
      const cplx phase = std::polar(1.0, kz * p);
      const cplx dphase = cplx(0.0, p) * phase;
      const Index i = w.target;
      for (int a = 0; a < N; ++a) {
        for (int b = 0; b < N; ++b) {
          const cplx v = A(a, b);
          if (v == cplx(0.0)) continue;
          // A X_r e^{i kz l} and its adjoint
          h.emplace_back(i * N + a, j * N + b, v * phase);
          h.emplace_back(j * N + b, i * N + a, std::conj(v * phase));
          if (p != 0.0) {
            dh.emplace_back(i * N + a, j * N + b, v * dphase);
            dh.emplace_back(j * N + b, i * N + a, std::conj(v * dphase));
          }
        }
      }
    }
  }
  Assembly out{SparseC(dim, dim), SparseC(dim, dim)};
  out.H.setFromTriplets(h.begin(), h.end());
  out.dH.setFromTriplets(dh.begin(), dh.end());
  return out;
}

inline void check_range(const HoppingModel& model, const DislocatedLattice& lat) {
  if (2 * model.planar_range() > lat.half_width()) {
    throw std::invalid_argument("assemble: model range exceeds half the truncation half-width");
  }
}

}  // namespace detail

/// Lift of the model to an R = 0 truncation: each hop A_(n,m,l) contributes
/// A (x) S_x^n S_y^m e^{i kz l}, summed over one representative per +-r pair
/// together with its adjoint.
inline MomentumSlice assemble_dislocated(const HoppingModel& model, const DislocatedLattice& lat, double kz);

/// Compression to the sites outside the core plus the identity on the core:
/// Pi_R H Pi_R + (1 - Pi_R).
inline MomentumSlice assemble_core_removed(const HoppingModel& model, const DislocatedLattice& lat, double kz) {
  const DislocatedLattice full = lat.without_core_removal();
  const HoppingModel framed = in_frame(model, lat.frame().T);
  framed.validate();
  detail::check_range(framed, full);
  const detail::Assembly a = detail::assemble_sparse(framed, full, kz, true);
  const int N = model.orbitals;
  // full index -> new index: retained sites first in lattice order, then removed
  std::vector<Index> map(static_cast<std::size_t>(full.size()), -1);
  std::vector<bool> retained(static_cast<std::size_t>(full.size()), false);
  for (Index s = 0; s < lat.size(); ++s) {
    const Site& site = lat.site(s);
    const Index f = full.index_of(site.x, site.y);
    map[static_cast<std::size_t>(f)] = s;
    retained[static_cast<std::size_t>(f)] = true;
  }
  Index next = lat.size();
  for (const Site& site : lat.removed_sites()) {
    map[static_cast<std::size_t>(full.index_of(site.x, site.y))] = next++;
  }
  const Index dim = full.size() * N;
  auto remap = [&](const SparseC& m, bool identity_on_removed) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (Index col = 0; col < m.outerSize(); ++col) {
      const Index sc = col / N;
      if (!retained[static_cast<std::size_t>(sc)]) continue;
      for (SparseC::InnerIterator it(m, col); it; ++it) {
        const Index sr = it.row() / N;
        if (!retained[static_cast<std::size_t>(sr)]) continue;
        t.emplace_back(map[static_cast<std::size_t>(sr)] * N + it.row() % N,
                       map[static_cast<std::size_t>(sc)] * N + col % N, it.value());
      }
    }
    if (identity_on_removed) {
      for (Index k = lat.size() * N; k < dim; ++k) t.emplace_back(k, k, cplx(1.0, 0.0));
    }
    SparseC out(dim, dim);
    out.setFromTriplets(t.begin(), t.end());
    return out;
  };
  MomentumSlice slice;
  slice.kz = kz;
  slice.orbitals = N;
  slice.H = linalg::HermitianMatrix(remap(a.H, true));
  slice.dH = remap(a.dH, false);
  slice.lattice = &lat;
  slice.retained_dim = lat.size() * N;
  return slice;
}

inline MomentumSlice assemble_dislocated(const HoppingModel& model, const DislocatedLattice& lat, double kz) {
  if (lat.core_removal_radius() > 0.0) return assemble_core_removed(model, lat, kz);
  const HoppingModel framed = in_frame(model, lat.frame().T);
  framed.validate();
  detail::check_range(framed, lat);
  const detail::Assembly a = detail::assemble_sparse(framed, lat, kz, true);
  MomentumSlice slice;
  slice.kz = kz;
  slice.orbitals = model.orbitals;
  slice.H = linalg::HermitianMatrix(a.H);
  slice.dH = a.dH;
  slice.lattice = &lat;
  slice.retained_dim = slice.H.dim();
  return slice;
}

/// The same truncation with the cut ignored: the undislocated Hamiltonian.
inline MomentumSlice assemble_flat(const HoppingModel& model, const DislocatedLattice& lat, double kz) {
  const HoppingModel framed = in_frame(model, lat.frame().T);
  framed.validate();
  detail::check_range(framed, lat);
  const detail::Assembly a = detail::assemble_sparse(framed, lat, kz, false);
  MomentumSlice slice;
  slice.kz = kz;
  slice.orbitals = model.orbitals;
  slice.H = linalg::HermitianMatrix(a.H);
  slice.dH = a.dH;
  slice.lattice = &lat;
  slice.retained_dim = slice.H.dim();
  return slice;
}

// ---------------------------------------------------------------------------
// Symmetries

/// Antiunitary symmetries are U K; the sign is the square (U U^* = sign).
struct AntiUnitary {
  CMatrix U;
  int sign = 1;
};

struct SymmetryData {
  kalgebra::AZClass label = kalgebra::AZClass::A;
  std::optional<AntiUnitary> T;  // U H(k)^* U^dagger = H(-k)
  std::optional<AntiUnitary> C;  // U H(k)^* U^dagger = -H(-k)
  std::optional<CMatrix> S;      // S H(k) S^dagger = -H(k)
};

struct SymmetryReport {
  bool consistent_with_class = true;  // symmetry content matches the label
  bool relations_hold = true;         // squares and S ~ C T
  bool hamiltonian_symmetric = true;  // the k-space relations on the grid
  double worst_defect = 0.0;
  std::vector<std::string> failures;

  [[nodiscard]] bool passed() const { return consistent_with_class && relations_hold && hamiltonian_symmetric; }
};

inline SymmetryReport check_symmetry(const HoppingModel& model, const SymmetryData& sym, int grid = 8,
                                     double tol = 1e-12) {
  SymmetryReport rep;
  const kalgebra::AZSignature want = kalgebra::signature(sym.label);
  const int N = model.orbitals;
  auto fail = [&](std::string what) { rep.failures.push_back(std::move(what)); };

  if ((want.t_square != 0) != sym.T.has_value()) {
    rep.consistent_with_class = false;
    fail("time reversal presence does not match the class");
  }
  if ((want.c_square != 0) != sym.C.has_value()) {
    rep.consistent_with_class = false;
    fail("particle-hole presence does not match the class");
  }
  const bool chiral_given = sym.S.has_value() || (sym.T && sym.C);
  if (want.chiral != chiral_given) {
    rep.consistent_with_class = false;
    fail("chiral presence does not match the class");
  }
  auto check_square = [&](const std::optional<AntiUnitary>& g, int expected, const char* name) {
    if (!g) return;
    if (g->U.rows() != N || g->U.cols() != N) {
      rep.relations_hold = false;
      fail(std::string(name) + " has the wrong shape");
      return;
    }
    const double unit = (g->U * g->U.adjoint() - CMatrix::Identity(N, N)).cwiseAbs().maxCoeff();
    const double sq = (g->U * g->U.conjugate() - static_cast<double>(g->sign) * CMatrix::Identity(N, N))
                          .cwiseAbs()
                          .maxCoeff();
    if (unit > tol || sq > tol) {
      rep.relations_hold = false;
      fail(std::string(name) + " is not unitary or its square differs from the declared sign");
    }
    if (expected != 0 && g->sign != expected) {
      rep.consistent_with_class = false;
      fail(std::string(name) + " square does not match the class");
    }
  };
  check_square(sym.T, want.t_square, "T");
  check_square(sym.C, want.c_square, "C");

  std::optional<CMatrix> chiral = sym.S;
  if (!chiral && sym.T && sym.C) chiral = (sym.C->U * sym.T->U.conjugate()).eval();
  if (chiral) {
    const CMatrix s2 = *chiral * *chiral;
    const cplx lambda = s2(0, 0);
    if (std::abs(std::abs(lambda) - 1.0) > tol || (s2 - lambda * CMatrix::Identity(N, N)).cwiseAbs().maxCoeff() > tol) {
      rep.relations_hold = false;
      fail("S^2 is not proportional to the identity");
    }
    if (sym.S && sym.T && sym.C) {
      const CMatrix ct = sym.C->U * sym.T->U.conjugate();
      // S = C T up to a phase
      const cplx phase = (ct.adjoint() * *sym.S).trace() / static_cast<double>(N);
      if ((*sym.S - phase * ct).cwiseAbs().maxCoeff() > 1e-10) {
        rep.relations_hold = false;
        fail("S is not proportional to C T");
      }
    }
  }

  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      for (int c = 0; c < grid; ++c) {
        const std::array<double, 3> k{kTwoPi * (a + 0.37) / grid, kTwoPi * (b + 0.21) / grid,
                                      kTwoPi * (c + 0.13) / grid};
        const CMatrix h = bloch(model, k).matrix();
        const CMatrix hm = bloch(model, {-k[0], -k[1], -k[2]}).matrix();
        if (sym.T) {
          const double d = (sym.T->U * h.conjugate() * sym.T->U.adjoint() - hm).cwiseAbs().maxCoeff();
          rep.worst_defect = std::max(rep.worst_defect, d);
        }
        if (sym.C) {
          const double d = (sym.C->U * h.conjugate() * sym.C->U.adjoint() + hm).cwiseAbs().maxCoeff();
          rep.worst_defect = std::max(rep.worst_defect, d);
        }
        if (chiral) {
          const double d = (*chiral * h * chiral->adjoint() + h).cwiseAbs().maxCoeff();
          rep.worst_defect = std::max(rep.worst_defect, d);
        }
      }
    }
  }
  if (rep.worst_defect > tol) {
    rep.hamiltonian_symmetric = false;
    fail("Bloch Hamiltonian violates a declared symmetry");
  }
  return rep;
}

}  // namespace screwdisloc
