#pragma once

// Spectra of the dislocated Hamiltonian around the kz circle and the three
// estimators of the dislocation index: core-filtered spectral flow, the
// winding of the boundary unitary against a core projection, and the
// dislocation Hall conductance.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "screwdisloc/errors.hpp"
#include "screwdisloc/invariants.hpp"
#include "screwdisloc/lattice.hpp"
#include "screwdisloc/linalg.hpp"
#include "screwdisloc/models.hpp"
#include "screwdisloc/parallel.hpp"

namespace screwdisloc {

/// Odd cubic clamped to [-1, 1]; equal to +-1 beyond +-eps.
struct ChiFunction {
  double eps = 0.5;

  [[nodiscard]] double operator()(double x) const {
    if (x <= -eps) return -1.0;
    if (x >= eps) return 1.0;
    return x * (3.0 * eps * eps - x * x) / (2.0 * eps * eps * eps);
  }
  [[nodiscard]] double derivative(double x) const {
    if (std::abs(x) >= eps) return 0.0;
    return 3.0 * (eps * eps - x * x) / (2.0 * eps * eps * eps);
  }
};

/// -exp(-pi i chi(E - mu)) and its derivative in E.
inline cplx boundary_phase(const ChiFunction& chi, double e) {
  return -std::exp(cplx(0.0, -kPi * chi(e)));
}
inline cplx boundary_phase_derivative(const ChiFunction& chi, double e) {
  return cplx(0.0, kPi * chi.derivative(e)) * std::exp(cplx(0.0, -kPi * chi(e)));
}

/// U = -exp(-pi i chi(H - mu)) by functional calculus.
inline CMatrix boundary_unitary(const MomentumSlice& slice, const ChiFunction& chi, double mu = 0.0) {
  return linalg::func_calc(slice.H, [&](double e) { return boundary_phase(chi, e - mu); });
}

struct KzSlice {
  double kz = 0.0;
  RVector energies;                  // full spectrum, ascending
  Index first = 0;                   // first in-gap state
  CMatrix vectors;                   // in-gap eigenvectors
  SparseC dH;                        // dH/dkz
  std::vector<RVector> core_weights; // per core, weight of every state within rho

  [[nodiscard]] Index in_gap_count() const { return vectors.cols(); }
};

struct SpectralData {
  std::vector<double> kz_grid;
  std::vector<KzSlice> slices;
  double gap_lo = -1.0;  // in-gap window (E_lo, E_hi): bulk gap shrunk by the disorder strength
  double gap_hi = 1.0;
  double mu = 0.0;
  double rho = 4.0;
  int orbitals = 1;
  DislocatedLattice lattice;

  [[nodiscard]] std::size_t core_count() const { return lattice.cores().size(); }

  /// Basis rows of retained sites within rho of core c.
  [[nodiscard]] std::vector<Index> core_rows(double radius, std::size_t c = 0) const {
    std::vector<Index> rows;
    for (Index s : lattice.sites_near_core(radius, c)) {
      for (int a = 0; a < orbitals; ++a) rows.push_back(s * orbitals + a);
    }
    return rows;
  }

  /// Half-width of the gap measured from mu.
  [[nodiscard]] double half_gap() const { return std::min(mu - gap_lo, gap_hi - mu); }

  /// Mean spacing of in-gap levels.
  [[nodiscard]] double in_gap_spacing() const {
    double count = 0.0;
    for (const auto& s : slices) count += static_cast<double>(s.in_gap_count());
    count /= static_cast<double>(std::max<std::size_t>(slices.size(), 1));
    if (count == 0.0) return std::numeric_limits<double>::infinity();
    return (gap_hi - gap_lo) / count;
  }
};

inline double kz_point(std::size_t j, std::size_t n) {
  return kTwoPi * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
}

struct SweepOptions {
  int kz_count = 64;
  double mu = 0.0;
  double rho = 4.0;
  unsigned threads = 1;
  int gap_grid = 16;
  std::optional<std::pair<double, double>> gap;  // overrides the Bloch estimate
};

/// Diagonalizes H(kz) on the midpoint grid kz_j = 2 pi (j + 1/2) / kz_count.
/// Midpoints keep 0 and pi off the grid: a particle-hole symmetry pins zero
/// crossings to those momenta, and a crossing on a grid point has no side.
/// Eigenvectors are kept only inside the gap; core weights are recorded for
/// every state.
inline SpectralData kz_sweep(const HoppingModel& model, const DislocatedLattice& lattice, const SweepOptions& opt) {
  if (opt.kz_count < 16) throw std::invalid_argument("kz_sweep: kz_count must be at least 16");
  if (opt.rho < 0.0) throw std::invalid_argument("kz_sweep: negative core radius");
  SpectralData data;
  data.mu = opt.mu;
  data.rho = opt.rho;
  data.orbitals = model.orbitals;
  data.lattice = lattice;
  auto [lo, hi] = opt.gap ? *opt.gap : bulk_gap(model, opt.mu, opt.gap_grid);
  lo += model.disorder.strength;
  hi -= model.disorder.strength;
  if (!(lo < opt.mu && opt.mu < hi)) throw GapClosureError("kz_sweep: disorder closes the bulk gap");
  data.gap_lo = lo;
  data.gap_hi = hi;

  std::vector<std::vector<Index>> probes;
  for (std::size_t c = 0; c < data.core_count(); ++c) probes.push_back(data.core_rows(opt.rho, c));

  const auto n = static_cast<std::size_t>(opt.kz_count);
  data.kz_grid.resize(n);
  data.slices.resize(n);
  linalg::use_single_threaded_blas();
  parallel_for(n, opt.threads, [&](std::size_t j) {
    const double kz = kz_point(j, n);
    const MomentumSlice slice = assemble_dislocated(model, data.lattice, kz);
    linalg::WindowedEigen we;
    try {
      we = linalg::eigh_windowed(slice.H, lo, hi, probes);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at kz=" + std::to_string(kz));
    }
    KzSlice& out = data.slices[j];
    out.kz = kz;
    out.energies = std::move(we.values);
    out.first = we.first;
    out.vectors = std::move(we.vectors);
    out.dH = slice.dH;
    out.core_weights = std::move(we.probe_weights);
    data.kz_grid[j] = kz;
  });
  return data;
}

// ---------------------------------------------------------------------------
// Spectral flow

struct FlowOptions {
  double rho = 4.0;
  double weight_threshold = 0.5;
  double degeneracy_tol = 1e-8;
  double min_overlap = 0.5;
};

struct Crossing {
  std::size_t interval = 0;  // between kz_grid[interval] and the next point
  int direction = 0;         // +1 downward through mu, -1 upward
  int multiplicity = 1;
  double energy_before = 0.0;
  double energy_after = 0.0;
  std::vector<double> core_weight;  // per core, averaged over both endpoints
};

struct FlowResult {
  std::vector<long long> per_core;  // filtered index per core
  long long unfiltered = 0;
  std::vector<Crossing> crossings;
};

namespace detail {

struct Cluster {
  Index begin = 0;  // local in-gap indices [begin, end)
  Index end = 0;
  double energy = 0.0;
  [[nodiscard]] Index size() const { return end - begin; }
};

inline std::vector<Cluster> clusters_of(const KzSlice& s, double tol) {
  std::vector<Cluster> out;
  const Index m = s.in_gap_count();
  Index i = 0;
  while (i < m) {
    Index j = i + 1;
    while (j < m && s.energies[s.first + j] - s.energies[s.first + j - 1] < tol) ++j;
    Cluster c{i, j, 0.0};
    for (Index k = i; k < j; ++k) c.energy += s.energies[s.first + k];
    c.energy /= static_cast<double>(j - i);
    out.push_back(c);
    i = j;
  }
  return out;
}

/// Core weight of each in-gap state from the stored eigenvectors.
inline RVector in_gap_weights(const KzSlice& s, const std::vector<Index>& rows) {
  RVector w = RVector::Zero(s.in_gap_count());
  for (Index r : rows) w += s.vectors.row(r).cwiseAbs2().transpose();
  return w;
}

inline double cluster_mean(const RVector& w, const Cluster& c) {
  return w.segment(c.begin, c.size()).mean();
}

inline Index count_below(const RVector& e, double mu) {
  return static_cast<Index>(std::lower_bound(e.data(), e.data() + e.size(), mu) - e.data());
}

}  // namespace detail

/// Signed count of branches crossing mu around the kz circle, +1 for each
/// branch moving down through mu, weighted by degeneracy.
///
/// Levels closer than degeneracy_tol form clusters. Between neighbouring kz
/// points, clusters are joined when their eigenvector overlap is significant,
/// and each connected component must map a subspace onto one of equal
/// dimension. A component whose count of levels below mu changes carries a
/// crossing; it is attributed to core c when the mean weight of its states
/// within rho of the core exceeds the threshold.
inline FlowResult spectral_flow_detail(const SpectralData& data, const FlowOptions& opt = {}) {
  const std::size_t n = data.slices.size();
  if (n < 2) throw std::invalid_argument("spectral_flow: need at least two kz points");
  const double mu = data.mu;
  const double track = 0.5 * data.half_gap();
  const std::size_t cores = data.core_count();

  std::vector<std::vector<Index>> rows(cores);
  for (std::size_t c = 0; c < cores; ++c) rows[c] = data.core_rows(opt.rho, c);
  std::vector<std::vector<detail::Cluster>> clusters(n);
  std::vector<std::vector<RVector>> weights(n, std::vector<RVector>(cores));
  for (std::size_t i = 0; i < n; ++i) {
    clusters[i] = detail::clusters_of(data.slices[i], opt.degeneracy_tol);
    for (std::size_t c = 0; c < cores; ++c) weights[i][c] = detail::in_gap_weights(data.slices[i], rows[c]);
  }
  auto fail = [](const std::string& why, double kz) {
    throw AmbiguousMatchingError("spectral_flow: " + why + " near kz=" + std::to_string(kz) +
                                 "; refine the kz grid");
  };

  FlowResult result;
  result.per_core.assign(cores, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const KzSlice& a = data.slices[i];
    const KzSlice& b = data.slices[j];
    const auto& ca = clusters[i];
    const auto& cb = clusters[j];
    const Index below_a = detail::count_below(a.energies, mu);
    const Index below_b = detail::count_below(b.energies, mu);
    bool near = false;
    for (const auto& c : ca) near |= std::abs(c.energy - mu) < track;
    if (!near) {
      if (below_a != below_b) fail("a level crossed mu outside the tracking window", a.kz);
      continue;
    }
    const RMatrix overlap2 = (a.vectors.adjoint() * b.vectors).cwiseAbs2();
    // union-find over clusters: [0, |ca|) at kz_i, then [|ca|, |ca| + |cb|) at kz_{i+1}
    const std::size_t na = ca.size();
    std::vector<std::size_t> parent(na + cb.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t p = 0; p < na; ++p) {
      for (std::size_t q = 0; q < cb.size(); ++q) {
        const double s = overlap2.block(ca[p].begin, cb[q].begin, ca[p].size(), cb[q].size()).sum();
        if (s >= 0.2 * static_cast<double>(std::min(ca[p].size(), cb[q].size()))) parent[find(p)] = find(na + q);
      }
    }
    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t x = 0; x < parent.size(); ++x) components[find(x)].push_back(x);

    long long net_down = 0;
    for (const auto& [root, members] : components) {
      bool tracked = false;
      Index size_a = 0, size_b = 0, low_a = 0, low_b = 0;
      double captured = 0.0;
      std::vector<double> w(cores, 0.0);
      for (std::size_t x : members) {
        if (x < na) {
          const auto& c = ca[x];
          tracked |= std::abs(c.energy - mu) < track;
          size_a += c.size();
          for (Index k = c.begin; k < c.end; ++k) low_a += a.energies[a.first + k] < mu ? 1 : 0;
          for (std::size_t k = 0; k < cores; ++k) w[k] += weights[i][k].segment(c.begin, c.size()).sum();
          for (std::size_t y : members) {
            if (y < na) continue;
            const auto& d = cb[y - na];
            captured += overlap2.block(c.begin, d.begin, c.size(), d.size()).sum();
          }
        } else {
          const auto& c = cb[x - na];
          size_b += c.size();
          for (Index k = c.begin; k < c.end; ++k) low_b += b.energies[b.first + k] < mu ? 1 : 0;
          for (std::size_t k = 0; k < cores; ++k) w[k] += weights[j][k].segment(c.begin, c.size()).sum();
        }
      }
      if (!tracked) continue;
      if (size_a != size_b || captured < opt.min_overlap * static_cast<double>(size_a)) {
        fail("eigenvector overlap does not pair the levels", a.kz);
      }
      const long long change = low_b - low_a;
      if (change == 0) continue;
      Crossing x;
      x.interval = i;
      x.direction = change > 0 ? 1 : -1;
      x.multiplicity = static_cast<int>(std::llabs(change));
      for (std::size_t y : members) {
        if (y < na) x.energy_before = ca[y].energy;
        else x.energy_after = cb[y - na].energy;
      }
      for (std::size_t k = 0; k < cores; ++k) {
        const double mean = w[k] / static_cast<double>(size_a + size_b);
        x.core_weight.push_back(mean);
        if (mean > opt.weight_threshold) result.per_core[k] += change;
      }
      net_down += change;
      result.crossings.push_back(std::move(x));
    }
    if (static_cast<long long>(below_b - below_a) != net_down) {
      fail("branch matching inconsistent with level counts", a.kz);
    }
    result.unfiltered += net_down;
  }
  return result;
}

inline long long spectral_flow(const SpectralData& data, double rho, double weight_threshold, std::size_t core = 0) {
  FlowOptions opt;
  opt.rho = rho;
  opt.weight_threshold = weight_threshold;
  return spectral_flow_detail(data, opt).per_core.at(core);
}

// ---------------------------------------------------------------------------
// Winding and conductance

struct Estimate {
  double value = 0.0;
  long long nearest = 0;
  double distance = 0.0;

  static Estimate of(double v) {
    Estimate e;
    e.value = v;
    e.nearest = std::llround(v);
    e.distance = std::abs(v - static_cast<double>(e.nearest));
    return e;
  }
};

/// (1 / 2 pi i) times the kz integral of tr(Lambda U^dagger dU/dkz), with
/// Lambda the projection onto sites within rho of the core. dU comes from the
/// Daleckii-Krein formula over the in-gap states; U is the identity outside
/// |E - mu| < eps, so only pairs involving those states contribute.
inline Estimate localized_winding(const SpectralData& data, const ChiFunction& chi, double rho, std::size_t core = 0) {
  if (chi.eps <= 0.0) throw std::invalid_argument("localized_winding: eps must be positive");
  if (chi.eps > data.half_gap()) {
    throw std::invalid_argument("localized_winding: eps exceeds the in-gap window");
  }
  const std::vector<Index> rows = data.core_rows(rho, core);
  const double dk = kTwoPi / static_cast<double>(data.slices.size());
  cplx total = 0.0;
  for (const KzSlice& s : data.slices) {
    const Index m = s.in_gap_count();
    if (m == 0) continue;
    CMatrix lv = CMatrix::Zero(s.vectors.rows(), m);
    for (Index r : rows) lv.row(r) = s.vectors.row(r);
    const CMatrix lambda = s.vectors.adjoint() * lv;  // <n|Lambda|m>
    const CMatrix hp = s.vectors.adjoint() * (s.dH * s.vectors);
    std::vector<cplx> f(static_cast<std::size_t>(m));
    std::vector<double> e(static_cast<std::size_t>(m));
    for (Index k = 0; k < m; ++k) {
      e[static_cast<std::size_t>(k)] = s.energies[s.first + k] - data.mu;
      f[static_cast<std::size_t>(k)] = boundary_phase(chi, e[static_cast<std::size_t>(k)]);
    }
    cplx sum = 0.0;
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) {
        const double ea = e[static_cast<std::size_t>(a)];
        const double eb = e[static_cast<std::size_t>(b)];
        cplx d;
        if (std::abs(ea - eb) < 1e-12) {
          d = boundary_phase_derivative(chi, 0.5 * (ea + eb));
        } else {
          d = (f[static_cast<std::size_t>(a)] - f[static_cast<std::size_t>(b)]) / (ea - eb);
        }
        if (d == cplx(0.0)) continue;
        sum += lambda(b, a) * std::conj(f[static_cast<std::size_t>(a)]) * d * hp(a, b);
      }
    }
    total += sum;
  }
  const cplx w = total * dk / cplx(0.0, kTwoPi);
  return Estimate::of(w.real());
}

/// Smoothed indicator of [lo, hi]: quintic ramps of half-width `ramp`
/// centred on both edges, so that its integral is hi - lo.
struct WindowFunction {
  double lo = -0.4;
  double hi = 0.4;
  double ramp = 0.1;

  [[nodiscard]] double operator()(double e) const { return step(e - lo) - step(e - hi); }

 private:
  [[nodiscard]] double step(double x) const {
    if (ramp <= 0.0) return x >= 0.0 ? 1.0 : 0.0;
    const double t = std::clamp((x + ramp) / (2.0 * ramp), 0.0, 1.0);
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
  }
};

/// -(1/|Delta|) times the kz integral of Tr(Lambda P_Delta dH/dkz), with the
/// spectral projection P_Delta smoothed by WindowFunction.
inline Estimate sigma_screw(const SpectralData& data, const WindowFunction& window, double rho, std::size_t core = 0) {
  const double width = window.hi - window.lo;
  if (!(width > 0.0)) throw std::invalid_argument("sigma_screw: empty energy window");
  if (window.lo - window.ramp <= data.gap_lo || window.hi + window.ramp >= data.gap_hi) {
    throw NumericalError("sigma_screw: energy window touches the bulk bands");
  }
  const double spacing = data.in_gap_spacing();
  if (std::isinf(spacing)) return Estimate::of(0.0);  // nothing localized to weigh
  if (width < 4.0 * spacing) {
    throw NumericalError("sigma_screw: energy window narrower than four in-gap level spacings");
  }
  const std::vector<Index> rows = data.core_rows(rho, core);
  const double dk = kTwoPi / static_cast<double>(data.slices.size());
  double total = 0.0;
  for (const KzSlice& s : data.slices) {
    const Index m = s.in_gap_count();
    if (m == 0) continue;
    const CMatrix hv = s.dH * s.vectors;
    for (Index k = 0; k < m; ++k) {
      const double g = window(s.energies[s.first + k]);
      if (g == 0.0) continue;
      cplx expectation = 0.0;  // <n|dH Lambda|n>
      for (Index r : rows) expectation += std::conj(hv(r, k)) * s.vectors(r, k);
      total += g * expectation.real();
    }
  }
  return Estimate::of(-total * dk / width);
}

// ---------------------------------------------------------------------------
// Dipole checks

/// Largest mismatch between core-c localized levels at kz and core-c' levels
/// at -kz (the two cores are exchanged by a half turn about the midpoint).
inline double dipole_exchange_defect(const SpectralData& data, double rho, double threshold) {
  if (data.core_count() != 2) throw std::invalid_argument("dipole_exchange_defect: dipole data required");
  const std::size_t n = data.slices.size();
  const std::vector<Index> r0 = data.core_rows(rho, 0);
  const std::vector<Index> r1 = data.core_rows(rho, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const KzSlice& a = data.slices[i];
    const KzSlice& b = data.slices[n - 1 - i];  // kz_{n-1-i} = -kz_i mod 2 pi
    const RVector wa = detail::in_gap_weights(a, r0);
    const RVector wb = detail::in_gap_weights(b, r1);
    std::vector<double> ea, eb;
    for (Index k = 0; k < a.in_gap_count(); ++k) {
      if (wa[k] > threshold) ea.push_back(a.energies[a.first + k]);
    }
    for (Index k = 0; k < b.in_gap_count(); ++k) {
      if (wb[k] > threshold) eb.push_back(b.energies[b.first + k]);
    }
    if (ea.size() != eb.size()) return std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ea.size(); ++k) worst = std::max(worst, std::abs(ea[k] - eb[k]));
  }
  return worst;
}

}  // namespace screwdisloc
