#pragma once

// Bulk invariants: Fermi projections, the Chern-Weil integral over a
// two-torus, the plaquette-flux lattice Chern number and the weak vector.

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "screwdisloc/errors.hpp"
#include "screwdisloc/linalg.hpp"
#include "screwdisloc/models.hpp"
#include "screwdisloc/parallel.hpp"

namespace screwdisloc {

enum class ChernMethod { chern_weil, lattice_gauge_invariant };

struct ChernResult {
  Plane plane = Plane::xy;
  double value_integral = 0.0;
  long long value_integer = 0;
  int grid = 0;
  ChernMethod method = ChernMethod::chern_weil;
  std::vector<double> plaquette_flux;  // lattice method only, row-major over (k1, k2)
};

namespace detail {

inline std::string describe_k(const std::array<double, 3>& k) {
  std::ostringstream os;
  os << "(" << k[0] << ", " << k[1] << ", " << k[2] << ")";
  return os.str();
}

/// Point of the plane's two-torus at zero transverse momentum.
inline std::array<double, 3> plane_point(Plane p, double k1, double k2) {
  switch (p) {
    case Plane::xy: return {k1, k2, 0.0};
    case Plane::yz: return {0.0, k1, k2};
    case Plane::zx: return {k2, 0.0, k1};
  }
  return {k1, k2, 0.0};
}

inline void check_gap(const RVector& e, double mu, const std::array<double, 3>& k) {
  for (Index i = 0; i < e.size(); ++i) {
    if (std::abs(e[i] - mu) < 1e-8) {
      throw GapClosureError("gap closes at the Fermi level at k = " + describe_k(k));
    }
  }
}

/// Eigenvectors of the occupied bands (columns).
inline CMatrix occupied_frame(const HoppingModel& model, const std::array<double, 3>& k, double mu) {
  const auto ed = linalg::eigh(bloch(model, k));
  check_gap(ed.values, mu, k);
  Index occ = 0;
  while (occ < ed.values.size() && ed.values[occ] < mu) ++occ;
  return ed.vectors.leftCols(occ);
}

}  // namespace detail

/// Spectral projection of the Bloch Hamiltonian onto energies below mu.
inline CMatrix fermi_projection(const HoppingModel& model, const std::array<double, 3>& k, double mu) {
  const CMatrix v = detail::occupied_frame(model, k, mu);
  return v * v.adjoint();
}

namespace detail {

inline double chern_weil_sum(const HoppingModel& model, Plane plane, double mu, int n, unsigned threads) {
  const double dk = kTwoPi / n;
  std::vector<CMatrix> P(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  parallel_for(P.size(), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / n;
    const int j = static_cast<int>(idx) % n;
    P[idx] = fermi_projection(model, plane_point(plane, i * dk, j * dk), mu);
  });
  auto at = [&](int i, int j) -> const CMatrix& {
    return P[static_cast<std::size_t>(((i % n + n) % n) * n + ((j % n + n) % n))];
  };
  std::vector<cplx> terms(P.size());
  parallel_for(P.size(), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / n;
    const int j = static_cast<int>(idx) % n;
    const CMatrix d1 = (at(i + 1, j) - at(i - 1, j)) / (2.0 * dk);
    const CMatrix d2 = (at(i, j + 1) - at(i, j - 1)) / (2.0 * dk);
    terms[idx] = (at(i, j) * (d1 * d2 - d2 * d1)).trace();
  });
  cplx total = 0.0;
  for (const cplx& t : terms) total += t;  // fixed order
  return (cplx(0.0, 1.0) / kTwoPi * total * dk * dk).real();
}

}  // namespace detail

/// (i / 2 pi) * sum over the grid of tr(P [d1 P, d2 P]) dk^2, with central
/// differences. Retried once at twice the grid if the sum is far from an
/// integer.
inline ChernResult chern_weil(const HoppingModel& model, Plane plane, double mu = 0.0, int n = 64,
                              unsigned threads = 1) {
  if (n < 4) throw std::invalid_argument("chern_weil: grid must be at least 4");
  ChernResult r;
  r.plane = plane;
  r.method = ChernMethod::chern_weil;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int grid = attempt == 0 ? n : 2 * n;
    const double value = detail::chern_weil_sum(model, plane, mu, grid, threads);
    r.value_integral = value;
    r.value_integer = std::llround(value);
    r.grid = grid;
    if (std::abs(value - static_cast<double>(r.value_integer)) < 0.25) return r;
  }
  throw ConvergenceError("chern_weil: integral " + std::to_string(r.value_integral) + " not near an integer at grid " +
                         std::to_string(r.grid));
}

/// Plaquette-flux Chern number of the occupied frame bundle. Oriented to agree
/// with chern_weil.
inline ChernResult chern_lattice(const HoppingModel& model, Plane plane, double mu = 0.0, int n = 48,
                                 unsigned threads = 1) {
  if (n < 2) throw std::invalid_argument("chern_lattice: grid must be at least 2");
  const double dk = kTwoPi / n;
  std::vector<CMatrix> frames(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  parallel_for(frames.size(), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / n;
    const int j = static_cast<int>(idx) % n;
    frames[idx] = detail::occupied_frame(model, detail::plane_point(plane, i * dk, j * dk), mu);
  });
  const Index occ = frames.front().cols();
  for (const CMatrix& f : frames) {
    if (f.cols() != occ) throw GapClosureError("chern_lattice: occupied band count changes across the torus");
  }
  auto at = [&](int i, int j) -> const CMatrix& {
    return frames[static_cast<std::size_t>(((i % n + n) % n) * n + ((j % n + n) % n))];
  };
  auto link = [&](const CMatrix& a, const CMatrix& b) {
    if (occ == 0) return cplx(1.0, 0.0);
    const cplx d = (a.adjoint() * b).determinant();
    if (std::abs(d) < 1e-10) throw NumericalError("chern_lattice: singular link overlap; refine the grid");
    return d / std::abs(d);
  };
  std::vector<double> flux(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / n;
    const int j = static_cast<int>(idx) % n;
    const cplx loop = link(at(i, j), at(i + 1, j)) * link(at(i + 1, j), at(i + 1, j + 1)) *
                      link(at(i + 1, j + 1), at(i, j + 1)) * link(at(i, j + 1), at(i, j));
    flux[idx] = std::arg(loop);
  });
  double total = 0.0;
  for (double f : flux) total += f;
  ChernResult r;
  r.plane = plane;
  r.method = ChernMethod::lattice_gauge_invariant;
  r.grid = n;
  r.value_integral = -total / kTwoPi;
  r.value_integer = std::llround(r.value_integral);
  r.plaquette_flux = std::move(flux);
  return r;
}

/// (C_yz, C_zx, C_xy).
inline std::array<long long, 3> weak_vector(const HoppingModel& model, double mu = 0.0, int n = 48,
                                            unsigned threads = 1) {
  return {chern_lattice(model, Plane::yz, mu, n, threads).value_integer,
          chern_lattice(model, Plane::zx, mu, n, threads).value_integer,
          chern_lattice(model, Plane::xy, mu, n, threads).value_integer};
}

/// Largest occupied and smallest empty Bloch energy over a grid of the
/// three-torus that contains the high-symmetry points (grid is even).
inline std::pair<double, double> bulk_gap(const HoppingModel& model, double mu = 0.0, int grid = 16) {
  if (grid % 2 != 0) ++grid;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const double dk = kTwoPi / grid;
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      for (int c = 0; c < grid; ++c) {
        const std::array<double, 3> k{a * dk, b * dk, c * dk};
        const RVector e = linalg::eigvalsh(bloch(model, k));
        detail::check_gap(e, mu, k);
        for (Index i = 0; i < e.size(); ++i) {
          if (e[i] < mu) lo = std::max(lo, e[i]);
          else hi = std::min(hi, e[i]);
        }
      }
    }
  }
  return {lo, hi};
}

}  // namespace screwdisloc
