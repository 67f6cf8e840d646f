#pragma once

// Dense Hermitian eigensolvers, operator norms and functional calculus.
//
// Eigen supplies matrix storage and products; the Hermitian eigenproblem is
// handed to LAPACK (Householder tridiagonalization followed by the MRRR
// tridiagonal solver). The windowed solver keeps the tridiagonal form and
// back-transforms only the eigenvectors and rows that callers ask for.

#include <complex>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "screwdisloc/errors.hpp"

extern "C" void openblas_set_num_threads(int num_threads);

namespace screwdisloc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using SparseC = Eigen::SparseMatrix<cplx>;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

namespace linalg {

/// Keeps BLAS single-threaded; callers parallelize across matrices.
inline void use_single_threaded_blas() { openblas_set_num_threads(1); }

/// Dense Hermitian matrix. The constructor symmetrizes its argument, so the
/// stored entries satisfy A == A^dagger bit for bit.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& a) : data_(a.rows(), a.cols()) {
    if (a.rows() != a.cols()) throw std::invalid_argument("HermitianMatrix: matrix is not square");
    const Index n = a.rows();
    for (Index j = 0; j < n; ++j) {
      data_(j, j) = cplx(a(j, j).real(), 0.0);
      for (Index i = j + 1; i < n; ++i) {
        const cplx v = 0.5 * (a(i, j) + std::conj(a(j, i)));
        data_(i, j) = v;
        data_(j, i) = std::conj(v);
      }
    }
  }
  explicit HermitianMatrix(const SparseC& a) : HermitianMatrix(CMatrix(a)) {}

  [[nodiscard]] Index dim() const { return data_.rows(); }
  [[nodiscard]] const CMatrix& matrix() const { return data_; }

 private:
  CMatrix data_;
};

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // column j belongs to values[j]
};

/// Full eigendecomposition of a Hermitian matrix.
inline EigenDecomposition eigh(const HermitianMatrix& a) {
  const Index n = a.dim();
  if (n < 1) throw std::invalid_argument("eigh: empty matrix");
  CMatrix work = a.matrix();
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, 'V', 'A', 'L', static_cast<lapack_int>(n), work.data(),
      static_cast<lapack_int>(n), 0.0, 0.0, 0, 0, 0.0, &found, out.values.data(),
      out.vectors.data(), static_cast<lapack_int>(n), support.data());
  if (info != 0) {
    throw NumericalError("eigh: LAPACK zheevr failed with info=" + std::to_string(info));
  }
  return out;
}

/// Eigenvalues only.
inline RVector eigvalsh(const HermitianMatrix& a) {
  const Index n = a.dim();
  CMatrix work = a.matrix();
  RVector values(n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  CMatrix unused(1, 1);
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, 'N', 'A', 'L', static_cast<lapack_int>(n), work.data(),
      static_cast<lapack_int>(n), 0.0, 0.0, 0, 0, 0.0, &found, values.data(), unused.data(), 1,
      support.data());
  if (info != 0) {
    throw NumericalError("eigvalsh: LAPACK zheevr failed with info=" + std::to_string(info));
  }
  return values;
}

struct WindowedEigen {
  RVector values;        // the full spectrum, ascending
  Index first = 0;       // index of the first eigenvalue inside the window
  CMatrix vectors;       // eigenvectors for values[first .. first + cols)
  std::vector<RVector> probe_weights;  // per probe set: sum over rows of |v_n(row)|^2, all n
};

/// Full spectrum, eigenvectors for eigenvalues strictly inside (lo, hi), and
/// for each probe row set the total weight every eigenvector carries on it.
inline WindowedEigen eigh_windowed(const HermitianMatrix& a, double lo, double hi,
                                   std::span<const std::vector<Index>> probes = {}) {
  const Index n = a.dim();
  if (n < 1) throw std::invalid_argument("eigh_windowed: empty matrix");
  const auto ln = static_cast<lapack_int>(n);
  CMatrix reflectors = a.matrix();
  RVector diag(n);
  RVector offdiag(std::max<Index>(n - 1, 1));
  CVector tau(std::max<Index>(n - 1, 1));
  lapack_int info = LAPACKE_zhetrd(LAPACK_COL_MAJOR, 'L', ln, reflectors.data(), ln, diag.data(),
                                   offdiag.data(), tau.data());
  if (info != 0) throw NumericalError("eigh_windowed: zhetrd info=" + std::to_string(info));

  WindowedEigen out;
  out.values.resize(n);
  RMatrix z(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  lapack_logical tryrac = 1;
  RVector e_work(n);
  e_work.head(n - 1) = offdiag.head(n - 1);
  e_work[n - 1] = 0.0;
  RVector d_work = diag;
  info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'A', ln, d_work.data(), e_work.data(), 0.0, 0.0, 0,
                        0, &found, out.values.data(), z.data(), ln, ln, support.data(), &tryrac);
  if (info != 0) {
    // MRRR occasionally fails on tight clusters; divide and conquer does not.
    out.values = diag;
    e_work.head(n - 1) = offdiag.head(n - 1);
    info = LAPACKE_dstedc(LAPACK_COL_MAJOR, 'I', ln, out.values.data(), e_work.data(), z.data(), ln);
    if (info != 0) throw NumericalError("eigh_windowed: dstemr and dstedc failed, info=" + std::to_string(info));
  }

  Index first = 0;
  while (first < n && out.values[first] <= lo) ++first;
  Index last = first;
  while (last < n && out.values[last] < hi) ++last;
  out.first = first;
  const Index count = last - first;
  if (count > 0) {
    out.vectors = z.middleCols(first, count).cast<cplx>();
    info = LAPACKE_zunmtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', ln, static_cast<lapack_int>(count),
                          reflectors.data(), ln, tau.data(), out.vectors.data(), ln);
    if (info != 0) throw NumericalError("eigh_windowed: zunmtr info=" + std::to_string(info));
  } else {
    out.vectors.resize(n, 0);
  }

  for (const auto& rows : probes) {
    RVector weights = RVector::Zero(n);
    if (!rows.empty()) {
      const auto r = static_cast<Index>(rows.size());
      CMatrix unit = CMatrix::Zero(n, r);
      for (Index c = 0; c < r; ++c) unit(rows[static_cast<std::size_t>(c)], c) = 1.0;
      // unit <- Q^H e_rows, so (Q^H e_rows)^H Z holds the requested rows of Q Z.
      info = LAPACKE_zunmtr(LAPACK_COL_MAJOR, 'L', 'L', 'C', ln, static_cast<lapack_int>(r),
                            reflectors.data(), ln, tau.data(), unit.data(), ln);
      if (info != 0) throw NumericalError("eigh_windowed: zunmtr info=" + std::to_string(info));
      const RMatrix re = unit.real().transpose() * z;
      const RMatrix im = unit.imag().transpose() * z;
      weights = (re.array().square() + im.array().square()).colwise().sum().transpose();
    }
    out.probe_weights.push_back(std::move(weights));
  }
  return out;
}

/// V f(Lambda) V^dagger.
inline CMatrix func_calc(const HermitianMatrix& a, const std::function<cplx(double)>& f) {
  const EigenDecomposition ed = eigh(a);
  CVector fv(ed.values.size());
  for (Index i = 0; i < fv.size(); ++i) fv[i] = f(ed.values[i]);
  return ed.vectors * fv.asDiagonal() * ed.vectors.adjoint();
}

/// Exact norm from the singular values; used when power iteration stalls on
/// a start vector in the kernel.
template <class Matrix>
double opnorm_fallback(const Matrix& a) {
  const CMatrix dense = CMatrix(a);
  Eigen::JacobiSVD<CMatrix> svd(dense);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

/// Largest singular value by power iteration on A^dagger A.
template <class Matrix>
double opnorm(const Matrix& a, double rel_tol = 1e-8, int max_iter = 20000) {
  const Index n = a.cols();
  if (n == 0 || a.rows() == 0) return 0.0;
  // Deterministic start vector with no special alignment.
  CVector x(n);
  for (Index i = 0; i < n; ++i) {
    x[i] = cplx(1.0 + 0.25 * std::sin(1.7 * static_cast<double>(i) + 0.3),
                0.1 * std::cos(0.9 * static_cast<double>(i)));
  }
  x.normalize();
  double previous = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    const CVector y = a * x;
    const double sigma = y.norm();
    if (sigma == 0.0) return opnorm_fallback(a);
    CVector z = a.adjoint() * y;
    const double zn = z.norm();
    if (zn == 0.0) return sigma;
    x = z / zn;
    if (previous > 0.0 && std::abs(sigma - previous) <= rel_tol * sigma) return sigma;
    previous = sigma;
  }
  return previous;
}

}  // namespace linalg
}  // namespace screwdisloc
