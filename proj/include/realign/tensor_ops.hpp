#pragma once

// Index-level reshufflings of operators on C^d1 (x) C^d2.
//
// Basis convention: zero-based, row-major. The product basis vector
// e_i (x) f_j sits at flat index i * d2 + j. With that fixed, realignment and
// partial transposition are pure permutations of matrix entries, so they are
// exact (no rounding) and their involution properties hold bit for bit.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "realign/errors.hpp"

namespace realign {

using Complex = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

inline constexpr double tol_herm = 1e-10;
inline constexpr double tol_trace = 1e-10;
inline constexpr double tol_psd = 1e-9;

/// Dimensions (d1, d2, s) of a bipartite system with an s-dimensional ancilla.
class BipartiteShape {
 public:
  BipartiteShape(std::size_t d1, std::size_t d2, std::size_t s) : d1_(d1), d2_(d2), s_(s) {
    if (d1 == 0 || d2 == 0 || s == 0) {
      throw domain_error("BipartiteShape: d1, d2 and s must be positive");
    }
    // Matrices on the bipartite space hold n^2 entries, so n^2 must fit.
    constexpr auto max_index = static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max());
    if (d1 > max_index / d2) {
      throw domain_error("BipartiteShape: d1 * d2 overflows the index type");
    }
    const std::size_t n = d1 * d2;
    if (n > max_index / n || s > max_index / n) {
      throw domain_error("BipartiteShape: matrix size overflows the index type");
    }
  }

  static BipartiteShape balanced(std::size_t d, std::size_t s) { return {d, d, s}; }

  std::size_t d1() const { return d1_; }
  std::size_t d2() const { return d2_; }
  std::size_t s() const { return s_; }
  std::size_t dim() const { return d1_ * d2_; }
  bool is_balanced() const { return d1_ == d2_; }

  friend bool operator==(const BipartiteShape&, const BipartiteShape&) = default;

 private:
  std::size_t d1_;
  std::size_t d2_;
  std::size_t s_;
};

inline std::size_t bipartite_index(std::size_t i, std::size_t j, const BipartiteShape& shape) {
  if (i >= shape.d1() || j >= shape.d2()) {
    throw domain_error("bipartite_index: (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") out of range");
  }
  return i * shape.d2() + j;
}

namespace detail {

inline void require_square(const ComplexMatrix& a, const BipartiteShape& shape, const char* who) {
  const auto n = static_cast<Eigen::Index>(shape.dim());
  if (a.rows() != n || a.cols() != n) {
    throw domain_error(std::string(who) + ": expected a " + std::to_string(n) + "x" +
                       std::to_string(n) + " matrix, got " + std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()));
  }
}

inline bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const Complex z = a.data()[k];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

}  // namespace detail

/// A^R: the entry A_{(i,j),(k,l)} moves to row i*d1+k, column j*d2+l.
/// The result is d1^2 x d2^2.
inline ComplexMatrix realign(const ComplexMatrix& a, const BipartiteShape& shape) {
  detail::require_square(a, shape, "realign");
  const auto d1 = static_cast<Eigen::Index>(shape.d1());
  const auto d2 = static_cast<Eigen::Index>(shape.d2());
  ComplexMatrix out(d1 * d1, d2 * d2);
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = 0; j < d2; ++j) {
      for (Eigen::Index k = 0; k < d1; ++k) {
        for (Eigen::Index l = 0; l < d2; ++l) {
          out(i * d1 + k, j * d2 + l) = a(i * d2 + j, k * d2 + l);
        }
      }
    }
  }
  return out;
}

inline ComplexMatrix realign_inverse(const ComplexMatrix& b, const BipartiteShape& shape) {
  const auto d1 = static_cast<Eigen::Index>(shape.d1());
  const auto d2 = static_cast<Eigen::Index>(shape.d2());
  if (b.rows() != d1 * d1 || b.cols() != d2 * d2) {
    throw domain_error("realign_inverse: expected a " + std::to_string(d1 * d1) + "x" +
                       std::to_string(d2 * d2) + " matrix, got " + std::to_string(b.rows()) +
                       "x" + std::to_string(b.cols()));
  }
  ComplexMatrix out(d1 * d2, d1 * d2);
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = 0; j < d2; ++j) {
      for (Eigen::Index k = 0; k < d1; ++k) {
        for (Eigen::Index l = 0; l < d2; ++l) {
          out(i * d2 + j, k * d2 + l) = b(i * d1 + k, j * d2 + l);
        }
      }
    }
  }
  return out;
}

/// A^Gamma = (Id (x) T) A: swaps the second-factor indices j and l.
inline ComplexMatrix partial_transpose(const ComplexMatrix& a, const BipartiteShape& shape) {
  detail::require_square(a, shape, "partial_transpose");
  const auto d1 = static_cast<Eigen::Index>(shape.d1());
  const auto d2 = static_cast<Eigen::Index>(shape.d2());
  ComplexMatrix out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = 0; j < d2; ++j) {
      for (Eigen::Index k = 0; k < d1; ++k) {
        for (Eigen::Index l = 0; l < d2; ++l) {
          out(i * d2 + j, k * d2 + l) = a(i * d2 + l, k * d2 + j);
        }
      }
    }
  }
  return out;
}

/// Hermitian, trace-one, positive semidefinite operator on C^d1 (x) C^d2.
class DensityMatrix {
 public:
  /// Validates Hermiticity, trace and positivity (the latter costs an
  /// eigendecomposition).
  DensityMatrix(const BipartiteShape& shape, ComplexMatrix matrix)
      : shape_(shape), matrix_(std::move(matrix)) {
    check_structure();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(matrix_, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
      throw domain_error("DensityMatrix: eigendecomposition failed");
    }
    if (eig.eigenvalues().minCoeff() < -tol_psd) {
      throw domain_error("DensityMatrix: matrix is not positive semidefinite");
    }
  }

  /// Skips the eigenvalue check for matrices that are PSD by construction
  /// (Gram matrices, convex mixtures of states). Hermiticity and trace are
  /// still verified.
  static DensityMatrix assume_psd(const BipartiteShape& shape, ComplexMatrix matrix) {
    DensityMatrix rho(shape, std::move(matrix), Unchecked{});
    rho.check_structure();
    return rho;
  }

  const BipartiteShape& shape() const { return shape_; }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  struct Unchecked {};
  DensityMatrix(const BipartiteShape& shape, ComplexMatrix matrix, Unchecked)
      : shape_(shape), matrix_(std::move(matrix)) {}

  void check_structure() const {
    detail::require_square(matrix_, shape_, "DensityMatrix");
    if (!detail::all_finite(matrix_)) {
      throw domain_error("DensityMatrix: non-finite entry");
    }
    if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > tol_herm) {
      throw domain_error("DensityMatrix: matrix is not Hermitian");
    }
    if (std::abs(matrix_.trace() - Complex(1.0, 0.0)) > tol_trace) {
      throw domain_error("DensityMatrix: trace differs from 1");
    }
  }

  BipartiteShape shape_;
  ComplexMatrix matrix_;
};

/// E_d = |psi><psi| with psi = d^{-1/2} sum_i e_i (x) e_i.
inline DensityMatrix max_entangled(std::size_t d) {
  if (d == 0) throw domain_error("max_entangled: d must be positive");
  const BipartiteShape shape(d, d, 1);
  const auto n = static_cast<Eigen::Index>(d * d);
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  const double v = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      e(static_cast<Eigen::Index>(i * d + i), static_cast<Eigen::Index>(k * d + k)) = v;
    }
  }
  return DensityMatrix::assume_psd(shape, std::move(e));
}

inline DensityMatrix maximally_mixed(const BipartiteShape& shape) {
  const auto n = static_cast<Eigen::Index>(shape.dim());
  ComplexMatrix m = ComplexMatrix::Identity(n, n) / static_cast<double>(n);
  return DensityMatrix::assume_psd(shape, std::move(m));
}

/// |u (x) v><u (x) v| for nonzero u in C^d1, v in C^d2 (normalized here).
inline DensityMatrix product_state(const ComplexVector& u, const ComplexVector& v,
                                   std::size_t s = 1) {
  if (u.size() == 0 || v.size() == 0) throw domain_error("product_state: empty factor");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw domain_error("product_state: zero vector");
  const BipartiteShape shape(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(v.size()), s);
  ComplexVector psi(u.size() * v.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      psi(i * v.size() + j) = u(i) * v(j) / (nu * nv);
    }
  }
  ComplexMatrix m = psi * psi.adjoint();
  // Exact Hermitian storage.
  m = (0.5 * (m + m.adjoint())).eval();
  return DensityMatrix::assume_psd(shape, std::move(m));
}

}  // namespace realign
