#pragma once

// Gaussian, Wishart and induced-state sampling.
//
// Seed contract: an RngSeed (seed, stream) initializes a std::mt19937_64
// through std::seed_seq{lo(seed), hi(seed), lo(stream), hi(stream)}. Both are
// fully specified by the standard, and normals come from the Box-Muller
// transform below (not std::normal_distribution, whose algorithm is
// implementation-defined). Gaussian matrices are filled column by column, so
// the first s columns of an n x s' draw (s' > s) coincide with the n x s draw
// for the same seed. Sweeps over s are therefore coupled.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "realign/tensor_ops.hpp"

namespace realign {

struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Standard complex Gaussians: Re, Im independent N(0, 1/2), so E|z|^2 = 1.
class ComplexGaussianSource {
 public:
  explicit ComplexGaussianSource(RngSeed seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed.seed), static_cast<std::uint32_t>(seed.seed >> 32),
                      static_cast<std::uint32_t>(seed.stream),
                      static_cast<std::uint32_t>(seed.stream >> 32)};
    engine_.seed(seq);
  }

  Complex operator()() {
    // Box-Muller with u1 in (0, 1], u2 in [0, 1). Each call consumes two
    // engine outputs and yields one complex value.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-std::log(u1));  // sqrt(-2 log u1) * sqrt(1/2)
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
};

inline ComplexMatrix sample_gaussian(std::size_t rows, std::size_t cols, RngSeed seed) {
  if (rows == 0 || cols == 0) throw domain_error("sample_gaussian: zero dimension");
  ComplexGaussianSource gauss(seed);
  ComplexMatrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = gauss();
  }
  return x;
}

/// W = X X^* on C^d1 (x) C^d2, X of size (d1 d2) x s.
struct WishartSample {
  BipartiteShape shape;
  ComplexMatrix w;
  double trace;

  /// Wraps an arbitrary Hermitian matrix (e.g. the mean s * Id) as a sample.
  static WishartSample from_matrix(const BipartiteShape& shape, ComplexMatrix w) {
    detail::require_square(w, shape, "WishartSample");
    if ((w - w.adjoint()).cwiseAbs().maxCoeff() > tol_herm * std::max(1.0, w.cwiseAbs().maxCoeff())) {
      throw domain_error("WishartSample: matrix is not Hermitian");
    }
    const double tr = w.trace().real();
    return {shape, std::move(w), tr};
  }
};

inline WishartSample wishart_from_factor(const BipartiteShape& shape, const ComplexMatrix& x) {
  if (x.rows() != static_cast<Eigen::Index>(shape.dim()) ||
      x.cols() != static_cast<Eigen::Index>(shape.s())) {
    throw domain_error("wishart_from_factor: factor must be (d1*d2) x s");
  }
  ComplexMatrix w(x.rows(), x.rows());
  w.noalias() = x * x.adjoint();
  // Symmetrize so the stored matrix is exactly Hermitian.
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    w(r, r) = Complex(w(r, r).real(), 0.0);
    for (Eigen::Index c = r + 1; c < w.cols(); ++c) {
      const Complex avg = 0.5 * (w(r, c) + std::conj(w(c, r)));
      w(r, c) = avg;
      w(c, r) = std::conj(avg);
    }
  }
  double tr = 0.0;
  for (Eigen::Index r = 0; r < w.rows(); ++r) tr += w(r, r).real();
  return {shape, std::move(w), tr};
}

inline WishartSample sample_wishart(const BipartiteShape& shape, RngSeed seed) {
  return wishart_from_factor(shape, sample_gaussian(shape.dim(), shape.s(), seed));
}

/// Wishart draw with a strictly positive trace. A zero trace (probability
/// zero) triggers one redraw on stream ^ 2^63, then a hard error.
inline WishartSample sample_wishart_nondegenerate(const BipartiteShape& shape, RngSeed seed) {
  WishartSample sample = sample_wishart(shape, seed);
  if (!(sample.trace > 0.0)) {
    sample = sample_wishart(shape, {seed.seed, seed.stream ^ (std::uint64_t{1} << 63)});
    if (!(sample.trace > 0.0)) throw domain_error("induced_state: degenerate Wishart trace");
  }
  return sample;
}

/// rho = W / tr W.
inline DensityMatrix normalized_state(const WishartSample& sample) {
  if (!(sample.trace > 0.0)) throw domain_error("normalized_state: trace must be positive");
  ComplexMatrix rho = sample.w / sample.trace;
  return DensityMatrix::assume_psd(sample.shape, std::move(rho));
}

/// Induced random state, distributed as mu_{d1 d2, s}.
inline DensityMatrix induced_state(const BipartiteShape& shape, RngSeed seed) {
  return normalized_state(sample_wishart_nondegenerate(shape, seed));
}

/// Q = (W^R - d s E_d) / (d sqrt(s)); balanced shapes only.
inline ComplexMatrix q_matrix(const WishartSample& sample) {
  const BipartiteShape& shape = sample.shape;
  if (!shape.is_balanced()) throw domain_error("q_matrix: shape must be balanced (d1 == d2)");
  const auto d = static_cast<Eigen::Index>(shape.d1());
  const auto s = static_cast<double>(shape.s());
  ComplexMatrix q = realign(sample.w, shape);
  // d s E_d has entry s at every ((i,i), (k,k)).
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) q(i * d + i, k * d + k) -= s;
  }
  q /= static_cast<double>(d) * std::sqrt(s);
  return q;
}

/// alpha with tr W = (1 + alpha) d1 d2 s.
inline double trace_deviation(const WishartSample& sample) {
  const double mean = static_cast<double>(sample.shape.dim()) * static_cast<double>(sample.shape.s());
  return sample.trace / mean - 1.0;
}

}  // namespace realign
