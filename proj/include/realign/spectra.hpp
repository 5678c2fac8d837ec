#pragma once

// Singular values, Schatten norms and the quarter-circle law.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/SVD>

#include "realign/tensor_ops.hpp"

namespace realign {

/// Singular values in nonincreasing order together with the count used to
/// normalize moments (1/dimension) sum sigma_i^k.
class EmpiricalSpectrum {
 public:
  EmpiricalSpectrum(std::vector<double> values, std::size_t dimension)
      : values_(std::move(values)), dimension_(dimension) {
    if (dimension_ == 0) throw domain_error("EmpiricalSpectrum: dimension must be positive");
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0) {
        throw domain_error("EmpiricalSpectrum: values must be finite and nonnegative");
      }
    }
    std::sort(values_.begin(), values_.end(), std::greater<>());
  }

  explicit EmpiricalSpectrum(std::vector<double> values)
      : EmpiricalSpectrum(values, std::max<std::size_t>(values.size(), 1)) {}

  /// Concatenates samples; the dimension is the sum of the parts.
  static EmpiricalSpectrum pooled(std::span<const EmpiricalSpectrum> parts) {
    std::vector<double> all;
    std::size_t dim = 0;
    for (const auto& part : parts) {
      all.insert(all.end(), part.values().begin(), part.values().end());
      dim += part.dimension();
    }
    return {std::move(all), std::max<std::size_t>(dim, 1)};
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double max() const { return values_.empty() ? 0.0 : values_.front(); }

 private:
  std::vector<double> values_;
  std::size_t dimension_;
};

inline EmpiricalSpectrum singular_values(const ComplexMatrix& m) {
  if (!detail::all_finite(m)) throw domain_error("singular_values: non-finite entry");
  if (m.size() == 0) return EmpiricalSpectrum({}, 1);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  if (svd.info() != Eigen::Success) throw domain_error("singular_values: SVD did not converge");
  const auto& sv = svd.singularValues();
  std::vector<double> values(sv.data(), sv.data() + sv.size());
  for (double& v : values) v = std::max(v, 0.0);
  const auto dim = static_cast<std::size_t>(std::min(m.rows(), m.cols()));
  return {std::move(values), dim};
}

inline double schatten_norm(const EmpiricalSpectrum& spec, double p) {
  if (!(p >= 1.0)) throw domain_error("schatten_norm: p must be >= 1");
  if (spec.empty()) return 0.0;
  // Scale by the largest value to avoid overflow for large p.
  const double top = spec.max();
  if (top == 0.0) return 0.0;
  double acc = 0.0;
  for (double v : spec.values()) acc += std::pow(v / top, p);
  return top * std::pow(acc, 1.0 / p);
}

inline double schatten_norm(const ComplexMatrix& m, double p) {
  if (!(p >= 1.0)) throw domain_error("schatten_norm: p must be >= 1");
  return schatten_norm(singular_values(m), p);
}

inline double trace_norm(const EmpiricalSpectrum& spec) {
  double acc = 0.0;
  for (double v : spec.values()) acc += v;
  return acc;
}

inline double trace_norm(const ComplexMatrix& m) { return trace_norm(singular_values(m)); }

inline double spectrum_moment(const EmpiricalSpectrum& spec, unsigned k) {
  if (k == 0) return 1.0;
  double acc = 0.0;
  for (double v : spec.values()) acc += std::pow(v, static_cast<double>(k));
  return acc / static_cast<double>(spec.dimension());
}

/// The quarter-circle law sqrt(4 - x^2) / pi on [0, 2].
class QuarterCircleLaw {
 public:
  static double density(double x) {
    if (x < 0.0 || x > 2.0) return 0.0;
    return std::sqrt(4.0 - x * x) / std::numbers::pi;
  }

  static double cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return (x * std::sqrt(4.0 - x * x) + 4.0 * std::asin(x / 2.0)) / (2.0 * std::numbers::pi);
  }

  /// Inverse CDF by bisection; u in [0, 1].
  static double quantile(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 2.0;
    double lo = 0.0;
    double hi = 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// Even moments are Catalan numbers; odd moments
  /// 2^{4p+5} p! (p+2)! / (pi (2p+4)!).
  static double moment(unsigned k) {
    const unsigned p = k / 2;
    if (k % 2 == 0) {
      // Cat_p = prod_{j=2}^{p} (p + j) / j
      double cat = 1.0;
      for (unsigned j = 2; j <= p; ++j) cat *= static_cast<double>(p + j) / static_cast<double>(j);
      return cat;
    }
    // p! (p+2)! / (2p+4)! = (p+2)! / prod_{j=p+1}^{2p+4} j, accumulated as a
    // product of ratios to stay in range.
    double value = std::ldexp(1.0, static_cast<int>(4 * p + 5)) / std::numbers::pi;
    for (unsigned j = 1; j <= p + 2; ++j) value *= static_cast<double>(j);
    for (unsigned j = p + 1; j <= 2 * p + 4; ++j) value /= static_cast<double>(j);
    return value;
  }

  static double mean() { return moment(1); }
};

/// sup over sample points x of |F_emp(x) - F(x)|, where F_emp counts the
/// sample values <= x.
inline double ks_distance(const EmpiricalSpectrum& spec, const QuarterCircleLaw& law) {
  if (spec.empty()) throw domain_error("ks_distance: empty spectrum");
  std::vector<double> asc(spec.values().rbegin(), spec.values().rend());
  const auto n = static_cast<double>(asc.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < asc.size(); ++i) {
    // Last index of a run of ties carries the right-continuous count.
    if (i + 1 < asc.size() && asc[i + 1] == asc[i]) continue;
    const double emp = static_cast<double>(i + 1) / n;
    sup = std::max(sup, std::abs(emp - law.cdf(asc[i])));
  }
  return sup;
}

struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return (upper - lower) / static_cast<double>(counts.size()); }
};

inline constexpr std::size_t histogram_bins = 64;

/// Uniform bins on [0, max(2.5, max sigma)]; the top edge is inclusive.
inline Histogram histogram(const EmpiricalSpectrum& spec, std::size_t bins = histogram_bins) {
  if (bins == 0) throw domain_error("histogram: need at least one bin");
  Histogram h{0.0, std::max(2.5, spec.max()), std::vector<std::size_t>(bins, 0)};
  const double width = h.bin_width();
  for (double v : spec.values()) {
    auto b = static_cast<std::size_t>(v / width);
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

}  // namespace realign
