#pragma once

// Entanglement tests on density matrices: realignment (computable
// cross-norm) and positive partial transpose, plus the gauge of the set of
// states the realignment test does not flag.

#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>

#include "realign/spectra.hpp"
#include "realign/tensor_ops.hpp"

namespace realign {

/// A state counts as detected only when the test is violated by more than
/// this margin, so SVD / eigensolver roundoff at the boundary never flags.
inline constexpr double tol_crit = 1e-9;

struct CriterionReport {
  double realignment_value = 0.0;  // ||rho^R||_1
  double ppt_min_eig = 0.0;        // lambda_min(rho^Gamma)
  bool realignment_detects = false;
  bool ppt_detects = false;
  std::optional<double> gauge;
};

/// ||rho^R||_1.
inline double realignment_value(const DensityMatrix& rho) {
  return trace_norm(realign(rho.matrix(), rho.shape()));
}

inline bool realignment_detects(double value) { return value > 1.0 + tol_crit; }

struct PptResult {
  bool is_ppt = true;
  double min_eig = 0.0;
};

/// Positivity of rho^Gamma via a Hermitian eigensolver.
inline PptResult is_ppt(const DensityMatrix& rho) {
  const ComplexMatrix pt = partial_transpose(rho.matrix(), rho.shape());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(pt, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw domain_error("is_ppt: eigensolver did not converge");
  const double lam = eig.eigenvalues().minCoeff();
  return {lam >= -tol_crit, lam};
}

namespace detail {

// || E/d + u (rho^R - E/d) ||_1 for u = 1/t.
class GaugeObjective {
 public:
  explicit GaugeObjective(const DensityMatrix& rho) {
    const auto d = static_cast<Eigen::Index>(rho.shape().d1());
    centre_ = ComplexMatrix::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) centre_(i * d + i, k * d + k) = 1.0 / static_cast<double>(d * d);
    }
    deviation_ = realign(rho.matrix(), rho.shape()) - centre_;
  }

  double at_scale(double u) const { return trace_norm(ComplexMatrix(centre_ + u * deviation_)); }
  double deviation_norm() const { return trace_norm(deviation_); }
  bool deviation_vanishes() const { return deviation_.cwiseAbs().maxCoeff() == 0.0; }

 private:
  ComplexMatrix centre_;     // (Id / d^2)^R = E / d
  ComplexMatrix deviation_;  // rho^R - E / d
};

}  // namespace detail

inline constexpr double gauge_tolerance = 1e-8;
inline constexpr int gauge_max_iterations = 60;

/// inf { t >= 0 : || E/d + (rho^R - E/d) / t ||_1 <= 1 } on balanced shapes.
/// The objective is nonincreasing in t, so the infimum is bracketed by
/// doubling from t = 1 and then bisected.
inline double gauge_norm(const DensityMatrix& rho) {
  if (!rho.shape().is_balanced()) throw domain_error("gauge_norm: shape must be balanced (d1 == d2)");
  const detail::GaugeObjective objective(rho);
  if (objective.deviation_vanishes()) return 0.0;
  auto feasible = [&](double t) { return objective.at_scale(1.0 / t) <= 1.0; };

  double hi = 1.0;
  int doublings = 0;
  while (!feasible(hi)) {
    hi *= 2.0;
    if (++doublings > 1100) throw domain_error("gauge_norm: no feasible scale found");
  }
  double lo = 0.0;
  if (doublings > 0) lo = hi / 2.0;
  for (int it = 0; it < gauge_max_iterations && hi - lo > gauge_tolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// gamma = (8 / (3 pi))^2.
inline constexpr double threshold_gamma() {
  constexpr double r = 8.0 / (3.0 * std::numbers::pi);
  return r * r;
}

enum class Regime { detect, not_detect, near_threshold };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::detect:
      return "detect";
    case Regime::not_detect:
      return "not_detect";
    case Regime::near_threshold:
      return "near_threshold";
  }
  return "unknown";
}

struct RegimeOptions {
  double margin = 0.1;      // half-width of the undecided window around gamma d^2
  double ratio_min = 10.0;  // max(d1,d2) / min(d1,d2) needed to use the s = d_min^2 rule
};

/// Expected typical outcome of the realignment test on induced states.
/// Balanced: detect below (gamma - margin) d^2, miss above (gamma + margin) d^2.
/// Strongly unbalanced: threshold at s = min(d1, d2)^2. Mildly unbalanced
/// shapes have no asymptotic prediction and report near_threshold.
inline Regime predicted_regime(const BipartiteShape& shape, RegimeOptions opts = {}) {
  const auto s = static_cast<double>(shape.s());
  if (shape.is_balanced()) {
    const double d2 = static_cast<double>(shape.d1()) * static_cast<double>(shape.d1());
    if (s < (threshold_gamma() - opts.margin) * d2) return Regime::detect;
    if (s > (threshold_gamma() + opts.margin) * d2) return Regime::not_detect;
    return Regime::near_threshold;
  }
  const auto small = static_cast<double>(std::min(shape.d1(), shape.d2()));
  const auto large = static_cast<double>(std::max(shape.d1(), shape.d2()));
  if (large / small < opts.ratio_min) return Regime::near_threshold;
  const double threshold = small * small;
  if (s < threshold) return Regime::detect;
  if (s > threshold) return Regime::not_detect;
  return Regime::near_threshold;
}

inline CriterionReport evaluate_criteria(const DensityMatrix& rho, bool with_gauge = false) {
  CriterionReport report;
  report.realignment_value = realignment_value(rho);
  report.realignment_detects = realignment_detects(report.realignment_value);
  const PptResult ppt = is_ppt(rho);
  report.ppt_min_eig = ppt.min_eig;
  report.ppt_detects = !ppt.is_ppt;
  if (with_gauge && rho.shape().is_balanced()) report.gauge = gauge_norm(rho);
  return report;
}

}  // namespace realign
