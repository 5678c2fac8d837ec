#pragma once

// Monte Carlo experiment drivers. Trial t of every experiment draws from
// RngSeed{config.seed, t}; grid points of a sweep reuse the same trial seeds,
// so neighbouring points are coupled. Per-trial results land in indexed slots
// and are reduced in trial order, which keeps output independent of the
// worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "realign/criteria.hpp"
#include "realign/parallel.hpp"
#include "realign/perm_comb.hpp"
#include "realign/random_states.hpp"
#include "realign/spectra.hpp"

namespace realign::harness {

enum class Experiment { spectrum, moments, oracle_check, threshold_balanced, threshold_unbalanced, criteria_compare };
enum class OutputFormat { csv, json };

inline std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::spectrum:
      return "spectrum";
    case Experiment::moments:
      return "moments";
    case Experiment::oracle_check:
      return "oracle_check";
    case Experiment::threshold_balanced:
      return "threshold_balanced";
    case Experiment::threshold_unbalanced:
      return "threshold_unbalanced";
    case Experiment::criteria_compare:
      return "criteria_compare";
  }
  return "unknown";
}

inline std::string_view to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

struct ExperimentConfig {
  Experiment experiment = Experiment::spectrum;
  std::size_t d1 = 0;  // balanced experiments use d1 == d2 == d
  std::size_t d2 = 0;
  std::size_t s = 0;
  std::vector<std::size_t> s_grid;
  std::size_t trials = 1;
  unsigned p_max = 2;
  std::uint64_t seed = 0;
  std::string output_path;
  OutputFormat format = OutputFormat::csv;
  std::size_t workers = 0;  // 0: worker_count(); never affects results
};

/// s values log-uniform on [0.4, 1.4] * gamma d^2 (8 points, rounded,
/// duplicates dropped).
inline std::vector<std::size_t> default_balanced_grid(std::size_t d) {
  const double centre = threshold_gamma() * static_cast<double>(d * d);
  std::vector<std::size_t> grid;
  constexpr int points = 8;
  for (int k = 0; k < points; ++k) {
    const double f = std::exp(std::log(0.4) + (std::log(1.4) - std::log(0.4)) * k / (points - 1));
    const auto s = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * centre)));
    if (grid.empty() || s > grid.back()) grid.push_back(s);
  }
  return grid;
}

/// s = 1, ..., 2 d1^2.
inline std::vector<std::size_t> default_unbalanced_grid(std::size_t d1) {
  std::vector<std::size_t> grid;
  for (std::size_t s = 1; s <= 2 * d1 * d1; ++s) grid.push_back(s);
  return grid;
}

/// Fills defaults and checks the invariants each experiment relies on.
inline ExperimentConfig resolve(ExperimentConfig c) {
  if (c.trials == 0) throw domain_error("config: trials must be >= 1");
  if (c.d1 == 0 && c.d2 != 0) c.d1 = c.d2;
  if (c.d2 == 0 && c.d1 != 0) c.d2 = c.d1;
  if (c.d1 == 0) throw domain_error("config: dimension (--d or --d1/--d2) is required");
  const bool balanced_only = c.experiment == Experiment::spectrum || c.experiment == Experiment::moments ||
                             c.experiment == Experiment::threshold_balanced ||
                             c.experiment == Experiment::criteria_compare;
  if (balanced_only && c.d1 != c.d2) {
    throw domain_error("config: experiment " + std::string(to_string(c.experiment)) + " needs d1 == d2");
  }
  switch (c.experiment) {
    case Experiment::threshold_balanced:
      if (c.s_grid.empty() && c.s != 0) c.s_grid = {c.s};
      if (c.s_grid.empty()) c.s_grid = default_balanced_grid(c.d1);
      break;
    case Experiment::threshold_unbalanced:
      if (c.s_grid.empty() && c.s != 0) c.s_grid = {c.s};
      if (c.s_grid.empty()) c.s_grid = default_unbalanced_grid(std::min(c.d1, c.d2));
      break;
    case Experiment::criteria_compare:
      if (c.s == 0) c.s = c.d1 * c.d1;
      break;
    default:
      if (c.s == 0) throw domain_error("config: --s is required for " + std::string(to_string(c.experiment)));
      break;
  }
  if (!c.s_grid.empty()) {
    if (c.s_grid.front() == 0) throw domain_error("config: s-grid values must be positive");
    for (std::size_t i = 1; i < c.s_grid.size(); ++i) {
      if (c.s_grid[i] <= c.s_grid[i - 1]) throw domain_error("config: s-grid must be strictly increasing");
    }
  }
  if (c.p_max == 0) throw domain_error("config: p-max must be >= 1");
  if (c.experiment == Experiment::oracle_check && c.p_max > moment_p_max) {
    throw capacity_error("config: p-max exceeds " + std::to_string(moment_p_max) + " for the exact oracle");
  }
  if (c.experiment == Experiment::moments && c.p_max > moment_p_max) {
    throw capacity_error("config: p-max exceeds " + std::to_string(moment_p_max) + " for the exact oracle");
  }
  return c;
}

/// Mean and standard error of a sample, accumulated in index order.
struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation (n - 1)
  double std_error = 0.0;

  static SampleStats of(std::span<const double> xs) {
    SampleStats st;
    st.count = xs.size();
    if (xs.empty()) return st;
    double m = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double x : xs) {
      ++n;
      const double delta = x - m;
      m += delta / static_cast<double>(n);
      m2 += delta * (x - m);
    }
    st.mean = m;
    if (n > 1) {
      st.std_dev = std::sqrt(m2 / static_cast<double>(n - 1));
      st.std_error = st.std_dev / std::sqrt(static_cast<double>(n));
    }
    return st;
  }
};

inline double z_score(double estimate, double exact, double std_error) {
  if (std_error > 0.0) return (estimate - exact) / std_error;
  return estimate == exact ? 0.0 : std::numeric_limits<double>::infinity();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Tr[(M M^*)^k] for k = 1..p_max.
inline std::vector<double> gram_power_traces(const ComplexMatrix& m, unsigned p_max) {
  const ComplexMatrix gram = m * m.adjoint();
  std::vector<double> out;
  out.reserve(p_max);
  ComplexMatrix power = gram;
  for (unsigned k = 1; k <= p_max; ++k) {
    if (k > 1) power = (power * gram).eval();
    out.push_back(power.trace().real());
  }
  return out;
}

// ---------------------------------------------------------------- spectrum

struct MomentRow {
  unsigned k = 0;
  double empirical = 0.0;
  double reference = 0.0;
};

struct SpectrumResult {
  EmpiricalSpectrum pooled{{}, 1};
  Histogram hist;
  std::vector<MomentRow> moments;
  double ks = 0.0;
  double mean_singular_value = 0.0;
};

/// Singular values of Q pooled over trials, against the quarter-circle law.
inline SpectrumResult run_spectrum(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  const auto shape = BipartiteShape::balanced(c.d1, c.s);
  std::vector<EmpiricalSpectrum> parts(c.trials, EmpiricalSpectrum({}, 1));
  parallel_for(
      c.trials,
      [&](std::size_t t) { parts[t] = singular_values(q_matrix(sample_wishart(shape, {c.seed, t}))); },
      c.workers ? c.workers : worker_count());
  SpectrumResult r;
  r.pooled = EmpiricalSpectrum::pooled(parts);
  r.hist = histogram(r.pooled);
  const QuarterCircleLaw law;
  for (unsigned k = 1; k <= 2 * c.p_max; ++k) {
    r.moments.push_back({k, spectrum_moment(r.pooled, k), law.moment(k)});
  }
  r.ks = ks_distance(r.pooled, law);
  r.mean_singular_value = spectrum_moment(r.pooled, 1);
  return r;
}

// ---------------------------------------------------------------- moments

struct QqMomentRow {
  unsigned p = 0;
  double mc_mean = 0.0;  // (1/d^2) Tr[(Q Q^*)^p]
  double std_error = 0.0;
  Rational exact;  // exact expectation of the same normalized quantity
  double catalan = 0.0;
  double z = 0.0;
};

struct MomentsResult {
  std::vector<QqMomentRow> rows;
  bool passed = true;
};

inline constexpr double z_flag = 4.0;

inline MomentsResult run_moments(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  const auto shape = BipartiteShape::balanced(c.d1, c.s);
  const double norm = static_cast<double>(c.d1 * c.d1);
  std::vector<std::vector<double>> per_trial(c.trials);
  parallel_for(
      c.trials,
      [&](std::size_t t) { per_trial[t] = gram_power_traces(q_matrix(sample_wishart(shape, {c.seed, t})), c.p_max); },
      c.workers ? c.workers : worker_count());
  MomentsResult r;
  for (unsigned p = 1; p <= c.p_max; ++p) {
    std::vector<double> xs(c.trials);
    for (std::size_t t = 0; t < c.trials; ++t) xs[t] = per_trial[t][p - 1] / norm;
    const auto st = SampleStats::of(xs);
    QqMomentRow row;
    row.p = p;
    row.mc_mean = st.mean;
    row.std_error = st.std_error;
    row.exact = exact_moment_qq(p, c.d1, c.s) / Rational(BigInt(c.d1 * c.d1));
    row.catalan = catalan(p).convert_to<double>();
    row.z = z_score(st.mean, to_double(row.exact), st.std_error);
    if (std::abs(row.z) > z_flag) r.passed = false;
    r.rows.push_back(std::move(row));
  }
  return r;
}

// ---------------------------------------------------------------- oracle

struct OracleRow {
  std::string quantity;  // "rr" or "qq"
  unsigned p = 0;
  Rational exact;
  double mc_mean = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  bool flagged = false;
};

struct SignedSumRow {
  unsigned p = 0;
  std::size_t d = 0;
  std::size_t s = 0;
  bool passed = false;
};

struct OracleResult {
  std::vector<OracleRow> rows;
  std::vector<SignedSumRow> signed_checks;
  bool passed = true;
};

/// Exact permutation sums against Monte Carlo means of Tr[(R R^*)^p] and, for
/// balanced shapes, Tr[(Q Q^*)^p].
inline OracleResult run_oracle_check(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  const BipartiteShape shape(c.d1, c.d2, c.s);
  const bool balanced = shape.is_balanced();
  struct Trial {
    std::vector<double> rr;
    std::vector<double> qq;
  };
  std::vector<Trial> per_trial(c.trials);
  parallel_for(
      c.trials,
      [&](std::size_t t) {
        const WishartSample w = sample_wishart(shape, {c.seed, t});
        per_trial[t].rr = gram_power_traces(realign(w.w, shape), c.p_max);
        if (balanced) per_trial[t].qq = gram_power_traces(q_matrix(w), c.p_max);
      },
      c.workers ? c.workers : worker_count());

  OracleResult r;
  auto add_row = [&](std::string quantity, unsigned p, Rational exact, bool use_qq) {
    std::vector<double> xs(c.trials);
    for (std::size_t t = 0; t < c.trials; ++t) xs[t] = use_qq ? per_trial[t].qq[p - 1] : per_trial[t].rr[p - 1];
    const auto st = SampleStats::of(xs);
    OracleRow row{std::move(quantity), p, std::move(exact), st.mean, st.std_error, 0.0, false};
    row.z = z_score(st.mean, to_double(row.exact), st.std_error);
    row.flagged = !(std::abs(row.z) <= z_flag);
    if (row.flagged) r.passed = false;
    r.rows.push_back(std::move(row));
  };
  for (unsigned p = 1; p <= c.p_max; ++p) {
    add_row("rr", p, Rational(exact_moment_rr(p, c.d1, c.d2, c.s)), false);
    if (balanced) add_row("qq", p, exact_moment_qq(p, c.d1, c.s), true);
  }
  if (balanced) {
    for (unsigned p = 1; p <= std::min(c.p_max, signed_sum_p_max); ++p) {
      SignedSumRow row{p, c.d1, c.s, signed_sum_check(p, c.d1, c.s)};
      if (!row.passed) r.passed = false;
      r.signed_checks.push_back(row);
    }
  }
  return r;
}

// ---------------------------------------------------------------- sweeps

struct SweepPoint {
  std::size_t s = 0;
  std::size_t trials = 0;
  std::size_t detect_count = 0;
  double detect_fraction = 0.0;
  double mean_realignment_value = 0.0;
  double std_realignment_value = 0.0;
  Regime predicted = Regime::near_threshold;
  // Unbalanced sweeps: singular values of R / d2 pooled over trials.
  std::optional<double> sv_mean;
  std::optional<double> sv_std;
};

struct SweepResult {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::vector<SweepPoint> points;
  std::optional<double> half_crossing_s;  // linear interpolation of fraction = 1/2
  bool monotone = true;

  std::optional<double> half_crossing_ratio() const {
    if (!half_crossing_s) return std::nullopt;
    return *half_crossing_s / static_cast<double>(d1 * d2);
  }
};

/// First downward crossing of 1/2 along the grid.
inline std::optional<double> half_crossing(const std::vector<SweepPoint>& pts) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double f0 = pts[i].detect_fraction;
    const double f1 = pts[i + 1].detect_fraction;
    if (f0 >= 0.5 && f1 < 0.5) {
      const auto s0 = static_cast<double>(pts[i].s);
      const auto s1 = static_cast<double>(pts[i + 1].s);
      return s0 + (f0 - 0.5) / (f0 - f1) * (s1 - s0);
    }
  }
  return std::nullopt;
}

/// Detect fraction may rise from one grid point to the next by at most two
/// binomial standard errors (floored at 1/trials).
inline bool weakly_decreasing(const std::vector<SweepPoint>& pts) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto se = [](const SweepPoint& p) {
      const double f = p.detect_fraction;
      return std::sqrt(f * (1.0 - f) / static_cast<double>(p.trials));
    };
    const double floor = 1.0 / static_cast<double>(pts[i].trials);
    const double allowance = 2.0 * std::max({se(pts[i]), se(pts[i + 1]), floor});
    if (pts[i + 1].detect_fraction > pts[i].detect_fraction + allowance) return false;
  }
  return true;
}

namespace detail {

struct SweepTrial {
  double value = 0.0;
  std::vector<double> scaled_sv;
};

inline SweepResult run_sweep(const ExperimentConfig& c, bool unbalanced) {
  const std::size_t g = c.s_grid.size();
  std::vector<SweepTrial> slots(g * c.trials);
  parallel_for(
      g * c.trials,
      [&](std::size_t idx) {
        const std::size_t gi = idx / c.trials;
        const std::size_t t = idx % c.trials;
        const BipartiteShape shape(c.d1, c.d2, c.s_grid[gi]);
        const WishartSample w = sample_wishart_nondegenerate(shape, {c.seed, t});
        const DensityMatrix rho = normalized_state(w);
        const EmpiricalSpectrum sv = singular_values(realign(rho.matrix(), shape));
        slots[idx].value = trace_norm(sv);
        if (unbalanced) {
          // sigma(R) / d2 = sigma(rho^R) * tr W / d2
          const double scale = w.trace / static_cast<double>(c.d2);
          for (double v : sv.values()) slots[idx].scaled_sv.push_back(v * scale);
        }
      },
      c.workers ? c.workers : worker_count());

  SweepResult r;
  r.d1 = c.d1;
  r.d2 = c.d2;
  for (std::size_t gi = 0; gi < g; ++gi) {
    SweepPoint pt;
    pt.s = c.s_grid[gi];
    pt.trials = c.trials;
    std::vector<double> values(c.trials);
    std::vector<double> svs;
    for (std::size_t t = 0; t < c.trials; ++t) {
      const auto& slot = slots[gi * c.trials + t];
      values[t] = slot.value;
      if (realignment_detects(slot.value)) ++pt.detect_count;
      svs.insert(svs.end(), slot.scaled_sv.begin(), slot.scaled_sv.end());
    }
    pt.detect_fraction = static_cast<double>(pt.detect_count) / static_cast<double>(c.trials);
    const auto st = SampleStats::of(values);
    pt.mean_realignment_value = st.mean;
    pt.std_realignment_value = st.std_dev;
    pt.predicted = predicted_regime(BipartiteShape(c.d1, c.d2, pt.s));
    if (unbalanced) {
      const auto sv_st = SampleStats::of(svs);
      pt.sv_mean = sv_st.mean;
      pt.sv_std = sv_st.std_dev;
    }
    r.points.push_back(pt);
  }
  r.half_crossing_s = half_crossing(r.points);
  r.monotone = weakly_decreasing(r.points);
  return r;
}

}  // namespace detail

inline SweepResult run_threshold_balanced(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.experiment = Experiment::threshold_balanced;
  return detail::run_sweep(resolve(c), false);
}

inline SweepResult run_threshold_unbalanced(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.experiment = Experiment::threshold_unbalanced;
  return detail::run_sweep(resolve(c), true);
}

// ---------------------------------------------------------------- compare

struct CompareTrial {
  std::size_t trial = 0;
  double realignment_value = 0.0;
  bool realignment_detects = false;
  double ppt_min_eig = 0.0;
  bool is_ppt = true;
};

struct CompareResult {
  std::vector<CompareTrial> trials;
  double fraction_non_ppt = 0.0;
  double fraction_realignment_detects = 0.0;
  double fraction_non_ppt_not_realigned = 0.0;
  std::size_t violations = 0;  // realignment detects but the state is PPT
};

/// PPT versus realignment on the same induced states.
inline CompareResult run_criteria_compare(const ExperimentConfig& config, std::ostream* log = &std::cerr) {
  ExperimentConfig c = config;
  c.experiment = Experiment::criteria_compare;
  c = resolve(c);
  const auto shape = BipartiteShape::balanced(c.d1, c.s);
  CompareResult r;
  r.trials.resize(c.trials);
  parallel_for(
      c.trials,
      [&](std::size_t t) {
        const CriterionReport rep = evaluate_criteria(induced_state(shape, {c.seed, t}));
        r.trials[t] = {t, rep.realignment_value, rep.realignment_detects, rep.ppt_min_eig, !rep.ppt_detects};
      },
      c.workers ? c.workers : worker_count());
  std::size_t non_ppt = 0;
  std::size_t detects = 0;
  std::size_t gap = 0;
  for (const auto& tr : r.trials) {
    non_ppt += tr.is_ppt ? 0 : 1;
    detects += tr.realignment_detects ? 1 : 0;
    gap += (!tr.is_ppt && !tr.realignment_detects) ? 1 : 0;
    if (tr.realignment_detects && tr.is_ppt) {
      ++r.violations;
      if (log != nullptr) {
        *log << "compare: trial " << tr.trial << " detected by realignment but PPT (value " << tr.realignment_value
             << ", min eig " << tr.ppt_min_eig << ")\n";
      }
    }
  }
  const auto n = static_cast<double>(c.trials);
  r.fraction_non_ppt = static_cast<double>(non_ppt) / n;
  r.fraction_realignment_detects = static_cast<double>(detects) / n;
  r.fraction_non_ppt_not_realigned = static_cast<double>(gap) / n;
  return r;
}

}  // namespace realign::harness
