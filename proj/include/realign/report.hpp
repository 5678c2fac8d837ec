#pragma once

// Output files for harness experiments.
//
// CSV: UTF-8, ',' delimiter, '.' decimal point. A few '#' comment lines carry
// the version, experiment, config hash, summary values and the column
// schema; the header row follows. Reals print with 17 significant digits so
// reruns are byte-identical. JSON carries the same content under "meta".
// Exact oracle values are decimal strings ("num" or "num/den").

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "realign/harness.hpp"

namespace realign::harness {

inline constexpr std::string_view version = "v0.1.0";

inline nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  // Output path and worker count are excluded: they never change results.
  return nlohmann::ordered_json{{"experiment", to_string(c.experiment)},
                                {"d1", c.d1},
                                {"d2", c.d2},
                                {"s", c.s},
                                {"s_grid", c.s_grid},
                                {"trials", c.trials},
                                {"p_max", c.p_max},
                                {"seed", c.seed},
                                {"format", to_string(c.format)}};
}

/// FNV-1a 64 of the canonical config JSON, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string fmt_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

class CsvWriter {
 public:
  CsvWriter(const ExperimentConfig& c, std::vector<std::string> columns) : columns_(std::move(columns)) {
    out_ << "# realign " << version << '\n';
    out_ << "# experiment=" << to_string(c.experiment) << " config_hash=" << config_hash(c) << '\n';
  }

  void summary(const std::string& key, const std::string& value) { out_ << "# " << key << '=' << value << '\n'; }

  void row(const std::vector<std::string>& cells) {
    if (!header_written_) {
      out_ << "# columns: " << join(columns_, ',') << '\n' << join(columns_, ',') << '\n';
      header_written_ = true;
    }
    out_ << join(cells, ',') << '\n';
  }

  std::string str() {
    if (!header_written_) {
      out_ << "# columns: " << join(columns_, ',') << '\n' << join(columns_, ',') << '\n';
      header_written_ = true;
    }
    return out_.str();
  }

 private:
  static std::string join(const std::vector<std::string>& xs, char sep) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) s += sep;
      s += xs[i];
    }
    return s;
  }

  std::vector<std::string> columns_;
  std::ostringstream out_;
  bool header_written_ = false;
};

inline nlohmann::ordered_json meta(const ExperimentConfig& c, const std::vector<std::string>& schema) {
  return {{"version", version},
          {"experiment", to_string(c.experiment)},
          {"config_hash", config_hash(c)},
          {"config", config_json(c)},
          {"schema", schema}};
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline nlohmann::ordered_json real_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace detail

inline std::string format_spectrum(const ExperimentConfig& c, const SpectrumResult& r) {
  const std::vector<std::string> cols{"section", "index", "lower", "upper", "value", "reference"};
  const QuarterCircleLaw law;
  const double width = r.hist.bin_width();
  const auto total = static_cast<double>(r.pooled.size());
  auto bin_density = [&](std::size_t b) { return static_cast<double>(r.hist.counts[b]) / (total * width); };
  auto bin_reference = [&](std::size_t b) {
    const double lo = r.hist.lower + width * static_cast<double>(b);
    return (law.cdf(lo + width) - law.cdf(lo)) / width;
  };
  if (c.format == OutputFormat::json) {
    nlohmann::ordered_json j;
    j["meta"] = detail::meta(c, cols);
    j["ks_distance"] = r.ks;
    j["mean_singular_value"] = r.mean_singular_value;
    j["qc_mean"] = law.mean();
    auto& bins = j["histogram"] = nlohmann::ordered_json::array();
    for (std::size_t b = 0; b < r.hist.counts.size(); ++b) {
      const double lo = r.hist.lower + width * static_cast<double>(b);
      bins.push_back({{"lower", lo},
                      {"upper", lo + width},
                      {"count", r.hist.counts[b]},
                      {"density", bin_density(b)},
                      {"qc_density", bin_reference(b)}});
    }
    auto& ms = j["moments"] = nlohmann::ordered_json::array();
    for (const auto& m : r.moments) ms.push_back({{"k", m.k}, {"empirical", m.empirical}, {"qc", m.reference}});
    return detail::dump(j);
  }
  detail::CsvWriter w(c, cols);
  w.summary("ks_distance", fmt_real(r.ks));
  w.summary("mean_singular_value", fmt_real(r.mean_singular_value));
  for (std::size_t b = 0; b < r.hist.counts.size(); ++b) {
    const double lo = r.hist.lower + width * static_cast<double>(b);
    w.row({"bin", std::to_string(b), fmt_real(lo), fmt_real(lo + width), fmt_real(bin_density(b)),
           fmt_real(bin_reference(b))});
  }
  for (const auto& m : r.moments) {
    w.row({"moment", std::to_string(m.k), "", "", fmt_real(m.empirical), fmt_real(m.reference)});
  }
  w.row({"ks", "0", "", "", fmt_real(r.ks), "0"});
  w.row({"mean", "1", "", "", fmt_real(r.mean_singular_value), fmt_real(law.mean())});
  return w.str();
}

inline std::string format_moments(const ExperimentConfig& c, const MomentsResult& r) {
  const std::vector<std::string> cols{"p", "mc_mean", "std_error", "exact", "exact_value", "catalan", "z"};
  if (c.format == OutputFormat::json) {
    nlohmann::ordered_json j;
    j["meta"] = detail::meta(c, cols);
    j["passed"] = r.passed;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& x : r.rows) {
      rows.push_back({{"p", x.p},
                      {"mc_mean", x.mc_mean},
                      {"std_error", x.std_error},
                      {"exact", to_decimal_string(x.exact)},
                      {"exact_value", to_double(x.exact)},
                      {"catalan", x.catalan},
                      {"z", detail::real_or_null(x.z)}});
    }
    return detail::dump(j);
  }
  detail::CsvWriter w(c, cols);
  w.summary("passed", r.passed ? "true" : "false");
  for (const auto& x : r.rows) {
    w.row({std::to_string(x.p), fmt_real(x.mc_mean), fmt_real(x.std_error), to_decimal_string(x.exact),
           fmt_real(to_double(x.exact)), fmt_real(x.catalan), fmt_real(x.z)});
  }
  return w.str();
}

inline std::string format_oracle(const ExperimentConfig& c, const OracleResult& r) {
  const std::vector<std::string> cols{"quantity", "p", "exact", "exact_value", "mc_mean", "std_error", "z", "flagged"};
  if (c.format == OutputFormat::json) {
    nlohmann::ordered_json j;
    j["meta"] = detail::meta(c, cols);
    j["shape"] = {{"d1", c.d1}, {"d2", c.d2}, {"s", c.s}};
    j["passed"] = r.passed;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& x : r.rows) {
      rows.push_back({{"quantity", x.quantity},
                      {"p", x.p},
                      {"exact", to_decimal_string(x.exact)},
                      {"exact_value", to_double(x.exact)},
                      {"mc_mean", x.mc_mean},
                      {"std_error", x.std_error},
                      {"z", detail::real_or_null(x.z)},
                      {"flagged", x.flagged}});
    }
    auto& sc = j["signed_sum_checks"] = nlohmann::ordered_json::array();
    for (const auto& x : r.signed_checks) sc.push_back({{"p", x.p}, {"d", x.d}, {"s", x.s}, {"passed", x.passed}});
    return detail::dump(j);
  }
  detail::CsvWriter w(c, cols);
  w.summary("passed", r.passed ? "true" : "false");
  for (const auto& x : r.signed_checks) {
    w.summary("signed_sum_check_p" + std::to_string(x.p), x.passed ? "true" : "false");
  }
  for (const auto& x : r.rows) {
    w.row({x.quantity, std::to_string(x.p), to_decimal_string(x.exact), fmt_real(to_double(x.exact)),
           fmt_real(x.mc_mean), fmt_real(x.std_error), fmt_real(x.z), x.flagged ? "true" : "false"});
  }
  return w.str();
}

inline std::string format_sweep(const ExperimentConfig& c, const SweepResult& r, bool unbalanced) {
  std::vector<std::string> cols{"s",       "s_over_d1d2",           "trials", "detect_count", "detect_fraction",
                                "mean_realignment_value", "std_realignment_value", "predicted_regime"};
  if (unbalanced) {
    cols.insert(cols.end(), {"sv_mean_over_d2", "sv_std_over_d2", "sqrt_s"});
  }
  const auto norm = static_cast<double>(r.d1 * r.d2);
  if (c.format == OutputFormat::json) {
    nlohmann::ordered_json j;
    j["meta"] = detail::meta(c, cols);
    j["monotone"] = r.monotone;
    j["half_crossing_s"] = r.half_crossing_s ? nlohmann::ordered_json(*r.half_crossing_s) : nlohmann::ordered_json();
    j["half_crossing_ratio"] =
        r.half_crossing_ratio() ? nlohmann::ordered_json(*r.half_crossing_ratio()) : nlohmann::ordered_json();
    auto& pts = j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : r.points) {
      nlohmann::ordered_json o{{"s", p.s},
                               {"s_over_d1d2", static_cast<double>(p.s) / norm},
                               {"trials", p.trials},
                               {"detect_count", p.detect_count},
                               {"detect_fraction", p.detect_fraction},
                               {"mean_realignment_value", p.mean_realignment_value},
                               {"std_realignment_value", p.std_realignment_value},
                               {"predicted_regime", to_string(p.predicted)}};
      if (unbalanced) {
        o["sv_mean_over_d2"] = p.sv_mean.value_or(0.0);
        o["sv_std_over_d2"] = p.sv_std.value_or(0.0);
        o["sqrt_s"] = std::sqrt(static_cast<double>(p.s));
      }
      pts.push_back(std::move(o));
    }
    return detail::dump(j);
  }
  detail::CsvWriter w(c, cols);
  w.summary("monotone", r.monotone ? "true" : "false");
  w.summary("half_crossing_s", r.half_crossing_s ? fmt_real(*r.half_crossing_s) : "none");
  w.summary("half_crossing_ratio", r.half_crossing_ratio() ? fmt_real(*r.half_crossing_ratio()) : "none");
  for (const auto& p : r.points) {
    std::vector<std::string> cells{std::to_string(p.s),
                                   fmt_real(static_cast<double>(p.s) / norm),
                                   std::to_string(p.trials),
                                   std::to_string(p.detect_count),
                                   fmt_real(p.detect_fraction),
                                   fmt_real(p.mean_realignment_value),
                                   fmt_real(p.std_realignment_value),
                                   std::string(to_string(p.predicted))};
    if (unbalanced) {
      cells.push_back(fmt_real(p.sv_mean.value_or(0.0)));
      cells.push_back(fmt_real(p.sv_std.value_or(0.0)));
      cells.push_back(fmt_real(std::sqrt(static_cast<double>(p.s))));
    }
    w.row(cells);
  }
  return w.str();
}

inline std::string format_compare(const ExperimentConfig& c, const CompareResult& r) {
  const std::vector<std::string> cols{"trial", "realignment_value", "realignment_detects", "ppt_min_eig", "is_ppt"};
  if (c.format == OutputFormat::json) {
    nlohmann::ordered_json j;
    j["meta"] = detail::meta(c, cols);
    j["summary"] = {{"fraction_non_ppt", r.fraction_non_ppt},
                    {"fraction_realignment_detects", r.fraction_realignment_detects},
                    {"fraction_non_ppt_not_realigned", r.fraction_non_ppt_not_realigned},
                    {"violations", r.violations}};
    auto& rows = j["trials"] = nlohmann::ordered_json::array();
    for (const auto& t : r.trials) {
      rows.push_back({{"trial", t.trial},
                      {"realignment_value", t.realignment_value},
                      {"realignment_detects", t.realignment_detects},
                      {"ppt_min_eig", t.ppt_min_eig},
                      {"is_ppt", t.is_ppt}});
    }
    return detail::dump(j);
  }
  detail::CsvWriter w(c, cols);
  w.summary("fraction_non_ppt", fmt_real(r.fraction_non_ppt));
  w.summary("fraction_realignment_detects", fmt_real(r.fraction_realignment_detects));
  w.summary("fraction_non_ppt_not_realigned", fmt_real(r.fraction_non_ppt_not_realigned));
  w.summary("violations", std::to_string(r.violations));
  for (const auto& t : r.trials) {
    w.row({std::to_string(t.trial), fmt_real(t.realignment_value), t.realignment_detects ? "true" : "false",
           fmt_real(t.ppt_min_eig), t.is_ppt ? "true" : "false"});
  }
  return w.str();
}

struct RunOutcome {
  std::string content;
  bool checks_passed = true;  // oracle/moments z-scores, sweep monotonicity
};

/// Runs the configured experiment and renders its output file contents.
inline RunOutcome run_experiment(const ExperimentConfig& config, std::ostream* log = &std::cerr) {
  const ExperimentConfig c = resolve(config);
  switch (c.experiment) {
    case Experiment::spectrum:
      return {format_spectrum(c, run_spectrum(c)), true};
    case Experiment::moments: {
      const auto r = run_moments(c);
      return {format_moments(c, r), r.passed};
    }
    case Experiment::oracle_check: {
      const auto r = run_oracle_check(c);
      return {format_oracle(c, r), r.passed};
    }
    case Experiment::threshold_balanced: {
      const auto r = run_threshold_balanced(c);
      return {format_sweep(c, r, false), r.monotone};
    }
    case Experiment::threshold_unbalanced: {
      const auto r = run_threshold_unbalanced(c);
      return {format_sweep(c, r, true), r.monotone};
    }
    case Experiment::criteria_compare:
      return {format_compare(c, run_criteria_compare(c, log)), true};
  }
  throw domain_error("run_experiment: unknown experiment");
}

/// Runs and writes the file at config.output_path (stdout when empty or "-").
inline RunOutcome run_and_write(const ExperimentConfig& config, std::ostream* log = &std::cerr) {
  RunOutcome outcome = run_experiment(config, log);
  if (config.output_path.empty() || config.output_path == "-") {
    std::fwrite(outcome.content.data(), 1, outcome.content.size(), stdout);
    return outcome;
  }
  std::ofstream out(config.output_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file " + config.output_path);
  out << outcome.content;
  if (!out) throw std::runtime_error("failed writing " + config.output_path);
  return outcome;
}

}  // namespace realign::harness
