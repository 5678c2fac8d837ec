// Acceptance suite: one PASS/FAIL line per numbered criterion. Tolerances and
// sizes are fixed constants below; the process exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "realign/realign.hpp"

namespace {

using namespace realign;
using namespace realign::harness;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& v) {
    os_ << v;
    return *this;
  }
  std::string str() const { return os_.str(); }
  operator std::string() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

struct Criterion {
  int number;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> run;
};

// ---------------------------------------------------------------- 1

Outcome exact_closed_forms() {
  int checked = 0;
  for (long d = 2; d <= 8; ++d) {
    for (long s = 2; s <= 8; ++s) {
      const Rational p1 = exact_moment_qq(1, d, s);
      const Rational p2 = exact_moment_qq(2, d, s);
      const Rational want2 = Rational(2 * d * d) + Rational(2 * d * d, s) + 1 + Rational(4, s);
      if (p1 != Rational(d * d) || p2 != want2) {
        return {false, Detail() << "mismatch at d=" << d << " s=" << s << ": p1=" << to_decimal_string(p1)
                                << " p2=" << to_decimal_string(p2)};
      }
      ++checked;
    }
  }
  return {true, Detail() << checked << " (d,s) pairs exact for p=1,2"};
}

// ---------------------------------------------------------------- 2

Outcome oracle_vs_monte_carlo() {
  constexpr std::size_t trials = 100000;
  constexpr double z_max = 4.0;
  Detail msg;
  bool pass = true;
  double worst = 0.0;
  for (auto [d1, d2, s] : std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>{{2, 2, 2}, {2, 3, 2}, {3, 3, 4}}) {
    ExperimentConfig c;
    c.experiment = Experiment::oracle_check;
    c.d1 = d1;
    c.d2 = d2;
    c.s = s;
    c.trials = trials;
    c.p_max = 2;
    c.seed = 20240601;
    const auto r = run_oracle_check(c);
    for (const auto& row : r.rows) {
      worst = std::max(worst, std::abs(row.z));
      if (!(std::abs(row.z) <= z_max)) {
        pass = false;
        msg << "[" << row.quantity << " p=" << row.p << " at (" << d1 << "," << d2 << "," << s << ") z=" << row.z
            << "] ";
      }
    }
  }
  msg << "max |z| = " << worst << " over rr and qq rows, N = " << trials;
  return {pass, msg.str()};
}

// ---------------------------------------------------------------- 3

Outcome fixed_point_cancellation() {
  int checked = 0;
  for (unsigned p = 1; p <= 2; ++p) {
    for (long d : {2, 3, 5}) {
      for (long s : {2, 3, 5}) {
        if (!signed_sum_check(p, d, s)) return {false, Detail() << "identity fails at p=" << p << " d=" << d << " s=" << s};
        ++checked;
      }
    }
  }
  return {true, Detail() << checked << " signed sums equal the fixed-point-free sums exactly"};
}

// ---------------------------------------------------------------- 4

Outcome catalan_limit() {
  constexpr double rel_tol = 0.05;
  Detail msg;
  bool pass = true;
  for (unsigned p = 1; p <= 4; ++p) {
    const double v = to_double(exact_moment_qq(p, 1000, 1000) / Rational(1000000));
    const double cat = catalan(p).convert_to<double>();
    const double rel = std::abs(v / cat - 1.0);
    if (!(rel <= rel_tol)) pass = false;
    msg << "p=" << p << ": " << v << " vs " << cat << "; ";
  }
  return {pass, msg.str()};
}

// ---------------------------------------------------------------- 5

Outcome saturating_set() {
  Detail msg;
  for (unsigned p = 1; p <= 4; ++p) {
    std::vector<Permutation> fats;
    for (const auto& pi : enumerate_noncrossing(p)) fats.push_back(fat(pi));
    std::sort(fats.begin(), fats.end());
    const auto sat = saturating_permutations(p);
    if (sat != fats || BigInt(sat.size()) != catalan(p)) {
      return {false, Detail() << "p=" << p << ": " << sat.size() << " saturating vs " << fats.size() << " fat pairings"};
    }
    msg << "p=" << p << ": " << sat.size() << "; ";
  }
  return {true, msg.str() + "sets equal"};
}

// ---------------------------------------------------------------- 6

Outcome quarter_circle_spectrum() {
  constexpr double ks_max = 0.05;
  constexpr double m2_tol = 0.1;
  constexpr double mean_rel_tol = 0.03;
  ExperimentConfig c;
  c.experiment = Experiment::spectrum;
  c.d1 = c.d2 = 40;
  c.s = 40;
  c.trials = 10;
  c.p_max = 1;
  c.seed = 7;
  const auto r = run_spectrum(c);
  const double m2 = spectrum_moment(r.pooled, 2);
  const double target = 8.0 / (3.0 * std::numbers::pi);
  const double rel = std::abs(r.mean_singular_value / target - 1.0);
  const bool pass = r.ks <= ks_max && std::abs(m2 - 1.0) <= m2_tol && rel <= mean_rel_tol;
  return {pass, Detail() << "KS=" << r.ks << " m2=" << m2 << " mean=" << r.mean_singular_value << " (rel dev "
                         << rel << ")"};
}

// ---------------------------------------------------------------- 7

Outcome variance_decay() {
  // Fit C = max Var / d^2 over d, s in {2..8}; the same C must bound Var / d^2
  // along d = s in {20, 50, 100}, where Var / d^4 must decrease.
  const auto terms1 = qq_moment_terms(1);
  const auto terms2 = qq_second_moment_terms(1);
  auto variance = [&](long d, long s) {
    const Rational m1 = exact_moment_qq(terms1, d, s);
    return exact_second_moment_qq(terms2, d, s) - m1 * m1;
  };
  double c_fit = 0.0;
  for (long d = 2; d <= 8; ++d) {
    for (long s = 2; s <= 8; ++s) {
      const Rational v = variance(d, s);
      if (v < 0) return {false, Detail() << "negative variance at d=" << d << " s=" << s};
      c_fit = std::max(c_fit, to_double(v / Rational(d * d)));
    }
  }
  Detail msg;
  msg << "C=" << c_fit << "; Var/d^4:";
  bool pass = true;
  double prev = std::numeric_limits<double>::infinity();
  for (long d : {20, 50, 100}) {
    const Rational v = variance(d, d);
    const double over_d2 = to_double(v / Rational(d * d));
    const double over_d4 = to_double(v / Rational(d * d * d * d));
    msg << " d=" << d << ": " << over_d4;
    if (!(over_d2 <= c_fit) || !(over_d4 < prev)) pass = false;
    prev = over_d4;
  }
  return {pass, msg.str()};
}

// ---------------------------------------------------------------- 8

Outcome balanced_threshold() {
  constexpr double low_min = 0.95;
  constexpr double high_max = 0.05;
  ExperimentConfig c;
  c.experiment = Experiment::threshold_balanced;
  c.d1 = c.d2 = 20;
  c.s_grid = {200, 240, 280, 320, 360, 400, 440, 480};
  c.trials = 100;
  c.seed = 11;
  const auto r = run_threshold_balanced(c);
  const double f_low = r.points.front().detect_fraction;
  const double f_high = r.points.back().detect_fraction;
  const auto ratio = r.half_crossing_ratio();
  const bool pass = f_low >= low_min && f_high <= high_max && ratio && *ratio >= 0.5 && *ratio <= 0.95;
  Detail msg;
  msg << "fraction(s=200)=" << f_low << " fraction(s=480)=" << f_high << " half-crossing s/d^2=";
  if (ratio) msg << *ratio; else msg << "none";
  return {pass, msg.str()};
}

// ---------------------------------------------------------------- 9

Outcome unbalanced_threshold() {
  constexpr double low_min = 0.9;
  constexpr double high_max = 0.1;
  constexpr double mean_rel_tol = 0.05;
  constexpr double std_rel_max = 0.15;
  ExperimentConfig c;
  c.experiment = Experiment::threshold_unbalanced;
  c.d1 = 2;
  c.d2 = 250;
  c.s_grid = {3, 6};
  c.trials = 100;
  c.seed = 13;
  const auto r = run_threshold_unbalanced(c);
  const double f3 = r.points[0].detect_fraction;
  const double f6 = r.points[1].detect_fraction;

  ExperimentConfig conc = c;
  conc.d2 = 400;
  conc.s_grid = {5};
  const auto rc = run_threshold_unbalanced(conc);
  const double root = std::sqrt(5.0);
  const double mean = *rc.points[0].sv_mean;
  const double sd = *rc.points[0].sv_std;
  const bool pass = f3 >= low_min && f6 <= high_max && std::abs(mean / root - 1.0) <= mean_rel_tol &&
                    sd <= std_rel_max * root;
  return {pass, Detail() << "fraction(s=3)=" << f3 << " fraction(s=6)=" << f6 << "; d2=400, s=5: mean sv(R/d2)="
                         << mean << " std=" << sd << " vs sqrt5=" << root};
}

// ---------------------------------------------------------------- 10

Outcome criteria_comparison() {
  constexpr double non_ppt_min = 0.9;
  constexpr double gap_min = 0.8;
  ExperimentConfig c;
  c.experiment = Experiment::criteria_compare;
  c.d1 = c.d2 = 20;
  c.s = 400;
  c.trials = 100;
  c.seed = 17;
  std::ostringstream log;
  const auto r = run_criteria_compare(c, &log);
  const bool pass = r.fraction_non_ppt >= non_ppt_min && r.fraction_non_ppt_not_realigned >= gap_min;
  return {pass, Detail() << "non-PPT=" << r.fraction_non_ppt << " non-PPT and undetected="
                         << r.fraction_non_ppt_not_realigned << " logged violations=" << r.violations};
}

// ---------------------------------------------------------------- 11

Outcome structural_invariants() {
  Detail msg;
  // Involution and round trip, bit-exact.
  for (std::uint64_t t = 0; t < 30; ++t) {
    const std::size_t d = 1 + t % 6;
    const BipartiteShape sq(d, d, 1);
    const ComplexMatrix a = sample_gaussian(d * d, d * d, {101, t});
    if (!(realign::realign(realign::realign(a, sq), sq) == a)) return {false, "realignment is not an exact involution"};
    const BipartiteShape rect(1 + t % 3, 2 + t % 5, 1);
    const ComplexMatrix b = sample_gaussian(rect.dim(), rect.dim(), {102, t});
    if (!(realign_inverse(realign::realign(b, rect), rect) == b)) return {false, "round trip is not exact"};
  }
  // Id^R = d E, exactly.
  for (std::size_t d = 1; d <= 8; ++d) {
    const auto n = static_cast<Eigen::Index>(d * d);
    const ComplexMatrix idr = realign::realign(ComplexMatrix::Identity(n, n), BipartiteShape(d, d, 1));
    if (!(idr == ComplexMatrix(static_cast<double>(d) * max_entangled(d).matrix()))) return {false, "Id^R != dE"};
  }
  // Pure product states.
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal;
  double worst_product = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 3;
    ComplexVector u(d), v(d);
    for (auto& x : u) x = {normal(gen), normal(gen)};
    for (auto& x : v) x = {normal(gen), normal(gen)};
    worst_product = std::max(worst_product, std::abs(realignment_value(product_state(u, v)) - 1.0));
  }
  if (!(worst_product <= 1e-8)) return {false, Detail() << "product state deviation " << worst_product};
  // Gauge sandwich.
  for (std::uint64_t t = 0; t < 100; ++t) {
    const std::size_t d = 2 + t % 3;
    const DensityMatrix rho = induced_state(BipartiteShape::balanced(d, 1 + t % 12), {103, t});
    const double dd = static_cast<double>(d);
    const double dev = trace_norm(ComplexMatrix(realign::realign(rho.matrix(), rho.shape()) - max_entangled(d).matrix() / dd));
    const double g = gauge_norm(rho);
    if (!(dd / (dd + 1.0) * dev <= g + gauge_tolerance && g <= dd / (dd - 1.0) * dev + gauge_tolerance)) {
      return {false, Detail() << "gauge sandwich fails on state " << t};
    }
  }
  // #sigma + |sigma| = n on S_5.
  std::vector<std::uint32_t> img(5);
  std::iota(img.begin(), img.end(), 0U);
  int perms = 0;
  do {
    const Permutation sigma(img);
    if (cycle_count(sigma) + length(sigma) != 5) return {false, "cycle count identity fails"};
    ++perms;
  } while (std::next_permutation(img.begin(), img.end()));
  // NC(p) counts.
  for (unsigned p = 1; p <= 7; ++p) {
    if (BigInt(enumerate_noncrossing(p).size()) != catalan(p)) return {false, Detail() << "|NC(" << p << ")| wrong"};
  }
  msg << "bit-exact reshuffles, Id^R=dE, product dev " << worst_product << ", 100 sandwiches, " << perms
      << " perms, NC(1..7)";
  return {true, msg.str()};
}

// ---------------------------------------------------------------- 12

Outcome determinism() {
  std::vector<ExperimentConfig> configs;
  auto add = [&](Experiment e, std::size_t d1, std::size_t d2, std::size_t s, std::vector<std::size_t> grid) {
    ExperimentConfig c;
    c.experiment = e;
    c.d1 = d1;
    c.d2 = d2;
    c.s = s;
    c.s_grid = std::move(grid);
    c.trials = 8;
    c.seed = 2024;
    configs.push_back(c);
  };
  add(Experiment::spectrum, 8, 8, 8, {});
  add(Experiment::moments, 4, 4, 5, {});
  add(Experiment::oracle_check, 2, 3, 2, {});
  add(Experiment::threshold_balanced, 6, 6, 0, {});
  add(Experiment::threshold_unbalanced, 2, 20, 0, {});
  add(Experiment::criteria_compare, 4, 4, 0, {});
  for (auto& c : configs) {
    c.workers = 1;
    const std::string first = run_experiment(c, nullptr).content;
    const std::string again = run_experiment(c, nullptr).content;
    c.workers = 4;
    const std::string threaded = run_experiment(c, nullptr).content;
    if (first != again || first != threaded) {
      return {false, Detail() << "output differs for " << to_string(c.experiment)};
    }
  }
  return {true, Detail() << configs.size() << " experiments byte-identical across reruns and worker counts"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "exact closed forms for E Tr QQ* and E Tr (QQ*)^2", 1.0, exact_closed_forms},
      {2, "exact oracle vs Monte Carlo (N = 1e5, |z| <= 4)", 300.0, oracle_vs_monte_carlo},
      {3, "fixed-point cancellation identity", 60.0, fixed_point_cancellation},
      {4, "Catalan limit of exact moments at d = s = 1000", 300.0, catalan_limit},
      {5, "saturating permutations equal fat(NC(p))", 60.0, saturating_set},
      {6, "quarter-circle spectrum of Q at d = s = 40", 120.0, quarter_circle_spectrum},
      {7, "variance of Tr QQ* bounded by C d^2", 60.0, variance_decay},
      {8, "balanced detection threshold at d = 20", 600.0, balanced_threshold},
      {9, "unbalanced detection threshold at d1 = 2", 600.0, unbalanced_threshold},
      {10, "PPT versus realignment at d = 20, s = 400", 300.0, criteria_comparison},
      {11, "structural invariants", 120.0, structural_invariants},
      {12, "determinism", 600.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool pass = out.pass && in_budget;
    if (!pass) ++failures;
    std::printf("%s criterion %d: %s | %s | %.2fs (budget %.0fs)%s\n", pass ? "PASS" : "FAIL", c.number,
                c.title.c_str(), out.detail.c_str(), secs, c.budget_seconds, in_budget ? "" : " OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
