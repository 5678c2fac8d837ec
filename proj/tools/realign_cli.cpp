// realign: command-line driver for the Monte Carlo and exact-oracle
// experiments.
//
//   realign spectrum   --d 40 --s 40 --trials 10 --out spectrum.csv
//   realign moments    --d 6 --s 10 --trials 2000 --p-max 3
//   realign oracle     --d1 2 --d2 3 --s 2 --trials 100000 --p-max 2 --format json
//   realign threshold  --d 20 --s-grid 200,288,480 --trials 100
//   realign unbalanced --d1 2 --d2 250 --s-grid 3,4,5,6 --trials 100
//   realign compare    --d 20 --s 400 --trials 100
//
// Exit status: 0 success, 1 usage or I/O error, 2 built-in check failed.

#include <cstdint>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "realign/report.hpp"

namespace {

using realign::harness::Experiment;
using realign::harness::ExperimentConfig;
using realign::harness::OutputFormat;

struct Options {
  std::size_t d = 0;
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t s = 0;
  std::vector<std::size_t> s_grid;
  std::size_t trials = 1;
  unsigned p_max = 2;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
};

void add_common(CLI::App* sub, Options& o, bool grid) {
  sub->add_option("--d", o.d, "Local dimension for balanced shapes (d1 = d2 = d)")->check(CLI::PositiveNumber);
  sub->add_option("--d1", o.d1, "First factor dimension")->check(CLI::PositiveNumber);
  sub->add_option("--d2", o.d2, "Second factor dimension")->check(CLI::PositiveNumber);
  sub->add_option("--s", o.s, "Ancilla dimension")->check(CLI::PositiveNumber);
  if (grid) {
    sub->add_option("--s-grid", o.s_grid, "Strictly increasing ancilla dimensions, comma separated")
        ->delimiter(',');
  }
  sub->add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  sub->add_option("--p-max", o.p_max, "Largest moment order")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "64-bit base seed; trial t uses stream t");
  sub->add_option("--out", o.out, "Output file (stdout when omitted or '-')");
  sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Realignment criterion experiments on random induced states"};
  app.require_subcommand(1);

  Options opts;
  const std::map<std::string, std::pair<Experiment, OutputFormat>> kinds{
      {"spectrum", {Experiment::spectrum, OutputFormat::csv}},
      {"moments", {Experiment::moments, OutputFormat::csv}},
      {"oracle", {Experiment::oracle_check, OutputFormat::json}},
      {"threshold", {Experiment::threshold_balanced, OutputFormat::csv}},
      {"unbalanced", {Experiment::threshold_unbalanced, OutputFormat::csv}},
      {"compare", {Experiment::criteria_compare, OutputFormat::csv}},
  };
  const std::map<std::string, std::string> help{
      {"spectrum", "Singular values of Q against the quarter-circle law"},
      {"moments", "Monte Carlo moments of Q Q^* against exact values and Catalan numbers"},
      {"oracle", "Exact permutation-sum moments against Monte Carlo"},
      {"threshold", "Balanced detection sweep over s"},
      {"unbalanced", "Unbalanced detection sweep over s"},
      {"compare", "PPT versus realignment on the same states"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, kind] : kinds) {
    subs[name] = app.add_subcommand(name, help.at(name));
    add_common(subs[name], opts, kind.first == Experiment::threshold_balanced ||
                                     kind.first == Experiment::threshold_unbalanced);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  ExperimentConfig config;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) {
      config.experiment = kinds.at(name).first;
      config.format = kinds.at(name).second;
    }
  }
  if (opts.d != 0) {
    if ((opts.d1 != 0 && opts.d1 != opts.d) || (opts.d2 != 0 && opts.d2 != opts.d)) {
      std::cerr << "error: --d conflicts with --d1/--d2\n";
      return 1;
    }
    opts.d1 = opts.d2 = opts.d;
  }
  config.d1 = opts.d1;
  config.d2 = opts.d2;
  config.s = opts.s;
  config.s_grid = opts.s_grid;
  config.trials = opts.trials;
  config.p_max = opts.p_max;
  config.seed = opts.seed;
  config.output_path = opts.out;
  if (!opts.format.empty()) config.format = opts.format == "json" ? OutputFormat::json : OutputFormat::csv;

  try {
    config = realign::harness::resolve(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    const auto outcome = realign::harness::run_and_write(config);
    if (!outcome.checks_passed) {
      std::cerr << "realign: built-in checks failed for " << realign::harness::to_string(config.experiment) << '\n';
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
