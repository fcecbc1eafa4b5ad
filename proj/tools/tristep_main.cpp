// tristep: three-step cache timing-channel simulator and benchmark suite.
//
// Subcommands: catalog, suite, sweep, secure-eval, emit-native.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tristep/catalog.hpp"
#include "tristep/catalog_io.hpp"
#include "tristep/configs.hpp"
#include "tristep/harness.hpp"
#include "tristep/machine_io.hpp"
#include "tristep/native_emit.hpp"
#include "tristep/report.hpp"
#include "tristep/sensitivity.hpp"

namespace fs = std::filesystem;
using namespace tristep;

namespace {

struct CommonArgs {
  std::string machine_path;
  std::string catalog_path;
  std::string out_dir = "out";
  uint64_t seed = 1;
  int trials = 1000;
  double pvalue = 0.00049;
  bool plot = false;
  bool big_little = false;
  int jobs = 1;
};

MachineConfig resolve_machine(const CommonArgs& args) {
  if (args.machine_path.empty()) return default_machine_config();
  if (!fs::exists(args.machine_path))
    throw ConfigError("machine config does not exist: " + args.machine_path);
  return load_machine_config(args.machine_path);
}

Catalog resolve_catalog(const CommonArgs& args) {
  if (args.catalog_path.empty()) return build_catalog();
  if (!fs::exists(args.catalog_path))
    throw ConfigError("catalog does not exist: " + args.catalog_path);
  return read_catalog(args.catalog_path);
}

void ensure_out_dir(const CommonArgs& args) {
  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + args.out_dir);
}

void check_run_args(const CommonArgs& args) {
  if (args.trials < 30) throw ConfigError("--trials must be >= 30");
  if (args.pvalue <= 0 || args.pvalue >= 1) throw ConfigError("--pvalue must lie in (0, 1)");
  if (args.jobs < 1) throw ConfigError("--jobs must be >= 1");
}

SuiteOptions suite_options(const CommonArgs& args) {
  SuiteOptions o;
  o.n_trials = args.trials;
  o.seed = args.seed;
  o.p_threshold = args.pvalue;
  o.big_little = args.big_little;
  o.jobs = args.jobs;
  return o;
}

void print_catalog_summary(const Catalog& cat, bool big_little) {
  int cases = 0;
  for (const auto& p : cat.patterns) cases += case_count(p.steps);
  std::printf("%d patterns, %d single-core cases\n", static_cast<int>(cat.patterns.size()), cases);
  if (big_little) std::printf("big.LITTLE bindings requested: %d bound cases\n", cases * 4);
  int by_type[3][2] = {};
  for (const auto& p : cat.patterns) {
    int t = p.type == SignalClass::AO ? 0 : p.type == SignalClass::SO ? 1 : 2;
    int ie = p.interference == Interference::External ? 0 : 1;
    ++by_type[t][ie];
  }
  std::printf("type blocks: E-AO %d, I-AO %d, E-SO %d, I-SO %d, E-SA %d, I-SA %d\n",
              by_type[0][0], by_type[0][1], by_type[1][0], by_type[1][1], by_type[2][0],
              by_type[2][1]);
  std::printf("enumeration: %d triples, %d structural, %d raw survivors, %d after screen\n",
              cat.report.total_triples, cat.report.structural, cat.report.raw_survivors,
              cat.report.robust_survivors);
  for (const auto& n : cat.report.notes) std::printf("note: %s\n", n.c_str());
}

int cmd_catalog(const CommonArgs& args) {
  ensure_out_dir(args);
  Catalog cat = build_catalog();
  write_catalog(cat, (fs::path(args.out_dir) / "catalog.json").string());
  print_catalog_summary(cat, args.big_little);
  return 0;
}

int cmd_suite(const CommonArgs& args) {
  check_run_args(args);
  ensure_out_dir(args);
  MachineConfig cfg = resolve_machine(args);
  Catalog cat = resolve_catalog(args);
  SuiteResult res = run_suite(cfg, cat, suite_options(args));
  write_results_csv(res, (fs::path(args.out_dir) / "results.csv").string());
  std::vector<std::pair<std::string, const SuiteResult*>> rows{{"machine", &res}};
  write_summary_csv(rows, (fs::path(args.out_dir) / "summary.csv").string());
  if (args.plot) write_dot_matrix_svg(rows, (fs::path(args.out_dir) / "matrix.svg").string());
  std::printf("effective patterns: %d of %d (AO %d, SO %d, SA %d)\n",
              res.effective_pattern_count(), static_cast<int>(res.patterns.size()),
              res.effective_pattern_count(SignalClass::AO),
              res.effective_pattern_count(SignalClass::SO),
              res.effective_pattern_count(SignalClass::SA));
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& parameter) {
  check_run_args(args);
  ensure_out_dir(args);
  MachineConfig cfg = resolve_machine(args);
  Catalog cat = resolve_catalog(args);
  std::vector<SweepParameter> params;
  if (parameter == "all")
    params = {SweepParameter::Associativity, SweepParameter::LineSize, SweepParameter::TotalSize};
  else if (parameter == "associativity")
    params = {SweepParameter::Associativity};
  else if (parameter == "line_size")
    params = {SweepParameter::LineSize};
  else if (parameter == "total_size")
    params = {SweepParameter::TotalSize};
  else
    throw ConfigError("--parameter must be associativity | line_size | total_size | all");

  std::vector<SweepRow> rows;
  for (SweepParameter p : params) {
    auto part = sweep_parameter(cfg, cat, p, table_grid(p), suite_options(args));
    rows.insert(rows.end(), part.begin(), part.end());
  }
  write_sensitivity_csv(rows, (fs::path(args.out_dir) / "sensitivity.csv").string());
  for (const auto& r : rows)
    std::printf("%s=%llu%s total %d (SO %d, AO %d, SA %d)\n", to_string(r.parameter),
                static_cast<unsigned long long>(r.value), r.is_correct ? " [device]" : "",
                r.total_effective, r.so_effective, r.ao_effective, r.sa_effective);
  return 0;
}

int cmd_secure_eval(const CommonArgs& args) {
  check_run_args(args);
  ensure_out_dir(args);
  Catalog cat = resolve_catalog(args);
  SuiteOptions opts = suite_options(args);

  MachineConfig normal = args.machine_path.empty() ? default_machine_config() : resolve_machine(args);
  MachineConfig pl = normal;
  for (auto& c : pl.cores) c.l1_policy.kind = PolicyKind::PlRandom;

  SuiteResult r_normal = run_suite(normal, cat, opts);
  SuiteResult r_pl = run_suite(pl, cat, opts);
  SuiteResult r_rf_small = run_suite(rf_small_window_config(), cat, opts);
  SuiteResult r_rf_large = run_suite(rf_large_window_config(), cat, opts);

  std::vector<std::pair<std::string, const SuiteResult*>> rows{
      {"normal", &r_normal}, {"pl", &r_pl}, {"rf_small_w5", &r_rf_small}, {"rf_large_w128", &r_rf_large}};
  write_summary_csv(rows, (fs::path(args.out_dir) / "secure_eval.csv").string());
  if (args.plot) write_dot_matrix_svg(rows, (fs::path(args.out_dir) / "secure_eval.svg").string());
  for (const auto& [name, res] : rows)
    std::printf("%-14s effective %d of %d\n", name.c_str(), res->effective_pattern_count(),
                static_cast<int>(res->patterns.size()));
  return 0;
}

int cmd_emit_native(const CommonArgs& args) {
  ensure_out_dir(args);
  Catalog cat = resolve_catalog(args);
  ExpandOptions eo;
  eo.big_little = args.big_little;
  int count = 0;
  for (const auto& p : cat.patterns)
    for (const auto& c : expand_cases(p, eo)) {
      char name[64];
      std::snprintf(name, sizeof name, "vuln_%03d_case_%03d.c", c.pattern_id, c.case_index);
      std::ofstream f(fs::path(args.out_dir) / name, std::ios::binary);
      if (!f) throw ConfigError(std::string("cannot write ") + name);
      f << emit_native_step_code(c);
      ++count;
    }
  std::printf("emitted %d benchmark sources to %s\n", count, args.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-step cache timing-channel simulator and benchmark suite"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string sweep_param = "all";

  auto add_common = [&](CLI::App* cmd, bool run_opts) {
    cmd->add_option("--machine", args.machine_path, "machine configuration JSON");
    cmd->add_option("--catalog", args.catalog_path, "catalog JSON (built in-process when omitted)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "master seed");
    cmd->add_flag("--big-little", args.big_little, "instantiate the four cluster bindings");
    if (run_opts) {
      cmd->add_option("--trials", args.trials, "trials per candidate (default 1000)");
      cmd->add_option("--pvalue", args.pvalue, "Welch significance threshold (default 0.00049)");
      cmd->add_flag("--plot", args.plot, "render the dot-matrix SVG next to the CSVs");
      cmd->add_option("--jobs", args.jobs, "worker threads (results are order-independent)");
    }
  };

  CLI::App* c_catalog = app.add_subcommand("catalog", "enumerate, classify and persist the catalog");
  add_common(c_catalog, false);
  CLI::App* c_suite = app.add_subcommand("suite", "run every case and judge effectiveness");
  add_common(c_suite, true);
  CLI::App* c_sweep = app.add_subcommand("sweep", "sensitivity sweep of benchmark geometry");
  add_common(c_sweep, true);
  c_sweep->add_option("--parameter", sweep_param, "associativity | line_size | total_size | all");
  CLI::App* c_secure = app.add_subcommand("secure-eval", "compare normal, PL and RF caches");
  add_common(c_secure, true);
  CLI::App* c_emit = app.add_subcommand("emit-native", "emit the native benchmark sources");
  add_common(c_emit, false);

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(c_catalog)) return cmd_catalog(args);
    if (app.got_subcommand(c_suite)) return cmd_suite(args);
    if (app.got_subcommand(c_sweep)) return cmd_sweep(args, sweep_param);
    if (app.got_subcommand(c_secure)) return cmd_secure_eval(args);
    if (app.got_subcommand(c_emit)) return cmd_emit_native(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
