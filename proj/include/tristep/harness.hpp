#ifndef TRISTEP_HARNESS_HPP
#define TRISTEP_HARNESS_HPP

#include <array>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tristep/catalog.hpp"
#include "tristep/execute.hpp"
#include "tristep/welch.hpp"

namespace tristep {

struct TimingSamples {
  int pattern_id = 0;
  int case_index = 0;
  std::array<std::vector<double>, 3> samples;  // indexed by Candidate
  int n_trials = 0;
  uint64_t seed = 0;
  bool untestable = false;
  std::string untestable_reason;
};

// Per-trial: machine reset to a cold state, lock prelude if configured, one
// three-step run per candidate. Pure function of (machine config, case, seed).
inline TimingSamples collect_samples(Machine& m, const ConcreteCase& c, int n_trials, uint64_t seed,
                                     std::optional<CacheGeometry> bench_override = std::nullopt) {
  if (n_trials < 2) throw ConfigError("collect_samples needs n_trials >= 2");
  TimingSamples ts;
  ts.pattern_id = c.pattern_id;
  ts.case_index = c.case_index;
  ts.n_trials = n_trials;
  ts.seed = seed;
  if (auto u = check_testable(m, c)) {
    ts.untestable = true;
    ts.untestable_reason = u->reason;
    return ts;
  }
  CasePlan plan = build_case_plan(m, c, bench_override);
  for (int cand = 0; cand < 3; ++cand) {
    ts.samples[cand].reserve(n_trials);
    for (int trial = 0; trial < n_trials; ++trial)
      ts.samples[cand].push_back(run_three_steps(
          m, plan, c.sched, static_cast<Candidate>(cand), mix_seed(seed, cand, trial)));
  }
  return ts;
}

struct Verdict {
  int pattern_id = 0;
  int case_index = 0;
  bool effective = false;
  SignalClass matched_type = SignalClass::None;
  int partition = 0;  // same encoding as catalog partitions
  std::array<WelchResult, 3> pairs;  // (a,alias), (a,nib), (alias,nib)
  bool inconsistent = false;
  bool untestable = false;
};

// Maps the pairwise significance pattern onto the type partitions; the
// non-transitive triples (exactly one separable pair) are flagged, not coerced.
inline Verdict judge_case(const TimingSamples& ts, double p_threshold) {
  if (p_threshold <= 0 || p_threshold >= 1) throw ConfigError("p_threshold must lie in (0, 1)");
  Verdict v;
  v.pattern_id = ts.pattern_id;
  v.case_index = ts.case_index;
  if (ts.untestable) {
    v.untestable = true;
    return v;
  }
  v.pairs[0] = welch_t_test(ts.samples[0], ts.samples[1]);
  v.pairs[1] = welch_t_test(ts.samples[0], ts.samples[2]);
  v.pairs[2] = welch_t_test(ts.samples[1], ts.samples[2]);
  bool d_ab = v.pairs[0].p_value < p_threshold;
  bool d_an = v.pairs[1].p_value < p_threshold;
  bool d_bn = v.pairs[2].p_value < p_threshold;
  int n_sep = int(d_ab) + int(d_an) + int(d_bn);
  if (n_sep == 0) return v;
  if (d_ab && d_an && !d_bn) {
    v.partition = 1;
    v.matched_type = SignalClass::AO;
  } else if (!d_ab && d_an && d_bn) {
    v.partition = 3;
    v.matched_type = SignalClass::SO;
  } else if (d_ab && !d_an && d_bn) {
    v.partition = 2;
    v.matched_type = SignalClass::SO;
  } else if (n_sep == 3) {
    v.partition = 4;
    v.matched_type = SignalClass::SA;
  } else {
    v.inconsistent = true;
    return v;
  }
  v.effective = true;
  return v;
}

struct PatternOutcome {
  int id = 0;
  SignalClass type = SignalClass::None;
  Interference interference = Interference::External;
  int judged_cases = 0;   // testable cases
  int effective_cases = 0;
  bool effective = false;  // >= 1 effective case
  int joined_partition = 0;
};

struct SuiteAudit {
  uint64_t locked_eviction_events = 0;
  uint64_t rf_fills = 0;
  uint64_t rf_demand_fills = 0;
  uint64_t rf_demand_fill_violations = 0;
  uint64_t rf_window_violations = 0;
  uint64_t writebacks = 0;
  uint64_t dirty_removals = 0;
};

struct SuiteResult {
  std::vector<ConcreteCase> cases;
  std::vector<Verdict> verdicts;  // parallel to cases
  std::vector<PatternOutcome> patterns;
  SuiteAudit audit;

  const PatternOutcome* outcome(int id) const {
    for (const auto& p : patterns)
      if (p.id == id) return &p;
    return nullptr;
  }
  int effective_pattern_count() const {
    int n = 0;
    for (const auto& p : patterns) n += p.effective;
    return n;
  }
  int effective_pattern_count(SignalClass t) const {
    int n = 0;
    for (const auto& p : patterns) n += (p.type == t && p.effective);
    return n;
  }
};

struct SuiteOptions {
  int n_trials = 1000;
  uint64_t seed = 1;
  double p_threshold = 0.00049;
  int rep_so = 8;
  bool big_little = false;
  int jobs = 1;
  std::optional<CacheGeometry> bench_override;
};

// Result assembly is index-addressed, so verdicts are identical no matter how
// cases are distributed over workers.
inline SuiteResult run_suite(const MachineConfig& cfg, const Catalog& cat,
                             const SuiteOptions& opts = {}) {
  SuiteResult res;
  bool pl = false;
  for (const auto& c : cfg.cores) pl |= (c.l1_policy.kind == PolicyKind::PlRandom);
  ExpandOptions eo;
  eo.big_little = opts.big_little;
  eo.pl_lock = pl;
  eo.rep_so = opts.rep_so;
  for (const auto& p : cat.patterns)
    for (const auto& c : expand_cases(p, eo)) res.cases.push_back(c);
  res.verdicts.resize(res.cases.size());

  int jobs = std::max(1, opts.jobs);
  std::vector<SuiteAudit> audits(jobs);
  auto worker = [&](size_t begin, size_t stride) {
    Machine m(cfg);
    m.reset_counters();
    for (size_t i = begin; i < res.cases.size(); i += stride) {
      const ConcreteCase& c = res.cases[i];
      TimingSamples ts = collect_samples(m, c, opts.n_trials,
                                         mix_seed(opts.seed, c.pattern_id, c.case_index),
                                         opts.bench_override);
      res.verdicts[i] = judge_case(ts, opts.p_threshold);
    }
    SuiteAudit& a = audits[begin];
    a.locked_eviction_events = m.locked_eviction_events();
    a.rf_fills = m.rf_fill_count();
    a.rf_demand_fills = m.rf_demand_fill_count();
    a.rf_demand_fill_violations = m.rf_demand_fill_violations();
    a.rf_window_violations = m.rf_window_violations();
    a.writebacks = m.writeback_events();
    a.dirty_removals = m.dirty_removal_events();
  };
  if (jobs == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker, t, jobs);
    for (auto& t : pool) t.join();
  }
  for (const auto& a : audits) {
    res.audit.locked_eviction_events += a.locked_eviction_events;
    res.audit.rf_fills += a.rf_fills;
    res.audit.rf_demand_fills += a.rf_demand_fills;
    res.audit.rf_demand_fill_violations += a.rf_demand_fill_violations;
    res.audit.rf_window_violations += a.rf_window_violations;
    res.audit.writebacks += a.writebacks;
    res.audit.dirty_removals += a.dirty_removals;
  }

  for (const auto& p : cat.patterns) {
    PatternOutcome po;
    po.id = p.id;
    po.type = p.type;
    po.interference = p.interference;
    for (size_t i = 0; i < res.cases.size(); ++i) {
      if (res.cases[i].pattern_id != p.id) continue;
      const Verdict& v = res.verdicts[i];
      if (v.untestable) continue;
      ++po.judged_cases;
      if (v.effective) {
        ++po.effective_cases;
        po.joined_partition = join_partitions(po.joined_partition, v.partition);
      }
    }
    po.effective = po.effective_cases > 0;
    res.patterns.push_back(po);
  }
  return res;
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_results_csv(const SuiteResult& res, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write results csv: " + path);
  f << "pattern_id,case_index,scheduling,op1,op2,op3,local,remote,untestable,"
       "t_a_alias,df_a_alias,p_a_alias,t_a_nib,df_a_nib,p_a_nib,"
       "t_alias_nib,df_alias_nib,p_alias_nib,effective,matched_type,inconsistent\n";
  for (size_t i = 0; i < res.cases.size(); ++i) {
    const ConcreteCase& c = res.cases[i];
    const Verdict& v = res.verdicts[i];
    f << c.pattern_id << ',' << c.case_index << ',' << to_string(c.sched) << ','
      << to_string(c.ops[0]) << ',' << to_string(c.ops[1]) << ',' << to_string(c.ops[2]) << ','
      << to_string(c.local_cluster) << ',' << to_string(c.remote_cluster) << ','
      << (v.untestable ? 1 : 0);
    for (int pair = 0; pair < 3; ++pair) {
      const WelchResult& w = v.pairs[pair];
      if (v.untestable)
        f << ",,,";
      else
        f << ',' << fmt_double(w.t_statistic) << ',' << fmt_double(w.degrees_of_freedom) << ','
          << fmt_double(w.p_value);
    }
    f << ',' << (v.effective ? 1 : 0) << ',' << to_string(v.matched_type) << ','
      << (v.inconsistent ? 1 : 0) << '\n';
  }
}

// Figure-matrix CSV: one row per configuration, one column per pattern id.
// 2 = every judged case effective, 1 = some, 0 = none.
inline void write_summary_csv(const std::vector<std::pair<std::string, const SuiteResult*>>& rows,
                              const std::string& path) {
  if (rows.empty()) throw ConfigError("summary needs at least one configuration row");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write summary csv: " + path);
  f << "config";
  for (const auto& p : rows.front().second->patterns) f << ",v" << p.id;
  f << '\n';
  for (const auto& [name, res] : rows) {
    f << name;
    for (const auto& p : res->patterns) {
      int cell = 0;
      if (p.effective) cell = (p.effective_cases == p.judged_cases) ? 2 : 1;
      f << ',' << cell;
    }
    f << '\n';
  }
}

}  // namespace tristep

#endif
