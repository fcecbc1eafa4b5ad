#ifndef TRISTEP_SENSITIVITY_HPP
#define TRISTEP_SENSITIVITY_HPP

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "tristep/harness.hpp"

namespace tristep {

enum class SweepParameter { Associativity, LineSize, TotalSize };

inline const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Associativity: return "associativity";
    case SweepParameter::LineSize: return "line_size";
    case SweepParameter::TotalSize: return "total_size";
  }
  return "?";
}

// Addresses exactly as a benchmark believing bench_geometry lays them out:
// rep contiguous believed sets, asso_b same-set addresses per set (the line
// plus its stride aliases), NIB as the first line after the rep block.
struct StepAddressPlan {
  CacheGeometry bench;
  int rep = 8;
  Addr addr_a = 0;
  Addr addr_alias = 0;
  Addr addr_nib = 0;
  std::vector<std::vector<Addr>> set_groups;  // per intended set
};

inline StepAddressPlan generate_addresses(const CacheGeometry& bench, int rep = 8) {
  bench.validate(false);
  if (rep < 1) throw ConfigError("rep must be >= 1");
  StepAddressPlan plan;
  plan.bench = bench;
  plan.rep = rep;
  plan.addr_a = AddressLayout::kCandidateBase;
  plan.addr_alias = plan.addr_a + bench.set_stride();
  plan.addr_nib = plan.addr_a + uint64_t{static_cast<uint32_t>(rep)} * bench.line_size;
  for (int j = 0; j < rep; ++j) {
    std::vector<Addr> group;
    Addr base = plan.addr_a + uint64_t{static_cast<uint32_t>(j)} * bench.line_size;
    for (uint32_t k = 0; k < bench.associativity; ++k)
      group.push_back(base + uint64_t{k} * bench.set_stride());
    plan.set_groups.push_back(std::move(group));
  }
  return plan;
}

struct MappingDiagnosis {
  bool situation1 = false;  // fewer distinct lines in the intended set than asso_d
  bool situation2 = false;  // one intended set spreads over several device sets
  bool situation3 = false;  // distinct intended sets collide into one device set
  bool wrap_back = false;   // NIB wraps onto a's device set
  uint32_t min_distinct_lines_in_target = 0;
  double c_prime = 1.0;  // tot_b / tot_d, reported when the size differs
};

inline MappingDiagnosis diagnose_mapping(const CacheGeometry& bench, const CacheGeometry& device,
                                         int rep = 8) {
  device.validate(true);
  StepAddressPlan plan = generate_addresses(bench, rep);
  MappingDiagnosis d;
  d.c_prime = static_cast<double>(bench.total_size) / static_cast<double>(device.total_size);
  d.min_distinct_lines_in_target = device.associativity;

  std::vector<std::set<uint64_t>> device_sets_per_group;
  for (const auto& group : plan.set_groups) {
    uint64_t intended = device.set_index(group.front());
    std::set<uint64_t> dev_sets;
    std::set<Addr> lines_in_target;
    for (Addr a : group) {
      dev_sets.insert(device.set_index(a));
      if (device.set_index(a) == intended) lines_in_target.insert(device.line_index(a));
    }
    if (dev_sets.size() > 1) d.situation2 = true;
    uint32_t n = static_cast<uint32_t>(lines_in_target.size());
    d.min_distinct_lines_in_target = std::min(d.min_distinct_lines_in_target, n);
    if (n < device.associativity) d.situation1 = true;
    device_sets_per_group.push_back(std::move(dev_sets));
  }
  // Collisions between groups that believe they occupy distinct sets.
  for (size_t i = 0; i < device_sets_per_group.size(); ++i)
    for (size_t j = i + 1; j < device_sets_per_group.size(); ++j)
      for (uint64_t s : device_sets_per_group[i])
        if (device_sets_per_group[j].count(s)) d.situation3 = true;
  if (device.set_index(plan.addr_nib) == device.set_index(plan.addr_a)) {
    d.wrap_back = true;
    d.situation3 = true;
  }
  return d;
}

struct SweepRow {
  SweepParameter parameter{};
  uint64_t value = 0;
  bool is_correct = false;
  int total_effective = 0;
  int so_effective = 0;
  int ao_effective = 0;
  int sa_effective = 0;
  std::vector<int> effective_ao_ids;
  MappingDiagnosis diagnosis;
};

inline std::vector<uint64_t> table_grid(SweepParameter p) {
  switch (p) {
    case SweepParameter::Associativity: return {1, 2, 4, 8, 16};
    case SweepParameter::LineSize: return {16, 32, 64, 128, 256};
    case SweepParameter::TotalSize: return {8192, 16384, 32768, 65536, 98304};
  }
  return {};
}

inline CacheGeometry patched_geometry(CacheGeometry g, SweepParameter p, uint64_t value) {
  switch (p) {
    case SweepParameter::Associativity: g.associativity = static_cast<uint32_t>(value); break;
    case SweepParameter::LineSize: g.line_size = static_cast<uint32_t>(value); break;
    case SweepParameter::TotalSize: g.total_size = value; break;
  }
  g.validate(false);
  return g;
}

// Runs the full suite once per sweep value with the benchmark-believed
// geometry patched, device machine fixed.
inline std::vector<SweepRow> sweep_parameter(const MachineConfig& cfg, const Catalog& cat,
                                             SweepParameter param, std::vector<uint64_t> values,
                                             SuiteOptions opts = {}) {
  const CacheGeometry device = cfg.cores.front().l1_geometry;
  uint64_t correct = param == SweepParameter::Associativity ? device.associativity
                     : param == SweepParameter::LineSize    ? device.line_size
                                                            : device.total_size;
  bool has_correct = false;
  for (uint64_t v : values) has_correct |= (v == correct);
  if (!has_correct) throw ConfigError("sweep values must include the correct device value");

  std::vector<SweepRow> rows;
  for (uint64_t v : values) {
    SweepRow row;
    row.parameter = param;
    row.value = v;
    row.is_correct = v == correct;
    CacheGeometry bench = patched_geometry(device, param, v);
    SuiteOptions o = opts;
    o.bench_override = bench;
    SuiteResult res = run_suite(cfg, cat, o);
    for (const auto& p : res.patterns) {
      if (!p.effective) continue;
      ++row.total_effective;
      if (p.type == SignalClass::SO) ++row.so_effective;
      if (p.type == SignalClass::SA) ++row.sa_effective;
      if (p.type == SignalClass::AO) {
        ++row.ao_effective;
        row.effective_ao_ids.push_back(p.id);
      }
    }
    row.diagnosis = diagnose_mapping(bench, device, opts.rep_so);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_sensitivity_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write sensitivity csv: " + path);
  f << "parameter,value,is_correct,total_effective,so_effective,ao_effective,sa_effective,"
       "situations,wrap_back\n";
  for (const auto& r : rows) {
    std::string situations;
    if (r.diagnosis.situation1) situations += "1";
    if (r.diagnosis.situation2) situations += situations.empty() ? "2" : ";2";
    if (r.diagnosis.situation3) situations += situations.empty() ? "3" : ";3";
    f << to_string(r.parameter) << ',' << r.value << ',' << (r.is_correct ? 1 : 0) << ','
      << r.total_effective << ',' << r.so_effective << ',' << r.ao_effective << ','
      << r.sa_effective << ',' << situations << ',' << (r.diagnosis.wrap_back ? 1 : 0) << '\n';
  }
}

}  // namespace tristep

#endif
