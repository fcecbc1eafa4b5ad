#ifndef TRISTEP_MACHINE_IO_HPP
#define TRISTEP_MACHINE_IO_HPP

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tristep/errors.hpp"
#include "tristep/machine.hpp"

namespace tristep {

namespace detail {

inline CacheGeometry geometry_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": geometry must be an object");
  CacheGeometry g;
  g.total_size = j.value("total_size", g.total_size);
  g.associativity = j.value("associativity", g.associativity);
  g.line_size = j.value("line_size", g.line_size);
  return g;
}

inline nlohmann::json geometry_to_json(const CacheGeometry& g) {
  return {{"total_size", g.total_size}, {"associativity", g.associativity}, {"line_size", g.line_size}};
}

inline PolicyKind policy_kind_from_string(const std::string& s, const std::string& where) {
  if (s == "lru") return PolicyKind::Lru;
  if (s == "random") return PolicyKind::Random;
  if (s == "pl_random") return PolicyKind::PlRandom;
  throw SchemaError(where + ": unknown replacement policy '" + s + "'");
}

inline const char* policy_kind_to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Lru: return "lru";
    case PolicyKind::Random: return "random";
    case PolicyKind::PlRandom: return "pl_random";
  }
  return "random";
}

}  // namespace detail

inline MachineConfig machine_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("machine config must be a JSON object");
  MachineConfig cfg;
  if (j.contains("cores")) {
    if (!j["cores"].is_array() || j["cores"].empty())
      throw SchemaError("cores must be a non-empty array");
    cfg.cores.clear();
    int idx = 0;
    for (const auto& cj : j["cores"]) {
      std::string where = "cores[" + std::to_string(idx) + "]";
      CoreDescriptor d;
      d.core_id = cj.value("id", idx);
      std::string cluster = cj.value("cluster", "little");
      if (cluster != "big" && cluster != "little")
        throw SchemaError(where + ": cluster must be 'big' or 'little'");
      d.cluster = cluster == "big" ? Cluster::Big : Cluster::Little;
      if (cj.contains("l1")) d.l1_geometry = detail::geometry_from_json(cj["l1"], where + ".l1");
      if (cj.contains("policy")) {
        const auto& pj = cj["policy"];
        d.l1_policy.kind = detail::policy_kind_from_string(pj.value("kind", "random"), where);
        d.l1_policy.seed = pj.value("seed", uint64_t{1} + idx);
      }
      cfg.cores.push_back(d);
      ++idx;
    }
  }
  if (j.contains("l2")) {
    const auto& lj = j["l2"];
    cfg.l2.enabled = lj.value("enabled", true);
    if (lj.contains("geometry")) cfg.l2.geometry = detail::geometry_from_json(lj["geometry"], "l2");
  }
  if (j.contains("latency")) {
    const auto& t = j["latency"];
    LatencyTable& lt = cfg.latency;
    lt.t_l1 = t.value("t_l1", lt.t_l1);
    lt.t_l2 = t.value("t_l2", lt.t_l2);
    lt.t_dram = t.value("t_dram", lt.t_dram);
    lt.t_wb_hit = t.value("t_wb_hit", lt.t_wb_hit);
    lt.flush_l1 = t.value("flush_l1", lt.flush_l1);
    lt.flush_l2 = t.value("flush_l2", lt.flush_l2);
    lt.flush_miss = t.value("flush_miss", lt.flush_miss);
    lt.inv_remote_clean_l1 = t.value("inv_remote_clean_l1", lt.inv_remote_clean_l1);
    lt.inv_remote_dirty_l1 = t.value("inv_remote_dirty_l1", lt.inv_remote_dirty_l1);
    lt.inv_remote_l2 = t.value("inv_remote_l2", lt.inv_remote_l2);
    lt.cross_cluster_penalty = t.value("cross_cluster_penalty", lt.cross_cluster_penalty);
    lt.store_buffer_delta = t.value("store_buffer_delta", lt.store_buffer_delta);
  }
  if (j.contains("toggles")) {
    const auto& t = j["toggles"];
    cfg.toggles.store_buffer = t.value("store_buffer", cfg.toggles.store_buffer);
    cfg.toggles.scu = t.value("scu", cfg.toggles.scu);
    cfg.toggles.transient_region = t.value("transient_region", cfg.toggles.transient_region);
    cfg.toggles.write_buffer_size = t.value("write_buffer_size", cfg.toggles.write_buffer_size);
    cfg.toggles.mshr_size = t.value("mshr_size", cfg.toggles.mshr_size);
  }
  if (j.contains("noise")) {
    cfg.noise.sigma = j["noise"].value("sigma", cfg.noise.sigma);
    cfg.noise.seed = j["noise"].value("seed", cfg.noise.seed);
  }
  if (j.contains("policy")) {
    // machine-wide secure policy block: "pl", "rf" or "none"
    const auto& pj = j["policy"];
    std::string kind = pj.value("kind", "none");
    if (kind == "pl") {
      for (auto& c : cfg.cores) c.l1_policy.kind = PolicyKind::PlRandom;
    } else if (kind == "rf") {
      RfConfig rf;
      rf.rf_start = pj.value("rf_start", rf.rf_start);
      rf.rf_size = pj.value("rf_size", rf.rf_size);
      rf.seed = pj.value("seed", rf.seed);
      cfg.rf = rf;
    } else if (kind != "none") {
      throw SchemaError("policy.kind must be one of pl | rf | none");
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw SchemaError(std::string("machine config invalid: ") + e.what());
  }
  return cfg;
}

inline nlohmann::json machine_config_to_json(const MachineConfig& cfg) {
  nlohmann::json j;
  for (const auto& c : cfg.cores) {
    j["cores"].push_back({{"id", c.core_id},
                          {"cluster", to_string(c.cluster)},
                          {"l1", detail::geometry_to_json(c.l1_geometry)},
                          {"policy",
                           {{"kind", detail::policy_kind_to_string(c.l1_policy.kind)},
                            {"seed", c.l1_policy.seed}}}});
  }
  j["l2"] = {{"enabled", cfg.l2.enabled}, {"geometry", detail::geometry_to_json(cfg.l2.geometry)}};
  const LatencyTable& lt = cfg.latency;
  j["latency"] = {{"t_l1", lt.t_l1},
                  {"t_l2", lt.t_l2},
                  {"t_dram", lt.t_dram},
                  {"t_wb_hit", lt.t_wb_hit},
                  {"flush_l1", lt.flush_l1},
                  {"flush_l2", lt.flush_l2},
                  {"flush_miss", lt.flush_miss},
                  {"inv_remote_clean_l1", lt.inv_remote_clean_l1},
                  {"inv_remote_dirty_l1", lt.inv_remote_dirty_l1},
                  {"inv_remote_l2", lt.inv_remote_l2},
                  {"cross_cluster_penalty", lt.cross_cluster_penalty},
                  {"store_buffer_delta", lt.store_buffer_delta}};
  j["toggles"] = {{"store_buffer", cfg.toggles.store_buffer},
                  {"scu", cfg.toggles.scu},
                  {"transient_region", cfg.toggles.transient_region},
                  {"write_buffer_size", cfg.toggles.write_buffer_size},
                  {"mshr_size", cfg.toggles.mshr_size}};
  j["noise"] = {{"sigma", cfg.noise.sigma}, {"seed", cfg.noise.seed}};
  if (cfg.rf)
    j["policy"] = {{"kind", "rf"}, {"rf_start", cfg.rf->rf_start}, {"rf_size", cfg.rf->rf_size},
                   {"seed", cfg.rf->seed}};
  return j;
}

inline MachineConfig load_machine_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read machine config: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return machine_config_from_json(j);
}

inline void save_machine_config(const MachineConfig& cfg, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write machine config: " + path);
  f << machine_config_to_json(cfg).dump(2) << "\n";
}

}  // namespace tristep

#endif
