#ifndef TRISTEP_MACHINE_HPP
#define TRISTEP_MACHINE_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "tristep/cache.hpp"
#include "tristep/geometry.hpp"
#include "tristep/rng.hpp"

namespace tristep {

// All values in cycles.
struct LatencyTable {
  double t_l1 = 4;
  double t_l2 = 14;
  double t_dram = 200;
  double t_wb_hit = 2;
  double flush_l1 = 40;
  double flush_l2 = 60;
  double flush_miss = 30;
  double inv_remote_clean_l1 = 50;
  double inv_remote_dirty_l1 = 80;
  double inv_remote_l2 = 65;
  double cross_cluster_penalty = 30;
  double store_buffer_delta = 6;

  void scale(double f) {
    t_l1 *= f; t_l2 *= f; t_dram *= f; t_wb_hit *= f;
    flush_l1 *= f; flush_l2 *= f; flush_miss *= f;
    inv_remote_clean_l1 *= f; inv_remote_dirty_l1 *= f; inv_remote_l2 *= f;
    cross_cluster_penalty *= f; store_buffer_delta *= f;
  }

  void validate() const {
    if (!(t_l1 < t_l2 && t_l2 < t_dram)) throw ConfigError("latency table must order t_l1 < t_l2 < t_dram");
    if (cross_cluster_penalty < 0) throw ConfigError("cross_cluster_penalty must be >= 0");
  }
};

struct MicroArchToggles {
  bool store_buffer = true;
  bool scu = false;
  bool transient_region = false;
  uint32_t write_buffer_size = 2;
  uint32_t mshr_size = 4;

  void validate() const {
    if (mshr_size < 1) throw ConfigError("mshr_size must be >= 1");
  }
};

struct NoiseModel {
  double sigma = 3.0;  // cycles; 0 reproduces the ideal oracle exactly
  uint64_t seed = 0x6e015e;

  void validate() const {
    if (sigma < 0) throw ConfigError("noise sigma must be >= 0");
  }
};

enum class Cluster { Big, Little };

inline const char* to_string(Cluster c) { return c == Cluster::Big ? "big" : "little"; }

struct CoreDescriptor {
  int core_id = 0;
  Cluster cluster = Cluster::Little;
  CacheGeometry l1_geometry{};
  ReplacementPolicy l1_policy{};
};

struct L2Config {
  bool enabled = true;
  CacheGeometry geometry{1u << 20, 8, 64};
};

struct RfConfig {
  uint64_t rf_start = 0;  // lines subtracted from the missing line index
  uint64_t rf_size = 1;   // window length in lines
  uint64_t seed = 0xf111;

  void validate() const {
    if (rf_size < 1) throw ConfigError("rf_size must be >= 1");
  }
};

struct MachineConfig {
  std::vector<CoreDescriptor> cores{CoreDescriptor{}};
  L2Config l2{};
  LatencyTable latency{};
  MicroArchToggles toggles{};
  NoiseModel noise{};
  std::optional<RfConfig> rf;  // random-fill policy on every L1 when set

  void validate() const {
    if (cores.empty()) throw ConfigError("machine needs at least one core");
    for (const auto& c : cores) c.l1_geometry.validate(true);
    if (l2.enabled) l2.geometry.validate(true);
    latency.validate();
    toggles.validate();
    noise.validate();
    if (rf) rf->validate();
  }
};

enum class OutcomeLevel { L1Hit, L2Hit, DramFill, Uncached, WriteBufferHit };

struct AccessOutcome {
  OutcomeLevel level = OutcomeLevel::L1Hit;
  std::optional<EvictedLine> evicted;
  double latency_cycles = 0;
};

enum class MemOp { Read, Write };

// Multi-core machine: per-core L1s, optional shared inclusive L2, per-core
// store buffer, per-step MSHR budget, coherence invalidations, additive noise.
// A machine instance is confined to one thread of control.
class Machine {
 public:
  explicit Machine(const MachineConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    for (const auto& core : cfg_.cores) {
      l1_.emplace_back(core.l1_geometry, core.l1_policy);
      wb_.emplace_back();
    }
    if (cfg_.l2.enabled) l2_ = Cache(cfg_.l2.geometry, ReplacementPolicy{PolicyKind::Lru, 0});
    rf_rng_.reseed(cfg_.rf ? cfg_.rf->seed : 0);
    reset(0);
  }

  const MachineConfig& config() const { return cfg_; }
  size_t core_count() const { return cfg_.cores.size(); }

  // Oracle hook: ideal_timing forces sigma to zero and restores it.
  double noise_sigma() const { return cfg_.noise.sigma; }
  void set_noise_sigma(double s) { cfg_.noise.sigma = s; }
  const Cache& l1(int core) const { return l1_[core]; }
  Cache& l1(int core) { return l1_[core]; }
  const Cache& l2() const { return l2_; }

  int core_of_cluster(Cluster c, int skip_core = -1) const {
    for (const auto& d : cfg_.cores)
      if (d.cluster == c && d.core_id != skip_core) return d.core_id;
    return -1;
  }

  void reset(uint64_t run_seed) {
    for (size_t i = 0; i < l1_.size(); ++i) {
      l1_[i].reset(mix_seed(run_seed, 0x11, i));
      wb_[i].entries.clear();
      wb_[i].op_tick = 0;
    }
    if (cfg_.l2.enabled) l2_.reset(mix_seed(run_seed, 0x12));
    noise_rng_.reseed(mix_seed(cfg_.noise.seed, run_seed));
    rf_rng_.reseed(mix_seed(cfg_.rf ? cfg_.rf->seed : 0, run_seed));
    step_misses_ = 0;
  }

  void reset_counters() {
    writebacks_ = 0;
    dirty_removals_ = 0;
    rf_demand_fills_ = 0;
    rf_fills_ = 0;
    rf_demand_fill_violations_ = 0;
    rf_window_violations_ = 0;
  }

  // Per-step MSHR budget (outstanding misses within one step).
  void begin_step() { step_misses_ = 0; }

  AccessOutcome access(int core, MemOp op, Addr addr) {
    Addr line = l1_[core].geometry().line_base(addr);
    AccessOutcome out;
    age_write_buffer(core);

    if (op == MemOp::Read && wb_active() && wb_holds(core, line)) {
      out.level = OutcomeLevel::WriteBufferHit;
      out.latency_cycles = noisy(cfg_.latency.t_wb_hit);
      return out;
    }

    int way = l1_[core].probe(line);
    if (way >= 0) {
      CacheLineSlot& s = l1_[core].slot(l1_[core].geometry().set_index(line), way);
      double lat = cfg_.latency.t_l1;
      if (op == MemOp::Write) {
        if (wb_active() && !wb_holds(core, line)) {
          // Allocating a store-buffer entry costs the delta; a write that
          // coalesces into a live pending store does not.
          lat += cfg_.latency.store_buffer_delta;
          push_store(core, line);
        }
        s.dirty = true;
      }
      l1_[core].touch(line, way);
      out.level = OutcomeLevel::L1Hit;
      out.latency_cycles = noisy(lat);
      return out;
    }

    // L1 miss
    drain_write_buffer(core);
    double lat = 0;
    if (++step_misses_ > cfg_.toggles.mshr_size) lat += cfg_.latency.t_dram / 2;  // serialized miss

    bool in_l2 = cfg_.l2.enabled && l2_.contains(line);
    if (in_l2) {
      lat += cfg_.latency.t_l2;
      l2_.touch(line, l2_.probe(line));
      out.level = OutcomeLevel::L2Hit;
    } else {
      lat += cfg_.latency.t_dram;
      out.level = OutcomeLevel::DramFill;
      if (cfg_.l2.enabled) fill_l2(line);
    }

    if (cfg_.rf) {
      // Random-fill: the demand line is not allocated in L1; one line from the
      // neighborhood window is fetched instead.
      Addr fetched = rf_pick(line);
      ++rf_fills_;
      if (fetched == line) ++rf_demand_fills_;
      if (cfg_.l2.enabled && !l2_.contains(fetched)) fill_l2(fetched);
      handle_l1_fill(core, fetched, false);
      if (fetched != line && l1_[core].contains(line))
        ++rf_demand_fill_violations_;  // audited: demand line crept into L1
      if (op == MemOp::Write) {
        if (cfg_.l2.enabled) {
          int l2way = l2_.probe(line);
          if (l2way >= 0) l2_.slot(l2_.geometry().set_index(line), l2way).dirty = true;
        }
        push_store(core, line);
      }
    } else {
      FillResult fr = handle_l1_fill(core, line, op == MemOp::Write);
      if (fr.kind == FillResult::Kind::Uncached) {
        out.level = OutcomeLevel::Uncached;  // PL: locked victim, serviced uncached
        if (op == MemOp::Write && cfg_.l2.enabled) {
          int l2way = l2_.probe(line);
          if (l2way >= 0) l2_.slot(l2_.geometry().set_index(line), l2way).dirty = true;
        }
      } else {
        out.evicted = fr.evicted;
        if (op == MemOp::Write) push_store(core, line);
      }
    }
    out.latency_cycles = noisy(lat);
    return out;
  }

  // Clean+invalidate by address, everywhere (through L2). Locked lines are
  // immune and the flush reports the not-found latency so locking does not
  // open a flush-timing channel.
  double flush_line(int core, Addr addr) {
    Addr line = l1_[core].geometry().line_base(addr);
    age_write_buffer(core);
    for (size_t c = 0; c < wb_.size(); ++c) wb_erase(static_cast<int>(c), line);

    if (line_locked_anywhere(line)) return noisy(cfg_.latency.flush_miss);

    double lat = cfg_.latency.flush_miss;
    bool found_l1 = false;
    bool cross = false;
    for (size_t c = 0; c < l1_.size(); ++c) {
      InvalidateResult r = l1_[c].invalidate(line);
      if (r.was_present) {
        found_l1 = true;
        if (r.was_dirty) {
          ++dirty_removals_;
          writeback(line);
        }
        if (cfg_.cores[c].cluster != cfg_.cores[core].cluster) cross = true;
      }
    }
    bool found_l2 = false;
    if (cfg_.l2.enabled) {
      InvalidateResult r = l2_.invalidate(line);
      if (r.was_present) {
        found_l2 = true;
        if (r.was_dirty && !found_l1) {
          ++dirty_removals_;
          writeback(line);
        }
      }
    }
    if (found_l1)
      lat = cfg_.latency.flush_l1 + (cross && !cfg_.toggles.scu ? cfg_.latency.cross_cluster_penalty : 0);
    else if (found_l2)
      lat = cfg_.toggles.scu ? cfg_.latency.flush_l1 : cfg_.latency.flush_l2;
    return noisy(lat);
  }

  // Coherence invalidation triggered by a write on from_core. Copies held
  // elsewhere are invalidated (write-back if dirty); the line is not installed.
  double remote_invalidate(Addr addr, int from_core) {
    Addr line = l1_[from_core].geometry().line_base(addr);
    age_write_buffer(from_core);
    for (size_t c = 0; c < wb_.size(); ++c) wb_erase(static_cast<int>(c), line);

    if (line_locked_anywhere(line)) return noisy(cfg_.latency.flush_miss);

    double lat = cfg_.latency.flush_miss;
    bool found_dirty_l1 = false, found_clean_l1 = false, cross = false;
    for (size_t c = 0; c < l1_.size(); ++c) {
      if (static_cast<int>(c) == from_core) continue;
      InvalidateResult r = l1_[c].invalidate(line);
      if (r.was_present) {
        (r.was_dirty ? found_dirty_l1 : found_clean_l1) = true;
        if (r.was_dirty) {
          ++dirty_removals_;
          writeback(line);
        }
        if (cfg_.cores[c].cluster != cfg_.cores[from_core].cluster) cross = true;
      }
    }
    bool found_l2 = false;
    if (cfg_.l2.enabled) {
      InvalidateResult r = l2_.invalidate(line);
      if (r.was_present) {
        found_l2 = true;
        if (r.was_dirty && !found_dirty_l1) {
          ++dirty_removals_;
          writeback(line);
        }
      }
    }
    {
      InvalidateResult own = l1_[from_core].invalidate(line);
      if (own.was_present && own.was_dirty) {
        ++dirty_removals_;
        writeback(line);
      }
    }

    const LatencyTable& t = cfg_.latency;
    if (cfg_.toggles.scu) {
      // Direct cache-to-cache transfer: the holder's level (and dirtiness)
      // cannot be told apart from the requester's side.
      if (found_dirty_l1 || found_clean_l1 || found_l2) lat = t.inv_remote_clean_l1;
    } else {
      double pen = cross ? t.cross_cluster_penalty : 0;
      if (found_dirty_l1) lat = t.inv_remote_dirty_l1 + pen;
      else if (found_clean_l1) lat = t.inv_remote_clean_l1 + pen;
      else if (found_l2) lat = t.inv_remote_l2;
    }
    return noisy(lat);
  }

  // PL: fetch-on-lock, then flag. Locking into a fully locked set is a
  // configuration error (the set could never accept a fill again).
  void pl_lock(int core, Addr addr) {
    Addr line = l1_[core].geometry().line_base(addr);
    if (l1_[core].probe(line) < 0) {
      uint64_t set = l1_[core].geometry().set_index(line);
      if (l1_[core].locked_count(set) >= l1_[core].geometry().associativity)
        throw ConfigError("pl_lock: every way of the set is already locked");
      if (cfg_.l2.enabled && !l2_.contains(line)) fill_l2(line);
      FillResult fr = l1_[core].fill_for_lock(line);
      if (fr.kind == FillResult::Kind::Uncached)
        throw ConfigError("pl_lock: no unlocked way available for the fetch");
      if (fr.evicted) account_l1_eviction(*fr.evicted, l1_[core].geometry());
    }
    l1_[core].lock_resident(line);
  }

  void pl_unlock(int core, Addr addr) {
    l1_[core].unlock(l1_[core].geometry().line_base(addr));
  }

  // Audit counters.
  uint64_t writeback_events() const { return writebacks_; }
  uint64_t dirty_removal_events() const { return dirty_removals_; }
  uint64_t locked_eviction_events() const {
    uint64_t n = 0;
    for (const auto& c : l1_) n += c.locked_eviction_events();
    return n;
  }
  uint64_t rf_fill_count() const { return rf_fills_; }
  uint64_t rf_demand_fill_count() const { return rf_demand_fills_; }
  uint64_t rf_demand_fill_violations() const { return rf_demand_fill_violations_; }
  uint64_t rf_window_violations() const { return rf_window_violations_; }
  Addr last_rf_fetched() const { return last_rf_fetched_; }

  // Debug state dump; field names are fixed (set, way, valid, tag, dirty,
  // locked, transient).
  std::string snapshot_json() const;

 private:
  struct PendingStore {
    Addr line;
    uint64_t pushed_at;
  };
  struct WriteBuffer {
    std::deque<PendingStore> entries;
    uint64_t op_tick = 0;
  };

  bool wb_active() const { return cfg_.toggles.store_buffer && cfg_.toggles.write_buffer_size > 0; }

  bool wb_holds(int core, Addr line) const {
    const auto& e = wb_[core].entries;
    return std::find_if(e.begin(), e.end(), [&](const PendingStore& p) { return p.line == line; }) !=
           e.end();
  }

  void wb_erase(int core, Addr line) {
    std::erase_if(wb_[core].entries, [&](const PendingStore& p) { return p.line == line; });
  }

  void push_store(int core, Addr line) {
    if (!wb_active()) return;
    auto& wb = wb_[core];
    wb_erase(core, line);
    wb.entries.push_back({line, wb.op_tick});
    while (wb.entries.size() > cfg_.toggles.write_buffer_size) wb.entries.pop_front();
  }

  // Each pending store ages out after write_buffer_size further operations;
  // any miss flushes the buffer wholesale.
  void age_write_buffer(int core) {
    auto& wb = wb_[core];
    ++wb.op_tick;
    while (!wb.entries.empty() &&
           wb.op_tick > wb.entries.front().pushed_at + cfg_.toggles.write_buffer_size)
      wb.entries.pop_front();
  }

  void drain_write_buffer(int core) { wb_[core].entries.clear(); }

  void writeback(Addr) { ++writebacks_; }

  void fill_l2(Addr line, bool dirty = false) {
    FillResult fr = l2_.fill(line, dirty, false);
    if (fr.evicted) {
      Addr victim = (fr.evicted->tag * l2_.geometry().num_sets() + fr.evicted->set) *
                    l2_.geometry().line_size;
      if (fr.evicted->was_dirty) {
        ++dirty_removals_;
        writeback(victim);
      }
      // Inclusive L2: a victim leaving L2 may not linger in any L1.
      for (auto& c : l1_) {
        InvalidateResult r = c.invalidate(victim);
        if (r.was_present && r.was_dirty) {
          ++dirty_removals_;
          writeback(victim);
        }
      }
    }
  }

  FillResult handle_l1_fill(int core, Addr line, bool dirty) {
    bool transient = cfg_.toggles.transient_region;
    FillResult fr = l1_[core].fill(line, dirty, transient);
    if (fr.evicted) account_l1_eviction(*fr.evicted, l1_[core].geometry());
    return fr;
  }

  void account_l1_eviction(const EvictedLine& ev, const CacheGeometry& geom) {
    Addr line = (ev.tag * geom.num_sets() + ev.set) * geom.line_size;
    if (ev.was_dirty) {
      ++dirty_removals_;
      writeback(line);
      if (cfg_.l2.enabled) {
        int way = l2_.probe(line);
        if (way >= 0)
          l2_.slot(l2_.geometry().set_index(line), way).dirty = true;
        else
          fill_l2(line, true);
      }
    } else if (ev.was_transient && cfg_.toggles.transient_region) {
      // Clean transient lines are dropped, not allocated into L2.
      if (cfg_.l2.enabled) l2_.invalidate(line);
    }
  }

  bool line_locked_anywhere(Addr line) const {
    for (const auto& c : l1_) {
      int way = c.probe(line);
      if (way >= 0 && c.slot(c.geometry().set_index(line), static_cast<uint32_t>(way)).locked)
        return true;
    }
    return false;
  }

  Addr rf_pick(Addr demand_line) {
    const RfConfig& rf = *cfg_.rf;
    uint64_t line_sz = cfg_.cores[0].l1_geometry.line_size;
    int64_t demand_idx = static_cast<int64_t>(demand_line / line_sz);
    int64_t lo = demand_idx - static_cast<int64_t>(rf.rf_start);
    int64_t offset = static_cast<int64_t>(rf_rng_.below(rf.rf_size));
    int64_t idx = lo + offset;
    // Window arithmetic wraps inside the benchmark's addressable line space so
    // fetches never stray into unrelated regions.
    int64_t span_lines = static_cast<int64_t>((AddressLayout::kEvictionBase * 2) / line_sz);
    int64_t wrapped = ((idx % span_lines) + span_lines) % span_lines;
    // window membership audit, modulo the wrap space
    int64_t rel = ((wrapped - lo) % span_lines + span_lines) % span_lines;
    if (rel >= static_cast<int64_t>(rf.rf_size)) ++rf_window_violations_;
    Addr fetched = static_cast<Addr>(wrapped) * line_sz;
    last_rf_fetched_ = fetched;
    return fetched;
  }

  double noisy(double base) {
    if (cfg_.noise.sigma <= 0) return base;
    return std::max(0.0, base + cfg_.noise.sigma * noise_rng_.gaussian());
  }

  MachineConfig cfg_;
  std::vector<Cache> l1_;
  Cache l2_{CacheGeometry{1u << 20, 8, 64}, ReplacementPolicy{PolicyKind::Lru, 0}};
  std::vector<WriteBuffer> wb_;
  Xorshift64Star noise_rng_;
  Xorshift64Star rf_rng_;
  uint32_t step_misses_ = 0;
  uint64_t writebacks_ = 0;
  uint64_t dirty_removals_ = 0;
  uint64_t rf_demand_fills_ = 0;
  uint64_t rf_fills_ = 0;
  uint64_t rf_demand_fill_violations_ = 0;
  uint64_t rf_window_violations_ = 0;
  Addr last_rf_fetched_ = 0;
};

inline std::string dump_cache_json(const Cache& cache) {
  std::string out = "[";
  bool first = true;
  for (uint64_t set = 0; set < cache.geometry().num_sets(); ++set)
    for (uint32_t way = 0; way < cache.geometry().associativity; ++way) {
      const CacheLineSlot& s = cache.slot(set, way);
      if (!s.valid) continue;
      if (!first) out += ",";
      first = false;
      out += "{\"set\":" + std::to_string(set) + ",\"way\":" + std::to_string(way) +
             ",\"valid\":true,\"tag\":" + std::to_string(s.tag) +
             ",\"dirty\":" + (s.dirty ? "true" : "false") +
             ",\"locked\":" + (s.locked ? "true" : "false") +
             ",\"transient\":" + (s.transient ? "true" : "false") + "}";
    }
  out += "]";
  return out;
}

inline std::string Machine::snapshot_json() const {
  std::string out = "{\"l1\":[";
  for (size_t c = 0; c < l1_.size(); ++c) {
    if (c) out += ",";
    out += "{\"core\":" + std::to_string(cfg_.cores[c].core_id) +
           ",\"lines\":" + dump_cache_json(l1_[c]) + "}";
  }
  out += "]";
  if (cfg_.l2.enabled) out += ",\"l2\":" + dump_cache_json(l2_);
  out += "}";
  return out;
}

}  // namespace tristep

#endif
