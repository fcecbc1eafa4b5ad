#ifndef TRISTEP_CACHE_HPP
#define TRISTEP_CACHE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tristep/geometry.hpp"
#include "tristep/rng.hpp"

namespace tristep {

enum class PolicyKind { Lru, Random, PlRandom };

struct ReplacementPolicy {
  PolicyKind kind = PolicyKind::Random;
  uint64_t seed = 1;
};

struct CacheLineSlot {
  bool valid = false;
  bool dirty = false;
  bool locked = false;     // PL extension
  bool transient = false;  // transient-region extension
  uint64_t tag = 0;
  uint64_t lru_stamp = 0;
  uint64_t epoch = 0;  // slot counts as valid only in the epoch it was filled
};

struct EvictedLine {
  uint64_t set = 0;
  uint64_t tag = 0;
  bool was_dirty = false;
  bool was_transient = false;
};

struct FillResult {
  enum class Kind { Filled, Uncached };  // Uncached: PL picked a locked victim
  Kind kind = Kind::Filled;
  std::optional<EvictedLine> evicted;
};

struct InvalidateResult {
  bool was_present = false;
  bool was_dirty = false;
  bool blocked_locked = false;  // locked lines are immune to invalidation
};

// One set-associative cache level. Replacement:
//   Lru      - invalid ways first, then the valid slot with minimal lru_stamp
//   Random   - a way chosen uniformly at random, valid or not (hardware
//              way-counter style; this is what makes asso-1 eviction sets and
//              repeated priming matter under random replacement)
//   PlRandom - Random, but a locked victim turns the fill into Uncached
//
// reset() bumps an epoch instead of clearing slots, so per-trial machine
// resets stay O(1) even for a large L2.
class Cache {
 public:
  Cache() : Cache(CacheGeometry{}, ReplacementPolicy{}) {}
  Cache(const CacheGeometry& geom, const ReplacementPolicy& policy)
      : geom_(geom), policy_(policy), rng_(policy.seed) {
    geom_.validate(false);
    slots_.resize(geom_.num_sets() * geom_.associativity);
  }

  const CacheGeometry& geometry() const { return geom_; }
  const ReplacementPolicy& policy() const { return policy_; }

  // Audit counters deliberately survive resets so a whole run stays auditable.
  void reset(uint64_t seed) {
    ++epoch_;
    rng_.reseed(mix_seed(policy_.seed, seed));
    stamp_ = 0;
  }

  bool live(const CacheLineSlot& s) const { return s.valid && s.epoch == epoch_; }

  // -1 on miss. Does not touch recency; pair with touch() on hits.
  int probe(Addr addr) const {
    uint64_t set = geom_.set_index(addr), tag = geom_.tag(addr);
    const CacheLineSlot* row = &slots_[set * geom_.associativity];
    for (uint32_t w = 0; w < geom_.associativity; ++w)
      if (live(row[w]) && row[w].tag == tag) return static_cast<int>(w);
    return -1;
  }

  bool contains(Addr addr) const { return probe(addr) >= 0; }

  CacheLineSlot& slot(uint64_t set, uint32_t way) { return slots_[set * geom_.associativity + way]; }
  const CacheLineSlot& slot(uint64_t set, uint32_t way) const {
    return slots_[set * geom_.associativity + way];
  }

  void touch(Addr addr, int way) {
    slot(geom_.set_index(addr), static_cast<uint32_t>(way)).lru_stamp = ++stamp_;
  }

  FillResult fill(Addr addr, bool dirty, bool transient) {
    uint64_t set = geom_.set_index(addr);
    CacheLineSlot* row = &slots_[set * geom_.associativity];
    int victim = pick_victim(set);
    FillResult res;
    if (victim < 0) {  // locked victim under PlRandom: serviced uncached
      res.kind = FillResult::Kind::Uncached;
      return res;
    }
    CacheLineSlot& v = row[victim];
    if (live(v)) {
      if (v.locked) ++locked_evictions_;  // audited: must stay zero
      res.evicted = EvictedLine{set, v.tag, v.dirty, v.transient};
    }
    v.valid = true;
    v.epoch = epoch_;
    v.dirty = dirty;
    v.locked = false;
    v.transient = transient;
    v.tag = geom_.tag(addr);
    v.lru_stamp = ++stamp_;
    return res;
  }

  // Fill for the lock instruction: the victim is drawn among unlocked ways
  // only, so locking never needs to displace another locked line.
  FillResult fill_for_lock(Addr addr) {
    uint64_t set = geom_.set_index(addr);
    CacheLineSlot* row = &slots_[set * geom_.associativity];
    int victim = -1;
    for (uint32_t w = 0; w < geom_.associativity; ++w)
      if (!live(row[w])) {
        victim = static_cast<int>(w);
        break;
      }
    if (victim < 0) {
      std::vector<int> unlocked;
      for (uint32_t w = 0; w < geom_.associativity; ++w)
        if (!row[w].locked) unlocked.push_back(static_cast<int>(w));
      if (unlocked.empty()) return FillResult{FillResult::Kind::Uncached, {}};
      if (policy_.kind == PolicyKind::Lru) {
        victim = unlocked.front();
        for (int w : unlocked)
          if (row[w].lru_stamp < row[victim].lru_stamp) victim = w;
      } else {
        victim = unlocked[rng_.below(unlocked.size())];
      }
    }
    FillResult res;
    CacheLineSlot& v = row[victim];
    if (live(v)) res.evicted = EvictedLine{set, v.tag, v.dirty, v.transient};
    v.valid = true;
    v.epoch = epoch_;
    v.dirty = false;
    v.locked = false;
    v.transient = false;
    v.tag = geom_.tag(addr);
    v.lru_stamp = ++stamp_;
    return res;
  }

  InvalidateResult invalidate(Addr addr) {
    InvalidateResult res;
    int way = probe(addr);
    if (way < 0) return res;
    CacheLineSlot& s = slot(geom_.set_index(addr), static_cast<uint32_t>(way));
    if (s.locked) {
      res.blocked_locked = true;
      return res;
    }
    res.was_present = true;
    res.was_dirty = s.dirty;
    s.valid = false;
    return res;
  }

  // PL lock; the line must already be resident (the machine does fetch-on-lock).
  void lock_resident(Addr addr) {
    int way = probe(addr);
    if (way < 0) throw ConfigError("pl_lock: line not resident");
    slot(geom_.set_index(addr), static_cast<uint32_t>(way)).locked = true;
  }

  bool unlock(Addr addr) {
    int way = probe(addr);
    if (way < 0) return false;
    slot(geom_.set_index(addr), static_cast<uint32_t>(way)).locked = false;
    return true;
  }

  uint32_t locked_count(uint64_t set) const {
    uint32_t n = 0;
    for (uint32_t w = 0; w < geom_.associativity; ++w) {
      const CacheLineSlot& s = slot(set, w);
      if (live(s) && s.locked) ++n;
    }
    return n;
  }

  uint32_t valid_count(uint64_t set) const {
    uint32_t n = 0;
    for (uint32_t w = 0; w < geom_.associativity; ++w)
      if (live(slot(set, w))) ++n;
    return n;
  }

  std::vector<Addr> locked_lines() const {
    std::vector<Addr> out;
    for (uint64_t set = 0; set < geom_.num_sets(); ++set)
      for (uint32_t w = 0; w < geom_.associativity; ++w) {
        const CacheLineSlot& s = slot(set, w);
        if (live(s) && s.locked)
          out.push_back((s.tag * geom_.num_sets() + set) * geom_.line_size);
      }
    return out;
  }

  uint64_t locked_eviction_events() const { return locked_evictions_; }

  // Structural sanity used by property tests: unique tags among valid slots.
  bool set_is_consistent(uint64_t set) const {
    for (uint32_t i = 0; i < geom_.associativity; ++i)
      for (uint32_t j = i + 1; j < geom_.associativity; ++j) {
        const CacheLineSlot &a = slot(set, i), &b = slot(set, j);
        if (live(a) && live(b) && a.tag == b.tag) return false;
      }
    return true;
  }

 private:
  int pick_victim(uint64_t set) {
    CacheLineSlot* row = &slots_[set * geom_.associativity];
    switch (policy_.kind) {
      case PolicyKind::Lru: {
        for (uint32_t w = 0; w < geom_.associativity; ++w)
          if (!live(row[w])) return static_cast<int>(w);
        int best = -1;
        uint64_t best_stamp = UINT64_MAX;
        for (uint32_t w = 0; w < geom_.associativity; ++w)
          if (!row[w].locked && row[w].lru_stamp < best_stamp) {
            best_stamp = row[w].lru_stamp;
            best = static_cast<int>(w);
          }
        return best;
      }
      case PolicyKind::Random:
        return static_cast<int>(rng_.below(geom_.associativity));
      case PolicyKind::PlRandom: {
        int w = static_cast<int>(rng_.below(geom_.associativity));
        if (live(row[w]) && row[w].locked) return -1;  // -> Uncached
        return w;
      }
    }
    return 0;
  }

  CacheGeometry geom_;
  ReplacementPolicy policy_;
  Xorshift64Star rng_;
  std::vector<CacheLineSlot> slots_;
  uint64_t stamp_ = 0;
  uint64_t epoch_ = 1;
  uint64_t locked_evictions_ = 0;
};

// Accesses each address in order, whole sequence repeated `reps` times.
// Structural priming only; latency-bearing priming goes through the machine.
inline void prime_set(Cache& cache, std::span<const Addr> eviction_set, int reps = 10) {
  for (int r = 0; r < reps; ++r)
    for (Addr a : eviction_set) {
      int way = cache.probe(a);
      if (way >= 0)
        cache.touch(a, way);
      else
        cache.fill(a, false, false);
    }
}

}  // namespace tristep

#endif
