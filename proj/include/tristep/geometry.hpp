#ifndef TRISTEP_GEOMETRY_HPP
#define TRISTEP_GEOMETRY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tristep/errors.hpp"

namespace tristep {

using Addr = uint64_t;

inline bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

struct CacheGeometry {
  uint64_t total_size = 32768;   // bytes
  uint32_t associativity = 4;    // ways
  uint32_t line_size = 64;       // bytes

  uint64_t num_sets() const { return total_size / (uint64_t{associativity} * line_size); }
  uint64_t set_stride() const { return total_size / associativity; }  // distance between same-set lines

  Addr line_index(Addr addr) const { return addr / line_size; }
  uint64_t set_index(Addr addr) const { return line_index(addr) % num_sets(); }
  uint64_t tag(Addr addr) const { return line_index(addr) / num_sets(); }
  Addr line_base(Addr addr) const { return addr - addr % line_size; }

  // Device geometries must be fully power-of-two. Benchmark-believed values are
  // allowed a non-power-of-two total as long as the set count divides exactly
  // (the sensitivity sweep grid contains 98304).
  void validate(bool strict_pow2_total = true) const {
    if (associativity < 1) throw ConfigError("associativity must be >= 1");
    if (line_size < 8) throw ConfigError("line_size must be >= 8 bytes");
    if (!is_pow2(associativity)) throw ConfigError("associativity must be a power of two");
    if (!is_pow2(line_size)) throw ConfigError("line_size must be a power of two");
    if (strict_pow2_total && !is_pow2(total_size)) throw ConfigError("total_size must be a power of two");
    uint64_t denom = uint64_t{associativity} * line_size;
    if (total_size == 0 || total_size % denom != 0)
      throw ConfigError("total_size must be an exact multiple of associativity * line_size");
  }

  bool operator==(const CacheGeometry&) const = default;
};

inline uint64_t set_index(Addr addr, const CacheGeometry& geom) { return geom.set_index(addr); }

// Benchmark address layout. All candidate and eviction-set addresses are
// derived from the geometry the benchmark *believes*; mapping them through the
// actual device geometry is what the sensitivity tests exercise.
//
//   a      : fixed base line
//   a_alias: a + 3*(total/assoc), same believed set, different line
//   NIB    : set index num_sets/2, placed two full set-wraps out
//   eviction sets: a dedicated region, disjoint from all of the above
//
// Candidates are spaced several set-wraps apart so that no candidate lies in
// another candidate's random-fill neighborhood at window sizes up to num_sets.
class AddressLayout {
 public:
  static constexpr Addr kCandidateBase = Addr{1} << 20;
  static constexpr Addr kEvictionBase = Addr{1} << 24;

  AddressLayout() : AddressLayout(CacheGeometry{}) {}
  explicit AddressLayout(const CacheGeometry& bench) : bench_(bench) {
    bench_.validate(false);
    // The eviction region must stay clear of the candidate region.
    if (bench_.total_size * 8 > (kEvictionBase - kCandidateBase))
      throw ConfigError("benchmark geometry too large for the fixed address layout");
  }

  const CacheGeometry& bench_geometry() const { return bench_; }

  Addr addr_a() const { return kCandidateBase; }
  Addr addr_alias() const { return kCandidateBase + 3 * bench_.set_stride(); }
  Addr addr_nib() const {
    return kCandidateBase + (bench_.num_sets() / 2 + 2 * bench_.num_sets()) * bench_.line_size;
  }

  // j-th line of the rep block that starts at `base` (consecutive sets).
  Addr rep_line(Addr base, uint32_t j) const { return base + uint64_t{j} * bench_.line_size; }

  // associativity-1 distinct addresses mapping to target_set, none of them a
  // candidate address. Empty for direct-mapped believed geometry.
  std::vector<Addr> eviction_set(uint64_t target_set) const {
    std::vector<Addr> out;
    if (bench_.associativity < 2) return out;
    out.reserve(bench_.associativity - 1);
    uint64_t sets = bench_.num_sets();
    uint64_t base_line = kEvictionBase / bench_.line_size;
    uint64_t offset_sets = (target_set + sets - base_line % sets) % sets;
    Addr set_base = kEvictionBase + offset_sets * bench_.line_size;
    for (uint32_t k = 0; k + 1 < bench_.associativity; ++k)
      out.push_back(set_base + uint64_t{k} * bench_.set_stride());
    return out;
  }

 private:
  CacheGeometry bench_;
};

}  // namespace tristep

#endif
