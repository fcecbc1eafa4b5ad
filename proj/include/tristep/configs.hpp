#ifndef TRISTEP_CONFIGS_HPP
#define TRISTEP_CONFIGS_HPP

#include "tristep/machine.hpp"

namespace tristep {

// 32 KB / 4-way / 64 B little core geometry used throughout.
inline CacheGeometry little_l1_geometry() { return CacheGeometry{32768, 4, 64}; }
inline CacheGeometry big_l1_geometry() { return CacheGeometry{65536, 16, 64}; }

// Classification oracle: one little core, LRU L1 (deterministic), no noise,
// signal-enabling toggles on, signal-hiding toggles off.
inline MachineConfig reference_machine_config() {
  MachineConfig cfg;
  cfg.cores = {CoreDescriptor{0, Cluster::Little, little_l1_geometry(),
                              ReplacementPolicy{PolicyKind::Lru, 1}}};
  cfg.toggles.store_buffer = true;
  cfg.toggles.scu = false;
  cfg.toggles.transient_region = false;
  cfg.toggles.write_buffer_size = 2;
  cfg.toggles.mshr_size = 4;
  cfg.noise.sigma = 0;
  return cfg;
}

// Default execution machine: little local core with random replacement (the
// Arm-like target), one big remote core, sigma = 3.
inline MachineConfig default_machine_config() {
  MachineConfig cfg;
  cfg.cores = {CoreDescriptor{0, Cluster::Little, little_l1_geometry(),
                              ReplacementPolicy{PolicyKind::Random, 1}},
               CoreDescriptor{1, Cluster::Big, big_l1_geometry(),
                              ReplacementPolicy{PolicyKind::Random, 2}}};
  cfg.toggles.store_buffer = true;
  cfg.toggles.scu = false;
  cfg.toggles.transient_region = false;
  cfg.toggles.write_buffer_size = 2;
  cfg.toggles.mshr_size = 4;
  cfg.noise.sigma = 3.0;
  return cfg;
}

// Two cores per cluster so all four local/remote cluster bindings resolve.
inline MachineConfig big_little_machine_config() {
  MachineConfig cfg = default_machine_config();
  cfg.cores = {
      CoreDescriptor{0, Cluster::Little, little_l1_geometry(), ReplacementPolicy{PolicyKind::Random, 1}},
      CoreDescriptor{1, Cluster::Little, little_l1_geometry(), ReplacementPolicy{PolicyKind::Random, 2}},
      CoreDescriptor{2, Cluster::Big, big_l1_geometry(), ReplacementPolicy{PolicyKind::Random, 3}},
      CoreDescriptor{3, Cluster::Big, big_l1_geometry(), ReplacementPolicy{PolicyKind::Random, 4}},
  };
  return cfg;
}

// PL cache evaluation: lock-aware random replacement on the L1s.
inline MachineConfig pl_machine_config() {
  MachineConfig cfg = default_machine_config();
  for (auto& c : cfg.cores) c.l1_policy.kind = PolicyKind::PlRandom;
  return cfg;
}

// RF cache evaluation. The L2 is disabled and the store buffer is off so the
// run isolates the L1 fill channel the defense targets; with them on, the
// demand line's L2 copy and write-buffer forwarding are side channels of their
// own that no L1 fill policy can remove.
inline MachineConfig rf_machine_config(uint64_t rf_start, uint64_t rf_size) {
  MachineConfig cfg = default_machine_config();
  cfg.l2.enabled = false;
  cfg.toggles.store_buffer = false;
  cfg.toggles.write_buffer_size = 0;
  cfg.rf = RfConfig{rf_start, rf_size, 0xf111};
  return cfg;
}

inline MachineConfig rf_small_window_config() { return rf_machine_config(2, 5); }
// 128-line window = one full pass over the 128 sets, placed a window back so
// the probe lines themselves are never candidates for the random fetch.
inline MachineConfig rf_large_window_config() { return rf_machine_config(256, 128); }

}  // namespace tristep

#endif
