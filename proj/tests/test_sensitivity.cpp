#include <doctest.h>

#include <set>

#include "tristep/rng.hpp"
#include "tristep/sensitivity.hpp"

using namespace tristep;

namespace {

const CacheGeometry kDevice{32768, 4, 64};

// Brute-force mapper: enumerates every generated address and compares device
// set images directly, independent of the diagnosis arithmetic.
MappingDiagnosis brute_force(const CacheGeometry& bench, const CacheGeometry& device, int rep) {
  StepAddressPlan plan = generate_addresses(bench, rep);
  MappingDiagnosis d;
  d.c_prime = double(bench.total_size) / double(device.total_size);
  d.min_distinct_lines_in_target = device.associativity;
  std::vector<std::set<uint64_t>> images;
  for (const auto& group : plan.set_groups) {
    std::set<uint64_t> sets;
    std::set<Addr> lines_in_intended;
    for (Addr a : group) sets.insert(device.set_index(a));
    for (Addr a : group)
      if (device.set_index(a) == device.set_index(group.front()))
        lines_in_intended.insert(device.line_index(a));
    if (sets.size() > 1) d.situation2 = true;
    if (lines_in_intended.size() < device.associativity) d.situation1 = true;
    d.min_distinct_lines_in_target =
        std::min<uint32_t>(d.min_distinct_lines_in_target, lines_in_intended.size());
    images.push_back(sets);
  }
  for (size_t i = 0; i < images.size(); ++i)
    for (size_t j = i + 1; j < images.size(); ++j)
      for (uint64_t s : images[i])
        if (images[j].count(s)) d.situation3 = true;
  if (device.set_index(plan.addr_nib) == device.set_index(plan.addr_a)) {
    d.wrap_back = true;
    d.situation3 = true;
  }
  return d;
}

bool same(const MappingDiagnosis& a, const MappingDiagnosis& b) {
  return a.situation1 == b.situation1 && a.situation2 == b.situation2 &&
         a.situation3 == b.situation3 && a.wrap_back == b.wrap_back &&
         a.min_distinct_lines_in_target == b.min_distinct_lines_in_target;
}

}  // namespace

TEST_CASE("generate_addresses lays out rep blocks the benchmark way") {
  StepAddressPlan plan = generate_addresses(kDevice, 8);
  REQUIRE(plan.set_groups.size() == 8);
  for (int j = 0; j < 8; ++j) {
    REQUIRE(plan.set_groups[j].size() == 4);  // asso_b addresses per set
    uint64_t want = kDevice.set_index(plan.addr_a) + j;
    for (Addr a : plan.set_groups[j]) CHECK(kDevice.set_index(a) == want);
  }
  // NIB is the first line past the rep block: not in any measured set
  CHECK(kDevice.set_index(plan.addr_nib) == kDevice.set_index(plan.addr_a) + 8);
  CHECK(kDevice.set_index(plan.addr_alias) == kDevice.set_index(plan.addr_a));
}

TEST_CASE("correct configuration raises no situation") {
  MappingDiagnosis d = diagnose_mapping(kDevice, kDevice);
  CHECK(!d.situation1);
  CHECK(!d.situation2);
  CHECK(!d.situation3);
  CHECK(!d.wrap_back);
  CHECK(d.min_distinct_lines_in_target == 4);
}

TEST_CASE("small associativity reports situation 1 only") {
  MappingDiagnosis d = diagnose_mapping(CacheGeometry{32768, 2, 64}, kDevice);
  CHECK(d.situation1);
  CHECK(!d.situation2);
  CHECK(!d.situation3);
}

TEST_CASE("half line size reports situation 3") {
  MappingDiagnosis d = diagnose_mapping(CacheGeometry{32768, 4, 32}, kDevice);
  CHECK(d.situation3);
  CHECK(!d.situation1);
}

TEST_CASE("half total size reports situations 1 and 2") {
  MappingDiagnosis d = diagnose_mapping(CacheGeometry{16384, 4, 64}, kDevice);
  CHECK(d.situation1);
  CHECK(d.situation2);
}

TEST_CASE("doubled total size with integer quotient is clean") {
  MappingDiagnosis d = diagnose_mapping(CacheGeometry{65536, 4, 64}, kDevice);
  CHECK(!d.situation1);
  CHECK(!d.situation2);
  CHECK(!d.situation3);
  CHECK(d.c_prime == 2.0);
}

TEST_CASE("nib wraps back at line_b = (num_sets/rep) * line_d") {
  // 128 sets / rep 8 = 16x the device line size
  MappingDiagnosis at = diagnose_mapping(CacheGeometry{32768 * 16, 4, 64 * 16}, kDevice);
  CHECK(at.wrap_back);
  CHECK(at.situation3);
  MappingDiagnosis below = diagnose_mapping(CacheGeometry{32768 * 8, 4, 64 * 8}, kDevice);
  CHECK(!below.wrap_back);
}

TEST_CASE("diagnosis equals the brute-force mapper on randomized geometries") {
  Xorshift64Star rng(41);
  const uint32_t assos[] = {1, 2, 4, 8, 16};
  const uint32_t lines[] = {16, 32, 64, 128, 256, 512, 1024};
  int done = 0;
  for (int i = 0; i < 300; ++i) {
    CacheGeometry bench;
    bench.associativity = assos[rng.below(5)];
    bench.line_size = lines[rng.below(7)];
    uint64_t sets = 1ull << rng.below(8);  // 1..128 sets
    bench.total_size = sets * bench.associativity * bench.line_size;
    if (bench.total_size > (1u << 21)) continue;
    int rep = 1 + static_cast<int>(rng.below(8));
    MappingDiagnosis fast = diagnose_mapping(bench, kDevice, rep);
    MappingDiagnosis slow = brute_force(bench, kDevice, rep);
    CHECK(same(fast, slow));
    ++done;
  }
  CHECK(done > 200);
}

TEST_CASE("sweep demands the correct device value in the grid") {
  Catalog cat;  // empty catalog: the guard fires before any execution
  CHECK_THROWS_AS(sweep_parameter(default_machine_config(), cat, SweepParameter::Associativity,
                                  {1, 2, 8, 16}, SuiteOptions{}),
                  ConfigError);
}

TEST_CASE("table grids match the published sweep values") {
  CHECK(table_grid(SweepParameter::Associativity) == std::vector<uint64_t>{1, 2, 4, 8, 16});
  CHECK(table_grid(SweepParameter::LineSize) == std::vector<uint64_t>{16, 32, 64, 128, 256});
  CHECK(table_grid(SweepParameter::TotalSize) ==
        std::vector<uint64_t>{8192, 16384, 32768, 65536, 98304});
}
