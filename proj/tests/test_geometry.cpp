#include <doctest.h>

#include "tristep/geometry.hpp"
#include "tristep/rng.hpp"

using namespace tristep;

TEST_CASE("set_index maps addresses per the set arithmetic") {
  CacheGeometry g{32768, 4, 64};
  REQUIRE(g.num_sets() == 128);
  CHECK(set_index(0, g) == 0);
  CHECK(set_index(8192, g) == 0);  // one set-stride apart lands in the same set
  CHECK(set_index(64, g) == 1);
  CHECK(g.set_stride() == 8192);
}

TEST_CASE("mapping periodicity and line identity") {
  CacheGeometry g{32768, 4, 64};
  Xorshift64Star rng(7);
  for (int i = 0; i < 2000; ++i) {
    Addr addr = rng.below(1ull << 40);
    uint64_t c = rng.below(64);
    CHECK(g.set_index(addr + c * g.set_stride()) == g.set_index(addr));
    // addresses differing only in the low log2(line) bits share line and set
    Addr within = g.line_base(addr) + rng.below(g.line_size);
    CHECK(g.line_index(within) == g.line_index(addr));
    CHECK(g.set_index(within) == g.set_index(addr));
  }
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS((CacheGeometry{32768, 3, 64}.validate(false)), ConfigError);
  CHECK_THROWS_AS((CacheGeometry{32768, 4, 4}.validate(false)), ConfigError);
  CHECK_THROWS_AS((CacheGeometry{32768 + 64, 4, 64}.validate(false)), ConfigError);
  // whole-size power of two is only required of device geometries
  CHECK_THROWS_AS((CacheGeometry{98304, 4, 64}.validate(true)), ConfigError);
  CacheGeometry grid_value{98304, 4, 64};
  CHECK_NOTHROW(grid_value.validate(false));
  CHECK(grid_value.num_sets() == 384);
}

TEST_CASE("eviction sets map to the target set and avoid the candidates") {
  CacheGeometry g{32768, 4, 64};
  AddressLayout layout(g);

  auto es = layout.eviction_set(0);
  REQUIRE(es.size() == 3);
  for (size_t i = 0; i < es.size(); ++i)
    for (size_t j = i + 1; j < es.size(); ++j) {
      uint64_t d = es[j] - es[i];
      CHECK(d % g.set_stride() == 0);
    }

  CacheGeometry g2{32768, 2, 64};
  CHECK(AddressLayout(g2).eviction_set(0).size() == 1);
  CacheGeometry g1{32768, 1, 64};
  CHECK(AddressLayout(g1).eviction_set(0).empty());

  CacheGeometry g16{32768, 16, 64};
  AddressLayout l16(g16);
  auto es16 = l16.eviction_set(5);
  REQUIRE(es16.size() == 15);
  for (Addr a : es16) {
    CHECK(g16.set_index(a) == 5);  // each address checked via the mapping oracle
    CHECK(a != l16.addr_a());
    CHECK(a != l16.addr_alias());
    CHECK(a != l16.addr_nib());
  }
}

TEST_CASE("candidate addresses occupy the right sets") {
  AddressLayout layout(CacheGeometry{32768, 4, 64});
  const CacheGeometry& g = layout.bench_geometry();
  CHECK(g.set_index(layout.addr_a()) == g.set_index(layout.addr_alias()));
  CHECK(layout.addr_a() != layout.addr_alias());
  CHECK(g.set_index(layout.addr_nib()) ==
        (g.set_index(layout.addr_a()) + g.num_sets() / 2) % g.num_sets());
}
