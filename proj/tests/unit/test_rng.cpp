#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sentinel/rng.hpp"

using namespace sentinel;

namespace {

// Reference xoshiro256** step over an explicit state.
std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t xoshiro_next(std::array<std::uint64_t, 4>& s) {
  std::uint64_t result = rotl(s[1] * 5, 7) * 9;
  std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  return result;
}

}  // namespace

TEST_SUITE("rng") {
  TEST_CASE("splitmix64 reference outputs for seed 1234567") {
    std::uint64_t s = 1234567;
    CHECK(splitmix64(s) == 6457827717110365317ULL);
    CHECK(splitmix64(s) == 3203168211198807973ULL);
    CHECK(splitmix64(s) == 9817491932198370423ULL);
  }

  TEST_CASE("reference xoshiro state {1,2,3,4}") {
    std::array<std::uint64_t, 4> s{1, 2, 3, 4};
    CHECK(xoshiro_next(s) == 11520ULL);
    CHECK(xoshiro_next(s) == 0ULL);
    CHECK(xoshiro_next(s) == 1509978240ULL);
    CHECK(xoshiro_next(s) == 1215971899390074240ULL);
  }

  TEST_CASE("Rng matches xoshiro seeded from splitmix64") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
      std::uint64_t sm = seed;
      std::array<std::uint64_t, 4> s{};
      for (auto& w : s) w = splitmix64(sm);
      Rng rng(seed);
      for (int i = 0; i < 100; ++i) REQUIRE(rng.next() == xoshiro_next(s));
    }
  }

  TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  }

  TEST_CASE("substreams are keyed by name") {
    Rng a = Rng::substream(7, "actor/u01");
    Rng b = Rng::substream(7, "actor/u01");
    Rng c = Rng::substream(7, "actor/u02");
    std::uint64_t x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }

  TEST_CASE("uniform lies in [0,1) and uniform_int is inclusive") {
    Rng rng(3);
    std::array<int, 4> seen{};
    for (int i = 0; i < 20000; ++i) {
      double u = rng.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      auto k = rng.uniform_int(2, 5);
      REQUIRE(k >= 2);
      REQUIRE(k <= 5);
      ++seen[static_cast<std::size_t>(k - 2)];
    }
    for (int n : seen) CHECK(n > 4000);
    CHECK(rng.uniform_int(9, 9) == 9);
  }

  TEST_CASE("poisson and normal sample moments") {
    Rng rng(11);
    const int n = 50000;
    double sum = 0, sum2 = 0, psum = 0;
    for (int i = 0; i < n; ++i) {
      double z = rng.normal();
      sum += z;
      sum2 += z * z;
      psum += static_cast<double>(rng.poisson(0.8));
    }
    double mean = sum / n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sum2 / n - 1.0) < 0.03);
    CHECK(std::abs(psum / n - 0.8) < 4.0 * std::sqrt(0.8 / n));
    CHECK(rng.poisson(0.0) == 0);
  }
}
