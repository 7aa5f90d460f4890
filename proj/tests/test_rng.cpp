#include <cmath>
#include <vector>
#include <set>

#include "aprox/rng.hpp"
#include "doctest.h"

using aprox::Philox4x32;
using aprox::RngStream;

TEST_SUITE("rng") {
  TEST_CASE("philox known-answer vectors") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}) ==
          C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::apply(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                            K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::apply(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                            K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("same key gives the same stream, different keys differ") {
    RngStream a(42, "test", {1, 2});
    RngStream b(42, "test", {1, 2});
    RngStream c(42, "test", {1, 3});
    RngStream d(42, "other", {1, 2});
    bool differs_c = false;
    bool differs_d = false;
    for (int i = 0; i < 100; ++i) {
      const auto va = a.next_u64();
      CHECK(va == b.next_u64());
      differs_c = differs_c || va != c.next_u64();
      differs_d = differs_d || va != d.next_u64();
    }
    CHECK(differs_c);
    CHECK(differs_d);
  }

  TEST_CASE("uniform lies in the open unit interval") {
    RngStream r(1, "uniform");
    double sum = 0.0;
    for (int i = 0; i < 100'000; ++i) {
      const double u = r.uniform();
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
    CHECK(sum / 100'000 == doctest::Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("normal moments") {
    RngStream r(2, "normal");
    double s1 = 0.0;
    double s2 = 0.0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
      const double z = r.normal();
      s1 += z;
      s2 += z * z;
    }
    CHECK(std::fabs(s1 / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("index covers the range uniformly") {
    RngStream r(3, "index");
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70'000; ++i) {
      const auto k = r.index(7);
      REQUIRE(k < 7);
      ++counts[k];
    }
    for (const int c : counts) CHECK(std::abs(c - 10'000) < 500);
    CHECK_THROWS(r.index(0));
  }

  TEST_CASE("poisson draws match mean and variance on both algorithm branches") {
    for (const double mean : {0.5, 4.0, 29.0, 31.0, 250.0}) {
      RngStream r(4, "poisson", {static_cast<std::uint64_t>(mean * 10)});
      double s1 = 0.0;
      double s2 = 0.0;
      const int n = 100'000;
      for (int i = 0; i < n; ++i) {
        const double k = static_cast<double>(r.poisson(mean));
        s1 += k;
        s2 += k * k;
      }
      const double m = s1 / n;
      const double var = s2 / n - m * m;
      CHECK(m == doctest::Approx(mean).epsilon(0.02));
      CHECK(var == doctest::Approx(mean).epsilon(0.05));
    }
    RngStream r(5, "poisson-zero");
    CHECK(r.poisson(0.0) == 0);
  }

  TEST_CASE("bernoulli frequency") {
    RngStream r(6, "bernoulli");
    int hits = 0;
    for (int i = 0; i < 100'000; ++i) hits += r.bernoulli(0.3) ? 1 : 0;
    CHECK(hits / 100'000.0 == doctest::Approx(0.3).epsilon(0.02));
  }

  TEST_CASE("derive_seed separates paths") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(aprox::derive_seed(7, "dataset", {i}));
    CHECK(seen.size() == 100);
    CHECK(aprox::derive_seed(7, "dataset", {1}) == aprox::derive_seed(7, "dataset", {1}));
    CHECK(aprox::derive_seed(7, "dataset", {1}) != aprox::derive_seed(8, "dataset", {1}));
  }
}
