#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>

#include "gtbounds/channels.hpp"
#include "gtbounds/rng.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("transition_prob examples") {
  REQUIRE(gtb::transition_prob(gtb::Noiseless{}, 0, 0) == 1.0);
  REQUIRE(gtb::transition_prob(gtb::Noiseless{}, 0, 1) == 0.0);
  REQUIRE(gtb::transition_prob(gtb::Noiseless{}, 5, 1) == 1.0);
  REQUIRE(gtb::transition_prob(gtb::BSC{0.11}, 3, 0) == 0.11);
  REQUIRE(gtb::transition_prob(gtb::BSC{0.11}, 0, 0) == 0.89);
  REQUIRE_THAT(gtb::transition_prob(gtb::Dilution{0.2}, 2, 0), WithinRel(0.64, 1e-12));
  REQUIRE(gtb::transition_prob(gtb::Dilution{0.2}, 0, 0) == 1.0);
}

TEST_CASE("channel rows are distributions") {
  const gtb::Channel channels[] = {
      gtb::Channel{gtb::Noiseless{}},
      gtb::Channel{gtb::BSC{0.11}},
      gtb::Channel{gtb::Dilution{0.35}},
      gtb::Channel{gtb::GenericODM{2, {{1.0, 0.0}, {0.3, 0.7}, {0.1, 0.9}}}},
  };
  for (const auto& ch : channels) {
    gtb::validate(ch);
    const std::uint64_t k_cap = std::holds_alternative<gtb::GenericODM>(ch) ? 2 : 40;
    for (std::uint64_t k = 0; k <= k_cap; ++k) {
      const double p0 = gtb::transition_prob(ch, k, 0);
      const double p1 = gtb::transition_prob(ch, k, 1);
      REQUIRE(p0 >= 0.0);
      REQUIRE(p1 >= 0.0);
      REQUIRE_THAT(p0 + p1, WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("BSC only sees the defective indicator") {
  const gtb::Channel ch{gtb::BSC{0.11}};
  const double base = gtb::transition_prob(ch, 1, 1);
  for (std::uint64_t k = 1; k <= 50; ++k) {
    REQUIRE(gtb::transition_prob(ch, k, 1) == base);
  }
}

TEST_CASE("channel validation and table range errors") {
  REQUIRE_THROWS_AS(gtb::BSC{0.5}.validate(), std::domain_error);
  REQUIRE_THROWS_AS(gtb::BSC{-0.1}.validate(), std::domain_error);
  REQUIRE_THROWS_AS(gtb::Dilution{1.2}.validate(), std::domain_error);
  gtb::GenericODM bad{1, {{0.5, 0.4}, {0.0, 1.0}}};
  REQUIRE_THROWS_AS(bad.validate(), std::domain_error);
  gtb::GenericODM short_table{3, {{1.0, 0.0}}};
  REQUIRE_THROWS_AS(short_table.validate(), std::domain_error);

  const gtb::Channel odm{gtb::GenericODM{1, {{1.0, 0.0}, {0.2, 0.8}}}};
  REQUIRE(gtb::transition_prob(odm, 1, 1) == 0.8);
  REQUIRE_THROWS_AS(gtb::transition_prob(odm, 2, 1), std::domain_error);
  REQUIRE_THROWS_AS(gtb::transition_prob(odm, 0, 2), std::domain_error);
}

TEST_CASE("capacity_bsc endpoints and the p = 0.11 operating point") {
  REQUIRE(gtb::capacity_bsc(0.0) == 1.0);
  REQUIRE(gtb::capacity_bsc(0.5) == 0.0);
  REQUIRE_THAT(gtb::capacity_bsc(0.11), WithinAbs(0.500, 5e-4));
  REQUIRE_THAT(gtb::capacity_bsc(0.11), WithinRel(0.5000840418354720043595, 1e-12));
  REQUIRE_THROWS_AS(gtb::capacity_bsc(0.7), std::domain_error);
  REQUIRE_THROWS_AS(gtb::capacity_bsc(-0.1), std::domain_error);
}

TEST_CASE("sample_output determinism and degenerate channels") {
  gtb::RandomStream any(123);
  REQUIRE(gtb::sample_output(gtb::Channel{gtb::Noiseless{}}, 5, any) == 1);
  REQUIRE(gtb::sample_output(gtb::Channel{gtb::BSC{0.0}}, 0, any) == 0);

  gtb::RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(gtb::sample_output(gtb::Channel{gtb::BSC{0.11}}, 1, a) ==
            gtb::sample_output(gtb::Channel{gtb::BSC{0.11}}, 1, b));
  }
}

TEST_CASE("sample_output consumes exactly one draw") {
  gtb::RandomStream a(7), b(7);
  gtb::sample_output(gtb::Channel{gtb::Noiseless{}}, 3, a);
  b.next_unit();
  REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("sample_output frequencies match transition_prob within 4 SE") {
  struct Case {
    gtb::Channel ch;
    std::uint64_t k;
  };
  const Case cases[] = {
      {gtb::Channel{gtb::BSC{0.11}}, 1},
      {gtb::Channel{gtb::BSC{0.11}}, 0},
      {gtb::Channel{gtb::Dilution{0.2}}, 3},
      {gtb::Channel{gtb::GenericODM{1, {{1.0, 0.0}, {0.25, 0.75}}}}, 1},
  };
  const std::uint64_t n = 100000;
  std::uint64_t seed = 1;
  for (const auto& c : cases) {
    gtb::RandomStream stream(seed++);
    std::uint64_t ones = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      ones += static_cast<std::uint64_t>(gtb::sample_output(c.ch, c.k, stream));
    }
    const double p1 = gtb::transition_prob(c.ch, c.k, 1);
    const double se = std::sqrt(p1 * (1.0 - p1) / static_cast<double>(n));
    REQUIRE(std::abs(static_cast<double>(ones) / static_cast<double>(n) - p1) <= 4.0 * se);
  }
}

TEST_CASE("odm tables load from two-column text") {
  std::istringstream in(
      "# P(0|k) P(1|k)\n"
      "1 0\n"
      "0.89 0.11\n"
      "0.11 0.89\n");
  const gtb::GenericODM ch = gtb::load_odm_table(in);
  REQUIRE(ch.k_max == 2);
  REQUIRE(ch.table[1][1] == 0.11);
  REQUIRE(gtb::transition_prob(gtb::Channel{ch}, 2, 1) == 0.89);

  auto expect_throw = [](const char* text) {
    std::istringstream bad(text);
    REQUIRE_THROWS_AS(gtb::load_odm_table(bad), std::runtime_error);
  };
  expect_throw("0.5\n");              // one column
  expect_throw("0.5 0.6 0.7\n");      // three columns
  expect_throw("");                   // empty
  REQUIRE_THROWS_AS(
      [] {
        std::istringstream bad("0.5 0.4\n");
        gtb::load_odm_table(bad);
      }(),
      std::domain_error);             // row not a distribution
}

TEST_CASE("trial-keyed streams are reproducible and distinct") {
  gtb::RandomStream a = gtb::RandomStream::for_trial(9, 4);
  gtb::RandomStream b = gtb::RandomStream::for_trial(9, 4);
  gtb::RandomStream c = gtb::RandomStream::for_trial(9, 5);
  gtb::RandomStream d = gtb::RandomStream::for_trial(10, 4);
  const std::uint64_t a0 = a.next_u64();
  REQUIRE(a0 == b.next_u64());
  REQUIRE(a0 != c.next_u64());
  REQUIRE(a0 != d.next_u64());

  gtb::RandomStream s(0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = s.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  REQUIRE_THAT(sum / 100000.0, WithinAbs(0.5, 0.004));

  gtb::RandomStream t(3);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(t.next_below(7) < 7);
  }
}
