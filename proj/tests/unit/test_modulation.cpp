#include <doctest.h>

#include <cmath>

#include "chnet/errors.hpp"
#include "chnet/modulation.hpp"

using namespace chnet;

TEST_CASE("constellation levels") {
  const double r2 = 1.0 / std::sqrt(2.0);
  const Constellation c4(4);
  REQUIRE(c4.classes() == 2);
  CHECK(c4.level(0) == doctest::Approx(-r2).epsilon(1e-15));
  CHECK(c4.level(1) == doctest::Approx(r2).epsilon(1e-15));

  const Constellation c16(16);
  const double s16 = 1.0 / std::sqrt(10.0);
  REQUIRE(c16.classes() == 4);
  const double e16[] = {-3, -1, 1, 3};
  for (int i = 0; i < 4; ++i) CHECK(c16.level(i) == doctest::Approx(e16[i] * s16).epsilon(1e-15));

  const Constellation c64(64);
  const double s64 = 1.0 / std::sqrt(42.0);
  REQUIRE(c64.classes() == 8);
  for (int i = 0; i < 8; ++i)
    CHECK(c64.level(i) == doctest::Approx((2 * i - 7) * s64).epsilon(1e-15));
}

TEST_CASE("average complex power is 1 for every supported order") {
  for (unsigned m : {4u, 16u, 64u, 256u}) {
    const Constellation c(m);
    double p = 0.0;
    for (double l : c.levels()) p += l * l;
    p /= static_cast<double>(c.classes());
    CHECK(2.0 * p == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(2.0 * c.real_power() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("unsupported orders are configuration errors") {
  for (unsigned m : {0u, 1u, 2u, 8u, 32u, 9u, 1024u}) CHECK_THROWS_AS(Constellation{m}, ConfigError);
}

TEST_CASE("draw_symbols golden frame (M=4, K=2, seed 0 stream 0)") {
  const Constellation c(4);
  RngStream s(0, 0);
  const SymbolFrame f = draw_symbols(c, 2, s);
  CHECK(f.labels == std::vector<std::uint32_t>{1, 0});
  CHECK(f.x == RealVector{c.level(1), c.level(0)});
}

TEST_CASE("drawn labels are uniform and consistent with x") {
  const Constellation c(16);
  RngStream s(3, 0);
  const SymbolFrame f = draw_symbols(c, 40'000, s);
  std::vector<int> counts(4, 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f.x[i] == c.level(f.labels[i]));
    ++counts[f.labels[i]];
  }
  for (int n : counts) CHECK(std::abs(n - 10'000) < 400);
  CHECK(frame_from_labels(c, f.labels) == f);
}

TEST_CASE("slice") {
  const Constellation c(16);
  const double s = c.scale();

  SUBCASE("exact levels are fixed points") {
    const RealVector u(c.levels().begin(), c.levels().end());
    const SymbolFrame f = slice(c, u);
    CHECK(f.x == u);
  }
  SUBCASE("nearest level") { CHECK(slice(c, RealVector{0.9 * s}).x[0] == c.level(2)); }
  SUBCASE("equidistant input goes to the lower level") {
    CHECK(slice(c, RealVector{2.0 * s}).x[0] == c.level(2));
    CHECK(slice(c, RealVector{0.0}).x[0] == c.level(1));
    CHECK(slice(c, RealVector{-2.0 * s}).x[0] == c.level(0));
  }
  SUBCASE("out-of-range inputs clamp to the outer levels") {
    CHECK(slice(c, RealVector{100.0}).labels[0] == 3);
    CHECK(slice(c, RealVector{-100.0}).labels[0] == 0);
  }
  SUBCASE("idempotent and minimizes distance (exhaustive)") {
    RngStream rs(9, 9);
    for (unsigned m : {4u, 16u, 64u}) {
      const Constellation cm(m);
      for (int i = 0; i < 2000; ++i) {
        const double u = 3.0 * rs.normal();
        const SymbolFrame once = slice(cm, RealVector{u});
        CHECK(slice(cm, once.x) == once);
        const double best = std::abs(u - once.x[0]);
        for (double l : cm.levels()) CHECK(best <= std::abs(u - l));
      }
    }
  }
}

TEST_CASE("symbol errors pair real dimensions i and i + K/2") {
  const Constellation c(4);
  const SymbolFrame truth = frame_from_labels(c, std::vector<std::uint32_t>{0, 1, 1, 0});
  CHECK(symbol_errors(truth, truth) == 0);

  const SymbolFrame one = frame_from_labels(c, std::vector<std::uint32_t>{1, 1, 1, 0});
  CHECK(symbol_errors(truth, one) == 1);
  CHECK(real_dimension_errors(truth, one) == 1);

  const SymbolFrame both = frame_from_labels(c, std::vector<std::uint32_t>{1, 1, 0, 0});
  CHECK(symbol_errors(truth, both) == 1);
  CHECK(real_dimension_errors(truth, both) == 2);

  const SymbolFrame two = frame_from_labels(c, std::vector<std::uint32_t>{1, 0, 1, 0});
  CHECK(symbol_errors(truth, two) == 2);

  const SymbolFrame shorter = frame_from_labels(c, std::vector<std::uint32_t>{0, 1});
  CHECK_THROWS_AS(symbol_errors(truth, shorter), ContractError);
}
