#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "lobmkl/labeling.hpp"
#include "oracles/fixtures.hpp"

using namespace lobmkl;

namespace {

OrderBookSnapshot quote(double bid, double ask) {
  OrderBookSnapshot s;
  s.bid_prices = {bid, bid - 0.0001, bid - 0.0002};
  s.ask_prices = {ask, ask + 0.0001, ask + 0.0002};
  s.bid_volumes = {1, 1, 1};
  s.ask_volumes = {1, 1, 1};
  return s;
}

}  // namespace

TEST_CASE("label_instance examples") {
  const auto now = quote(1.4999, 1.5000);
  CHECK(label_instance(now, quote(1.5002, 1.5003)) == DirectionalLabel{1, -1, -1});
  CHECK(label_instance(now, now) == DirectionalLabel{-1, -1, 1});
  CHECK(label_instance(now, quote(1.4995, 1.4997)) == DirectionalLabel{-1, 1, -1});
}

TEST_CASE("boundary equalities give no positive label") {
  const auto now = quote(1.4999, 1.5000);
  // Future bid exactly at the current ask.
  const auto up_tie = label_instance(now, quote(1.5000, 1.5001));
  CHECK(up_tie == DirectionalLabel{-1, -1, -1});
  CHECK_FALSE(up_tie.direction().has_value());
  const auto down_tie = label_instance(now, quote(1.4998, 1.4999));
  CHECK(down_tie == DirectionalLabel{-1, -1, -1});
}

TEST_CASE("direction of a label") {
  CHECK(DirectionalLabel{1, -1, -1}.direction() == Direction::Up);
  CHECK(DirectionalLabel{-1, 1, -1}.direction() == Direction::Down);
  CHECK(DirectionalLabel{-1, -1, 1}.direction() == Direction::None);
  CHECK(DirectionalLabel{1, 1, -1}.direction() == std::nullopt);
  CHECK(DirectionalLabel{1, -1, 1}[2] == 1);
}

TEST_CASE("combine_signs examples") {
  CHECK(combine_signs(1, -1, -1) == Prediction::Up);
  CHECK(combine_signs(-1, 1, -1) == Prediction::Down);
  CHECK(combine_signs(-1, -1, 1) == Prediction::None);
  CHECK(combine_signs(1, 1, -1) == Prediction::Abstain);
  CHECK(combine_signs(-1, -1, -1) == Prediction::Abstain);
  CHECK_THROWS(combine_signs(0, 1, -1));
}

TEST_CASE("exhaustive sign triples") {
  int kept = 0;
  for (int a : {-1, 1})
    for (int b : {-1, 1})
      for (int c : {-1, 1}) {
        const auto p = combine_signs(a, b, c);
        const int positives = (a > 0) + (b > 0) + (c > 0);
        CHECK((p != Prediction::Abstain) == (positives == 1));
        if (p != Prediction::Abstain) ++kept;
      }
  CHECK(kept == 3);
}

TEST_CASE("scoring") {
  CHECK(is_correct(Prediction::Up, Direction::Up));
  CHECK(is_correct(Prediction::None, Direction::None));
  CHECK_FALSE(is_correct(Prediction::Down, Direction::Up));
  for (auto d : {Direction::Up, Direction::Down, Direction::None})
    CHECK_FALSE(is_correct(Prediction::Abstain, d));
  CHECK(to_direction(Prediction::Down) == Direction::Down);
  CHECK_FALSE(to_direction(Prediction::Abstain).has_value());
}

TEST_CASE("string forms round-trip") {
  for (auto d : {Direction::Up, Direction::Down, Direction::None})
    CHECK(direction_from_string(to_string(d)) == d);
  CHECK_FALSE(direction_from_string("sideways").has_value());
}

TEST_CASE("property: random valid pairs never carry two positive labels") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> ticks(-6, 6), spread(1, 3);
  for (int trial = 0; trial < 20000; ++trial) {
    OrderBookSnapshot now, future;
    if (trial % 2 == 0) {
      now = fixtures::random_snapshot(rng);
      future = fixtures::random_snapshot(rng);
    } else {
      // Tick grid, so equalities occur often.
      const double b0 = 1.5 + 0.0001 * ticks(rng), b1 = 1.5 + 0.0001 * ticks(rng);
      now = quote(b0, b0 + 0.0001 * spread(rng));
      future = quote(b1, b1 + 0.0001 * spread(rng));
    }
    const auto y = label_instance(now, future);
    int positives = 0;
    for (int k = 0; k < 3; ++k) {
      CHECK((y[k] == 1 || y[k] == -1));
      positives += y[k] > 0;
    }
    CHECK(positives <= 1);
  }
}
