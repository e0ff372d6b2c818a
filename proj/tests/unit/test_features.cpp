#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "lobmkl/features.hpp"
#include "oracles/fixtures.hpp"

using namespace lobmkl;
using doctest::Approx;

namespace {

// Direct weighted sum, recomputing each weight with pow.
double ema_oracle(const std::vector<double>& p, double h) {
  const double lambda = std::pow(2.0, -1.0 / h);
  double num = 0.0, den = 0.0;
  const std::size_t n = p.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::pow(lambda, static_cast<double>(k));
    num += w * p[n - 1 - k];
    den += w;
  }
  return num / den;
}

double l1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

OrderBookSnapshot with_volumes(std::int64_t ts, std::array<double, 6> v) {
  OrderBookSnapshot s;
  s.timestamp_ms = ts;
  s.bid_prices = {1.4999, 1.4998, 1.4997};
  s.ask_prices = {1.5000, 1.5001, 1.5002};
  s.bid_volumes = {v[0], v[1], v[2]};
  s.ask_volumes = {v[3], v[4], v[5]};
  return s;
}

FeatureConfig small_config() {
  FeatureConfig c;
  c.lags = {2, 4};
  c.half_lives = {2, 4};
  return c;
}

}  // namespace

TEST_CASE("ema examples") {
  const std::vector<double> constant{5, 5, 5, 5};
  CHECK(ema(constant, 3.0) == Approx(5.0).epsilon(1e-15));
  CHECK(ema(std::vector<double>{7}, 10.0) == 7.0);
  CHECK(ema(std::vector<double>{1, 2}, 1.0) == Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS(ema(std::vector<double>{}, 1.0));
  CHECK_THROWS(ema(std::vector<double>{1.0}, 0.5));
}

TEST_CASE("ema weight halves after half_life steps") {
  // Impulse at age h has half the newest sample's weight.
  const double h = 4.0;
  std::vector<double> impulse_old(5, 0.0), impulse_new(5, 0.0);
  impulse_old[0] = 1.0;
  impulse_new[4] = 1.0;
  CHECK(ema(impulse_old, h) / ema(impulse_new, h) == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("property: ema matches direct summation") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(1.5, 0.01);
  std::uniform_int_distribution<int> len(1, 400);
  std::uniform_real_distribution<double> hl(1.0, 120.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(static_cast<std::size_t>(len(rng)));
    for (auto& x : p) x = n(rng);
    const double h = hl(rng);
    CHECK(std::abs(ema(p, h) - ema_oracle(p, h)) < 1e-10);
  }
}

TEST_CASE("rolling_stats examples") {
  const auto a = rolling_stats(std::vector<double>{1, 2, 3, 4, 5}, 5);
  CHECK(a.ma == 3.0);
  CHECK(a.max == 5.0);
  CHECK(a.min == 1.0);
  CHECK(a.ups == 4);
  CHECK(a.downs == 0);
  CHECK(a.std == Approx(std::sqrt(2.5)).epsilon(1e-15));

  const auto c = rolling_stats(std::vector<double>{2, 2, 2, 2}, 3);
  CHECK(c.std == 0.0);
  CHECK(c.ups == 0);
  CHECK(c.downs == 0);
  CHECK(c.max == c.min);
  CHECK(c.ma == c.max);

  const auto b = rolling_stats(std::vector<double>{3, 1, 2}, 3);
  CHECK(b.ups == 1);
  CHECK(b.downs == 1);
  CHECK(b.max == 3.0);
  CHECK(b.min == 1.0);
  CHECK(b.ma == 2.0);
}

TEST_CASE("rolling_stats uses only the last lag values") {
  const auto s = rolling_stats(std::vector<double>{100, -100, 1, 2, 3}, 3);
  CHECK(s.max == 3.0);
  CHECK(s.min == 1.0);
  CHECK(s.ups == 2);
}

TEST_CASE("rolling_stats errors") {
  CHECK_THROWS(rolling_stats(std::vector<double>{1, 2}, 3));
  CHECK_THROWS(rolling_stats(std::vector<double>{1, 2}, 1));
}

TEST_CASE("property: ups + downs <= lag - 1") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> tick(-2, 2), lagd(2, 60);
  for (int trial = 0; trial < 300; ++trial) {
    const auto lag = static_cast<std::size_t>(lagd(rng));
    std::vector<double> p(lag + static_cast<std::size_t>(tick(rng) + 2));
    double x = 0.0;
    for (auto& v : p) v = (x += tick(rng));
    const auto st = rolling_stats(p, lag);
    CHECK(st.ups + st.downs <= static_cast<int>(lag) - 1);
    CHECK(st.min <= st.ma);
    CHECK(st.ma <= st.max);
  }
}

TEST_CASE("F5 and F6 on a fixed book") {
  const SnapshotSeries s({with_volumes(0, {5, 3, 2, 4, 6, 1}), with_volumes(1, {5, 3, 2, 4, 6, 1}),
                          with_volumes(2, {5, 3, 2, 4, 6, 1}), with_volumes(3, {5, 3, 2, 4, 6, 1}),
                          with_volumes(4, {5, 3, 2, 4, 6, 1})});
  const auto cfg = small_config();
  const auto f5 = build_feature(s, 4, 5, cfg);
  CHECK(f5.feature_id == 5);
  CHECK(f5.values == std::vector<double>{5, 3, 2, 4, 6, 1});
  const auto f6 = build_feature(s, 4, 6, cfg);
  for (std::size_t k = 0; k < 6; ++k) CHECK(f6.values[k] == Approx(f5.values[k] / 21.0));
  CHECK(l1(f6.values) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("F7 and F8 difference consecutive books") {
  const SnapshotSeries s({with_volumes(0, {1, 1, 1, 1, 1, 1}), with_volumes(1, {1, 1, 1, 1, 1, 1}),
                          with_volumes(2, {1, 1, 1, 1, 1, 1}), with_volumes(3, {1, 1, 1, 1, 1, 1}),
                          with_volumes(4, {5, 3, 2, 4, 6, 1}), with_volumes(5, {5, 3, 2, 4, 6, 1})});
  const auto cfg = small_config();
  CHECK(build_feature(s, 4, 7, cfg).values == std::vector<double>{4, 2, 1, 3, 5, 0});
  const auto f8 = build_feature(s, 4, 8, cfg);
  CHECK(l1(f8.values) == Approx(1.0).epsilon(1e-15));
  CHECK(f8.values[0] == Approx(4.0 / 15.0));
  // Unchanged book: zero vector rather than 0/0.
  CHECK(build_feature(s, 5, 8, cfg).values == std::vector<double>(6, 0.0));
  CHECK(build_feature(s, 5, 7, cfg).values == std::vector<double>(6, 0.0));
}

TEST_CASE("F4 on a strictly increasing midprice") {
  std::vector<double> mids;
  for (int i = 0; i < 10; ++i) mids.push_back(1.5 + 0.0001 * i);
  const auto s = fixtures::series_from_mids(mids);
  const auto f4 = build_feature(s, 6, 4, small_config());
  CHECK(f4.values == std::vector<double>{2, 4, 0, 0});
}

TEST_CASE("F1, F2 and F3 layouts") {
  std::vector<double> mids{1.0, 1.1, 1.3, 1.2, 1.4, 1.6};
  const auto s = fixtures::series_from_mids(mids);
  const auto cfg = small_config();
  const auto f1 = build_feature(s, 5, 1, cfg);
  CHECK(f1.values[0] == Approx(ema_oracle(mids, 2.0)).epsilon(1e-12));
  CHECK(f1.values[1] == Approx(ema_oracle(mids, 4.0)).epsilon(1e-12));

  const auto f2 = build_feature(s, 5, 2, cfg);
  // Lag 2 covers the last three prices.
  CHECK(f2.values[0] == Approx((1.2 + 1.4 + 1.6) / 3.0).epsilon(1e-12));
  CHECK(f2.values[2] == Approx(0.2).epsilon(1e-12));

  const auto f3 = build_feature(s, 5, 3, cfg);
  CHECK(f3.values[0] == Approx(1.6).epsilon(1e-14));
  CHECK(f3.values[1] == Approx(1.6).epsilon(1e-14));
  CHECK(f3.values[2] == Approx(1.6).epsilon(1e-14));
  CHECK(f3.values[3] == Approx(1.2).epsilon(1e-14));
  CHECK(f3.values[4] == Approx(1.1).epsilon(1e-14));
}

TEST_CASE("build_feature errors") {
  std::vector<double> mids(10, 1.5);
  const auto s = fixtures::series_from_mids(mids);
  const auto cfg = small_config();
  CHECK_THROWS(build_feature(s, 3, 1, cfg));
  CHECK_THROWS(build_feature(s, 5, 0, cfg));
  CHECK_THROWS(build_feature(s, 5, 9, cfg));
  CHECK_THROWS(build_feature(s, 10, 1, cfg));
  FeatureConfig bad;
  bad.lags = {4, 2};
  bad.half_lives = {4, 2};
  CHECK_THROWS(build_feature(s, 5, 1, bad));
}

TEST_CASE("property: dimensions, L1 norms and table agreement") {
  SynthConfig sc;
  sc.n_snapshots = 400;
  sc.drift_coupling = 1.0;
  sc.seed = 11;
  const auto s = generate_synthetic(sc);
  const FeatureConfig cfg;
  const FeatureTable table(s, cfg);
  CHECK(table.first_index() == 100);
  CHECK(table.size() == 300);
  const std::size_t expected[] = {5, 10, 11, 10, 6, 6, 6, 6};
  for (std::size_t i = 100; i < 400; i += 7) {
    for (int f = 1; f <= 8; ++f) {
      const auto fv = build_feature(s, i, f, cfg);
      REQUIRE(fv.values.size() == expected[f - 1]);
      CHECK(feature_dimension(f, 5) == expected[f - 1]);
      const auto row = table.table(f).row(static_cast<Eigen::Index>(i - 100));
      for (std::size_t k = 0; k < fv.values.size(); ++k) {
        if (f == 1)
          CHECK(std::abs(row[static_cast<Eigen::Index>(k)] - fv.values[k]) < 1e-10);
        else
          CHECK(row[static_cast<Eigen::Index>(k)] == fv.values[k]);
      }
      if ((f == 6 || f == 8) && l1(fv.values) > 0.0) CHECK(l1(fv.values) == Approx(1.0));
    }
  }
  const std::vector<std::size_t> idx{100, 250, 399};
  const auto m = table.select(3, idx);
  CHECK(m.size() == 3);
  CHECK(m.dimension() == 11);
  const std::vector<std::size_t> cold{99};
  CHECK_THROWS(table.select(3, cold));
}

TEST_CASE("standardize examples") {
  FeatureMatrix train, test;
  train.rows.resize(2, 1);
  train.rows << 1, 3;
  test.rows.resize(1, 1);
  test.rows << 2;
  const auto [a, b] = standardize(train, test);
  CHECK(a.rows(0, 0) == Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(a.rows(1, 0) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(b.rows(0, 0) == 0.0);

  train.rows << 0, 2;
  test.rows << 1;
  CHECK(standardize(train, test).second.rows(0, 0) == 0.0);

  train.rows << 4, 4;
  test.rows << 7;
  const auto [c, d] = standardize(train, test);
  CHECK(c.rows(0, 0) == 0.0);
  CHECK(c.rows(1, 0) == 0.0);
  CHECK(d.rows(0, 0) == 3.0);
}

TEST_CASE("standardize errors") {
  FeatureMatrix train, test, empty;
  train.rows.resize(3, 2);
  train.rows.setOnes();
  test.rows.resize(1, 3);
  CHECK_THROWS(standardize(train, test));
  empty.rows.resize(0, 2);
  CHECK_THROWS(standardize(empty, train));
}

TEST_CASE("property: standardized train columns have mean 0 and std 1") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto train = fixtures::random_features(rng, 2 + rng() % 100, 1 + rng() % 8, 1e-3);
    train.rows.col(0).array() += 1.5;
    if (trial % 5 == 0) train.rows.col(0).setConstant(2.5);
    const auto [a, b] = standardize(train, train);
    for (Eigen::Index c = 0; c < a.rows.cols(); ++c) {
      const auto col = a.rows.col(c);
      const double mean = col.mean();
      CHECK(std::abs(mean) < 1e-10);
      if (trial % 5 == 0 && c == 0) {
        CHECK(col.cwiseAbs().maxCoeff() == 0.0);
        continue;
      }
      const double var = (col.array() - mean).square().sum() / static_cast<double>(col.size() - 1);
      CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-10);
    }
    CHECK(a.rows == b.rows);
  }
}
