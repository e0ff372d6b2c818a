#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "lobmkl/features.hpp"
#include "lobmkl/kernels.hpp"
#include "lobmkl/lob_data.hpp"

namespace fixtures {

// Book with the given mid prices, a 1e-4 spread and constant depth.
inline lobmkl::SnapshotSeries series_from_mids(const std::vector<double>& mids,
                                               std::int64_t step_ms = 1000) {
  std::vector<lobmkl::OrderBookSnapshot> out;
  for (std::size_t i = 0; i < mids.size(); ++i) {
    lobmkl::OrderBookSnapshot s;
    s.timestamp_ms = static_cast<std::int64_t>(i) * step_ms;
    for (std::size_t k = 0; k < 3; ++k) {
      s.bid_prices[k] = mids[i] - 0.00005 - 0.0001 * static_cast<double>(k);
      s.ask_prices[k] = mids[i] + 0.00005 + 0.0001 * static_cast<double>(k);
      s.bid_volumes[k] = 5.0;
      s.ask_volumes[k] = 5.0;
    }
    out.push_back(s);
  }
  return lobmkl::SnapshotSeries(std::move(out));
}

inline lobmkl::OrderBookSnapshot random_snapshot(std::mt19937_64& rng, std::int64_t ts = 0) {
  std::uniform_real_distribution<double> base(1.0, 2.0), gap(1e-5, 5e-4), vol(0.0, 20.0);
  lobmkl::OrderBookSnapshot s;
  s.timestamp_ms = ts;
  const double bid = base(rng);
  s.bid_prices[0] = bid;
  s.ask_prices[0] = bid + gap(rng);
  for (std::size_t k = 1; k < 3; ++k) {
    s.bid_prices[k] = s.bid_prices[k - 1] - gap(rng);
    s.ask_prices[k] = s.ask_prices[k - 1] + gap(rng);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    s.bid_volumes[k] = vol(rng);
    s.ask_volumes[k] = vol(rng);
  }
  return s;
}

inline lobmkl::FeatureMatrix random_features(std::mt19937_64& rng, std::size_t rows,
                                             std::size_t dim, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  lobmkl::FeatureMatrix m;
  m.feature_id = 1;
  m.rows.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.rows.rows(); ++i)
    for (Eigen::Index j = 0; j < m.rows.cols(); ++j) m.rows(i, j) = n(rng);
  return m;
}

inline std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n) {
  std::vector<int> y(n);
  std::bernoulli_distribution coin(0.5);
  for (auto& v : y) v = coin(rng) ? 1 : -1;
  // Both classes present.
  y[0] = 1;
  y[1] = -1;
  return y;
}

// One spec per kernel family with a hyperparameter drawn at random.
inline lobmkl::KernelSpec random_kernel(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> family(0, 3), degree(1, 4);
  std::uniform_real_distribution<double> scale(0.5, 8.0);
  switch (family(rng)) {
    case 0: return lobmkl::RbfKernel{scale(rng)};
    case 1: return lobmkl::PolynomialKernel{degree(rng)};
    case 2: return lobmkl::ArcsinNetKernel{scale(rng) / 4.0};
    default: return lobmkl::LinearKernel{};
  }
}

}  // namespace fixtures
