#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "lobmkl/lob_data.hpp"

namespace lobmkl {

inline constexpr int kFeatureCount = 8;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Window lengths (in instances) for the rolling price statistics and the EMA
// half-lives. Both lists have the same length N.
struct FeatureConfig {
  std::vector<std::size_t> lags{5, 10, 20, 50, 100};
  std::vector<double> half_lives{5, 10, 20, 50, 100};

  void validate() const;
  std::size_t max_lag() const { return lags.back(); }
  // First series index at which every feature is defined.
  std::size_t warm_index() const { return std::max<std::size_t>(max_lag(), 1); }
};

struct FeatureVector {
  int feature_id = 0;
  std::vector<double> values;
};

// One row per instance. mean/stddev are filled by standardize().
struct FeatureMatrix {
  int feature_id = 0;
  RowMatrix rows;
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(rows.cols()); }
  std::span<const double> row(std::size_t i) const {
    return {rows.data() + i * dimension(), dimension()};
  }
};

struct RollingStats {
  double ma = 0.0;
  double std = 0.0;
  double max = 0.0;
  double min = 0.0;
  int ups = 0;
  int downs = 0;
};

std::size_t feature_dimension(int feature_id, std::size_t n_lags);

// Normalised exponentially weighted mean of `prices` (oldest first) with
// decay 2^(-1/half_life) per step, over the whole sequence.
double ema(std::span<const double> prices, double half_life);

// Statistics over the last `lag` values of `prices`. std uses divisor lag-1;
// ups/downs count strict increases/decreases between consecutive values.
RollingStats rolling_stats(std::span<const double> prices, std::size_t lag);

std::vector<double> midprices(const SnapshotSeries& series);

// Direct evaluation at a single index. Rolling statistics for lag L cover the
// last L price changes, i.e. the L+1 prices ending at `index`.
FeatureVector build_feature(const SnapshotSeries& series, std::size_t index, int feature_id,
                            const FeatureConfig& config);

// All eight feature sets for every index in [config.warm_index(), size).
// Row r corresponds to series index warm_index() + r. Values agree with
// build_feature() to rounding; EMAs use the equivalent causal recursion.
class FeatureTable {
 public:
  FeatureTable(const SnapshotSeries& series, const FeatureConfig& config);

  std::size_t first_index() const { return first_index_; }
  std::size_t size() const { return static_cast<std::size_t>(tables_[0].rows()); }
  const RowMatrix& table(int feature_id) const { return tables_.at(feature_id - 1); }

  // Unstandardised matrix for the given series indices.
  FeatureMatrix select(int feature_id, std::span<const std::size_t> series_indices) const;

 private:
  std::size_t first_index_;
  std::array<RowMatrix, kFeatureCount> tables_;
};

// (x - mean) / sd per column; columns whose sd is numerically zero are only
// shifted. The statistics are recorded in the returned matrix.
FeatureMatrix apply_standardization(const FeatureMatrix& raw, std::span<const double> mean,
                                    std::span<const double> sd);

// Shift/scale each column by train statistics. Columns with zero train
// variance are only shifted.
std::pair<FeatureMatrix, FeatureMatrix> standardize(const FeatureMatrix& train,
                                                    const FeatureMatrix& test);

}  // namespace lobmkl
