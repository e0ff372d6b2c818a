#include "lobmkl/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lobmkl/error.hpp"

namespace lobmkl {

namespace {

void check_feature_id(int feature_id) {
  if (feature_id < 1 || feature_id > kFeatureCount)
    throw std::invalid_argument("feature_id must be in 1..8, got " + std::to_string(feature_id));
}

template <typename Vec>
void scale_to_unit_l1(Vec& v) {
  double norm = 0.0;
  for (double x : v) norm += std::abs(x);
  // An unchanged (or empty) book carries "no change", not missing data.
  if (norm == 0.0) return;
  for (double& x : v) x /= norm;
}

// Writes feature `feature_id` at series index i into `out`. `emas` holds the
// EMA values at i (only needed for F1).
void fill_feature(int feature_id, const SnapshotSeries& series, std::span<const double> mids,
                  std::size_t i, const FeatureConfig& config, std::span<const double> emas,
                  std::span<double> out) {
  const std::size_t n = config.lags.size();
  const auto window = [&](std::size_t lag) { return mids.subspan(i - lag, lag + 1); };
  switch (feature_id) {
    case 1:
      std::copy(emas.begin(), emas.end(), out.begin());
      break;
    case 2:
      for (std::size_t k = 0; k < n; ++k) {
        const auto st = rolling_stats(window(config.lags[k]), config.lags[k] + 1);
        out[k] = st.ma;
        out[n + k] = st.std;
      }
      break;
    case 3:
      out[0] = mids[i];
      for (std::size_t k = 0; k < n; ++k) {
        const auto st = rolling_stats(window(config.lags[k]), config.lags[k] + 1);
        out[1 + k] = st.max;
        out[1 + n + k] = st.min;
      }
      break;
    case 4:
      for (std::size_t k = 0; k < n; ++k) {
        const auto st = rolling_stats(window(config.lags[k]), config.lags[k] + 1);
        out[k] = st.ups;
        out[n + k] = st.downs;
      }
      break;
    default: {
      auto v = series[i].volumes();
      if (feature_id >= 7) {
        const auto prev = series[i - 1].volumes();
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= prev[k];
      }
      if (feature_id == 6 || feature_id == 8) scale_to_unit_l1(v);
      std::copy(v.begin(), v.end(), out.begin());
    }
  }
}

}  // namespace

void FeatureConfig::validate() const {
  if (lags.empty()) throw ValidationError("feature config needs at least one lag");
  if (half_lives.size() != lags.size())
    throw ValidationError("half_lives and lags must have the same length");
  for (std::size_t k = 0; k < lags.size(); ++k) {
    if (lags[k] < 1) throw ValidationError("lags must be >= 1");
    if (k > 0 && lags[k] <= lags[k - 1]) throw ValidationError("lags must be strictly increasing");
    if (!(half_lives[k] >= 1.0)) throw ValidationError("half_lives must be >= 1");
  }
}

std::size_t feature_dimension(int feature_id, std::size_t n_lags) {
  check_feature_id(feature_id);
  switch (feature_id) {
    case 1: return n_lags;
    case 2: return 2 * n_lags;
    case 3: return 2 * n_lags + 1;
    case 4: return 2 * n_lags;
    default: return 2 * kBookLevels;
  }
}

double ema(std::span<const double> prices, double half_life) {
  if (prices.empty()) throw std::invalid_argument("ema of an empty sequence");
  if (!(half_life >= 1.0)) throw std::invalid_argument("ema half_life must be >= 1");
  const double decay = std::exp2(-1.0 / half_life);
  double num = 0.0;
  double den = 0.0;
  double w = 1.0;
  for (auto it = prices.rbegin(); it != prices.rend(); ++it) {
    num += w * *it;
    den += w;
    w *= decay;
  }
  return num / den;
}

RollingStats rolling_stats(std::span<const double> prices, std::size_t lag) {
  if (lag < 2) throw std::invalid_argument("rolling_stats lag must be >= 2");
  if (prices.size() < lag)
    throw std::invalid_argument("rolling window not warm: need " + std::to_string(lag) +
                                " values, have " + std::to_string(prices.size()));
  const auto w = prices.last(lag);
  RollingStats st;
  st.max = *std::max_element(w.begin(), w.end());
  st.min = *std::min_element(w.begin(), w.end());
  double sum = 0.0;
  for (double p : w) sum += p;
  st.ma = sum / static_cast<double>(lag);
  double ss = 0.0;
  for (double p : w) ss += (p - st.ma) * (p - st.ma);
  st.std = std::sqrt(ss / static_cast<double>(lag - 1));
  for (std::size_t k = 1; k < lag; ++k) {
    if (w[k] > w[k - 1]) ++st.ups;
    else if (w[k] < w[k - 1]) ++st.downs;
  }
  return st;
}

std::vector<double> midprices(const SnapshotSeries& series) {
  std::vector<double> mids;
  mids.reserve(series.size());
  for (const auto& s : series) mids.push_back(s.mid());
  return mids;
}

FeatureVector build_feature(const SnapshotSeries& series, std::size_t index, int feature_id,
                            const FeatureConfig& config) {
  check_feature_id(feature_id);
  config.validate();
  if (index >= series.size()) throw std::out_of_range("feature index out of range");
  if (index < config.warm_index())
    throw std::invalid_argument("cold window: index " + std::to_string(index) + " < " +
                                std::to_string(config.warm_index()));

  const auto mids = midprices(series);
  std::vector<double> emas;
  if (feature_id == 1) {
    const std::span<const double> history(mids.data(), index + 1);
    for (double h : config.half_lives) emas.push_back(ema(history, h));
  }
  FeatureVector fv{feature_id, std::vector<double>(feature_dimension(feature_id, config.lags.size()))};
  fill_feature(feature_id, series, mids, index, config, emas, fv.values);
  return fv;
}

FeatureTable::FeatureTable(const SnapshotSeries& series, const FeatureConfig& config)
    : first_index_(config.warm_index()) {
  config.validate();
  const std::size_t n_rows = series.size() > first_index_ ? series.size() - first_index_ : 0;
  const std::size_t n_lags = config.lags.size();
  for (int f = 1; f <= kFeatureCount; ++f)
    tables_[f - 1].resize(static_cast<Eigen::Index>(n_rows),
                          static_cast<Eigen::Index>(feature_dimension(f, n_lags)));

  const auto mids = midprices(series);
  std::vector<double> decay(n_lags), num(n_lags, 0.0), den(n_lags, 0.0), emas(n_lags);
  for (std::size_t k = 0; k < n_lags; ++k) decay[k] = std::exp2(-1.0 / config.half_lives[k]);

  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t k = 0; k < n_lags; ++k) {
      num[k] = mids[i] + decay[k] * num[k];
      den[k] = 1.0 + decay[k] * den[k];
      emas[k] = num[k] / den[k];
    }
    if (i < first_index_) continue;
    const auto r = static_cast<Eigen::Index>(i - first_index_);
    for (int f = 1; f <= kFeatureCount; ++f) {
      auto& t = tables_[f - 1];
      fill_feature(f, series, mids, i, config, emas,
                   std::span<double>(t.row(r).data(), static_cast<std::size_t>(t.cols())));
    }
  }
}

FeatureMatrix FeatureTable::select(int feature_id,
                                   std::span<const std::size_t> series_indices) const {
  check_feature_id(feature_id);
  const auto& t = table(feature_id);
  FeatureMatrix m;
  m.feature_id = feature_id;
  m.rows.resize(static_cast<Eigen::Index>(series_indices.size()), t.cols());
  for (std::size_t r = 0; r < series_indices.size(); ++r) {
    const std::size_t i = series_indices[r];
    if (i < first_index_ || i - first_index_ >= size())
      throw std::out_of_range("feature row for series index " + std::to_string(i) +
                              " is not available");
    m.rows.row(static_cast<Eigen::Index>(r)) = t.row(static_cast<Eigen::Index>(i - first_index_));
  }
  return m;
}

FeatureMatrix apply_standardization(const FeatureMatrix& raw, std::span<const double> mean,
                                    std::span<const double> sd) {
  if (mean.size() != raw.dimension() || sd.size() != raw.dimension())
    throw std::invalid_argument("standardization statistics do not match the feature dimension");
  FeatureMatrix out = raw;
  out.mean.assign(mean.begin(), mean.end());
  out.stddev.assign(sd.begin(), sd.end());
  for (std::size_t c = 0; c < raw.dimension(); ++c) {
    auto col = out.rows.col(static_cast<Eigen::Index>(c));
    col.array() -= mean[c];
    // Rounding noise on a constant column must not be amplified.
    if (sd[c] > 1e-12 * (1.0 + std::abs(mean[c]))) col.array() /= sd[c];
  }
  return out;
}

std::pair<FeatureMatrix, FeatureMatrix> standardize(const FeatureMatrix& train,
                                                    const FeatureMatrix& test) {
  if (train.size() == 0) throw std::invalid_argument("standardize: empty train matrix");
  if (train.dimension() != test.dimension())
    throw std::invalid_argument("standardize: train/test dimension mismatch");
  const std::size_t dim = train.dimension();
  const double n = static_cast<double>(train.size());

  std::vector<double> mean(dim), sd(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    const auto col = train.rows.col(static_cast<Eigen::Index>(c));
    mean[c] = col.sum() / n;
    double ss = 0.0;
    for (Eigen::Index r = 0; r < col.size(); ++r) ss += (col[r] - mean[c]) * (col[r] - mean[c]);
    sd[c] = train.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }

  return {apply_standardization(train, mean, sd), apply_standardization(test, mean, sd)};
}

}  // namespace lobmkl
