#include "lobmkl/lob_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "lobmkl/error.hpp"

namespace lobmkl {

namespace {

constexpr std::size_t kColumns = 1 + 4 * kBookLevels;

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), last, out);
  return ec == std::errc{} && ptr == last;
}

void append_number(std::string& out, double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

std::array<double, 2 * kBookLevels> OrderBookSnapshot::volumes() const {
  std::array<double, 2 * kBookLevels> v{};
  std::copy(bid_volumes.begin(), bid_volumes.end(), v.begin());
  std::copy(ask_volumes.begin(), ask_volumes.end(), v.begin() + kBookLevels);
  return v;
}

void validate_snapshot(const OrderBookSnapshot& s, std::size_t line) {
  for (std::size_t k = 0; k < kBookLevels; ++k) {
    if (!(s.bid_prices[k] > 0.0) || !(s.ask_prices[k] > 0.0) || !std::isfinite(s.bid_prices[k]) ||
        !std::isfinite(s.ask_prices[k]))
      throw ValidationError("prices must be finite and positive", line);
    if (!(s.bid_volumes[k] >= 0.0) || !(s.ask_volumes[k] >= 0.0) ||
        !std::isfinite(s.bid_volumes[k]) || !std::isfinite(s.ask_volumes[k]))
      throw ValidationError("volumes must be finite and nonnegative", line);
  }
  for (std::size_t k = 1; k < kBookLevels; ++k) {
    if (!(s.bid_prices[k] < s.bid_prices[k - 1]))
      throw ValidationError("bid prices must be strictly descending", line);
    if (!(s.ask_prices[k] > s.ask_prices[k - 1]))
      throw ValidationError("ask prices must be strictly ascending", line);
  }
  if (!(s.best_ask() > s.best_bid()))
    throw ValidationError("crossed book: best bid >= best ask", line);
}

SnapshotSeries::SnapshotSeries(std::vector<OrderBookSnapshot> snapshots)
    : snapshots_(std::move(snapshots)) {
  for (std::size_t i = 0; i < snapshots_.size(); ++i) {
    validate_snapshot(snapshots_[i]);
    if (i > 0 && snapshots_[i].timestamp_ms <= snapshots_[i - 1].timestamp_ms)
      throw ValidationError("timestamps must be strictly increasing (snapshot " +
                            std::to_string(i) + ")");
  }
}

const OrderBookSnapshot& SnapshotSeries::at(std::size_t i) const {
  if (i >= snapshots_.size())
    throw std::out_of_range("snapshot index " + std::to_string(i) + " out of range");
  return snapshots_[i];
}

void SynthConfig::validate() const {
  if (n_snapshots == 0) throw ValidationError("n_snapshots must be positive");
  if (!(mean_inter_arrival_ms > 0.0)) throw ValidationError("mean_inter_arrival must be positive");
  if (!(tick_size > 0.0)) throw ValidationError("tick_size must be positive");
  if (!(base_price > 10.0 * tick_size))
    throw ValidationError("base_price must exceed ten ticks");
  if (!std::isfinite(drift_coupling)) throw ValidationError("drift_coupling must be finite");
}

SnapshotSeries parse_snapshots(std::istream& in) {
  std::vector<OrderBookSnapshot> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_commas(line);

    std::int64_t ts = 0;
    if (!parse_number(fields[0], ts)) {
      // Only the first non-blank line may be a header.
      if (rows.empty() && line_no == 1) continue;
      throw ParseError(line_no, "non-numeric timestamp");
    }
    if (fields.size() != kColumns)
      throw ParseError(line_no, "expected " + std::to_string(kColumns) + " columns, got " +
                                    std::to_string(fields.size()));

    OrderBookSnapshot s;
    s.timestamp_ms = ts;
    std::array<double*, kColumns - 1> targets{};
    for (std::size_t k = 0; k < kBookLevels; ++k) {
      targets[k] = &s.bid_prices[k];
      targets[kBookLevels + k] = &s.ask_prices[k];
      targets[2 * kBookLevels + k] = &s.bid_volumes[k];
      targets[3 * kBookLevels + k] = &s.ask_volumes[k];
    }
    for (std::size_t c = 1; c < kColumns; ++c) {
      if (!parse_number(fields[c], *targets[c - 1]))
        throw ParseError(line_no, "non-numeric value in column " + std::to_string(c + 1));
    }
    validate_snapshot(s, line_no);
    if (!rows.empty() && s.timestamp_ms <= rows.back().timestamp_ms)
      throw ValidationError("timestamps must be strictly increasing", line_no);
    rows.push_back(s);
  }
  return SnapshotSeries(std::move(rows));
}

SnapshotSeries parse_snapshots(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_snapshots(in);
}

void write_snapshots(std::ostream& out, const SnapshotSeries& series, bool header) {
  if (header)
    out << "timestamp_ms,bid1,bid2,bid3,ask1,ask2,ask3,"
           "bidvol1,bidvol2,bidvol3,askvol1,askvol2,askvol3\n";
  std::string line;
  for (const auto& s : series) {
    line.clear();
    line += std::to_string(s.timestamp_ms);
    for (const auto* group : {&s.bid_prices, &s.ask_prices, &s.bid_volumes, &s.ask_volumes}) {
      for (double v : *group) {
        line += ',';
        append_number(line, v);
      }
    }
    line += '\n';
    out << line;
  }
}

SnapshotSeries generate_synthetic(const SynthConfig& config) {
  config.validate();

  // Latent order-flow pressure: a persistent AR(1) factor pushes volume
  // towards one side of the book. The tick direction after each update is
  // tilted by the realised imbalance, so imbalance predicts the next few moves.
  constexpr double kPersistence = 0.97;
  constexpr double kPressureLoading = 0.6;
  constexpr double kVolumeNoise = 0.25;
  constexpr double kWideSpreadProb = 0.25;
  constexpr std::array<double, kBookLevels> kLevelDepth{5.0, 4.0, 3.0};

  std::mt19937_64 rng(config.seed);
  std::exponential_distribution<double> inter_arrival(1.0 / config.mean_inter_arrival_ms);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double innovation = std::sqrt(1.0 - kPersistence * kPersistence);
  long long bid_ticks = std::llround(config.base_price / config.tick_size);
  std::int64_t t = 0;
  double pressure = 0.0;

  std::vector<OrderBookSnapshot> out;
  out.reserve(config.n_snapshots);
  for (std::size_t i = 0; i < config.n_snapshots; ++i) {
    if (i > 0) t += std::max<std::int64_t>(1, std::llround(inter_arrival(rng)));
    pressure = kPersistence * pressure + innovation * normal(rng);

    const long long spread_ticks = unit(rng) < kWideSpreadProb ? 2 : 1;
    OrderBookSnapshot s;
    s.timestamp_ms = t;
    double bid_total = 0.0;
    double ask_total = 0.0;
    for (std::size_t k = 0; k < kBookLevels; ++k) {
      const auto level = static_cast<long long>(k);
      s.bid_prices[k] = static_cast<double>(bid_ticks - level) * config.tick_size;
      s.ask_prices[k] = static_cast<double>(bid_ticks + spread_ticks + level) * config.tick_size;
      s.bid_volumes[k] = std::max(
          1.0, std::round(kLevelDepth[k] * std::exp(kPressureLoading * pressure +
                                                    kVolumeNoise * normal(rng))));
      s.ask_volumes[k] = std::max(
          1.0, std::round(kLevelDepth[k] * std::exp(-kPressureLoading * pressure +
                                                    kVolumeNoise * normal(rng))));
      bid_total += s.bid_volumes[k];
      ask_total += s.ask_volumes[k];
    }
    out.push_back(s);

    const double imbalance = (bid_total - ask_total) / (bid_total + ask_total);
    const double tilt = std::clamp(config.drift_coupling * imbalance, -1.0, 1.0);
    bid_ticks += unit(rng) < 0.5 * (1.0 + tilt) ? 1 : -1;
    bid_ticks = std::max<long long>(bid_ticks, static_cast<long long>(kBookLevels));
  }
  return SnapshotSeries(std::move(out));
}

std::optional<std::size_t> horizon_index(const SnapshotSeries& series, std::size_t index,
                                         double delta_t_seconds) {
  const auto& origin = series.at(index);
  const std::int64_t target =
      origin.timestamp_ms + static_cast<std::int64_t>(std::llround(delta_t_seconds * 1000.0));
  const auto snaps = series.snapshots();
  const auto it = std::lower_bound(
      snaps.begin() + static_cast<std::ptrdiff_t>(index), snaps.end(), target,
      [](const OrderBookSnapshot& s, std::int64_t ts) { return s.timestamp_ms < ts; });
  if (it == snaps.end()) return std::nullopt;
  return static_cast<std::size_t>(it - snaps.begin());
}

std::optional<OrderBookSnapshot> snapshot_at_horizon(const SnapshotSeries& series,
                                                     std::size_t index, double delta_t_seconds) {
  const auto found = horizon_index(series, index, delta_t_seconds);
  if (!found) return std::nullopt;
  return series[*found];
}

}  // namespace lobmkl
