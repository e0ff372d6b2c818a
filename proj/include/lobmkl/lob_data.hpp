#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace lobmkl {

inline constexpr std::size_t kBookLevels = 3;

// One three-level order book update. Level 0 is the top of book.
struct OrderBookSnapshot {
  std::int64_t timestamp_ms = 0;
  std::array<double, kBookLevels> bid_prices{};
  std::array<double, kBookLevels> ask_prices{};
  std::array<double, kBookLevels> bid_volumes{};
  std::array<double, kBookLevels> ask_volumes{};

  double best_bid() const { return bid_prices[0]; }
  double best_ask() const { return ask_prices[0]; }
  double mid() const { return 0.5 * (bid_prices[0] + ask_prices[0]); }
  // Bid levels 1..3 followed by ask levels 1..3.
  std::array<double, 2 * kBookLevels> volumes() const;

  bool operator==(const OrderBookSnapshot&) const = default;
};

// Throws ValidationError (tagged with `line` when nonzero) if the snapshot
// is crossed, non-monotone in price, or has negative volume.
void validate_snapshot(const OrderBookSnapshot& snapshot, std::size_t line = 0);

// Time-ordered snapshots; timestamps strictly increase.
class SnapshotSeries {
 public:
  SnapshotSeries() = default;
  // Validates every snapshot and the timestamp ordering.
  explicit SnapshotSeries(std::vector<OrderBookSnapshot> snapshots);

  std::size_t size() const { return snapshots_.size(); }
  bool empty() const { return snapshots_.empty(); }
  const OrderBookSnapshot& operator[](std::size_t i) const { return snapshots_[i]; }
  const OrderBookSnapshot& at(std::size_t i) const;
  std::span<const OrderBookSnapshot> snapshots() const { return snapshots_; }
  auto begin() const { return snapshots_.begin(); }
  auto end() const { return snapshots_.end(); }

  bool operator==(const SnapshotSeries&) const = default;

 private:
  std::vector<OrderBookSnapshot> snapshots_;
};

struct SynthConfig {
  std::size_t n_snapshots = 5000;
  std::uint64_t seed = 1;
  double mean_inter_arrival_ms = 2500.0;
  double tick_size = 0.0001;
  double base_price = 1.5;
  // Scales how strongly the current bid/ask volume imbalance tilts the
  // direction of subsequent mid-price ticks. 0 gives a driftless walk.
  double drift_coupling = 0.0;

  void validate() const;
};

// CSV layout: timestamp_ms, bid1..3, ask1..3, bidvol1..3, askvol1..3.
// A leading non-numeric header line is skipped. Blank lines are ignored.
SnapshotSeries parse_snapshots(std::istream& in);
SnapshotSeries parse_snapshots(std::string_view text);

// Shortest round-trip number formatting, so re-parsing is exact.
void write_snapshots(std::ostream& out, const SnapshotSeries& series, bool header = true);

SnapshotSeries generate_synthetic(const SynthConfig& config);

// Index of the first snapshot with timestamp >= timestamp(index) + delta_t.
std::optional<std::size_t> horizon_index(const SnapshotSeries& series, std::size_t index,
                                         double delta_t_seconds);
std::optional<OrderBookSnapshot> snapshot_at_horizon(const SnapshotSeries& series,
                                                     std::size_t index, double delta_t_seconds);

}  // namespace lobmkl
