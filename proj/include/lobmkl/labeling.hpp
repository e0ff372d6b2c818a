#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "lobmkl/lob_data.hpp"

namespace lobmkl {

// The three realised spread-crossing classes.
enum class Direction { Up = 0, Down = 1, None = 2 };
inline constexpr int kDirectionCount = 3;

enum class Prediction { Up, Down, None, Abstain };

// One +/-1 target per binary classifier: y1 up-cross, y2 down-cross,
// y3 no crossing.
struct DirectionalLabel {
  int y1 = -1;
  int y2 = -1;
  int y3 = -1;

  int operator[](int k) const { return k == 0 ? y1 : (k == 1 ? y2 : y3); }
  // The class of the unique positive component, if exactly one is positive.
  std::optional<Direction> direction() const;
  bool operator==(const DirectionalLabel&) const = default;
};

DirectionalLabel label_instance(const OrderBookSnapshot& now, const OrderBookSnapshot& future);

// Keeps a prediction only when exactly one classifier votes +1.
Prediction combine_signs(int s1, int s2, int s3);

// A prediction is correct when it names the realised class; abstentions are
// never correct.
bool is_correct(Prediction prediction, Direction truth);

std::optional<Direction> to_direction(Prediction p);
std::string_view to_string(Direction d);
std::string_view to_string(Prediction p);
std::optional<Direction> direction_from_string(std::string_view s);

}  // namespace lobmkl
