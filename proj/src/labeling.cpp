#include "lobmkl/labeling.hpp"

#include <stdexcept>

namespace lobmkl {

std::optional<Direction> DirectionalLabel::direction() const {
  const int positives = (y1 > 0) + (y2 > 0) + (y3 > 0);
  if (positives != 1) return std::nullopt;
  if (y1 > 0) return Direction::Up;
  if (y2 > 0) return Direction::Down;
  return Direction::None;
}

DirectionalLabel label_instance(const OrderBookSnapshot& now, const OrderBookSnapshot& future) {
  DirectionalLabel l;
  l.y1 = future.best_bid() > now.best_ask() ? 1 : -1;
  l.y2 = future.best_ask() < now.best_bid() ? 1 : -1;
  l.y3 = (future.best_bid() < now.best_ask() && future.best_ask() > now.best_bid()) ? 1 : -1;
  return l;
}

Prediction combine_signs(int s1, int s2, int s3) {
  for (int s : {s1, s2, s3})
    if (s != 1 && s != -1) throw std::invalid_argument("combine_signs: signs must be +1 or -1");
  const int positives = (s1 > 0) + (s2 > 0) + (s3 > 0);
  if (positives != 1) return Prediction::Abstain;
  if (s1 > 0) return Prediction::Up;
  if (s2 > 0) return Prediction::Down;
  return Prediction::None;
}

std::optional<Direction> to_direction(Prediction p) {
  switch (p) {
    case Prediction::Up: return Direction::Up;
    case Prediction::Down: return Direction::Down;
    case Prediction::None: return Direction::None;
    case Prediction::Abstain: break;
  }
  return std::nullopt;
}

bool is_correct(Prediction prediction, Direction truth) {
  const auto d = to_direction(prediction);
  return d && *d == truth;
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::None: return "none";
  }
  return "?";
}

std::string_view to_string(Prediction p) {
  if (p == Prediction::Abstain) return "abstain";
  return to_string(*to_direction(p));
}

std::optional<Direction> direction_from_string(std::string_view s) {
  if (s == "up") return Direction::Up;
  if (s == "down") return Direction::Down;
  if (s == "none") return Direction::None;
  return std::nullopt;
}

}  // namespace lobmkl
