#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lobmkl/execution.hpp"
#include "lobmkl/labeling.hpp"

namespace lobmkl {

// One out-of-sample block as seen by the random predictor.
struct WindowBaseline {
  std::array<double, kDirectionCount> class_proportions{};  // up, down, none from train block
  std::vector<std::size_t> possible_indices;  // test positions with a kept prediction
  // Realised class per possible instance; empty when the future book sits
  // exactly on a crossing boundary and no class applies.
  std::vector<std::optional<Direction>> true_classes;

  void validate() const;
};

struct SignificanceResult {
  double p_value = 1.0;
  std::size_t iterations = 0;
  std::size_t exceed_count = 0;
};

inline constexpr std::size_t kIterationsPerBlock = 1024;

// Fraction of random replays whose total correct count strictly exceeds
// method_correct_total. Iterations run in fixed blocks with seeds derived
// from (seed, block), so both execution paths give identical results.
SignificanceResult monte_carlo_pvalue(std::span<const WindowBaseline> baselines,
                                      std::size_t method_correct_total, std::size_t iterations,
                                      std::uint64_t seed, Execution exec = Execution::Parallel);

}  // namespace lobmkl
