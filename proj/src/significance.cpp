#include "lobmkl/significance.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "lobmkl/error.hpp"

namespace lobmkl {

namespace {

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// How many of `count` random replays have a total strictly above threshold.
std::size_t run_block(std::span<const WindowBaseline> baselines, std::size_t threshold,
                      std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t exceed = 0;
  for (std::size_t it = 0; it < count; ++it) {
    std::size_t correct = 0;
    for (const auto& w : baselines) {
      const double p_up = w.class_proportions[0];
      const double p_up_down = p_up + w.class_proportions[1];
      for (const auto& truth : w.true_classes) {
        // 53-bit uniform in [0, 1).
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const Direction draw =
            u < p_up ? Direction::Up : (u < p_up_down ? Direction::Down : Direction::None);
        if (truth && *truth == draw) ++correct;
      }
    }
    if (correct > threshold) ++exceed;
  }
  return exceed;
}

}  // namespace

void WindowBaseline::validate() const {
  double sum = 0.0;
  for (double p : class_proportions) {
    if (!(p >= 0.0)) throw ValidationError("class proportions must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("class proportions must sum to 1");
  if (possible_indices.size() != true_classes.size())
    throw ValidationError("possible_indices and true_classes must have equal length");
}

SignificanceResult monte_carlo_pvalue(std::span<const WindowBaseline> baselines,
                                      std::size_t method_correct_total, std::size_t iterations,
                                      std::uint64_t seed, Execution exec) {
  if (iterations == 0) throw std::invalid_argument("monte_carlo_pvalue: iterations must be >= 1");
  std::size_t possible = 0;
  for (const auto& w : baselines) {
    w.validate();
    possible += w.true_classes.size();
  }
  if (method_correct_total > possible)
    throw std::invalid_argument("monte_carlo_pvalue: correct count exceeds possible instances");

  const auto blocks =
      static_cast<std::ptrdiff_t>((iterations + kIterationsPerBlock - 1) / kIterationsPerBlock);
  std::size_t exceed = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : exceed) if (exec == Execution::Parallel)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t first = static_cast<std::size_t>(b) * kIterationsPerBlock;
    const std::size_t count = std::min(kIterationsPerBlock, iterations - first);
    exceed += run_block(baselines, method_correct_total, count,
                        block_seed(seed, static_cast<std::uint64_t>(b)));
  }

  SignificanceResult r;
  r.iterations = iterations;
  r.exceed_count = exceed;
  r.p_value = static_cast<double>(exceed) / static_cast<double>(iterations);
  return r;
}

}  // namespace lobmkl
