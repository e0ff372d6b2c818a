#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lobmkl/execution.hpp"
#include "lobmkl/kernels.hpp"
#include "lobmkl/svm.hpp"

namespace lobmkl {

struct MKLProblem {
  std::vector<GramMatrix> grams;  // M square train Gram matrices
  std::vector<int> labels;
  double c = 1.0;
  double gap_tolerance = 1e-3;
  double weight_tolerance = 1e-6;
  std::size_t max_outer_iterations = 200;
  double svm_tolerance = 1e-6;  // KKT tolerance of every inner solve

  void validate() const;
};

enum class MKLStop { DualityGap, WeightStall, MaxIterations };

struct MKLModel {
  Eigen::VectorXd weights;
  SVMModel inner;  // trained on combine_grams(grams, weights)
  double objective = 0.0;
  double duality_gap = 0.0;  // relative, at the returned weights
  bool converged = false;    // duality gap criterion met
  MKLStop stop = MKLStop::MaxIterations;
  std::size_t outer_iterations = 0;
  std::vector<double> objective_history;  // J after each accepted iteration
};

struct MKLEvaluation {
  double objective = 0.0;     // J(d), the optimal inner dual value
  Eigen::VectorXd gradient;   // dJ/dd_m = -1/2 a'(y K_m y)a
  SVMModel inner;
};

// Entrywise sum_m d_m K_m. Weights must be nonnegative; exact zeros are
// skipped.
GramMatrix combine_grams(std::span<const GramMatrix> grams, const Eigen::VectorXd& weights);

MKLEvaluation objective_and_gradient(const MKLProblem& problem, const Eigen::VectorXd& weights,
                                     double tolerance,
                                     std::optional<Eigen::VectorXd> warm_start = std::nullopt,
                                     Execution exec = Execution::Parallel);

// Reduced-gradient descent on the weight simplex with an exact line search,
// starting from uniform weights.
MKLModel train_simplemkl(const MKLProblem& problem, Execution exec = Execution::Parallel);

// Relative duality gap (max_m S_m - sum_m d_m S_m) / max(1, J), S = -gradient.
double relative_duality_gap(const MKLEvaluation& eval, const Eigen::VectorXd& weights);

}  // namespace lobmkl
