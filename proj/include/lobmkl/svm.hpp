#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lobmkl/kernels.hpp"

namespace lobmkl {

struct SVMProblem {
  GramMatrix gram;       // square, train x train
  std::vector<int> labels;  // each +1 or -1
  double c = 1.0;

  void validate() const;
};

struct SVMModel {
  Eigen::VectorXd alphas;
  double bias = 0.0;
  std::vector<std::size_t> support_indices;
  double dual_objective = 0.0;  // sum(alpha) - 1/2 alpha' Q alpha
  double kkt_violation = 0.0;   // max_{up} -y g - min_{low} -y g at exit
  std::size_t iterations = 0;
  bool degenerate = false;  // single-class problem, constant classifier
  bool curvature_clipped = false;  // a non-PSD pair was met and clipped
};

struct SVMOptions {
  double tolerance = 1e-4;
  std::size_t max_iterations = 10'000'000;
  // Feasible starting point (box and equality constraints); used to warm
  // start repeated solves on nearby Gram matrices.
  std::optional<Eigen::VectorXd> initial_alphas;
};

// Pairwise working-set ascent on the soft-margin dual. Stops when the maximal
// KKT violation pair gap is at most options.tolerance.
SVMModel train_svm(const SVMProblem& problem, const SVMOptions& options = {});
inline SVMModel train_svm(const SVMProblem& problem, double tolerance) {
  return train_svm(problem, SVMOptions{tolerance, 10'000'000, std::nullopt});
}

// Sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(const GramMatrix& gram, std::span<const int> labels,
                      const Eigen::VectorXd& alphas);

// f(x) = sum_j alpha_j y_j K(x_j, x) + bias for each row of cross_gram
// (rows: test instances, columns: train instances).
Eigen::VectorXd decision_values(const SVMModel& model, std::span<const int> labels,
                                const GramMatrix& cross_gram);

inline int sign_of(double decision) { return decision > 0.0 ? 1 : -1; }

}  // namespace lobmkl
