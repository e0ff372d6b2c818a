#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lobmkl/execution.hpp"
#include "lobmkl/features.hpp"

namespace lobmkl {

inline constexpr int kBankSize = 16;

struct RbfKernel {
  double sigma_sq = 1.0;  // exp(-|x - x'|^2 / sigma_sq)
};
struct PolynomialKernel {
  int degree = 1;  // (<x, x'> + 1)^degree
};
// Infinite sigmoidal network kernel with isotropic weight covariance
// Sigma = net_variance * I.
struct ArcsinNetKernel {
  double net_variance = 1.0;
};
struct LinearKernel {};

using KernelSpec = std::variant<RbfKernel, PolynomialKernel, ArcsinNetKernel, LinearKernel>;

using GramMatrix = Eigen::MatrixXd;

// K1..K16: five RBF, five polynomial, five arcsin-network, one linear.
using KernelBank = std::array<KernelSpec, kBankSize>;

// Hyperparameter grids for default_kernel_bank(). Each grid has five entries.
struct BankConfig {
  std::array<double, 5> rbf_scale_multipliers{0.25, 0.5, 1.0, 2.0, 4.0};
  std::array<int, 5> poly_degrees{1, 2, 3, 4, 5};
  std::array<double, 5> net_variances{0.1, 0.5, 1.0, 5.0, 10.0};

  void validate() const;
};

void validate_kernel(const KernelSpec& spec);
std::string kernel_name(const KernelSpec& spec);

double kernel_eval(std::span<const double> x, std::span<const double> x_prime,
                   const KernelSpec& spec);

// values(i, j) = k(a_i, b_j). Rows of the result are filled in parallel under
// Execution::Parallel; the result is bit-identical to Execution::Serial.
GramMatrix gram(const FeatureMatrix& a, const FeatureMatrix& b, const KernelSpec& spec,
                Execution exec = Execution::Parallel);
// Symmetric self-Gram: each pair is evaluated once and mirrored.
GramMatrix gram(const FeatureMatrix& a, const KernelSpec& spec,
                Execution exec = Execution::Parallel);

// Median of the squared distances over all row pairs i < j.
double median_pairwise_sq_distance(const FeatureMatrix& train);

// RBF scales are the median-heuristic distance times the multipliers
// (falling back to 1 when the median is 0).
KernelBank default_kernel_bank(const FeatureMatrix& train, const BankConfig& config = {});

}  // namespace lobmkl
