#include "lobmkl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lobmkl/error.hpp"

namespace lobmkl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double sq_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace

void BankConfig::validate() const {
  for (double m : rbf_scale_multipliers)
    if (!(m > 0.0)) throw ValidationError("rbf scale multipliers must be positive");
  for (int d : poly_degrees)
    if (d < 1) throw ValidationError("polynomial degrees must be >= 1");
  for (double v : net_variances)
    if (!(v > 0.0)) throw ValidationError("net variances must be positive");
}

void validate_kernel(const KernelSpec& spec) {
  std::visit(overloaded{
                 [](const RbfKernel& k) {
                   if (!(k.sigma_sq > 0.0)) throw ValidationError("rbf sigma^2 must be positive");
                 },
                 [](const PolynomialKernel& k) {
                   if (k.degree < 1) throw ValidationError("polynomial degree must be >= 1");
                 },
                 [](const ArcsinNetKernel& k) {
                   if (!(k.net_variance > 0.0))
                     throw ValidationError("net variance must be positive");
                 },
                 [](const LinearKernel&) {},
             },
             spec);
}

std::string kernel_name(const KernelSpec& spec) {
  return std::visit(overloaded{
                        [](const RbfKernel& k) { return "rbf(" + std::to_string(k.sigma_sq) + ")"; },
                        [](const PolynomialKernel& k) {
                          return "poly(" + std::to_string(k.degree) + ")";
                        },
                        [](const ArcsinNetKernel& k) {
                          return "arcsin(" + std::to_string(k.net_variance) + ")";
                        },
                        [](const LinearKernel&) { return std::string("linear"); },
                    },
                    spec);
}

double kernel_eval(std::span<const double> x, std::span<const double> xp, const KernelSpec& spec) {
  if (x.size() != xp.size())
    throw std::invalid_argument("kernel_eval: dimension mismatch (" + std::to_string(x.size()) +
                                " vs " + std::to_string(xp.size()) + ")");
  return std::visit(overloaded{
                        [&](const RbfKernel& k) { return std::exp(-sq_distance(x, xp) / k.sigma_sq); },
                        [&](const PolynomialKernel& k) {
                          const double base = dot(x, xp) + 1.0;
                          double v = 1.0;
                          for (int p = 0; p < k.degree; ++p) v *= base;
                          return v;
                        },
                        [&](const ArcsinNetKernel& k) {
                          const double s = 2.0 * k.net_variance;
                          const double num = s * dot(x, xp);
                          const double den =
                              std::sqrt((1.0 + s * dot(x, x)) * (1.0 + s * dot(xp, xp)));
                          const double r = num / den;
                          if (std::abs(r) <= 0.5) return 2.0 / std::numbers::pi * std::asin(r);
                          // Near +-1 work with q = 1 - |r| = (den^2 - num^2) / (den (den + |num|)),
                          // where den^2 - num^2 is expanded via Lagrange's identity.
                          double cross = 0.0;
                          for (std::size_t i = 0; i < x.size(); ++i)
                            for (std::size_t j = i + 1; j < x.size(); ++j) {
                              const double c = x[i] * xp[j] - x[j] * xp[i];
                              cross += c * c;
                            }
                          const double gap = 1.0 + s * (dot(x, x) + dot(xp, xp)) + s * s * cross;
                          const double q = gap / (den * (den + std::abs(num)));
                          const double v = 1.0 - 4.0 / std::numbers::pi * std::asin(std::sqrt(0.5 * q));
                          // Beyond double resolution the value is still strictly inside (-1, 1).
                          return std::copysign(std::min(v, std::nextafter(1.0, 0.0)), r);
                        },
                        [&](const LinearKernel&) { return dot(x, xp); },
                    },
                    spec);
}

GramMatrix gram(const FeatureMatrix& a, const FeatureMatrix& b, const KernelSpec& spec,
                Execution exec) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("gram: feature dimension mismatch");
  const auto rows = static_cast<std::ptrdiff_t>(a.size());
  const auto cols = static_cast<std::ptrdiff_t>(b.size());
  GramMatrix g(rows, cols);
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    for (std::ptrdiff_t j = 0; j < cols; ++j)
      g(i, j) = kernel_eval(a.row(static_cast<std::size_t>(i)), b.row(static_cast<std::size_t>(j)), spec);
  return g;
}

GramMatrix gram(const FeatureMatrix& a, const KernelSpec& spec, Execution exec) {
  const auto n = static_cast<std::ptrdiff_t>(a.size());
  GramMatrix g(n, n);
#pragma omp parallel for schedule(dynamic, 8) if (exec == Execution::Parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = i; j < n; ++j) {
      const double v =
          kernel_eval(a.row(static_cast<std::size_t>(i)), a.row(static_cast<std::size_t>(j)), spec);
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

double median_pairwise_sq_distance(const FeatureMatrix& train) {
  const std::size_t n = train.size();
  if (n < 2) throw std::invalid_argument("median distance needs at least 2 rows");
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(sq_distance(train.row(i), train.row(j)));
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  const double upper = d[mid];
  if (d.size() % 2 == 1) return upper;
  const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

KernelBank default_kernel_bank(const FeatureMatrix& train, const BankConfig& config) {
  if (train.size() < 2) throw std::invalid_argument("kernel bank needs at least 2 train rows");
  config.validate();
  double m = median_pairwise_sq_distance(train);
  if (!(m > 0.0)) m = 1.0;

  KernelBank bank;
  for (std::size_t k = 0; k < 5; ++k) {
    bank[k] = RbfKernel{m * config.rbf_scale_multipliers[k]};
    bank[5 + k] = PolynomialKernel{config.poly_degrees[k]};
    bank[10 + k] = ArcsinNetKernel{config.net_variances[k]};
  }
  bank[15] = LinearKernel{};
  return bank;
}

}  // namespace lobmkl
