#include "lobmkl/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lobmkl/error.hpp"

namespace lobmkl {

namespace {

constexpr double kTau = 1e-12;

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace

void SVMProblem::validate() const {
  if (labels.empty()) throw std::invalid_argument("svm: no training instances");
  if (gram.rows() != gram.cols() || static_cast<std::size_t>(gram.rows()) != labels.size())
    throw std::invalid_argument("svm: gram must be square and match the label count");
  for (int y : labels)
    if (y != 1 && y != -1) throw std::invalid_argument("svm: labels must be +1 or -1");
  if (!(c > 0.0)) throw std::invalid_argument("svm: C must be positive");
}

double dual_objective(const GramMatrix& gram, std::span<const int> labels,
                      const Eigen::VectorXd& alphas) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = alphas[i] * labels[static_cast<std::size_t>(i)];
  return alphas.sum() - 0.5 * v.dot(gram * v);
}

SVMModel train_svm(const SVMProblem& problem, const SVMOptions& options) {
  problem.validate();
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("svm: tolerance must be positive");

  const auto& K = problem.gram;
  const auto n = static_cast<Eigen::Index>(problem.labels.size());
  const double C = problem.c;
  const std::vector<int>& y = problem.labels;
  const auto Y = [&](Eigen::Index i) { return static_cast<double>(y[static_cast<std::size_t>(i)]); };

  SVMModel model;
  model.alphas = Eigen::VectorXd::Zero(n);

  const bool all_pos = std::all_of(y.begin(), y.end(), [](int v) { return v == 1; });
  const bool all_neg = std::all_of(y.begin(), y.end(), [](int v) { return v == -1; });
  if (all_pos || all_neg) {
    // The equality constraint with alpha >= 0 pins every alpha to zero.
    model.bias = all_pos ? 1.0 : -1.0;
    model.degenerate = true;
    return model;
  }

  Eigen::VectorXd& a = model.alphas;
  if (options.initial_alphas) {
    if (options.initial_alphas->size() != n)
      throw std::invalid_argument("svm: warm start size mismatch");
    const auto& a0 = *options.initial_alphas;
    if (a0.minCoeff() < -1e-9 * C || a0.maxCoeff() > C * (1.0 + 1e-9))
      throw std::invalid_argument("svm: warm start outside the box [0, C]");
    a = a0.cwiseMax(0.0).cwiseMin(C);
    double balance = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) balance += a[t] * Y(t);
    if (std::abs(balance) > 1e-8 * C)
      throw std::invalid_argument("svm: warm start violates sum(alpha * y) = 0");
  }

  // G = Q a - 1 with Q_ij = y_i y_j K_ij.
  Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (a[j] == 0.0) continue;
    const double s = a[j] * Y(j);
    for (Eigen::Index k = 0; k < n; ++k) G[k] += Y(k) * s * K(k, j);
  }

  const auto in_up = [&](Eigen::Index t) { return Y(t) > 0 ? a[t] < C : a[t] > 0.0; };
  const auto in_low = [&](Eigen::Index t) { return Y(t) > 0 ? a[t] > 0.0 : a[t] < C; };

  double gap = 0.0;
  std::size_t iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t)
      if (in_up(t) && -Y(t) * G[t] >= gmax) {
        gmax = -Y(t) * G[t];
        i = t;
      }

    double gmax2 = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = Y(t) * G[t];
      gmax2 = std::max(gmax2, v);
      const double diff = gmax + v;
      if (i >= 0 && diff > 0.0) {
        double quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (quad <= 0.0) quad = kTau;
        const double obj = -diff * diff / quad;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }

    gap = gmax + gmax2;
    if (i < 0 || j < 0 || gap <= options.tolerance) break;

    const double old_ai = a[i];
    const double old_aj = a[j];
    double quad = K(i, i) + K(j, j) - 2.0 * K(i, j);
    if (quad <= 0.0) {
      model.curvature_clipped = true;
      quad = kTau;
    }

    if (y[static_cast<std::size_t>(i)] != y[static_cast<std::size_t>(j)]) {
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) {
          a[j] = 0.0;
          a[i] = diff;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = -diff;
      }
      if (diff > 0.0) {
        if (a[i] > C) {
          a[i] = C;
          a[j] = C - diff;
        }
      } else if (a[j] > C) {
        a[j] = C;
        a[i] = C + diff;
      }
    } else {
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > C) {
        if (a[i] > C) {
          a[i] = C;
          a[j] = sum - C;
        }
      } else if (a[j] < 0.0) {
        a[j] = 0.0;
        a[i] = sum;
      }
      if (sum > C) {
        if (a[j] > C) {
          a[j] = C;
          a[i] = sum - C;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = sum;
      }
    }

    const double di = (a[i] - old_ai) * Y(i);
    const double dj = (a[j] - old_aj) * Y(j);
    for (Eigen::Index k = 0; k < n; ++k) G[k] += Y(k) * (di * K(k, i) + dj * K(k, j));
  }
  model.iterations = iter;
  model.kkt_violation = std::max(gap, 0.0);

  // Fresh gradient for the bias and the objective; the incremental one drifts.
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = a[k] * Y(k);
  const Eigen::VectorXd f = K * v;  // sum_j alpha_j y_j K_kj

  std::vector<double> free_values;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r = Y(k) - f[k];  // -y_k G_k
    if (a[k] > 0.0 && a[k] < C) free_values.push_back(r);
    if (in_up(k)) lower = std::max(lower, r);
    if (in_low(k)) upper = std::min(upper, r);
  }
  if (!free_values.empty()) {
    model.bias = median(std::move(free_values));
  } else if (std::isfinite(lower) && std::isfinite(upper)) {
    model.bias = 0.5 * (lower + upper);
  }

  model.dual_objective = a.sum() - 0.5 * v.dot(f);
  const double threshold = 1e-8 * C;
  for (Eigen::Index k = 0; k < n; ++k)
    if (a[k] > threshold) model.support_indices.push_back(static_cast<std::size_t>(k));
  return model;
}

Eigen::VectorXd decision_values(const SVMModel& model, std::span<const int> labels,
                                const GramMatrix& cross_gram) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (model.alphas.size() != n || cross_gram.cols() != n)
    throw std::invalid_argument("decision_values: cross gram columns (" +
                                std::to_string(cross_gram.cols()) + ") must equal train size (" +
                                std::to_string(n) + ")");
  Eigen::VectorXd v(n);
  for (Eigen::Index j = 0; j < n; ++j) v[j] = model.alphas[j] * labels[static_cast<std::size_t>(j)];
  Eigen::VectorXd f = cross_gram * v;
  f.array() += model.bias;
  return f;
}

}  // namespace lobmkl
