#pragma once

// Independent dense QP oracle for the soft-margin SVM dual, used only by
// tests. Accelerated projected gradient with an exact projection onto
// {0 <= a <= C, y'a = 0}; shares no code with the SMO solver.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

// argmin_a |a - v| s.t. 0 <= a <= C, sum y_i a_i = 0. The constraint residual
// h(lambda) = sum y_i clip(v_i - lambda y_i) is piecewise linear and
// nonincreasing, so its root is found exactly between two breakpoints.
inline Eigen::VectorXd project(const Eigen::VectorXd& v, const std::vector<int>& y, double C) {
  const auto n = v.size();
  auto at = [&](double lambda) {
    Eigen::VectorXd a(n);
    for (Eigen::Index i = 0; i < n; ++i) a[i] = std::clamp(v[i] - lambda * y[i], 0.0, C);
    return a;
  };
  auto h = [&](double lambda) {
    const Eigen::VectorXd a = at(lambda);
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += y[i] * a[i];
    return s;
  };
  std::vector<double> bp;
  for (Eigen::Index i = 0; i < n; ++i) {
    bp.push_back(v[i] * y[i]);
    bp.push_back((v[i] - C) * y[i]);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  // h(-inf) >= 0 >= h(+inf); walk the breakpoints.
  double lo = bp.front() - 1.0, hlo = h(lo);
  if (hlo <= 0.0) return at(lo);
  for (double b : bp) {
    const double hb = h(b);
    if (hb <= 0.0) {
      const double lambda = hb == hlo ? b : lo + (b - lo) * hlo / (hlo - hb);
      return at(lambda);
    }
    lo = b;
    hlo = hb;
  }
  return at(bp.back() + 1.0);
}

inline double dual_value(const Eigen::MatrixXd& Q, const Eigen::VectorXd& a) {
  return a.sum() - 0.5 * a.dot(Q * a);
}

struct QpResult {
  Eigen::VectorXd alphas;
  double objective = 0.0;
};

// Maximises sum(a) - 1/2 a'Qa with Q_ij = y_i y_j K_ij.
inline QpResult solve_dual(const Eigen::MatrixXd& K, const std::vector<int>& y, double C,
                           int max_iterations = 200000) {
  const auto n = K.rows();
  Eigen::MatrixXd Q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) Q(i, j) = y[i] * y[j] * K(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
  const double L = std::max(es.eigenvalues().maxCoeff(), 1e-12);

  Eigen::VectorXd a = Eigen::VectorXd::Zero(n), prev = a, z = a;
  double t = 1.0;
  double f_prev = -dual_value(Q, a);
  int stall = 0;
  for (int k = 0; k < max_iterations; ++k) {
    const Eigen::VectorXd grad = Q * z - Eigen::VectorXd::Ones(n);
    prev = a;
    a = project(z - grad / L, y, C);
    const double f = -dual_value(Q, a);
    if (f > f_prev) {  // adaptive restart
      t = 1.0;
      z = a;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      z = a + ((t - 1.0) / t_next) * (a - prev);
      t = t_next;
    }
    stall = (a - prev).cwiseAbs().maxCoeff() < 1e-14 * std::max(1.0, C) ? stall + 1 : 0;
    f_prev = f;
    if (stall > 50) break;
  }
  return {a, dual_value(Q, a)};
}

}  // namespace oracle
