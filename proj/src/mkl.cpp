#include "lobmkl/mkl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lobmkl {

namespace {

// d <- max(d, 0) / sum.
void project_to_simplex_face(Eigen::VectorXd& d) {
  d = d.cwiseMax(0.0);
  const double s = d.sum();
  if (s > 0.0) d /= s;
}

struct LinePoint {
  double gamma = 0.0;
  Eigen::VectorXd weights;
  MKLEvaluation eval;
};

}  // namespace

void MKLProblem::validate() const {
  if (grams.empty()) throw std::invalid_argument("mkl: need at least one gram matrix");
  if (labels.empty()) throw std::invalid_argument("mkl: no training instances");
  const auto n = static_cast<Eigen::Index>(labels.size());
  for (const auto& g : grams)
    if (g.rows() != n || g.cols() != n)
      throw std::invalid_argument("mkl: every gram must be square and match the label count");
  if (!(c > 0.0) || !(gap_tolerance > 0.0) || !(weight_tolerance > 0.0) || !(svm_tolerance > 0.0))
    throw std::invalid_argument("mkl: C and tolerances must be positive");
}

GramMatrix combine_grams(std::span<const GramMatrix> grams, const Eigen::VectorXd& weights) {
  if (grams.empty()) throw std::invalid_argument("combine_grams: no grams");
  if (static_cast<std::size_t>(weights.size()) != grams.size())
    throw std::invalid_argument("combine_grams: weight count does not match gram count");
  GramMatrix out = GramMatrix::Zero(grams[0].rows(), grams[0].cols());
  for (std::size_t m = 0; m < grams.size(); ++m) {
    const double w = weights[static_cast<Eigen::Index>(m)];
    if (!(w >= 0.0)) throw std::invalid_argument("combine_grams: weights must be nonnegative");
    if (grams[m].rows() != out.rows() || grams[m].cols() != out.cols())
      throw std::invalid_argument("combine_grams: gram shape mismatch");
    if (w == 0.0) continue;
    out.noalias() += w * grams[m];
  }
  return out;
}

MKLEvaluation objective_and_gradient(const MKLProblem& problem, const Eigen::VectorXd& weights,
                                     double tolerance, std::optional<Eigen::VectorXd> warm_start,
                                     Execution exec) {
  SVMProblem svm{combine_grams(problem.grams, weights), problem.labels, problem.c};
  MKLEvaluation out;
  out.inner = train_svm(svm, SVMOptions{tolerance, 10'000'000, std::move(warm_start)});
  out.objective = out.inner.dual_objective;

  const auto& sv = out.inner.support_indices;
  const auto n_sv = static_cast<Eigen::Index>(sv.size());
  Eigen::VectorXd v(n_sv);
  for (Eigen::Index k = 0; k < n_sv; ++k) {
    const auto i = static_cast<Eigen::Index>(sv[static_cast<std::size_t>(k)]);
    v[k] = out.inner.alphas[i] * problem.labels[sv[static_cast<std::size_t>(k)]];
  }

  const auto M = static_cast<std::ptrdiff_t>(problem.grams.size());
  out.gradient.resize(M);
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
  for (std::ptrdiff_t m = 0; m < M; ++m) {
    const auto& K = problem.grams[static_cast<std::size_t>(m)];
    double s = 0.0;
    for (Eigen::Index b = 0; b < n_sv; ++b) {
      const auto jb = static_cast<Eigen::Index>(sv[static_cast<std::size_t>(b)]);
      double row = 0.0;
      for (Eigen::Index a = 0; a < n_sv; ++a)
        row += v[a] * K(static_cast<Eigen::Index>(sv[static_cast<std::size_t>(a)]), jb);
      s += v[b] * row;
    }
    out.gradient[m] = -0.5 * s;
  }
  return out;
}

double relative_duality_gap(const MKLEvaluation& eval, const Eigen::VectorXd& weights) {
  const Eigen::VectorXd S = -eval.gradient;
  const double gap = S.maxCoeff() - weights.dot(S);
  return std::max(gap, 0.0) / std::max(1.0, eval.objective);
}

MKLModel train_simplemkl(const MKLProblem& problem, Execution exec) {
  problem.validate();
  const auto M = static_cast<Eigen::Index>(problem.grams.size());
  const double tol = problem.svm_tolerance;

  auto evaluate = [&](const Eigen::VectorXd& d, const SVMModel& warm) {
    std::optional<Eigen::VectorXd> start;
    if (warm.alphas.size() > 0 && !warm.degenerate) start = warm.alphas;
    return objective_and_gradient(problem, d, tol, std::move(start), exec);
  };

  MKLModel model;
  Eigen::VectorXd d = Eigen::VectorXd::Constant(M, 1.0 / static_cast<double>(M));
  MKLEvaluation cur = objective_and_gradient(problem, d, tol, std::nullopt, exec);
  model.objective_history.push_back(cur.objective);

  std::size_t iter = 0;
  for (; iter < problem.max_outer_iterations; ++iter) {
    if (relative_duality_gap(cur, d) <= problem.gap_tolerance) {
      model.stop = MKLStop::DualityGap;
      break;
    }

    // Reduced gradient with the largest weight as pivot; components already
    // at zero whose gradient pushes them negative stay put.
    const Eigen::VectorXd& grad = cur.gradient;
    Eigen::Index mu = 0;
    d.maxCoeff(&mu);
    Eigen::VectorXd D = Eigen::VectorXd::Zero(M);
    for (Eigen::Index m = 0; m < M; ++m) {
      if (m == mu) continue;
      const double reduced = grad[m] - grad[mu];
      if (!(d[m] <= 0.0 && reduced > 0.0)) D[m] = -reduced;
    }
    D[mu] = -(D.sum() - D[mu]);
    if (D.cwiseAbs().maxCoeff() == 0.0) {
      model.stop = MKLStop::WeightStall;
      break;
    }

    const Eigen::VectorXd d_start = d;
    const double J_start = cur.objective;

    // Move to the face boundary while that keeps improving J.
    double gamma_max = 0.0;
    std::optional<LinePoint> far_point;
    while (true) {
      gamma_max = std::numeric_limits<double>::infinity();
      Eigen::Index nu = -1;
      for (Eigen::Index m = 0; m < M; ++m)
        if (D[m] < 0.0 && -d[m] / D[m] < gamma_max) {
          gamma_max = -d[m] / D[m];
          nu = m;
        }
      if (nu < 0) break;

      Eigen::VectorXd d_far = d + gamma_max * D;
      d_far[nu] = 0.0;
      project_to_simplex_face(d_far);
      MKLEvaluation far = evaluate(d_far, cur.inner);
      if (far.objective < cur.objective) {
        d = std::move(d_far);
        cur = std::move(far);
        D[mu] += D[nu];
        D[nu] = 0.0;
        far_point.reset();
        if (D.minCoeff() >= 0.0) break;
      } else {
        far_point = LinePoint{gamma_max, std::move(d_far), std::move(far)};
        break;
      }
    }

    // Exact line search on [0, gamma_max]: J is convex along D with
    // derivative -S(gamma).D, so bracket the derivative root (Illinois).
    if (far_point) {
      const double slope0 = cur.gradient.dot(D);
      const double slope1 = far_point->eval.gradient.dot(D);
      if (slope0 < 0.0 && slope1 > 0.0) {
        double lo = 0.0, hi = far_point->gamma;
        double f_lo = slope0, f_hi = slope1;
        int side = 0;
        std::optional<LinePoint> best;
        for (int k = 0; k < 30 && hi - lo > 1e-10 * far_point->gamma; ++k) {
          double g = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
          if (!(g > lo && g < hi)) g = 0.5 * (lo + hi);
          Eigen::VectorXd d_try = d + g * D;
          project_to_simplex_face(d_try);
          MKLEvaluation e = evaluate(d_try, cur.inner);
          const double slope = e.gradient.dot(D);
          const double J_try = e.objective;
          if (!best || J_try < best->eval.objective)
            best = LinePoint{g, std::move(d_try), std::move(e)};
          if (std::abs(slope) <= 1e-9 * std::abs(slope0)) break;
          if (slope < 0.0) {
            lo = g;
            f_lo = slope;
            if (side == -1) f_hi *= 0.5;
            side = -1;
          } else {
            hi = g;
            f_hi = slope;
            if (side == 1) f_lo *= 0.5;
            side = 1;
          }
        }
        if (best && best->eval.objective < cur.objective) {
          d = std::move(best->weights);
          cur = std::move(best->eval);
        }
      }
    }

    if (cur.objective < J_start) model.objective_history.push_back(cur.objective);
    const double change = (d - d_start).cwiseAbs().maxCoeff();
    if (change < problem.weight_tolerance) {
      model.stop = MKLStop::WeightStall;
      ++iter;
      break;
    }
  }

  model.outer_iterations = iter;
  model.duality_gap = relative_duality_gap(cur, d);
  model.converged = model.duality_gap <= problem.gap_tolerance;
  model.weights = std::move(d);
  model.objective = cur.objective;
  model.inner = std::move(cur.inner);
  return model;
}

}  // namespace lobmkl
