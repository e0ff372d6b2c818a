#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "lobmkl/mkl.hpp"
#include "oracles/fixtures.hpp"
#include "oracles/mkl_oracle.hpp"
#include "oracles/stats_oracle.hpp"

using namespace lobmkl;
using doctest::Approx;

namespace {

Eigen::VectorXd dirichlet(std::mt19937_64& rng, Eigen::Index M) {
  std::gamma_distribution<double> g(2.0, 1.0);
  Eigen::VectorXd d(M);
  for (Eigen::Index m = 0; m < M; ++m) d[m] = g(rng);
  return d / d.sum();
}

}  // namespace

TEST_CASE("combine_grams examples") {
  std::mt19937_64 rng(51);
  const auto p = oracle::random_mkl_problem(rng, 10, 3);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
  e[1] = 1.0;
  CHECK(combine_grams(p.grams, e) == p.grams[1]);

  const std::vector<GramMatrix> same{p.grams[0], p.grams[0]};
  Eigen::VectorXd w(2);
  w << 0.3, 0.7;
  CHECK((combine_grams(same, w) - p.grams[0]).cwiseAbs().maxCoeff() <= 1e-15 * p.grams[0].cwiseAbs().maxCoeff());

  CHECK_THROWS(combine_grams(p.grams, Eigen::VectorXd::Ones(2)));
  Eigen::VectorXd neg(3);
  neg << 1.5, -0.5, 0.0;
  CHECK_THROWS(combine_grams(p.grams, neg));
  std::vector<GramMatrix> ragged{GramMatrix::Identity(2, 2), GramMatrix::Identity(3, 3)};
  CHECK_THROWS(combine_grams(ragged, Eigen::VectorXd::Constant(2, 0.5)));
}

TEST_CASE("property: Weyl bound on combined Gram matrices") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = oracle::random_mkl_problem(rng, 15, 4);
    const auto d = dirichlet(rng, 4);
    double bound = 0.0;
    for (std::size_t m = 0; m < 4; ++m)
      bound += d[static_cast<Eigen::Index>(m)] * oracle::eigen_range(p.grams[m]).min;
    CHECK(oracle::eigen_range(combine_grams(p.grams, d)).min >= bound - 1e-10);
  }
}

TEST_CASE("objective_and_gradient on a single-class problem") {
  MKLProblem p;
  p.grams = {GramMatrix::Identity(3, 3), GramMatrix::Ones(3, 3)};
  p.labels = {1, 1, 1};
  const auto e = objective_and_gradient(p, Eigen::VectorXd::Constant(2, 0.5), 1e-6);
  CHECK(e.inner.degenerate);
  CHECK(e.gradient.isZero());
  CHECK(e.objective == 0.0);
}

TEST_CASE("single-kernel gradient is -1/2 a'(y K y)a") {
  std::mt19937_64 rng(53);
  const auto p = oracle::random_mkl_problem(rng, 20, 1);
  const auto e = objective_and_gradient(p, Eigen::VectorXd::Ones(1), 1e-8);
  double s = 0.0;
  for (Eigen::Index i = 0; i < 20; ++i)
    for (Eigen::Index j = 0; j < 20; ++j)
      s += e.inner.alphas[i] * e.inner.alphas[j] * p.labels[static_cast<std::size_t>(i)] *
           p.labels[static_cast<std::size_t>(j)] * p.grams[0](i, j);
  REQUIRE(e.gradient.size() == 1);
  CHECK(e.gradient[0] == Approx(-0.5 * s).epsilon(1e-12));
}

TEST_CASE("property: gradient matches central finite differences") {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = oracle::random_mkl_problem(rng, 20, 4);
    const auto d = dirichlet(rng, 4);
    const auto e = objective_and_gradient(p, d, 1e-10);
    const double h = 1e-5;
    for (Eigen::Index m = 0; m < 4; ++m) {
      Eigen::VectorXd up = d, down = d;
      up[m] += h;
      down[m] -= h;
      const double fd = (oracle::mkl_objective(p, up, 1e-12) - oracle::mkl_objective(p, down, 1e-12)) / (2 * h);
      CHECK(std::abs(e.gradient[m] - fd) <= 1e-4 * std::abs(fd));
    }
  }
}

TEST_CASE("one kernel: weight 1 and the plain SVM solution") {
  std::mt19937_64 rng(55);
  const auto p = oracle::random_mkl_problem(rng, 25, 1);
  const auto m = train_simplemkl(p);
  REQUIRE(m.weights.size() == 1);
  CHECK(m.weights[0] == 1.0);
  const auto plain = train_svm(SVMProblem{p.grams[0], p.labels, p.c}, p.svm_tolerance);
  CHECK(m.inner.alphas == plain.alphas);
  CHECK(m.inner.bias == plain.bias);
  CHECK(m.converged);
}

TEST_CASE("identical kernels stop at the uniform start") {
  std::mt19937_64 rng(56);
  auto p = oracle::random_mkl_problem(rng, 20, 1);
  p.grams.push_back(p.grams[0]);
  const auto m = train_simplemkl(p);
  CHECK(m.weights[0] == 0.5);
  CHECK(m.weights[1] == 0.5);
  CHECK(m.stop == MKLStop::DualityGap);
  CHECK(m.outer_iterations == 0);
  CHECK(m.converged);
}

TEST_CASE("informative kernel dominates a noise kernel") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = oracle::informative_vs_noise(seed);
    p.gap_tolerance = 1e-5;
    p.svm_tolerance = 1e-8;
    const auto m = train_simplemkl(p);
    CHECK(m.weights[0] >= 0.9);
    const auto grid = oracle::simplex_grid_2(p);
    CHECK(std::abs(m.objective - grid.objective) <= 1e-3);
  }
}

TEST_CASE("property: simplex weights, monotone objective, gap on convergence") {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = oracle::random_mkl_problem(rng, 15 + rng() % 15, 2 + rng() % 4);
    p.c = std::array{0.5, 1.0, 10.0}[trial % 3];
    const auto m = train_simplemkl(p);
    CHECK(m.weights.minCoeff() >= 0.0);
    CHECK(std::abs(m.weights.sum() - 1.0) <= 1e-9);
    for (std::size_t k = 1; k < m.objective_history.size(); ++k)
      CHECK(m.objective_history[k] <= m.objective_history[k - 1]);
    if (m.converged) CHECK(m.duality_gap <= p.gap_tolerance);
    CHECK(m.objective == Approx(oracle::mkl_objective(p, m.weights)).epsilon(1e-5));
    CHECK(m.inner.alphas.maxCoeff() <= p.c);
  }
}

TEST_CASE("property: J(d) at fixed weights equals the plain SVM optimum") {
  std::mt19937_64 rng(58);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = oracle::random_mkl_problem(rng, 20, 3);
    const auto d = dirichlet(rng, 3);
    const auto e = objective_and_gradient(p, d, 1e-8);
    CHECK(e.objective == Approx(oracle::mkl_objective(p, d)).epsilon(1e-6));
  }
}

TEST_CASE("serial and parallel runs agree bit for bit") {
  std::mt19937_64 rng(59);
  const auto p = oracle::random_mkl_problem(rng, 30, 6);
  const auto a = train_simplemkl(p, Execution::Serial);
  const auto b = train_simplemkl(p, Execution::Parallel);
  CHECK(a.weights == b.weights);
  CHECK(a.objective == b.objective);
  CHECK(a.objective_history == b.objective_history);
}

TEST_CASE("problem validation") {
  MKLProblem p;
  CHECK_THROWS(train_simplemkl(p));
  p.grams = {GramMatrix::Identity(3, 3)};
  p.labels = {1, -1};
  CHECK_THROWS(train_simplemkl(p));
  p.labels = {1, -1, 1};
  p.gap_tolerance = 0.0;
  CHECK_THROWS(train_simplemkl(p));
}
