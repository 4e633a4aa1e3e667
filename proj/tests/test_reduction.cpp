#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cnisp/reduction.hpp"

namespace cnisp {
namespace {

// Random stacked input over a total-degree basis with decaying columns.
StackedInput random_stack(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd c(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) c(i, j) = n(rng) / (1.0 + j);
  VectorXd g(rows);
  for (Index i = 0; i < rows; ++i) g(i) = 0.5 + std::abs(n(rng));
  const Index a = rows / 3;
  return stack_inputs(c.topRows(a), c.middleRows(a, a), c.bottomRows(rows - 2 * a),
                      Gramian::diagonal(g.head(a)), Gramian::diagonal(g.segment(a, a)),
                      Gramian::identity(rows - 2 * a));
}

TEST(Truncation, TailRule) {
  VectorXd s(3);
  s << 2.0, 1.0, 0.0;
  EXPECT_EQ(truncation_rank(s, 0.6), 1);
  EXPECT_EQ(truncation_rank(s, 0.4), 2);
}

TEST(Truncation, RankOneFluctuation) {
  CoeffMatrix own = CoeffMatrix::Zero(2, 4);
  own.col(0) << 1.0, 2.0;
  own.col(2) << 3.0, 4.0;
  const auto y = stack_inputs(own, CoeffMatrix::Zero(0, 4), CoeffMatrix::Zero(0, 4), Gramian::identity(2),
                              Gramian::identity(0), Gramian::identity(0));
  const KlReduction kl = dimension_reduce(y, 1e-6);
  EXPECT_EQ(kl.d, 1);
  EXPECT_LT(std::abs(kl.singular_values(0) - 5.0), 1e-14);
}

TEST(Truncation, ErrorEqualsTailOnRandomStacks) {
  std::mt19937_64 rng(2024);
  const TotalDegreeBasis basis(3, 3);
  const auto rule = smolyak_quadrature(3, 3);
  const MatrixXd psi = basis_at_nodes(basis, rule);
  const VectorXd w = rule.weight_vector();
  for (int trial = 0; trial < 10; ++trial) {
    const StackedInput y = random_stack(rng, 9, basis.size());
    for (double eps : {1e-1, 1e-2, 1e-4}) {
      const KlReduction kl = dimension_reduce(y, eps);
      const MatrixXd theta = theta_at_nodes(kl, psi);
      const MatrixXd fit = (kl.map * theta).colwise() + kl.mean;
      const MatrixXd err = y.sqrt_apply(y.coeff * psi - fit);
      double lhs = 0.0;
      double total = 0.0;
      const MatrixXd fl = y.sqrt_apply((y.coeff * psi).colwise() - kl.mean);
      for (Index j = 0; j < rule.size(); ++j) {
        lhs += w(j) * err.col(j).squaredNorm();
        total += w(j) * fl.col(j).squaredNorm();
      }
      const double tail = kl.singular_values.tail(kl.singular_values.size() - kl.d).squaredNorm();
      EXPECT_LT(std::abs(lhs - tail), 1e-8) << "trial " << trial << " eps " << eps;
      EXPECT_LE(std::sqrt(lhs / total), eps + 1e-8) << "trial " << trial << " eps " << eps;
    }
  }
}

TEST(Truncation, ThetaHasZeroMean) {
  std::mt19937_64 rng(7);
  const TotalDegreeBasis basis(2, 2);
  const auto rule = smolyak_quadrature(2, 2);
  const KlReduction kl = dimension_reduce(random_stack(rng, 6, basis.size()), 1e-3);
  const VectorXd m = theta_at_nodes(kl, basis_at_nodes(basis, rule)) * rule.weight_vector();
  EXPECT_LT(m.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ReducedBasis, UniformHankelAndLegendre) {
  const auto& gl = gauss_legendre(5);
  MatrixXd theta(1, 5);
  VectorXd w(5);
  for (int k = 0; k < 5; ++k) {
    theta(0, k) = gl.nodes[static_cast<size_t>(k)];
    w(k) = gl.weights[static_cast<size_t>(k)];
  }
  const MatrixXd h = build_hankel(theta, w, 1, 1);
  EXPECT_LT(std::abs(h(0, 0) - 1.0), 1e-14);
  EXPECT_LT(std::abs(h(0, 1)), 1e-14);
  EXPECT_LT(std::abs(h(1, 1) - 1.0 / 3.0), 1e-14);
  const ReducedBasis rb = reduced_basis(h, theta, 1, 1);
  VectorXd t(1);
  t << 0.8;
  const VectorXd phi = rb.eval(t);
  EXPECT_LT(std::abs(std::abs(phi(1)) - std::sqrt(3.0) * 0.8), 1e-12) << "phi_1 = sqrt(3) theta";
  EXPECT_LT(std::abs(std::abs(phi(0)) - 1.0), 1e-12);
}

TEST(ReducedBasis, DiscreteOrthogonalityWithNegativeWeights) {
  std::mt19937_64 rng(99);
  const TotalDegreeBasis basis(4, 2);
  const auto rule = smolyak_quadrature(4, 3);
  const MatrixXd psi = basis_at_nodes(basis, rule);
  const VectorXd w = rule.weight_vector();
  ASSERT_LT(w.minCoeff(), 0.0) << "the rule should carry negative weights";
  bool saw_indefinite = false;
  for (int trial = 0; trial < 5; ++trial) {
    const KlReduction kl = dimension_reduce(random_stack(rng, 9, basis.size()), 1e-2);
    const MatrixXd theta = theta_at_nodes(kl, psi);
    const int order = kl.d <= 3 ? 2 : 1;
    const ReducedBasis rb = reduced_basis(build_hankel(theta, w, kl.d, order), theta, kl.d, order);
    const MatrixXd s = rb.node_evals * w.asDiagonal() * rb.node_evals.transpose();
    const MatrixXd expect = MatrixXd(rb.sign.asDiagonal());
    EXPECT_LT((s - expect).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
    saw_indefinite = saw_indefinite || rb.sign.minCoeff() < 0.0;
  }
  (void)saw_indefinite;
}

TEST(SparseQuadrature, CompressesOneDimensionalRule) {
  const auto& gl = gauss_legendre(9);
  MatrixXd theta(1, 9);
  VectorXd w(9);
  for (int k = 0; k < 9; ++k) {
    theta(0, k) = gl.nodes[static_cast<size_t>(k)];
    w(k) = gl.weights[static_cast<size_t>(k)];
  }
  const SparseQuadrature sq = optimal_quadrature(theta, w, 1, 4);
  EXPECT_LE(sq.active.size(), 5u);
  EXPECT_LT(moment_mismatch(theta, w, sq, 1, 4), 1e-10);
}

TEST(SparseQuadrature, MinimalRuleIsKept) {
  const auto& gl = gauss_legendre(3);
  MatrixXd theta(1, 3);
  VectorXd w(3);
  for (int k = 0; k < 3; ++k) {
    theta(0, k) = gl.nodes[static_cast<size_t>(k)];
    w(k) = gl.weights[static_cast<size_t>(k)];
  }
  const SparseQuadrature sq = optimal_quadrature(theta, w, 1, 4);
  ASSERT_EQ(sq.active.size(), 3u);
  EXPECT_LT((sq.weights - w).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Lift, NodeSpaceBasisMatchesHankelBasis) {
  std::mt19937_64 rng(3);
  const TotalDegreeBasis basis(2, 3);
  const auto rule = smolyak_quadrature(2, 3);
  const MatrixXd psi = basis_at_nodes(basis, rule);
  const VectorXd w = rule.weight_vector();
  const KlReduction kl = dimension_reduce(random_stack(rng, 6, basis.size()), 1e-12);
  const MatrixXd theta = theta_at_nodes(kl, psi);
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd samples(3, rule.size());
  for (Index j = 0; j < samples.cols(); ++j)
    for (Index i = 0; i < 3; ++i) samples(i, j) = n(rng);
  int order = 1;
  while (!spans_nodes(theta, order)) ++order;
  const ReducedBasis rb = reduced_basis(build_hankel(theta, w, kl.d, order), theta, kl.d, order);
  const SparseQuadrature sq = optimal_quadrature(theta, w, kl.d, 2 * order);
  MatrixXd active(3, static_cast<Index>(sq.active.size()));
  for (size_t k = 0; k < sq.active.size(); ++k) active.col(static_cast<Index>(k)) = samples.col(sq.active[k]);
  const CoeffMatrix a = lift_to_global(reduced_project(active, sq, rb), rb, rule, psi);
  const ReducedBasis nb = node_space_basis(w, kl.d, order);
  const CoeffMatrix b = lift_to_global(reduced_project(samples, full_quadrature(w), nb), nb, rule, psi);
  EXPECT_LT((a - b).norm() / b.norm(), 1e-9) << "order " << order;
  EXPECT_LT((b - project(samples, rule, psi)).norm() / b.norm(), 1e-12);
}

// theta = A xi on a three-dimensional Smolyak rule with a random 2 x 3 map.
MatrixXd linear_theta(const QuadratureRule& rule, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  MatrixXd a(2, 3);
  for (Index i = 0; i < a.size(); ++i) a(i) = u(rng);
  MatrixXd theta(2, rule.size());
  for (Index j = 0; j < rule.size(); ++j) theta.col(j) = a * rule.nodes[static_cast<size_t>(j)];
  return theta;
}

TEST(KernelRoute, BasisSpansSameSpaceAsHankelBasis) {
  const auto rule = smolyak_quadrature(3, 3);
  const VectorXd w = rule.weight_vector();
  const MatrixXd theta = linear_theta(rule, 11);
  for (int order : {1, 2}) {
    const ReducedBasis h = reduced_basis(build_hankel(theta, w, 2, order), theta, 2, order);
    const ReducedBasis k = kernel_basis(theta, w, order, 1e-12);
    EXPECT_EQ(k.size(), h.size()) << "order " << order;
    // Node-space projectors Phi^T S Phi W agree when the spans agree.
    const MatrixXd ph = h.node_evals.transpose() * h.sign.asDiagonal() * h.node_evals * w.asDiagonal();
    const MatrixXd pk = k.node_evals.transpose() * k.sign.asDiagonal() * k.node_evals * w.asDiagonal();
    EXPECT_LT((ph - pk).cwiseAbs().maxCoeff(), 1e-6) << "order " << order;
    const MatrixXd s = k.node_evals * w.asDiagonal() * k.node_evals.transpose();
    EXPECT_LT((s - MatrixXd(k.sign.asDiagonal())).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(KernelRoute, QuadratureMatchesMoments) {
  const auto rule = smolyak_quadrature(3, 3);
  const VectorXd w = rule.weight_vector();
  const MatrixXd theta = linear_theta(rule, 12);
  const SparseQuadrature sq = kernel_quadrature(theta, w, 4, ReductionTolerances{}.kernel_rank);
  EXPECT_LE(sq.active.size(), binomial(6, 2));
  EXPECT_LT(moment_mismatch(theta, w, sq, 2, 4), 1e-6);
}

TEST(KernelRoute, FullRankFallsBackToNodeSpace) {
  const auto rule = smolyak_quadrature(2, 1);
  MatrixXd theta(2, rule.size());
  for (Index j = 0; j < rule.size(); ++j) theta.col(j) = rule.nodes[static_cast<size_t>(j)];
  const VectorXd w = rule.weight_vector();
  EXPECT_TRUE(use_kernel_route(2, 2, rule.size()));
  const ReducedBasis rb = kernel_basis(theta, w, 2, 1e-12);
  EXPECT_EQ(rb.size(), rule.size());
  const SparseQuadrature sq = kernel_quadrature(theta, w, 4, 1e-12);
  EXPECT_FALSE(sq.compressed);
}

TEST(SelectOrder, Thresholds) {
  CoeffMatrix lo = CoeffMatrix::Zero(1, 2);
  CoeffMatrix hi = CoeffMatrix::Zero(1, 2);
  hi(0, 1) = 1.0;
  EXPECT_EQ(select_order(1, hi, hi, Gramian::identity(1), 0.5, 3), 1);
  EXPECT_EQ(select_order(1, lo, hi, Gramian::identity(1), 0.5, 3), 2);
  EXPECT_EQ(select_order(1, lo, hi, Gramian::identity(1), 2.0 - 1e-12, 3), 1);
  EXPECT_EQ(select_order(3, lo, hi, Gramian::identity(1), 0.5, 3), 3) << "capped at p";
}

}  // namespace
}  // namespace cnisp
