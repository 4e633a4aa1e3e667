#include <gtest/gtest.h>

#include <cmath>

#include "cnisp/basis.hpp"
#include "cnisp/errors.hpp"

namespace cnisp {
namespace {

TEST(GaussLegendre, OneNode) {
  const auto& r = gauss_legendre(1);
  ASSERT_EQ(r.nodes.size(), 1u);
  EXPECT_LT(std::abs(r.nodes[0]), 1e-15);
  EXPECT_LT(std::abs(r.weights[0] - 1.0), 1e-15);
}

TEST(GaussLegendre, TwoNodes) {
  const auto& r = gauss_legendre(2);
  ASSERT_EQ(r.nodes.size(), 2u);
  EXPECT_LT(std::abs(r.nodes[0] + 0.5773502691896258), 1e-14) << "node " << r.nodes[0];
  EXPECT_LT(std::abs(r.nodes[1] - 0.5773502691896258), 1e-14) << "node " << r.nodes[1];
  for (double w : r.weights) EXPECT_LT(std::abs(w - 0.5), 1e-14) << "weight " << w;
}

TEST(GaussLegendre, ThreeNodes) {
  const auto& r = gauss_legendre(3);
  ASSERT_EQ(r.nodes.size(), 3u);
  const double x = std::sqrt(0.6);
  EXPECT_LT(std::abs(r.nodes[0] + x), 1e-14);
  EXPECT_LT(std::abs(r.nodes[1]), 1e-14);
  EXPECT_LT(std::abs(r.nodes[2] - x), 1e-14);
  EXPECT_LT(std::abs(r.weights[0] - 5.0 / 18.0), 1e-14);
  EXPECT_LT(std::abs(r.weights[1] - 8.0 / 18.0), 1e-14);
  EXPECT_LT(std::abs(r.weights[2] - 5.0 / 18.0), 1e-14);
}

TEST(GaussLegendre, MatchesTabulatedFiveNodeRule) {
  // Abscissae of the classical 5-point rule; weights halved for unit mass.
  const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                       0.2369268850561891};
  const auto& r = gauss_legendre(5);
  for (int k = 0; k < 5; ++k) {
    EXPECT_LT(std::abs(r.nodes[static_cast<size_t>(k)] - x[k]), 1e-14) << "node " << k;
    EXPECT_LT(std::abs(r.weights[static_cast<size_t>(k)] - 0.5 * w[k]), 1e-14) << "weight " << k;
  }
}

TEST(TotalDegree, CountsAndOrdering) {
  EXPECT_EQ(total_degree_indices(6, 4).size(), 210u);
  const auto zero = total_degree_indices(5, 0);
  ASSERT_EQ(zero.size(), 1u);
  EXPECT_EQ(zero[0], MultiIndex(5, 0));
  const auto two = total_degree_indices(2, 1);
  ASSERT_EQ(two.size(), 3u);
  EXPECT_EQ(two[1], (MultiIndex{1, 0})) << "descending lex within a degree";
  EXPECT_EQ(two[2], (MultiIndex{0, 1}));
}

TEST(TotalDegree, EvaluatesOrthonormalProducts) {
  const TotalDegreeBasis b1(1, 3);
  VectorXd one(1);
  one << 1.0;
  const VectorXd v1 = b1.eval(one);
  EXPECT_LT(std::abs(v1(0) - 1.0), 1e-15);
  EXPECT_LT(std::abs(v1(1) - std::sqrt(3.0)), 1e-14) << v1(1);
  const TotalDegreeBasis b2(2, 2);
  VectorXd xy(2);
  xy << 1.0, 1.0;
  const VectorXd v2 = b2.eval(xy);
  for (Index j = 0; j < b2.size(); ++j)
    if (b2.indices()[static_cast<size_t>(j)] == MultiIndex{1, 1}) EXPECT_LT(std::abs(v2(j) - 3.0), 1e-13);
  VectorXd out(1);
  out << 1.5;
  EXPECT_THROW(b1.eval(out), DomainError);
}

TEST(Quadrature, TensorRuleSizes) {
  const auto r = tensor_quadrature(2, 1);
  ASSERT_EQ(r.size(), 4);
  for (double w : r.weights) EXPECT_LT(std::abs(w - 0.25), 1e-15);
  EXPECT_EQ(tensor_quadrature(3, 2).size(), 27);
  const auto r0 = tensor_quadrature(1, 0);
  ASSERT_EQ(r0.size(), 1);
  EXPECT_LT(std::abs(r0.weights[0] - 1.0), 1e-15);
}

TEST(Quadrature, SmolyakNodeCounts) {
  EXPECT_EQ(smolyak_quadrature(6, 2).size(), 85);
  EXPECT_EQ(smolyak_quadrature(6, 3).size(), 389);
  EXPECT_LT(smolyak_quadrature(6, 2).size(), 729);
  const auto one = smolyak_quadrature(1, 3);
  const auto& gl = gauss_legendre(4);
  ASSERT_EQ(one.size(), 4);
  for (int k = 0; k < 4; ++k) {
    EXPECT_LT(std::abs(one.nodes[static_cast<size_t>(k)](0) - gl.nodes[static_cast<size_t>(k)]), 1e-15);
    EXPECT_LT(std::abs(one.weights[static_cast<size_t>(k)] - gl.weights[static_cast<size_t>(k)]), 1e-15);
  }
}

TEST(Quadrature, SmolyakExactness) {
  for (int s = 1; s <= 4; ++s)
    for (int q = 0; q <= 3; ++q) {
      const double err = max_monomial_error(smolyak_quadrature(s, q), 2 * q + 1);
      EXPECT_LT(err, 1e-12) << "s=" << s << " q=" << q;
    }
}

TEST(Quadrature, NodeCapRaisesResourceError) { EXPECT_THROW(tensor_quadrature(6, 9, 1000), ResourceError); }

TEST(Quadrature, MomentOracle) {
  EXPECT_LT(std::abs(uniform_moment({2}) - 1.0 / 3.0), 1e-15);
  EXPECT_LT(std::abs(uniform_moment({1, 2})), 1e-15);
  EXPECT_LT(std::abs(uniform_moment({4, 2}) - 1.0 / 15.0), 1e-15);
}

}  // namespace
}  // namespace cnisp
