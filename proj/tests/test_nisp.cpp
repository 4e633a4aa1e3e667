#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "cnisp/nisp.hpp"
#include "cnisp/synthetic.hpp"

namespace cnisp {
namespace {

std::pair<ModuleOperator, ModuleOperator> synthetic_pair(int s1, int s2) {
  SyntheticParams sp;
  sp.s1 = s1;
  sp.s2 = s2;
  return synthetic_modules(std::make_shared<const SyntheticProblem>(sp));
}

TEST(StandardNisp, RecoversAffineSolutionExactly) {
  SyntheticParams sp;
  auto prob = std::make_shared<const SyntheticProblem>(sp);
  const auto [m1, m2] = synthetic_modules(prob);
  const TotalDegreeBasis basis(2, 1);
  NispConfig cfg;
  cfg.relaxation = 1.0;
  cfg.tol = 1e-13;
  const PropagationReport r = standard_nisp(m1, m2, basis, smolyak_quadrature(2, 1), cfg);
  ASSERT_TRUE(r.converged);
  for (double a : {-0.8, 0.1, 0.9})
    for (double b : {-0.5, 0.7}) {
      VectorXd xi(2), x1(1), x2(1);
      xi << a, b;
      x1 << a;
      x2 << b;
      const auto [e1, e2] = prob->exact(x1, x2);
      EXPECT_LT((evaluate(r.u1, basis, xi) - e1).norm(), 1e-10) << "xi = (" << a << ", " << b << ")";
      EXPECT_LT((evaluate(r.u2, basis, xi) - e2).norm(), 1e-10) << "xi = (" << a << ", " << b << ")";
    }
}

TEST(StandardNisp, CallCountIsIterationsTimesNodes) {
  const auto [m1, m2] = synthetic_pair(1, 1);
  const auto rule = smolyak_quadrature(2, 2);
  NispConfig cfg;
  cfg.relaxation = 1.0;
  const PropagationReport r = standard_nisp(m1, m2, TotalDegreeBasis(2, 2), rule, cfg);
  EXPECT_EQ(r.module_calls[0], r.iterations * rule.size());
  EXPECT_EQ(r.module_calls[1], r.iterations * rule.size());
}

TEST(ReducedNisp, MatchesStandardAtTinyTolerance) {
  const auto [m1, m2] = synthetic_pair(1, 1);
  const TotalDegreeBasis basis(2, 2);
  const auto rule = smolyak_quadrature(2, 2);
  NispConfig cfg;
  cfg.relaxation = 1.0;
  ReducedConfig rc;
  rc.eps_dim = {1e-14, 1e-14};
  rc.eps_ord = {1e-14, 1e-14};
  const PropagationReport s = standard_nisp(m1, m2, basis, rule, cfg);
  const PropagationReport r = reduced_nisp(m1, m2, basis, rule, cfg, rc);
  ASSERT_TRUE(s.converged);
  ASSERT_TRUE(r.converged);
  EXPECT_LT((r.u1 - s.u1).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((r.u2 - s.u2).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ReducedNisp, Deterministic) {
  const auto [m1, m2] = synthetic_pair(2, 1);
  const TotalDegreeBasis basis(3, 2);
  const auto rule = smolyak_quadrature(3, 2);
  NispConfig cfg;
  cfg.relaxation = 1.0;
  const PropagationReport a = reduced_nisp(m1, m2, basis, rule, cfg, ReducedConfig{});
  const PropagationReport b = reduced_nisp(m1, m2, basis, rule, cfg, ReducedConfig{});
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_TRUE(a.u1 == b.u1) << "coefficients differ between identical runs";
  EXPECT_TRUE(a.u2 == b.u2) << "coefficients differ between identical runs";
}

TEST(RelativeError, ZeroPadsLowerOrder) {
  CoeffMatrix a(1, 3), r(1, 6);
  a << 1.0, 2.0, 0.0;
  r << 1.0, 2.0, 0.0, 0.0, 0.0, 2.0;
  const Gramian g = Gramian::identity(1);
  const CoeffMatrix z1 = CoeffMatrix::Zero(1, 3), z6 = CoeffMatrix::Zero(1, 6);
  EXPECT_LT(std::abs(relative_error(a, z1, r, z6, g, g) - 2.0 / 3.0), 1e-15);
}

TEST(InputGpc, LinearCoordinatesHaveOneCoefficient) {
  const TotalDegreeBasis basis(3, 2);
  const auto rule = smolyak_quadrature(3, 2);
  const CoeffMatrix c = input_gpc(1, 2, rule, basis_at_nodes(basis, rule));
  ASSERT_EQ(c.rows(), 2);
  // xi = psi_j / sqrt(3) for the degree-one Legendre polynomial.
  EXPECT_LT(std::abs(c.cwiseAbs().rowwise().sum()(0) - 1.0 / std::sqrt(3.0)), 1e-13);
  EXPECT_LT(std::abs(c.cwiseAbs().maxCoeff() - 1.0 / std::sqrt(3.0)), 1e-13);
}

}  // namespace
}  // namespace cnisp
