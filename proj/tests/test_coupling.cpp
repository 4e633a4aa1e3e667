#include <gtest/gtest.h>

#include <cmath>

#include "cnisp/coupling.hpp"
#include "cnisp/poisson.hpp"

namespace cnisp {
namespace {

ModuleOperator affine_module(const std::string& name, double gain, double shift) {
  ModuleOperator m;
  m.name = name;
  m.state_dim = 1;
  m.param_dim = 0;
  m.gramian = Gramian::identity(1);
  m.coupling_dim = 1;
  m.coupling_gramian = Gramian::identity(1);
  m.solve = [gain, shift](const VectorXd&, const VectorXd& v, const VectorXd&) {
    return VectorXd::Constant(1, gain * v(0) + shift);
  };
  return m;
}

TEST(Bgs, LinearFixedPoint) {
  const auto m1 = affine_module("a", 0.5, 1.0);
  const auto m2 = affine_module("b", 0.5, 1.0);
  BgsConfig cfg;
  cfg.relaxation = 1.0;
  cfg.tol = 1e-12;
  const BgsResult r = bgs_solve(m1, m2, VectorXd(), VectorXd(), cfg);
  EXPECT_LT(std::abs(r.u1(0) - 2.0), 1e-11) << "u1 = " << r.u1(0);
  EXPECT_LT(std::abs(r.u2(0) - 2.0), 1e-11) << "u2 = " << r.u2(0);
}

TEST(Bgs, DecoupledSystemSettlesInOneSweep) {
  const auto m1 = affine_module("a", 0.0, 3.0);
  const auto m2 = affine_module("b", 0.0, -1.0);
  BgsConfig cfg;
  cfg.relaxation = 1.0;
  cfg.max_iters = 1;
  try {
    bgs_solve(m1, m2, VectorXd(), VectorXd(), cfg);
    FAIL() << "one sweep cannot certify convergence from a zero start";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.last_iterate().u1(0), 3.0);
    EXPECT_EQ(e.last_iterate().u2(0), -1.0);
  }
  cfg.max_iters = 10;
  EXPECT_EQ(bgs_solve(m1, m2, VectorXd(), VectorXd(), cfg).iterations, 2);
}

TEST(Bgs, DivergenceIsReported) {
  const auto m1 = affine_module("a", 1e200, 1.0);
  const auto m2 = affine_module("b", 1e200, 1.0);
  BgsConfig cfg;
  cfg.relaxation = 1.0;
  EXPECT_THROW(bgs_solve(m1, m2, VectorXd(), VectorXd(), cfg), DivergenceError);
}

TEST(Bgs, FixedPointConsistency) {
  auto prob = std::make_shared<const PoissonProblem>(PoissonParams{});
  const auto [m1, m2] = poisson_modules(prob);
  VectorXd xi1(3), xi2(3);
  xi1 << 0.4, -0.2, 0.7;
  xi2 << -0.5, 0.1, 0.3;
  BgsConfig cfg;
  cfg.tol = 1e-10;
  const BgsResult r = bgs_solve(m1, m2, xi1, xi2, cfg);
  const VectorXd u1 = m1.relaxed_solve(r.u1, m2.couple(r.u2), xi1, cfg.relaxation);
  const VectorXd u2 = m2.relaxed_solve(r.u2, m1.couple(u1), xi2, cfg.relaxation);
  EXPECT_LE(m1.gramian.norm(u1 - r.u1), cfg.tol * (1.0 + m1.gramian.norm(r.u1)));
  EXPECT_LE(m2.gramian.norm(u2 - r.u2), cfg.tol * (1.0 + m2.gramian.norm(r.u2)));
}

TEST(Bgs, PoissonMatchesMonolithicSolve) {
  auto prob = std::make_shared<const PoissonProblem>(PoissonParams{});
  const auto [m1, m2] = poisson_modules(prob);
  VectorXd xi1(3), xi2(3);
  xi1 << -0.9, 0.3, 0.5;
  xi2 << 0.6, -0.7, 0.2;
  BgsConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_iters = 500;
  const BgsResult r = bgs_solve(m1, m2, xi1, xi2, cfg);
  const auto [e1, e2] = prob->solve_monolithic(xi1, xi2);
  const Index n = prob->nodes();
  EXPECT_LT((r.u1.head(n) - e1.head(n)).norm() / e1.head(n).norm(), 1e-8) << "subdomain 1";
  EXPECT_LT((r.u2 - e2).norm() / e2.norm(), 1e-8) << "subdomain 2";
}

TEST(Bgs, RejectsBadRelaxation) {
  const auto m = affine_module("a", 0.5, 1.0);
  BgsConfig cfg;
  cfg.relaxation = 1.5;
  EXPECT_THROW(bgs_solve(m, m, VectorXd(), VectorXd(), cfg), InvalidArgument);
}

}  // namespace
}  // namespace cnisp
