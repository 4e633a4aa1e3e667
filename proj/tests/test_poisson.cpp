#include <gtest/gtest.h>

#include <Eigen/SparseCholesky>
#include <cmath>
#include <memory>

#include "cnisp/mms.hpp"
#include "cnisp/poisson.hpp"

namespace cnisp {
namespace {

VectorXd point(double a, double b, double c) {
  VectorXd x(3);
  x << a, b, c;
  return x;
}

TEST(Poisson, ZeroSourceGivesZeroSolution) {
  PoissonParams pp;
  pp.b1 = 0.0;
  pp.b2 = 0.0;
  const PoissonProblem prob(pp);
  const auto [u1, u2] = prob.solve_monolithic(point(0.3, -0.4, 0.9), point(-0.1, 0.5, 0.2));
  EXPECT_LT(u1.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(u2.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Poisson, EnergyOfConstantField) {
  const PoissonProblem prob(PoissonParams{});
  const Index n = prob.nodes();
  const VectorXd one1 = VectorXd::Ones(n + prob.m());
  const VectorXd one2 = VectorXd::Ones(n);
  EXPECT_LT(std::abs(prob.energy(one1, one2) - 1.0), 1e-12) << "0.5 * (|D1| + |D2|)";
  const auto [u1, u2] = prob.solve_monolithic(point(0.1, 0.2, 0.3), point(0.4, 0.5, 0.6));
  EXPECT_LT(std::abs(prob.energy(2.0 * u1, 2.0 * u2) - 4.0 * prob.energy(u1, u2)), 1e-12);
}

TEST(Poisson, SubdomainStiffnessIsSpd) {
  const PoissonProblem prob(PoissonParams{});
  const SparseMatrix a = prob.stiffness(1, point(1.0, -1.0, 1.0));
  EXPECT_LT(SparseMatrix(a - SparseMatrix(a.transpose())).norm(), 1e-12 * a.norm());
  Eigen::SimplicialLLT<SparseMatrix> llt(a);
  EXPECT_EQ(llt.info(), Eigen::Success) << "the Dirichlet subdomain operator must be SPD";
}

TEST(Poisson, InterfaceContinuity) {
  const PoissonProblem prob(PoissonParams{});
  const auto [u1, u2] = prob.solve_monolithic(point(-0.6, 0.2, 0.8), point(0.7, -0.3, -0.9));
  const int m = prob.m();
  for (int iy = 0; iy < m; ++iy) {
    ASSERT_EQ(prob.node_coord(0, m - 1, iy)[0], 0.0);
    ASSERT_EQ(prob.node_coord(1, 0, iy)[0], 0.0);
    EXPECT_LT(std::abs(u1(prob.node_index(m - 1, iy)) - u2(prob.node_index(0, iy))), 1e-10) << "row " << iy;
  }
}

TEST(Poisson, ManufacturedErrorShrinksWithMesh) {
  PoissonParams pp;
  pp.manufactured = true;
  double err[2];
  int k = 0;
  for (int m : {11, 21}) {
    pp.m = m;
    const PoissonProblem prob(pp);
    const auto [u1, u2] = prob.solve_monolithic(point(0.5, -0.5, 0.2), point(-0.3, 0.3, 0.9));
    err[k++] = prob.manufactured_error(u1, u2);
  }
  EXPECT_GT(err[0] / err[1], 3.0) << "errors " << err[0] << " and " << err[1];
}

TEST(Mms, SlopeFit) {
  EXPECT_LT(std::abs(fit_loglog_slope({0.1, 0.05, 0.025}, {0.02, 0.005, 0.00125}) - 2.0), 1e-12);
}

TEST(Poisson, RejectsTooSmallMesh) {
  PoissonParams pp;
  pp.m = 1;
  EXPECT_THROW(PoissonProblem{pp}, InvalidArgument);
}

}  // namespace
}  // namespace cnisp
