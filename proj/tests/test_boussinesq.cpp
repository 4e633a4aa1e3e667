#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "cnisp/boussinesq.hpp"
#include "cnisp/mms.hpp"

namespace cnisp {
namespace {

VectorXd point(double a, double b, double c) {
  VectorXd x(3);
  x << a, b, c;
  return x;
}

TEST(Boussinesq, ColdCavityIsAtRest) {
  BoussinesqParams bp;
  bp.m = 8;
  bp.th_mean = 0.0;
  bp.delta_h = 0.0;
  const BoussinesqProblem prob(bp);
  const Index n = prob.cells();
  const VectorXd u1 = VectorXd::Zero(3 * n);
  const VectorXd t = VectorXd::Zero(n);
  EXPECT_LT(prob.residual_flow(u1, t, point(0.5, 0.5, 0.5)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(prob.residual_energy(t, u1, point(0.5, 0.5, 0.5)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Boussinesq, QoiOfUniformFields) {
  BoussinesqParams bp;
  bp.m = 10;
  const BoussinesqProblem prob(bp);
  const Index n = prob.cells();
  VectorXd u1 = VectorXd::Zero(3 * n);
  u1.head(n).setOnes();
  const auto [k, e] = prob.qoi(u1, VectorXd::Ones(n));
  EXPECT_LT(std::abs(k - 0.5), 1e-13);
  EXPECT_LT(std::abs(e - 1.0), 1e-13);
}

TEST(Boussinesq, BgsConvergesAndSatisfiesResiduals) {
  BoussinesqParams bp;
  bp.m = 12;
  auto prob = std::make_shared<const BoussinesqProblem>(bp);
  const auto [m1, m2] = boussinesq_modules(prob);
  BgsConfig cfg;
  cfg.relaxation = 1.0;
  cfg.tol = 1e-10;
  const VectorXd xi1 = point(0.4, -0.6, 0.1), xi2 = point(-0.2, 0.8, -0.5);
  const BgsResult r = bgs_solve(m1, m2, xi1, xi2, cfg);
  EXPECT_LT(r.iterations, 40);
  const VectorXd f = prob->residual_flow(r.u1, r.u2, xi1);
  EXPECT_LT(f.cwiseAbs().maxCoeff(), 1e-6) << "momentum and pressure residual";
  EXPECT_LT(prob->residual_energy(r.u2, r.u1, xi2).cwiseAbs().maxCoeff(), 1e-6);
  const auto [k, e] = prob->qoi(r.u1, r.u2);
  EXPECT_GT(k, 0.0) << "buoyancy drives a flow";
  EXPECT_GT(e, 0.0);
}

TEST(Boussinesq, ManufacturedErrorShrinksWithMesh) {
  BoussinesqParams bp;
  BgsConfig cfg;
  cfg.relaxation = 1.0;
  cfg.tol = 1e-10;
  const MmsResult r = mms_boussinesq(bp, {8, 16}, 1, 5, cfg);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_GT(r.points[0].mean_error / r.points[1].mean_error, 2.5)
      << "errors " << r.points[0].mean_error << " and " << r.points[1].mean_error;
}

TEST(Boussinesq, HotWallProfile) {
  const BoussinesqProblem prob(BoussinesqParams{});
  const VectorXd xi = point(0.3, -0.2, 0.7);
  EXPECT_LT(std::abs(prob.hot_wall(0.0, xi) - 1.0), 1e-14) << "perturbation vanishes at the corners";
  EXPECT_LT(std::abs(prob.hot_wall(1.0, xi) - 1.0), 1e-12);
  const double h = 1e-5, y = 0.37;
  const double fd = (prob.hot_wall(y + h, xi) - prob.hot_wall(y - h, xi)) / (2 * h);
  EXPECT_LT(std::abs(fd - prob.hot_wall(y, xi, 1)), 1e-6);
}

}  // namespace
}  // namespace cnisp
