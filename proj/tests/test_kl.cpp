#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cnisp/errors.hpp"
#include "cnisp/kl.hpp"

namespace cnisp {
namespace {

// Roots frozen from a 10^6-point sign scan of each bracket, refined by bisection.
TEST(KlRoots, LiteralEquationAtShortLength) {
  const double expect[4] = {4.761289, 10.326611, 16.303129, 22.429812};
  const auto z = kl_roots(0.2, 4);
  ASSERT_EQ(z.size(), 4u);
  for (int j = 0; j < 4; ++j) {
    EXPECT_LT(std::abs(z[static_cast<size_t>(j)] - expect[j]), 1e-6) << "root " << j + 1;
    EXPECT_LT(std::abs(0.2 * z[static_cast<size_t>(j)] + std::tan(0.5 * z[static_cast<size_t>(j)])), 1e-10);
  }
}

TEST(KlRoots, FirstRootBracket) {
  const auto z = kl_roots(0.5, 1);
  EXPECT_GT(z[0], std::numbers::pi);
  EXPECT_LT(z[0], 2.0 * std::numbers::pi);
  EXPECT_THROW(kl_roots(0.0, 1), InvalidArgument);
}

TEST(KlModes, InterleavedRoots) {
  const double at02[4] = {2.284454, 4.761289, 7.463676, 10.326611};
  const double at05[4] = {1.720667, 4.057516, 6.851237, 9.826361};
  const auto a = kl_modes(0.2, 4);
  const auto b = kl_modes(0.5, 4);
  for (int j = 0; j < 4; ++j) {
    EXPECT_LT(std::abs(a[static_cast<size_t>(j)].zeta - at02[j]), 1e-6) << "l=0.2 mode " << j + 1;
    EXPECT_LT(std::abs(b[static_cast<size_t>(j)].zeta - at05[j]), 1e-6) << "l=0.5 mode " << j + 1;
    EXPECT_EQ(a[static_cast<size_t>(j)].odd_function, j % 2 == 1);
  }
}

TEST(KlModes, OrthogonalWithEigenvalueNorms) {
  const auto modes = kl_modes(0.2, 5);
  const int n = 10000;
  for (size_t j = 0; j < modes.size(); ++j)
    for (size_t k = 0; k <= j; ++k) {
      double acc = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double t = -0.5 + static_cast<double>(i) / n;
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += w * kl_mode_value(modes[j], t) * kl_mode_value(modes[k], t);
      }
      acc /= n;
      const double expect = j == k ? modes[j].eigenvalue : 0.0;
      EXPECT_LT(std::abs(acc - expect), 1e-4) << "modes " << j << "," << k;
    }
}

TEST(KlModes, ReproduceExponentialKernel) {
  const double l = 0.5;
  const auto modes = kl_modes(l, 400);
  const double pts[3][2] = {{0.0, 0.0}, {-0.3, 0.2}, {0.1, 0.45}};
  for (const auto& p : pts) {
    double acc = 0.0;
    for (const auto& m : modes) acc += kl_mode_value(m, p[0]) * kl_mode_value(m, p[1]);
    const double exact = std::exp(-std::abs(p[0] - p[1]) / l);
    EXPECT_LT(std::abs(acc - exact), 5e-3) << "t=" << p[0] << " t'=" << p[1];
  }
}

TEST(KlField, MeanAndSingleTerm) {
  const KlField f(2.0, 0.3, 0.5, 1, {{0.0, 1.0}});
  const double x = 0.7;
  Eigen::VectorXd xi(1);
  xi << 0.0;
  EXPECT_EQ(f.eval(&x, xi), 2.0);
  xi << 0.4;
  const auto m = kl_modes(0.5, 1)[0];
  const double g = m.amplitude * std::cos(m.zeta * (x - 0.5));
  EXPECT_LT(std::abs(f.eval(&x, xi) - (2.0 + std::sqrt(3.0) * 0.3 * g * 0.4)), 1e-14);
}

TEST(KlField, OrderedByProductEigenvalue) {
  const KlField f(0.0, 1.0, 0.2, 6, {{0.0, 1.0}, {0.0, 1.0}});
  for (int j = 1; j < f.terms(); ++j) EXPECT_LE(f.term_eigenvalue(j), f.term_eigenvalue(j - 1) * (1.0 + 1e-14));
  EXPECT_EQ(f.mode_tuple(0), (std::vector<int>{0, 0}));
  EXPECT_EQ(f.mode_tuple(1), (std::vector<int>{0, 1})) << "tie broken graded-lex ascending";
  EXPECT_EQ(f.mode_tuple(2), (std::vector<int>{1, 0}));
}

TEST(KlField, EmpiricalCovariance) {
  const KlField f(0.0, 1.0, 0.5, 3, {{0.0, 1.0}, {0.0, 1.0}});
  const double x[2] = {0.3, 0.6};
  double expect = 0.0;
  for (int j = 0; j < 3; ++j) expect += f.gamma(j, x) * f.gamma(j, x);
  std::srand(11);
  const int n = 100000;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd xi = Eigen::VectorXd::Random(3);
    const double v = f.eval(x, xi);
    acc += v * v;
  }
  EXPECT_LT(std::abs(acc / n - expect) / expect, 0.1) << "variance " << acc / n << " vs " << expect;
}

TEST(KlField, DerivativesMatchFiniteDifferences) {
  const KlField f(1.0, 0.5, 0.5, 3, {{-1.0, 0.0}, {0.0, 1.0}});
  Eigen::VectorXd xi(3);
  xi << 0.3, -0.8, 0.5;
  double x[2] = {-0.4, 0.3};
  const double h = 1e-5;
  for (int k = 0; k < 2; ++k) {
    double xp[2] = {x[0], x[1]};
    double xm[2] = {x[0], x[1]};
    xp[k] += h;
    xm[k] -= h;
    const double fd = (f.eval(xp, xi) - f.eval(xm, xi)) / (2 * h);
    const double fd2 = (f.eval(xp, xi) - 2 * f.eval(x, xi) + f.eval(xm, xi)) / (h * h);
    EXPECT_LT(std::abs(fd - f.deriv(k, x, xi)), 1e-7) << "first derivative, axis " << k;
    EXPECT_LT(std::abs(fd2 - f.deriv2(k, x, xi)), 1e-3) << "second derivative, axis " << k;
  }
}

}  // namespace
}  // namespace cnisp
