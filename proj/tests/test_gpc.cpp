#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cnisp/gpc.hpp"

namespace cnisp {
namespace {

TEST(Projection, ConstantAndLinear) {
  const TotalDegreeBasis basis(1, 3);
  const auto rule = tensor_quadrature(1, 3);
  MatrixXd samples(2, rule.size());
  for (Index j = 0; j < rule.size(); ++j) {
    samples(0, j) = 2.5;
    samples(1, j) = rule.nodes[static_cast<size_t>(j)](0);
  }
  const CoeffMatrix c = project(samples, rule, basis);
  EXPECT_LT(std::abs(c(0, 0) - 2.5), 1e-14);
  EXPECT_LT(c.row(0).tail(3).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(std::abs(c(1, 1) - 1.0 / std::sqrt(3.0)), 1e-14) << "xi = (1/sqrt 3) psi_1, got " << c(1, 1);
  EXPECT_LT(std::abs(c(1, 0)) + std::abs(c(1, 2)) + std::abs(c(1, 3)), 1e-14);
}

TEST(Projection, BasisFunctionGivesUnitRow) {
  const TotalDegreeBasis basis(3, 2);
  const auto rule = smolyak_quadrature(3, 2);
  const MatrixXd psi = basis_at_nodes(basis, rule);
  const CoeffMatrix c = project(psi, rule, psi);
  EXPECT_LT((c - MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, OrthonormalityOnTensorRule) {
  const TotalDegreeBasis basis(6, 4);
  const auto rule = tensor_quadrature(6, 4);
  const MatrixXd psi = basis_at_nodes(basis, rule);
  const MatrixXd gram = psi * rule.weight_vector().asDiagonal() * psi.transpose();
  const double err = (gram - MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff();
  EXPECT_LT(err, 1e-10) << "discrete Gram matrix deviates by " << err;
}

TEST(Statistics, MeanAndVariance) {
  CoeffMatrix c(1, 2);
  c << 1.0, 2.0;
  EXPECT_LT(std::abs(mean(c)(0) - 1.0), 1e-15);
  EXPECT_LT(std::abs(covariance(c)(0, 0) - 4.0), 1e-15);
  CoeffMatrix k = CoeffMatrix::Zero(2, 4);
  k.col(0) << 3.0, -1.0;
  EXPECT_LT(covariance(k).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Statistics, CovarianceMatchesMonteCarlo) {
  const TotalDegreeBasis basis(1, 3);
  CoeffMatrix c(2, 4);
  c << 0.3, 1.0, -0.4, 0.2, -1.0, 0.5, 0.7, -0.3;
  const MatrixXd s = sample_surrogate(c, basis, 200000, 42);
  const MatrixXd centered = s.rowwise() - s.colwise().mean();
  const MatrixXd mc = centered.transpose() * centered / static_cast<double>(s.rows() - 1);
  const MatrixXd ex = covariance(c);
  const double rel = (mc - ex).norm() / ex.norm();
  EXPECT_LT(rel, 1e-2) << "Monte Carlo covariance off by " << rel;
}

TEST(Norms, WeightedFrobenius) {
  EXPECT_LT(std::abs(weighted_frobenius(MatrixXd::Identity(2, 2), Gramian::identity(2)) - std::sqrt(2.0)), 1e-15);
  EXPECT_EQ(weighted_frobenius(MatrixXd::Zero(3, 2), Gramian::identity(3)), 0.0);
  VectorXd d(1);
  d << 4.0;
  CoeffMatrix c(1, 2);
  c << 1.0, 1.0;
  EXPECT_LT(std::abs(weighted_frobenius(c, Gramian::diagonal(d)) - std::sqrt(8.0)), 1e-15);
}

TEST(Norms, SpectralAndQuadraturePathsAgree) {
  const TotalDegreeBasis basis(2, 3);
  const auto rule = smolyak_quadrature(2, 3);
  const MatrixXd psi = basis_at_nodes(basis, rule);
  std::srand(5);
  const CoeffMatrix a = CoeffMatrix::Random(4, basis.size());
  const CoeffMatrix b = CoeffMatrix::Random(4, basis.size());
  const Gramian g = Gramian::diagonal(VectorXd::LinSpaced(4, 1.0, 2.0));
  const double q = mean_square_error(a, b, g, rule, psi);
  const double s = mean_square_error_spectral(a, b, g);
  EXPECT_LT(std::abs(q - s), 1e-10 * s) << q << " vs " << s;
  CoeffMatrix unit = CoeffMatrix::Zero(1, basis.size());
  unit(0, 2) = 1.0;
  EXPECT_LT(std::abs(mean_square_error_spectral(unit, CoeffMatrix::Zero(1, basis.size()), Gramian::identity(1)) - 1.0),
            1e-15);
}

TEST(Sampling, SeededDrawsRepeat) {
  const MatrixXd a = uniform_samples(100, 3, 9);
  const MatrixXd b = uniform_samples(100, 3, 9);
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(a.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Density, GaussianSamples) {
  // Box-Muller on seeded uniform draws.
  const MatrixXd u = uniform_samples(100000, 2, 3);
  std::vector<double> x(static_cast<size_t>(u.rows()));
  for (Index k = 0; k < u.rows(); ++k) {
    const double r = std::sqrt(-2.0 * std::log(0.5 * (u(k, 0) + 1.0) + 1e-300));
    x[static_cast<size_t>(k)] = r * std::cos(std::numbers::pi * (u(k, 1) + 1.0));
  }
  const DensityEstimate d = kde(x, std::vector<double>{0.0});
  const double exact = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  EXPECT_LT(std::abs(d.density[0] - exact) / exact, 0.05) << "density at 0: " << d.density[0];
}

TEST(Density, IntegratesToOne) {
  const MatrixXd u = uniform_samples(2000, 1, 4);
  std::vector<double> x(u.data(), u.data() + u.size());
  const DensityEstimate d = kde(x, 400);
  EXPECT_LT(std::abs(trapezoid(d.grid, d.density) - 1.0), 1e-3);
  const DensityEstimate c = kde(std::vector<double>(50, 2.0), 11);
  EXPECT_TRUE(c.degenerate);
}

}  // namespace
}  // namespace cnisp
