#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "cnisp/basis.hpp"

namespace cnisp {

using SparseMatrix = Eigen::SparseMatrix<double>;

// A gPC coefficient matrix: row i holds the expansion of state entry i,
// column j the coefficient of basis polynomial psi_j.
using CoeffMatrix = MatrixXd;

// Symmetric positive-definite weight defining a discrete state norm.
// Stored either as a diagonal or as a sparse matrix with a cached
// Cholesky factor G = L L^T (natural ordering), so F = L^T satisfies F^T F = G.
class Gramian {
 public:
  Gramian() = default;
  static Gramian identity(Index n, double scale = 1.0);
  static Gramian diagonal(const VectorXd& d);
  static Gramian sparse(const SparseMatrix& m);

  Index size() const;
  bool is_diagonal() const;

  VectorXd apply(const VectorXd& v) const;
  MatrixXd apply(const MatrixXd& m) const;
  double inner(const VectorXd& a, const VectorXd& b) const;
  double norm(const VectorXd& v) const;
  MatrixXd dense() const;

  // F * X and F^{-1} * X with F^T F = G.
  MatrixXd sqrt_apply(const MatrixXd& x) const;
  MatrixXd sqrt_solve(const MatrixXd& x) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Basis values at all rule nodes, shape (P+1) x Q.
MatrixXd basis_at_nodes(const TotalDegreeBasis& basis, const QuadratureRule& rule);

// U = sum_j w_j u_j psi_j^T where samples has one column per node.
CoeffMatrix project(const MatrixXd& samples, const QuadratureRule& rule, const MatrixXd& psi);
CoeffMatrix project(const MatrixXd& samples, const QuadratureRule& rule, const TotalDegreeBasis& basis);

VectorXd evaluate(const CoeffMatrix& c, const TotalDegreeBasis& basis, const VectorXd& xi);
VectorXd mean(const CoeffMatrix& c);
MatrixXd covariance(const CoeffMatrix& c);

// sqrt(trace(C^T G C)).
double weighted_frobenius(const CoeffMatrix& c, const Gramian& g);

// Quadrature path: sqrt(sum_j w_j ||(A-B) psi_j||_G^2).
double mean_square_error(const CoeffMatrix& a, const CoeffMatrix& b, const Gramian& g,
                         const QuadratureRule& rule, const MatrixXd& psi);
// Spectral path, valid for orthonormal bases and exact rules.
double mean_square_error_spectral(const CoeffMatrix& a, const CoeffMatrix& b, const Gramian& g);

// Pads or truncates the columns of c to `cols`.
CoeffMatrix resize_columns(const CoeffMatrix& c, Index cols);

// count x s matrix of i.i.d. U[-1,1] draws from a seeded generator.
MatrixXd uniform_samples(Index count, int s, std::uint64_t seed);
// Surrogate values at uniform draws: count x n.
MatrixXd sample_surrogate(const CoeffMatrix& c, const TotalDegreeBasis& basis, Index count,
                          std::uint64_t seed);

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  bool degenerate = false;
};

// Gaussian-kernel KDE with Silverman bandwidth 1.06 sigma N^{-1/5}.
DensityEstimate kde(const std::vector<double>& samples, const std::vector<double>& grid);
// KDE on an automatic grid spanning the samples plus four bandwidths.
DensityEstimate kde(const std::vector<double>& samples, int grid_points);

double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

void write_coeff_csv(const CoeffMatrix& c, std::ostream& os);

}  // namespace cnisp
