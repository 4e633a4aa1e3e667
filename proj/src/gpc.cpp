#include "cnisp/gpc.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "cnisp/errors.hpp"
#include "cnisp/parallel.hpp"

namespace cnisp {

namespace {
int g_threads = 0;
}

int thread_count() {
  if (g_threads > 0) return g_threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_thread_count(int n) { g_threads = std::max(0, n); }

struct Gramian::Impl {
  Index n = 0;
  bool diagonal = true;
  VectorXd diag;
  SparseMatrix mat;
  SparseMatrix upper;  // L^T
};

Gramian Gramian::identity(Index n, double scale) { return diagonal(VectorXd::Constant(n, scale)); }

Gramian Gramian::diagonal(const VectorXd& d) {
  if ((d.array() <= 0.0).any()) throw InvalidArgument("Gramian: diagonal entries must be positive");
  auto impl = std::make_shared<Impl>();
  impl->n = d.size();
  impl->diagonal = true;
  impl->diag = d;
  Gramian g;
  g.impl_ = impl;
  return g;
}

Gramian Gramian::sparse(const SparseMatrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("Gramian: matrix must be square");
  SparseMatrix sym = 0.5 * (m + SparseMatrix(m.transpose()));
  if ((sym - m).norm() > 1e-12 * std::max(1.0, m.norm()))
    throw InvalidArgument("Gramian: matrix is not symmetric");
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(sym);
  if (llt.info() != Eigen::Success) throw NumericalError("Gramian: Cholesky factorization failed");
  auto impl = std::make_shared<Impl>();
  impl->n = m.rows();
  impl->diagonal = false;
  impl->mat = sym;
  impl->upper = SparseMatrix(llt.matrixU());
  Gramian g;
  g.impl_ = impl;
  return g;
}

Index Gramian::size() const { return impl_ ? impl_->n : 0; }
bool Gramian::is_diagonal() const { return !impl_ || impl_->diagonal; }

VectorXd Gramian::apply(const VectorXd& v) const {
  if (impl_->diagonal) return impl_->diag.cwiseProduct(v);
  return impl_->mat * v;
}

MatrixXd Gramian::apply(const MatrixXd& m) const {
  if (impl_->diagonal) return impl_->diag.asDiagonal() * m;
  return impl_->mat * m;
}

double Gramian::inner(const VectorXd& a, const VectorXd& b) const { return a.dot(apply(b)); }

double Gramian::norm(const VectorXd& v) const { return std::sqrt(std::max(0.0, inner(v, v))); }

MatrixXd Gramian::dense() const {
  if (impl_->diagonal) return impl_->diag.asDiagonal();
  return MatrixXd(impl_->mat);
}

MatrixXd Gramian::sqrt_apply(const MatrixXd& x) const {
  if (impl_->diagonal) return impl_->diag.cwiseSqrt().asDiagonal() * x;
  return impl_->upper * x;
}

MatrixXd Gramian::sqrt_solve(const MatrixXd& x) const {
  if (impl_->diagonal) return impl_->diag.cwiseSqrt().cwiseInverse().asDiagonal() * x;
  return impl_->upper.triangularView<Eigen::Upper>().solve(x);
}

MatrixXd basis_at_nodes(const TotalDegreeBasis& basis, const QuadratureRule& rule) {
  if (rule.dim != basis.dim()) throw InvalidArgument("basis_at_nodes: dimension mismatch");
  MatrixXd psi(basis.size(), rule.size());
  parallel_for(rule.size(), [&](std::ptrdiff_t j) { psi.col(j) = basis.eval(rule.nodes[static_cast<size_t>(j)]); });
  return psi;
}

CoeffMatrix project(const MatrixXd& samples, const QuadratureRule& rule, const MatrixXd& psi) {
  if (samples.cols() != rule.size() || psi.cols() != rule.size())
    throw InvalidArgument("project: one sample per node required");
  // A single-threaded product has a fixed summation order for fixed sizes,
  // which keeps the projection bit-reproducible.
  const VectorXd w = rule.weight_vector();
  return (samples * w.asDiagonal()) * psi.transpose();
}

CoeffMatrix project(const MatrixXd& samples, const QuadratureRule& rule, const TotalDegreeBasis& basis) {
  return project(samples, rule, basis_at_nodes(basis, rule));
}

VectorXd evaluate(const CoeffMatrix& c, const TotalDegreeBasis& basis, const VectorXd& xi) {
  if (c.cols() != basis.size()) throw InvalidArgument("evaluate: column count differs from basis size");
  return c * basis.eval(xi);
}

VectorXd mean(const CoeffMatrix& c) { return c.col(0); }

MatrixXd covariance(const CoeffMatrix& c) {
  MatrixXd cov = c * c.transpose() - c.col(0) * c.col(0).transpose();
  return 0.5 * (cov + cov.transpose());
}

double weighted_frobenius(const CoeffMatrix& c, const Gramian& g) {
  if (c.size() == 0) return 0.0;
  if (g.size() != c.rows()) throw InvalidArgument("weighted_frobenius: Gramian size mismatch");
  const double t = (c.array() * g.apply(MatrixXd(c)).array()).sum();
  return std::sqrt(std::max(0.0, t));
}

double mean_square_error(const CoeffMatrix& a, const CoeffMatrix& b, const Gramian& g,
                         const QuadratureRule& rule, const MatrixXd& psi) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("mean_square_error: shape mismatch");
  const MatrixXd vals = (a - b) * psi;
  const MatrixXd gv = g.apply(vals);
  double acc = 0.0;
  for (Index j = 0; j < vals.cols(); ++j) acc += rule.weights[static_cast<size_t>(j)] * vals.col(j).dot(gv.col(j));
  return std::sqrt(std::max(0.0, acc));
}

double mean_square_error_spectral(const CoeffMatrix& a, const CoeffMatrix& b, const Gramian& g) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("mean_square_error: shape mismatch");
  return weighted_frobenius(a - b, g);
}

CoeffMatrix resize_columns(const CoeffMatrix& c, Index cols) {
  CoeffMatrix out = CoeffMatrix::Zero(c.rows(), cols);
  const Index k = std::min(cols, c.cols());
  out.leftCols(k) = c.leftCols(k);
  return out;
}

MatrixXd uniform_samples(Index count, int s, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  MatrixXd out(count, s);
  for (Index i = 0; i < count; ++i)
    for (int k = 0; k < s; ++k) out(i, k) = dist(gen);
  return out;
}

MatrixXd sample_surrogate(const CoeffMatrix& c, const TotalDegreeBasis& basis, Index count, std::uint64_t seed) {
  if (count < 2) throw InvalidArgument("sample_surrogate: need at least two samples");
  const MatrixXd xi = uniform_samples(count, basis.dim(), seed);
  MatrixXd out(count, c.rows());
  parallel_for(count, [&](std::ptrdiff_t i) {
    out.row(i) = (c * basis.eval(xi.row(i).transpose())).transpose();
  });
  return out;
}

DensityEstimate kde(const std::vector<double>& samples, const std::vector<double>& grid) {
  if (samples.size() < 2) throw InvalidArgument("kde: need at least two samples");
  const double n = static_cast<double>(samples.size());
  double mu = 0.0;
  for (double v : samples) mu += v;
  mu /= n;
  double var = 0.0;
  for (double v : samples) var += (v - mu) * (v - mu);
  var /= (n - 1.0);
  DensityEstimate est;
  est.bandwidth = 1.06 * std::sqrt(var) * std::pow(n, -0.2);
  if (!(est.bandwidth > 1e-12)) {
    est.bandwidth = 1e-12;
    est.degenerate = true;
  }
  est.grid = grid;
  est.density.assign(grid.size(), 0.0);
  const double h = est.bandwidth;
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  parallel_for(static_cast<std::ptrdiff_t>(grid.size()), [&](std::ptrdiff_t g) {
    double acc = 0.0;
    for (double v : samples) {
      const double z = (grid[static_cast<size_t>(g)] - v) / h;
      acc += std::exp(-0.5 * z * z);
    }
    est.density[static_cast<size_t>(g)] = acc * norm;
  });
  return est;
}

DensityEstimate kde(const std::vector<double>& samples, int grid_points) {
  if (samples.size() < 2) throw InvalidArgument("kde: need at least two samples");
  if (grid_points < 2) throw InvalidArgument("kde: need at least two grid points");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  // Bandwidth first, to size the grid margin.
  DensityEstimate probe = kde(samples, std::vector<double>{*lo_it});
  const double lo = *lo_it - 4.0 * probe.bandwidth;
  const double hi = *hi_it + 4.0 * probe.bandwidth;
  std::vector<double> grid(static_cast<size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) grid[static_cast<size_t>(i)] = lo + (hi - lo) * i / (grid_points - 1.0);
  return kde(samples, grid);
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

void write_coeff_csv(const CoeffMatrix& c, std::ostream& os) {
  os.precision(17);
  for (Index i = 0; i < c.rows(); ++i) {
    for (Index j = 0; j < c.cols(); ++j) {
      if (j) os << ',';
      os << c(i, j);
    }
    os << '\n';
  }
}

}  // namespace cnisp
