#include "cnisp/reduction.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cnisp/errors.hpp"

namespace cnisp {

MatrixXd StackedInput::sqrt_apply(const MatrixXd& x) const {
  MatrixXd out(x.rows(), x.cols());
  for (size_t k = 0; k < blocks.size(); ++k) {
    const Index a = offsets[k];
    const Index n = offsets[k + 1] - a;
    if (n > 0) out.middleRows(a, n) = blocks[k].sqrt_apply(MatrixXd(x.middleRows(a, n)));
  }
  return out;
}

MatrixXd StackedInput::sqrt_solve(const MatrixXd& x) const {
  MatrixXd out(x.rows(), x.cols());
  for (size_t k = 0; k < blocks.size(); ++k) {
    const Index a = offsets[k];
    const Index n = offsets[k + 1] - a;
    if (n > 0) out.middleRows(a, n) = blocks[k].sqrt_solve(MatrixXd(x.middleRows(a, n)));
  }
  return out;
}

StackedInput stack_inputs(const CoeffMatrix& own, const CoeffMatrix& partner, const CoeffMatrix& params,
                          const Gramian& g_own, const Gramian& g_partner, const Gramian& g_params) {
  if (own.cols() != partner.cols() || own.cols() != params.cols())
    throw InvalidArgument("stack_inputs: coefficient matrices differ in column count");
  if (g_own.size() != own.rows() || g_partner.size() != partner.rows() || g_params.size() != params.rows())
    throw InvalidArgument("stack_inputs: Gramian sizes differ from block sizes");
  StackedInput y;
  y.coeff.resize(own.rows() + partner.rows() + params.rows(), own.cols());
  y.coeff << own, partner, params;
  y.blocks = {g_own, g_partner, g_params};
  y.offsets = {0, own.rows(), own.rows() + partner.rows(), y.coeff.rows()};
  return y;
}

VectorXd KlReduction::at(const VectorXd& theta) const { return mean + map * theta; }

VectorXd KlReduction::block(const VectorXd& z, int k) const {
  return z.segment(offsets[static_cast<size_t>(k)], offsets[static_cast<size_t>(k) + 1] - offsets[static_cast<size_t>(k)]);
}

int truncation_rank(const VectorXd& sigma, double eps) {
  const Index n = sigma.size();
  if (n == 0) return 1;
  VectorXd tail(n + 1);
  tail(n) = 0.0;
  for (Index j = n - 1; j >= 0; --j) tail(j) = tail(j + 1) + sigma(j) * sigma(j);
  const double total = tail(0);
  if (total <= 0.0) return 1;
  for (Index k = 1; k <= n; ++k)
    if (std::sqrt(tail(k) / total) <= eps) return static_cast<int>(k);
  return static_cast<int>(n);
}

KlReduction dimension_reduce(const StackedInput& y, double eps_dim, double svd_rank_tol) {
  if (!(eps_dim > 0.0 && eps_dim < 1.0)) throw InvalidArgument("dimension_reduce: eps_dim must lie in (0,1)");
  const Index r = y.rows();
  const Index cols = y.coeff.cols();
  KlReduction kl;
  kl.offsets = y.offsets;
  kl.mean = y.coeff.col(0);

  auto degenerate = [&]() {
    kl.d = 1;
    kl.degenerate = true;
    kl.map = MatrixXd::Zero(r, 1);
    kl.theta_rows = MatrixXd::Zero(1, cols);
    return kl;
  };
  if (cols <= 1) {
    kl.singular_values = VectorXd();
    return degenerate();
  }

  const MatrixXd fluct = y.sqrt_apply(MatrixXd(y.coeff.rightCols(cols - 1)));
  Eigen::BDCSVD<MatrixXd> svd(fluct, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("dimension_reduce: SVD failed");
  kl.singular_values = svd.singularValues();
  const VectorXd& sigma = kl.singular_values;
  if (sigma.size() == 0 || !(sigma(0) > 0.0)) return degenerate();

  Index numeric_rank = 0;
  while (numeric_rank < sigma.size() && sigma(numeric_rank) > svd_rank_tol * sigma(0)) ++numeric_rank;
  const Index cap = std::min<Index>({cols - 1, r, numeric_rank});
  const int d = static_cast<int>(std::min<Index>(truncation_rank(sigma, eps_dim), cap));

  kl.d = d;
  kl.map = y.sqrt_solve(svd.matrixU().leftCols(d) * sigma.head(d).asDiagonal());
  kl.theta_rows = MatrixXd::Zero(d, cols);
  kl.theta_rows.rightCols(cols - 1) = svd.matrixV().leftCols(d).transpose();
  return kl;
}

MatrixXd theta_at_nodes(const KlReduction& kl, const MatrixXd& psi) {
  if (psi.rows() != kl.theta_rows.cols()) throw InvalidArgument("theta_at_nodes: basis size mismatch");
  return kl.theta_rows * psi;
}

MatrixXd monomials_at(const MatrixXd& theta, const std::vector<MultiIndex>& indices) {
  const Index d = theta.rows();
  const Index q = theta.cols();
  int deg = 0;
  for (const auto& a : indices)
    for (int e : a) deg = std::max(deg, e);
  MatrixXd out(static_cast<Index>(indices.size()), q);
  std::vector<double> powers(static_cast<size_t>((deg + 1) * d));
  for (Index j = 0; j < q; ++j) {
    for (Index k = 0; k < d; ++k) {
      double* pk = &powers[static_cast<size_t>(k * (deg + 1))];
      pk[0] = 1.0;
      for (int e = 1; e <= deg; ++e) pk[e] = pk[e - 1] * theta(k, j);
    }
    for (size_t a = 0; a < indices.size(); ++a) {
      double v = 1.0;
      for (Index k = 0; k < d; ++k) v *= powers[static_cast<size_t>(k * (deg + 1) + indices[a][static_cast<size_t>(k)])];
      out(static_cast<Index>(a), j) = v;
    }
  }
  return out;
}

MatrixXd build_hankel(const MatrixXd& theta, const VectorXd& weights, int d, int order) {
  if (theta.rows() != d || theta.cols() != weights.size()) throw InvalidArgument("build_hankel: shape mismatch");
  const MatrixXd m = monomials_at(theta, total_degree_indices(d, order));
  MatrixXd h = (m * weights.asDiagonal()) * m.transpose();
  return 0.5 * (h + h.transpose());
}

VectorXd ReducedBasis::eval(const VectorXd& theta) const {
  if (node_space) throw InvalidArgument("ReducedBasis::eval: node-space basis has no values off the nodes");
  return transform * monomials_at(theta, monomials).col(0);
}

ReducedBasis reduced_basis(const MatrixXd& hankel, const MatrixXd& theta, int d, int order, double rank_tol) {
  ReducedBasis rb;
  rb.d = d;
  rb.order = order;
  rb.monomials = total_degree_indices(d, order);
  const Index n = static_cast<Index>(rb.monomials.size());
  if (hankel.rows() != n || hankel.cols() != n) throw InvalidArgument("reduced_basis: Hankel size mismatch");

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (hankel + hankel.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("reduced_basis: eigen-decomposition failed");
  const VectorXd& lam = eig.eigenvalues();
  std::vector<Index> order_idx(static_cast<size_t>(n));
  std::iota(order_idx.begin(), order_idx.end(), 0);
  std::stable_sort(order_idx.begin(), order_idx.end(),
                   [&](Index a, Index b) { return std::abs(lam(a)) > std::abs(lam(b)); });
  const double top = n > 0 ? std::abs(lam(order_idx[0])) : 0.0;
  if (!(top > 0.0)) throw NumericalError("reduced_basis: all eigenvalues vanish");
  Index keep = 0;
  while (keep < n && std::abs(lam(order_idx[static_cast<size_t>(keep)])) > rank_tol * top) ++keep;

  rb.transform.resize(keep, n);
  rb.sign.resize(keep);
  for (Index k = 0; k < keep; ++k) {
    const Index src = order_idx[static_cast<size_t>(k)];
    VectorXd v = eig.eigenvectors().col(src);
    Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0.0) v = -v;
    rb.transform.row(k) = v.transpose() / std::sqrt(std::abs(lam(src)));
    rb.sign(k) = lam(src) < 0.0 ? -1.0 : 1.0;
  }
  rb.node_evals = rb.transform * monomials_at(theta, rb.monomials);
  return rb;
}

bool spans_nodes(const MatrixXd& theta, int order, double rank_tol) {
  const Index d = theta.rows();
  const Index q = theta.cols();
  for (int k = 0; k <= order; ++k) {
    const auto idx = total_degree_indices(static_cast<int>(d), k);
    if (static_cast<Index>(idx.size()) < q) continue;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(monomials_at(theta, idx).transpose());
    const MatrixXd& r = qr.matrixQR();
    const double r00 = std::abs(r(0, 0));
    if (!(r00 > 0.0)) return false;
    return std::abs(r(q - 1, q - 1)) > rank_tol * r00;
  }
  return false;
}

ReducedBasis node_space_basis(const VectorXd& weights, int d, int order) {
  ReducedBasis rb;
  rb.d = d;
  rb.order = order;
  rb.node_space = true;
  const Index q = weights.size();
  rb.sign.resize(q);
  rb.node_evals = MatrixXd::Zero(q, q);
  for (Index j = 0; j < q; ++j) {
    if (weights(j) == 0.0) throw InvalidArgument("node_space_basis: zero quadrature weight");
    rb.sign(j) = weights(j) < 0.0 ? -1.0 : 1.0;
    rb.node_evals(j, j) = 1.0 / std::sqrt(std::abs(weights(j)));
  }
  return rb;
}

SparseQuadrature full_quadrature(const VectorXd& weights) {
  SparseQuadrature sq;
  sq.rank = weights.size();
  sq.compressed = false;
  sq.weights = weights;
  sq.active.resize(static_cast<size_t>(weights.size()));
  std::iota(sq.active.begin(), sq.active.end(), 0);
  return sq;
}

SparseQuadrature optimal_quadrature(const MatrixXd& theta, const VectorXd& weights, int d, int degree,
                                    double qr_tol) {
  if (theta.rows() != d || theta.cols() != weights.size()) throw InvalidArgument("optimal_quadrature: shape mismatch");
  const Index q = theta.cols();
  const MatrixXd vt = monomials_at(theta, total_degree_indices(d, degree)).transpose();  // Q x K

  Eigen::ColPivHouseholderQR<MatrixXd> qr(vt);
  const MatrixXd& r_full = qr.matrixQR();
  const Index kmax = std::min(vt.rows(), vt.cols());
  const double r00 = kmax > 0 ? std::abs(r_full(0, 0)) : 0.0;
  if (!(r00 > 0.0)) throw NumericalError("optimal_quadrature: empty moment matrix");
  Index rank = 0;
  while (rank < kmax && std::abs(r_full(rank, rank)) > qr_tol * r00) ++rank;

  const MatrixXd q_r = qr.householderQ() * MatrixXd::Identity(q, rank);  // Q x r
  const MatrixXd b = q_r.transpose();                                      // r x Q
  Eigen::ColPivHouseholderQR<MatrixXd> qr2(b);
  const MatrixXd r2 = qr2.matrixQR().topLeftCorner(rank, rank).triangularView<Eigen::Upper>();
  for (Index k = 0; k < rank; ++k)
    if (!(std::abs(r2(k, k)) > 1e-14 * std::abs(r2(0, 0))))
      throw NumericalError("optimal_quadrature: singular node-selection factor; loosen the QR tolerance");
  const MatrixXd qt = qr2.householderQ() * MatrixXd::Identity(rank, rank);
  const VectorXd rhs = qt.transpose() * (b * weights);
  const VectorXd w_active = r2.triangularView<Eigen::Upper>().solve(rhs);

  std::vector<std::pair<Index, double>> picked;
  const auto& perm = qr2.colsPermutation().indices();
  for (Index k = 0; k < rank; ++k) picked.emplace_back(perm(k), w_active(k));
  std::sort(picked.begin(), picked.end());

  SparseQuadrature sq;
  sq.rank = rank;
  sq.compressed = rank < q;
  sq.active.reserve(picked.size());
  sq.weights.resize(static_cast<Index>(picked.size()));
  for (size_t k = 0; k < picked.size(); ++k) {
    sq.active.push_back(picked[k].first);
    sq.weights(static_cast<Index>(k)) = picked[k].second;
  }
  return sq;
}

MatrixXd polynomial_kernel(const MatrixXd& theta, int degree) {
  if (degree < 0) throw InvalidArgument("polynomial_kernel: negative degree");
  const double top = theta.size() > 0 ? theta.colwise().squaredNorm().maxCoeff() : 0.0;
  const double g = top > 0.0 ? 1.0 / top : 1.0;
  MatrixXd k = MatrixXd::Ones(theta.cols(), theta.cols());
  k.noalias() += g * (theta.transpose() * theta);
  return k.array().pow(static_cast<double>(degree)).matrix();
}

KernelFactor kernel_factor(const MatrixXd& kernel, double rel_tol) {
  const Index q = kernel.rows();
  if (kernel.cols() != q || q == 0) throw InvalidArgument("kernel_factor: square non-empty kernel required");
  if (!kernel.allFinite()) throw NumericalError("kernel_factor: non-finite kernel");
  // Greedy pivoted Cholesky on the residual diagonal. Eigen's LDLT picks
  // pivots from the unreduced diagonal and does not reveal the rank.
  VectorXd res = kernel.diagonal();
  const double top = res.maxCoeff();
  if (!(top > 0.0)) throw NumericalError("kernel_factor: kernel vanishes");
  MatrixXd f(q, q);
  KernelFactor kf;
  for (Index k = 0; k < q; ++k) {
    Index piv = 0;
    const double d = res.maxCoeff(&piv);
    if (!(d > rel_tol * top)) break;
    VectorXd col = kernel.col(piv);
    if (k > 0) col.noalias() -= f.leftCols(k) * f.row(piv).head(k).transpose();
    col /= std::sqrt(d);
    for (Index done : kf.pivots) col(done) = 0.0;
    f.col(k) = col;
    res -= col.cwiseAbs2();
    res(piv) = 0.0;
    kf.pivots.push_back(piv);
  }
  kf.factor = f.leftCols(static_cast<Index>(kf.pivots.size()));
  return kf;
}

bool use_kernel_route(int d, int degree, Index nodes) {
  return binomial(degree + d, d) >= static_cast<std::uint64_t>(nodes);
}

ReducedBasis kernel_basis(const MatrixXd& theta, const VectorXd& weights, int order, double kernel_tol,
                          double rank_tol) {
  const Index q = theta.cols();
  if (weights.size() != q) throw InvalidArgument("kernel_basis: shape mismatch");
  const KernelFactor kf = kernel_factor(polynomial_kernel(theta, order), kernel_tol);
  if (kf.rank() == q && (weights.array() != 0.0).all())
    return node_space_basis(weights, static_cast<int>(theta.rows()), order);
  const MatrixXd gram = kf.factor.transpose() * weights.asDiagonal() * kf.factor;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("kernel_basis: eigen-decomposition failed");
  const VectorXd& lam = eig.eigenvalues();
  std::vector<Index> idx(static_cast<size_t>(lam.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return std::abs(lam(a)) > std::abs(lam(b)); });
  const double top = std::abs(lam(idx[0]));
  if (!(top > 0.0)) throw NumericalError("kernel_basis: all eigenvalues vanish");
  Index keep = 0;
  while (keep < lam.size() && std::abs(lam(idx[static_cast<size_t>(keep)])) > rank_tol * top) ++keep;

  ReducedBasis rb;
  rb.d = static_cast<int>(theta.rows());
  rb.order = order;
  rb.node_space = true;
  rb.sign.resize(keep);
  MatrixXd coef(keep, kf.rank());
  for (Index k = 0; k < keep; ++k) {
    const Index src = idx[static_cast<size_t>(k)];
    VectorXd v = eig.eigenvectors().col(src);
    Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0.0) v = -v;
    coef.row(k) = v.transpose() / std::sqrt(std::abs(lam(src)));
    rb.sign(k) = lam(src) < 0.0 ? -1.0 : 1.0;
  }
  rb.node_evals = coef * kf.factor.transpose();
  return rb;
}

SparseQuadrature kernel_quadrature(const MatrixXd& theta, const VectorXd& weights, int degree, double kernel_tol) {
  const Index q = theta.cols();
  if (weights.size() != q) throw InvalidArgument("kernel_quadrature: shape mismatch");
  const KernelFactor kf = kernel_factor(polynomial_kernel(theta, degree), kernel_tol);
  const Index r = kf.rank();
  if (r == q) return full_quadrature(weights);
  // Rows of F at the pivots form a lower-triangular block.
  MatrixXd fa(r, r);
  for (Index k = 0; k < r; ++k) fa.row(k) = kf.factor.row(kf.pivots[static_cast<size_t>(k)]);
  const VectorXd w_active = fa.transpose().triangularView<Eigen::Upper>().solve(kf.factor.transpose() * weights);

  std::vector<std::pair<Index, double>> picked;
  for (Index k = 0; k < r; ++k) picked.emplace_back(kf.pivots[static_cast<size_t>(k)], w_active(k));
  std::sort(picked.begin(), picked.end());
  SparseQuadrature sq;
  sq.rank = r;
  sq.compressed = true;
  sq.weights.resize(r);
  for (size_t k = 0; k < picked.size(); ++k) {
    sq.active.push_back(picked[k].first);
    sq.weights(static_cast<Index>(k)) = picked[k].second;
  }
  return sq;
}

ReducedBasis reduced_basis_auto(const MatrixXd& theta, const VectorXd& weights, int d, int order,
                                const ReductionTolerances& tols) {
  if (use_kernel_route(d, order, theta.cols()))
    return kernel_basis(theta, weights, order, tols.kernel_rank, tols.hankel_rank);
  return reduced_basis(build_hankel(theta, weights, d, order), theta, d, order, tols.hankel_rank);
}

SparseQuadrature sparse_quadrature_auto(const MatrixXd& theta, const VectorXd& weights, int d, int degree,
                                        const ReductionTolerances& tols) {
  if (use_kernel_route(d, degree, theta.cols())) return kernel_quadrature(theta, weights, degree, tols.kernel_rank);
  return optimal_quadrature(theta, weights, d, degree, tols.qr_rank);
}

double moment_mismatch(const MatrixXd& theta, const VectorXd& weights, const SparseQuadrature& sq, int d,
                       int degree) {
  const MatrixXd m = monomials_at(theta, total_degree_indices(d, degree));
  const VectorXd full = m * weights;
  const VectorXd scale = m.cwiseAbs() * weights.cwiseAbs();
  VectorXd sparse = VectorXd::Zero(m.rows());
  for (size_t k = 0; k < sq.active.size(); ++k) sparse += sq.weights(static_cast<Index>(k)) * m.col(sq.active[k]);
  double worst = 0.0;
  for (Index i = 0; i < m.rows(); ++i) worst = std::max(worst, std::abs(sparse(i) - full(i)) / std::max(1.0, scale(i)));
  return worst;
}

CoeffMatrix reduced_project(const MatrixXd& samples, const SparseQuadrature& sq, const ReducedBasis& rb) {
  const Index a = static_cast<Index>(sq.active.size());
  if (samples.cols() != a) throw InvalidArgument("reduced_project: one sample per active node required");
  MatrixXd phi(rb.size(), a);
  for (Index k = 0; k < a; ++k) phi.col(k) = rb.node_evals.col(sq.active[static_cast<size_t>(k)]);
  return ((samples * sq.weights.asDiagonal()) * phi.transpose()) * rb.sign.asDiagonal();
}

MatrixXd lift_operator(const ReducedBasis& rb, const QuadratureRule& rule, const MatrixXd& psi) {
  if (rb.node_evals.cols() != rule.size() || psi.cols() != rule.size())
    throw InvalidArgument("lift_to_global: node count mismatch");
  return (rb.node_evals * rule.weight_vector().asDiagonal()) * psi.transpose();
}

CoeffMatrix lift_to_global(const CoeffMatrix& reduced, const ReducedBasis& rb, const QuadratureRule& rule,
                           const MatrixXd& psi) {
  if (reduced.cols() != rb.size()) throw InvalidArgument("lift_to_global: reduced basis size mismatch");
  return reduced * lift_operator(rb, rule, psi);
}

int select_order(int current, const CoeffMatrix& lower, const CoeffMatrix& higher, const Gramian& g, double eps_ord,
                 int cap) {
  const double diff = weighted_frobenius(higher - lower, g);
  const double ref = weighted_frobenius(higher, g);
  if (diff > eps_ord * ref && current < cap) return current + 1;
  return std::min(current, cap);
}

}  // namespace cnisp
