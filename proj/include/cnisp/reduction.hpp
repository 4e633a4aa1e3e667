#pragma once

#include <string>
#include <vector>

#include "cnisp/basis.hpp"
#include "cnisp/gpc.hpp"

namespace cnisp {

// Vertically stacked coefficient matrices [own; partner; params] with the
// block-diagonal Gramian of the stacked state.
struct StackedInput {
  MatrixXd coeff;
  std::vector<Gramian> blocks;
  std::vector<Index> offsets;  // block start rows, plus the total row count

  Index rows() const { return coeff.rows(); }
  // F * X and F^{-1} * X blockwise, F^T F = Gamma.
  MatrixXd sqrt_apply(const MatrixXd& x) const;
  MatrixXd sqrt_solve(const MatrixXd& x) const;
};

StackedInput stack_inputs(const CoeffMatrix& own, const CoeffMatrix& partner, const CoeffMatrix& params,
                          const Gramian& g_own, const Gramian& g_partner, const Gramian& g_params);

struct KlReduction {
  VectorXd mean;               // z-bar
  MatrixXd map;                // Z-tilde, r x d
  MatrixXd theta_rows;         // d x (P+1), column 0 is zero
  VectorXd singular_values;    // all of them, descending
  int d = 0;
  bool degenerate = false;
  std::vector<Index> offsets;  // copied from the stack

  VectorXd at(const VectorXd& theta) const;
  // Sub-block k (0 own, 1 partner, 2 params) of a stacked vector.
  VectorXd block(const VectorXd& z, int k) const;
};

struct ReductionTolerances {
  double svd_rank = 1e-12;
  double hankel_rank = 1e-12;
  double qr_rank = 1e-10;
  // Relative pivot cutoff of the node-space kernel factorization.
  double kernel_rank = 1e-12;
};

// Smallest d >= 1 whose tail-energy ratio is <= eps.
int truncation_rank(const VectorXd& sigma, double eps);

KlReduction dimension_reduce(const StackedInput& y, double eps_dim, double svd_rank_tol = 1e-12);

// Column j holds theta at node j: Theta-hat * psi(node j).
MatrixXd theta_at_nodes(const KlReduction& kl, const MatrixXd& psi);

// Monomials theta^alpha for the total-degree index set of (d, degree), one
// column per point.
MatrixXd monomials_at(const MatrixXd& theta, const std::vector<MultiIndex>& indices);

MatrixXd build_hankel(const MatrixXd& theta, const VectorXd& weights, int d, int order);

struct ReducedBasis {
  int d = 0;
  int order = 0;
  std::vector<MultiIndex> monomials;
  MatrixXd transform;   // K x (N+1): Sigma^{-1/2} V^T
  VectorXd sign;        // K entries of +-1
  MatrixXd node_evals;  // K x Q
  // Basis stored only through its node values (see node_space_basis).
  bool node_space = false;

  Index size() const { return node_evals.rows(); }
  VectorXd eval(const VectorXd& theta) const;
};

ReducedBasis reduced_basis(const MatrixXd& hankel, const MatrixXd& theta, int d, int order,
                           double rank_tol = 1e-12);

// True when the monomials of total degree <= order, evaluated at the nodes,
// have full rank Q. Checked at the smallest degree with at least Q monomials.
bool spans_nodes(const MatrixXd& theta, int order, double rank_tol = 1e-10);

// When the polynomial space spans every node function, any Phi with
// Phi W Phi^T = S gives the same projection and lift. This one is
// diag(|w|^{-1/2}) with S = sign(w); it has no closed form off the nodes.
ReducedBasis node_space_basis(const VectorXd& weights, int d, int order);

struct SparseQuadrature {
  std::vector<Index> active;
  VectorXd weights;
  Index rank = 0;
  bool compressed = true;  // false when every node stayed active
};

SparseQuadrature optimal_quadrature(const MatrixXd& theta, const VectorXd& weights, int d, int degree,
                                    double qr_tol = 1e-10);

// Every node active with its original weight: the result of
// optimal_quadrature when the moments have full rank Q.
SparseQuadrature full_quadrature(const VectorXd& weights);

// Node-space route for polynomial spaces with at least as many monomials as
// nodes. The kernel (1 + g theta_i . theta_j)^n, g = 1 / max |theta_j|^2, is a
// Gram matrix of the degree <= n monomials with positive weights, so its
// range is the polynomial space restricted to the nodes.
MatrixXd polynomial_kernel(const MatrixXd& theta, int degree);

// K ~ F F^T from a greedily pivoted Cholesky, truncated at the first pivot
// below rel_tol times the largest one. Row pivots[k] of F is zero past
// column k.
struct KernelFactor {
  MatrixXd factor;  // Q x r
  std::vector<Index> pivots;
  Index rank() const { return factor.cols(); }
};
KernelFactor kernel_factor(const MatrixXd& kernel, double rel_tol);

// True when the monomial count of (d, degree) reaches the node count, where
// the kernel route is cheaper than monomial factorizations.
bool use_kernel_route(int d, int degree, Index nodes);

// Basis of the degree <= order polynomials at the nodes with
// Phi W Phi^T = S, through node values only.
ReducedBasis kernel_basis(const MatrixXd& theta, const VectorXd& weights, int order, double kernel_tol,
                          double rank_tol = 1e-12);

// Pivot nodes of the degree-2n kernel factor, reweighted to integrate every
// kernel column like the full rule.
SparseQuadrature kernel_quadrature(const MatrixXd& theta, const VectorXd& weights, int degree, double kernel_tol);

// Dispatch between the monomial and kernel routes.
ReducedBasis reduced_basis_auto(const MatrixXd& theta, const VectorXd& weights, int d, int order,
                                const ReductionTolerances& tols);
SparseQuadrature sparse_quadrature_auto(const MatrixXd& theta, const VectorXd& weights, int d, int degree,
                                        const ReductionTolerances& tols);

// Largest per-row moment mismatch |M (w_sparse - w)| / max(1, |M| |w|).
double moment_mismatch(const MatrixXd& theta, const VectorXd& weights, const SparseQuadrature& sq, int d,
                       int degree);

// U-tilde = sum over active nodes of w_j u_j phi(theta_j)^T S.
CoeffMatrix reduced_project(const MatrixXd& samples, const SparseQuadrature& sq, const ReducedBasis& rb);

// The K x (P+1) map Phi W Psi^T used by lift_to_global.
MatrixXd lift_operator(const ReducedBasis& rb, const QuadratureRule& rule, const MatrixXd& psi);
CoeffMatrix lift_to_global(const CoeffMatrix& reduced, const ReducedBasis& rb, const QuadratureRule& rule,
                           const MatrixXd& psi);

int select_order(int current, const CoeffMatrix& lower, const CoeffMatrix& higher, const Gramian& g, double eps_ord,
                 int cap);

}  // namespace cnisp
