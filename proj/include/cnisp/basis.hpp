#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cnisp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

using MultiIndex = std::vector<int>;

// Three-term recurrence for monic orthogonal polynomials:
//   pi_{k+1}(x) = (x - alpha_k) pi_k(x) - beta_k pi_{k-1}(x).
// beta_0 is the total mass of the density.
struct Recurrence {
  std::vector<double> alpha;
  std::vector<double> beta;
};

// Recurrence for the uniform probability density on [-1,1] with n terms.
Recurrence legendre_recurrence(int n);

struct UnivariateRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss rule with n nodes from the Jacobi matrix of the recurrence.
UnivariateRule golub_welsch(const Recurrence& rec, int n);

// Gauss-Legendre rule with n nodes, normalized to unit mass. Cached.
const UnivariateRule& gauss_legendre(int n);

// Orthonormal Legendre polynomials phi_0..phi_p at x (uniform density).
void legendre_orthonormal(double x, int p, double* out);

std::uint64_t binomial(int n, int k);

// All multi-indices of total degree <= p in s variables, sorted by total
// degree and, within a degree, by descending lexicographic order.
std::vector<MultiIndex> total_degree_indices(int s, int p);

class TotalDegreeBasis {
 public:
  TotalDegreeBasis(int s, int p);

  int dim() const { return s_; }
  int order() const { return p_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  int degree(Index j) const;

  // psi(xi); throws DomainError for points outside [-1,1]^s unless
  // clamp checking is switched off.
  VectorXd eval(const VectorXd& xi, bool check_domain = true) const;

  // Basis values at every node: column j holds psi(node j).
  MatrixXd eval_at(const std::vector<VectorXd>& nodes) const;

 private:
  int s_;
  int p_;
  std::vector<MultiIndex> indices_;
};

enum class RuleKind { Tensor, Smolyak };

struct QuadratureRule {
  int dim = 0;
  int level = 0;
  RuleKind kind = RuleKind::Tensor;
  std::vector<VectorXd> nodes;
  std::vector<double> weights;

  Index size() const { return static_cast<Index>(nodes.size()); }
  VectorXd weight_vector() const;
};

// Default cap on the number of nodes of a generated rule.
inline constexpr std::int64_t kDefaultNodeCap = 5'000'000;

QuadratureRule tensor_quadrature(int s, int q, std::int64_t cap = kDefaultNodeCap);
QuadratureRule smolyak_quadrature(int s, int q, std::int64_t cap = kDefaultNodeCap);

// Exact integral of prod_k xi_k^alpha_k under the uniform density on [-1,1]^s.
double uniform_moment(const MultiIndex& alpha);

// Largest |rule(monomial) - exact| over all monomials of total degree <= deg.
double max_monomial_error(const QuadratureRule& rule, int deg);

void write_rule_csv(const QuadratureRule& rule, std::ostream& os);

}  // namespace cnisp
