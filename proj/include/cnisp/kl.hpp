#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace cnisp {

// Positive roots of l*zeta + tan(zeta/2) = 0, one per bracket
// ((2j-1) pi, (2j+1) pi), ascending.
std::vector<double> kl_roots(double l, int count);

// One eigenpair of the exponential kernel exp(-|t-t'|/l) on [-1/2, 1/2].
struct KlMode {
  double zeta = 0.0;
  bool odd_function = false;  // sine mode
  double eigenvalue = 0.0;    // 2l / (1 + l^2 zeta^2)
  double amplitude = 0.0;     // sqrt(eigenvalue) times the L2 normalization
};

// The first `count` eigenpairs in decreasing eigenvalue order. Cosine modes
// solve 1 - l*zeta*tan(zeta/2) = 0, sine modes l*zeta + tan(zeta/2) = 0,
// with zeta_j in ((j-1) pi, j pi).
std::vector<KlMode> kl_modes(double l, int count);

// g(t) = amplitude * cos(zeta t) or sin(zeta t), and its first two derivatives.
double kl_mode_value(const KlMode& m, double t);
double kl_mode_deriv(const KlMode& m, double t);
double kl_mode_deriv2(const KlMode& m, double t);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// mean + sqrt(3) * scale * sum_j gamma_j(x) xi_j on a box, where gamma_j is a
// tensor product of one-dimensional modes single-indexed by decreasing
// product eigenvalue (ties: graded-lex ascending on the mode tuple).
class KlField {
 public:
  KlField() = default;
  KlField(double mean, double scale, double corr_len, int terms, std::vector<Interval> box);

  int terms() const { return terms_; }
  int spatial_dim() const { return static_cast<int>(box_.size()); }
  double mean() const { return mean_; }
  double scale() const { return scale_; }
  double corr_len() const { return corr_len_; }
  const std::vector<int>& mode_tuple(int j) const { return tuples_[static_cast<size_t>(j)]; }
  double term_eigenvalue(int j) const;

  double gamma(int j, const double* x) const;
  // d gamma_j / d x_k, and d^2 gamma_j / d x_k^2.
  double gamma_deriv(int j, int k, const double* x) const;
  double gamma_deriv2(int j, int k, const double* x) const;

  double eval(const double* x, const Eigen::VectorXd& xi) const;
  double deriv(int k, const double* x, const Eigen::VectorXd& xi) const;
  double deriv2(int k, const double* x, const Eigen::VectorXd& xi) const;
  // sqrt(3)*scale, the factor multiplying sum gamma_j xi_j.
  double coefficient() const;

 private:
  double local(int k, double x) const;
  double factor(int j, int k, const double* x, int order) const;

  double mean_ = 0.0;
  double scale_ = 0.0;
  double corr_len_ = 1.0;
  int terms_ = 0;
  std::vector<Interval> box_;
  std::vector<std::vector<KlMode>> modes_;  // per spatial coordinate
  std::vector<std::vector<int>> tuples_;    // per term, zero-based mode ids
};

}  // namespace cnisp
