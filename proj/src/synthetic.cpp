#include "cnisp/synthetic.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <random>

namespace cnisp {

namespace {

MatrixXd random_matrix(std::mt19937_64& rng, Index r, Index c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = u(rng);
  return m;
}

MatrixXd unit_norm(const MatrixXd& m) {
  const double top = Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
  if (!(top > 0.0)) throw NumericalError("SyntheticProblem: zero coupling matrix");
  return m / top;
}

}  // namespace

SyntheticProblem::SyntheticProblem(const SyntheticParams& params) : params_(params) {
  if (params.n1 < 1 || params.n2 < 1 || params.s1 < 0 || params.s2 < 0)
    throw InvalidArgument("SyntheticProblem: sizes must be positive");
  if (!(params.coupling >= 0.0 && params.coupling < 1.0))
    throw InvalidArgument("SyntheticProblem: coupling must lie in [0,1)");
  std::mt19937_64 rng(params.seed);
  a1_ = unit_norm(random_matrix(rng, params.n1, params.n2));
  a2_ = unit_norm(random_matrix(rng, params.n2, params.n1));
  b1_ = random_matrix(rng, params.n1, params.s1);
  b2_ = random_matrix(rng, params.n2, params.s2);
  c1_ = random_matrix(rng, params.n1, 1).col(0);
  c2_ = random_matrix(rng, params.n2, 1).col(0);
}

VectorXd SyntheticProblem::solve_first(const VectorXd& u2, const VectorXd& xi1) const {
  return params_.coupling * (a1_ * u2) + b1_ * xi1 + c1_;
}

VectorXd SyntheticProblem::solve_second(const VectorXd& u1, const VectorXd& xi2) const {
  return params_.coupling * (a2_ * u1) + b2_ * xi2 + c2_;
}

std::pair<VectorXd, VectorXd> SyntheticProblem::exact(const VectorXd& xi1, const VectorXd& xi2) const {
  const double k = params_.coupling;
  const VectorXd f1 = b1_ * xi1 + c1_;
  const VectorXd f2 = b2_ * xi2 + c2_;
  const MatrixXd lhs = MatrixXd::Identity(params_.n1, params_.n1) - k * k * (a1_ * a2_);
  VectorXd u1 = lhs.partialPivLu().solve(f1 + k * (a1_ * f2));
  VectorXd u2 = solve_second(u1, xi2);
  return {std::move(u1), std::move(u2)};
}

std::pair<ModuleOperator, ModuleOperator> synthetic_modules(std::shared_ptr<const SyntheticProblem> prob) {
  const SyntheticParams& p = prob->params();
  ModuleOperator m1;
  m1.name = "synthetic-1";
  m1.state_dim = p.n1;
  m1.param_dim = p.s1;
  m1.gramian = Gramian::identity(p.n1);
  m1.coupling_dim = p.n1;
  m1.coupling_gramian = Gramian::identity(p.n1);
  m1.solve = [prob](const VectorXd&, const VectorXd& partner, const VectorXd& xi) {
    return prob->solve_first(partner, xi);
  };
  ModuleOperator m2;
  m2.name = "synthetic-2";
  m2.state_dim = p.n2;
  m2.param_dim = p.s2;
  m2.gramian = Gramian::identity(p.n2);
  m2.coupling_dim = p.n2;
  m2.coupling_gramian = Gramian::identity(p.n2);
  m2.solve = [prob](const VectorXd&, const VectorXd& partner, const VectorXd& xi) {
    return prob->solve_second(partner, xi);
  };
  return {std::move(m1), std::move(m2)};
}

}  // namespace cnisp
