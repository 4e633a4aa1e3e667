#pragma once

#include <array>
#include <memory>
#include <utility>
#include <vector>

#include "cnisp/coupling.hpp"
#include "cnisp/kl.hpp"

namespace cnisp {

struct PoissonParams {
  double abar1 = 0.5;
  double abar2 = 1.0;
  double b1 = 4.0;
  double b2 = -4.0;
  // Coefficients of variation of the two diffusivities.
  double delta1 = 0.5;
  double delta2 = 0.2;
  double l1 = 0.2;
  double l2 = 0.5;
  int m = 11;
  int s1 = 3;
  int s2 = 3;
  // Replace the constant sources by the manufactured-solution forcing.
  bool manufactured = false;
};

// Two unit squares (-1,0)x(0,1) and (0,1)x(0,1) joined along x1 = 0, each
// meshed with m x m nodes and bilinear elements. Stiffness and load are
// affine in the subdomain parameters and are stored term by term.
class PoissonProblem {
 public:
  explicit PoissonProblem(const PoissonParams& params);

  const PoissonParams& params() const { return params_; }
  int m() const { return params_.m; }
  Index nodes() const { return static_cast<Index>(params_.m) * params_.m; }
  double spacing() const { return 1.0 / (params_.m - 1); }
  const KlField& field(int i) const { return fields_[static_cast<size_t>(i)]; }

  // x coordinates of node (ix, iy) of subdomain i (0 or 1).
  std::array<double, 2> node_coord(int i, int ix, int iy) const;
  Index node_index(int ix, int iy) const { return static_cast<Index>(iy) * params_.m + ix; }

  SparseMatrix stiffness(int i, const VectorXd& xi) const;
  VectorXd load(int i, const VectorXd& xi) const;
  const SparseMatrix& mass(int i) const { return mass_[static_cast<size_t>(i)]; }
  // m^2 x m selection of the interface nodes carrying a multiplier.
  const SparseMatrix& interface_matrix(int i) const { return interface_[static_cast<size_t>(i)]; }

  // Saddle solve of subdomain 1: returns [u1'; lambda].
  VectorXd solve_first(const VectorXd& v2, const VectorXd& xi1) const;
  // Subdomain 2 solve A2 u2 = C2 v1 + b2.
  VectorXd solve_second(const VectorXd& v1, const VectorXd& xi2) const;

  // Monolithic solve of the coupled system (for consistency checks).
  std::pair<VectorXd, VectorXd> solve_monolithic(const VectorXd& xi1, const VectorXd& xi2) const;

  // 0.5 (u1'^T M1 u1' + u2'^T M2 u2').
  double energy(const VectorXd& u1_state, const VectorXd& u2_state) const;

  // Manufactured solution (1/pi^2) cos(pi x1 / 2) sin(pi x2).
  static double exact(double x1, double x2);
  // Relative L2 error of the discrete pair against the manufactured solution.
  double manufactured_error(const VectorXd& u1_state, const VectorXd& u2_state) const;

  Gramian gramian(int i) const;

 private:
  void assemble(int i);
  double source(int i, const double* x, const VectorXd& xi) const;
  bool is_dirichlet(int i, int ix, int iy) const;

  PoissonParams params_;
  std::array<KlField, 2> fields_;
  std::array<std::vector<SparseMatrix>, 2> stiff_terms_;  // [mean, term 1..s]
  std::array<std::vector<VectorXd>, 2> load_terms_;
  std::array<SparseMatrix, 2> mass_;
  std::array<SparseMatrix, 2> interface_;
  std::array<std::vector<char>, 2> dirichlet_;
};

// m1 maps (v2, xi1) to [u1'; lambda] with g1 = lambda; m2 maps (v1, xi2) to
// u2' with g2 = C2^T u2'. Gramians are mass matrices, identity on lambda.
std::pair<ModuleOperator, ModuleOperator> poisson_modules(std::shared_ptr<const PoissonProblem> prob);

}  // namespace cnisp
