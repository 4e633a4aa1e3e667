#pragma once

#include <memory>
#include <utility>

#include "cnisp/coupling.hpp"
#include "cnisp/kl.hpp"

namespace cnisp {

struct BoussinesqParams {
  double pr = 0.71;
  double ra_mean = 1000.0;
  double th_mean = 1.0;
  // Absolute standard deviations of Ra and of the hot-wall perturbation h.
  double delta_ra = 200.0;
  double delta_h = 0.5;
  double l_ra = 0.5;
  double l_h = 0.5;
  int m = 16;
  int s1 = 3;
  int s2 = 3;
};

// Cell-centred forcing added to the momentum and energy residuals.
struct BoussinesqForcing {
  VectorXd fu;
  VectorXd fv;
  VectorXd ft;
  bool empty() const { return fu.size() == 0; }
};

// Unit-square cavity on an m x m collocated finite-volume grid with central
// differences. State u1 = [u; v; p] (3 m^2), u2 = T (m^2). Velocity has
// no-slip walls, T is 0 on the right wall and T_h on the left wall with
// adiabatic top and bottom; pressure closes through a pressure Poisson
// equation pinned at cell 0.
class BoussinesqProblem {
 public:
  explicit BoussinesqProblem(const BoussinesqParams& params);

  const BoussinesqParams& params() const { return params_; }
  int m() const { return params_.m; }
  Index cells() const { return static_cast<Index>(params_.m) * params_.m; }
  double spacing() const { return 1.0 / params_.m; }
  Index cell(int i, int j) const { return static_cast<Index>(j) * params_.m + i; }
  double center(int i) const { return (i + 0.5) * spacing(); }
  const KlField& ra_field() const { return ra_; }
  const KlField& h_field() const { return h_; }

  // Ra at the cell centres.
  VectorXd rayleigh(const VectorXd& xi1) const;
  // T_h(y) = T_h_mean + h(y, xi2) sin^2(pi y), and its first two y-derivatives.
  double hot_wall(double y, const VectorXd& xi2, int derivative = 0) const;

  // Momentum and pressure residual of u1 given T.
  VectorXd residual_flow(const VectorXd& u1, const VectorXd& t, const VectorXd& xi1,
                         const BoussinesqForcing& f = {}) const;
  VectorXd residual_energy(const VectorXd& t, const VectorXd& u1, const VectorXd& xi2,
                           const BoussinesqForcing& f = {}) const;
  SparseMatrix jacobian_flow(const VectorXd& u1) const;

  // One Newton update of u1 for fixed T.
  VectorXd newton_flow(const VectorXd& u1, const VectorXd& t, const VectorXd& xi1,
                       const BoussinesqForcing& f = {}) const;
  // T solving the energy equation exactly for fixed velocity (the residual
  // is affine in T, so this is one Newton step from any T).
  VectorXd solve_energy(const VectorXd& u1, const VectorXd& xi2, const BoussinesqForcing& f = {}) const;

  // Kinetic energy 0.5 sum (u^2 + v^2) h^2 and thermal energy sum T h^2.
  std::pair<double, double> qoi(const VectorXd& u1, const VectorXd& t) const;

  // Manufactured fields and the forcing that makes them exact.
  static double exact_u(double x, double y);
  static double exact_v(double x, double y);
  static double exact_p(double x, double y);
  double exact_t(double x, double y, const VectorXd& xi2) const;
  BoussinesqForcing manufactured_forcing(const VectorXd& xi1, const VectorXd& xi2) const;
  // Relative discrete L2 error over (u, v, p, T), pressure compared after
  // removing the mean of each field.
  double manufactured_error(const VectorXd& u1, const VectorXd& t, const VectorXd& xi2) const;

  Gramian gramian(int i) const;

 private:
  void build_operators();

  BoussinesqParams params_;
  KlField ra_;
  KlField h_;
  // Velocity (Dirichlet ghosts), temperature (mixed ghosts) and pressure
  // (Neumann ghosts) operators on cell vectors.
  SparseMatrix dx_u_, dy_u_, lap_u_;
  SparseMatrix dx_t_, dy_t_, lap_t_;
  SparseMatrix gx_p_, gy_p_, lap_p_;
  // Divergence of face-averaged cell vectors over interior faces.
  SparseMatrix div_x_, div_y_;
  // Wall flux Pr (lap u).n per cell in curl-curl form, acting on u and v.
  SparseMatrix wall_u_, wall_v_;
};

// m1 applies one Newton step to [u; v; p] with g1 = [u; v]; m2 solves for T
// with g2 = T. Gramians are h^2 times identity.
std::pair<ModuleOperator, ModuleOperator> boussinesq_modules(std::shared_ptr<const BoussinesqProblem> prob,
                                                              std::shared_ptr<const BoussinesqForcing> forcing = {});

}  // namespace cnisp
