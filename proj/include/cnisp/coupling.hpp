#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cnisp/errors.hpp"
#include "cnisp/gpc.hpp"

namespace cnisp {

// One solver component m_i of a two-module coupled system.
struct ModuleOperator {
  using SolveFn = std::function<VectorXd(const VectorXd& own, const VectorXd& partner, const VectorXd& xi)>;
  using InterfaceFn = std::function<VectorXd(const VectorXd& state)>;

  std::string name;
  Index state_dim = 0;
  int param_dim = 0;
  Gramian gramian;
  SolveFn solve;
  // g_i(u_i); when empty the whole state is handed to the partner.
  InterfaceFn interface;
  Index coupling_dim = 0;
  Gramian coupling_gramian;

  VectorXd couple(const VectorXd& state) const;
  // Must be safe for concurrent calls.
  VectorXd relaxed_solve(const VectorXd& own, const VectorXd& partner, const VectorXd& xi, double omega) const;
};

struct BgsConfig {
  double relaxation = 0.9;
  double tol = 1e-6;
  int max_iters = 200;
};

struct BgsResult {
  VectorXd u1;
  VectorXd u2;
  int iterations = 0;
  // Relative G-weighted update norms of (u1, u2) per sweep.
  std::vector<std::pair<double, double>> history;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, int iteration) : NumericalError(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, BgsResult last) : NumericalError(what), last_(std::move(last)) {}
  const BgsResult& last_iterate() const { return last_; }

 private:
  BgsResult last_;
};

// ||new - old||_G / ||new||_G, with 0/0 read as 0.
double relative_update(const VectorXd& next, const VectorXd& prev, const Gramian& g);

void check_module_pair(const ModuleOperator& m1, const ModuleOperator& m2);

// Relaxed block Gauss-Seidel: m1 sees the partner data of sweep l, m2 the
// fresh m1 state of sweep l+1. Converged when both relative updates <= tol.
BgsResult bgs_solve(const ModuleOperator& m1, const ModuleOperator& m2, const VectorXd& xi1, const VectorXd& xi2,
                    const VectorXd& u1_init, const VectorXd& u2_init, const BgsConfig& cfg);

// Same, starting from zero states.
BgsResult bgs_solve(const ModuleOperator& m1, const ModuleOperator& m2, const VectorXd& xi1, const VectorXd& xi2,
                    const BgsConfig& cfg);

}  // namespace cnisp
