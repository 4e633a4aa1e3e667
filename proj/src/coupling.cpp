#include "cnisp/coupling.hpp"

#include <cmath>
#include <limits>

namespace cnisp {

VectorXd ModuleOperator::couple(const VectorXd& state) const {
  if (!interface) return state;
  return interface(state);
}

VectorXd ModuleOperator::relaxed_solve(const VectorXd& own, const VectorXd& partner, const VectorXd& xi,
                                       double omega) const {
  VectorXd next = solve(own, partner, xi);
  if (next.size() != state_dim) throw InvalidArgument("module " + name + ": solve returned wrong state size");
  if (omega == 1.0) return next;
  return omega * next + (1.0 - omega) * own;
}

double relative_update(const VectorXd& next, const VectorXd& prev, const Gramian& g) {
  const double diff = g.norm(next - prev);
  const double ref = g.norm(next);
  if (ref > 0.0) return diff / ref;
  return diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

void check_module_pair(const ModuleOperator& m1, const ModuleOperator& m2) {
  if (!m1.solve || !m2.solve) throw InvalidArgument("module pair: missing solve function");
  if (m1.gramian.size() != m1.state_dim || m2.gramian.size() != m2.state_dim)
    throw InvalidArgument("module pair: Gramian size differs from state size");
  if (m1.coupling_gramian.size() != m1.coupling_dim || m2.coupling_gramian.size() != m2.coupling_dim)
    throw InvalidArgument("module pair: coupling Gramian size differs from coupling size");
}

BgsResult bgs_solve(const ModuleOperator& m1, const ModuleOperator& m2, const VectorXd& xi1, const VectorXd& xi2,
                    const VectorXd& u1_init, const VectorXd& u2_init, const BgsConfig& cfg) {
  check_module_pair(m1, m2);
  if (xi1.size() != m1.param_dim || xi2.size() != m2.param_dim)
    throw InvalidArgument("bgs_solve: parameter dimension mismatch");
  if (u1_init.size() != m1.state_dim || u2_init.size() != m2.state_dim)
    throw InvalidArgument("bgs_solve: initial state dimension mismatch");
  if (!(cfg.relaxation > 0.0 && cfg.relaxation <= 1.0)) throw InvalidArgument("bgs_solve: relaxation must lie in (0,1]");
  if (cfg.max_iters < 1) throw InvalidArgument("bgs_solve: max_iters must be positive");

  BgsResult res;
  res.u1 = u1_init;
  res.u2 = u2_init;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    VectorXd u1 = m1.relaxed_solve(res.u1, m2.couple(res.u2), xi1, cfg.relaxation);
    VectorXd u2 = m2.relaxed_solve(res.u2, m1.couple(u1), xi2, cfg.relaxation);
    if (!u1.allFinite() || !u2.allFinite())
      throw DivergenceError("bgs_solve: non-finite state at iteration " + std::to_string(it), it);
    const double r1 = relative_update(u1, res.u1, m1.gramian);
    const double r2 = relative_update(u2, res.u2, m2.gramian);
    res.u1 = std::move(u1);
    res.u2 = std::move(u2);
    res.iterations = it;
    res.history.emplace_back(r1, r2);
    if (r1 <= cfg.tol && r2 <= cfg.tol) return res;
  }
  throw NonConvergenceError("bgs_solve: no convergence within " + std::to_string(cfg.max_iters) + " iterations",
                            std::move(res));
}

BgsResult bgs_solve(const ModuleOperator& m1, const ModuleOperator& m2, const VectorXd& xi1, const VectorXd& xi2,
                    const BgsConfig& cfg) {
  return bgs_solve(m1, m2, xi1, xi2, VectorXd::Zero(m1.state_dim), VectorXd::Zero(m2.state_dim), cfg);
}

}  // namespace cnisp
