#include "cnisp/nisp.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "cnisp/errors.hpp"
#include "cnisp/parallel.hpp"

namespace cnisp {

const IterationDiagnostics* PropagationReport::last(int module) const {
  for (auto it = diagnostics.rbegin(); it != diagnostics.rend(); ++it)
    if (it->module == module + 1) return &*it;
  return nullptr;
}

CoeffMatrix input_gpc(int offset, int count, const QuadratureRule& rule, const MatrixXd& psi) {
  MatrixXd samples(count, rule.size());
  for (Index j = 0; j < rule.size(); ++j) samples.col(j) = rule.nodes[static_cast<size_t>(j)].segment(offset, count);
  return project(samples, rule, psi);
}

std::pair<CoeffMatrix, CoeffMatrix> mean_initial_coeffs(const ModuleOperator& m1, const ModuleOperator& m2,
                                                         Index basis_size, const NispConfig& cfg) {
  BgsConfig bcfg;
  bcfg.relaxation = cfg.relaxation;
  bcfg.tol = cfg.tol;
  bcfg.max_iters = std::max(cfg.max_iters, 500);
  const BgsResult det = bgs_solve(m1, m2, VectorXd::Zero(m1.param_dim), VectorXd::Zero(m2.param_dim), bcfg);
  CoeffMatrix u1 = CoeffMatrix::Zero(m1.state_dim, basis_size);
  CoeffMatrix u2 = CoeffMatrix::Zero(m2.state_dim, basis_size);
  u1.col(0) = det.u1;
  u2.col(0) = det.u2;
  return {u1, u2};
}

namespace {

using Clock = std::chrono::steady_clock;

void check_setup(const ModuleOperator& m1, const ModuleOperator& m2, const TotalDegreeBasis& basis,
                 const QuadratureRule& rule, const NispConfig& cfg) {
  check_module_pair(m1, m2);
  if (basis.dim() != m1.param_dim + m2.param_dim)
    throw InvalidArgument("nisp: basis dimension must equal s1 + s2");
  if (rule.dim != basis.dim()) throw InvalidArgument("nisp: rule dimension differs from basis dimension");
  if (rule.level < basis.order()) throw InvalidArgument("nisp: quadrature level must be >= basis order");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("nisp: tolerance must be positive");
  if (!(cfg.relaxation > 0.0 && cfg.relaxation <= 1.0)) throw InvalidArgument("nisp: relaxation must lie in (0,1]");
}

std::pair<CoeffMatrix, CoeffMatrix> initial_coeffs(const ModuleOperator& m1, const ModuleOperator& m2,
                                                   const TotalDegreeBasis& basis, const NispConfig& cfg,
                                                   const std::optional<std::pair<CoeffMatrix, CoeffMatrix>>& init) {
  if (init) {
    if (init->first.rows() != m1.state_dim || init->second.rows() != m2.state_dim)
      throw InvalidArgument("nisp: initial coefficient rows differ from state sizes");
    return {resize_columns(init->first, basis.size()), resize_columns(init->second, basis.size())};
  }
  if (cfg.mean_init) return mean_initial_coeffs(m1, m2, basis.size(), cfg);
  return {CoeffMatrix::Zero(m1.state_dim, basis.size()), CoeffMatrix::Zero(m2.state_dim, basis.size())};
}

std::string describe_point(const VectorXd& xi) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (Index k = 0; k < xi.size(); ++k) os << (k ? ", " : "") << xi(k);
  os << ')';
  return os.str();
}

// Evaluates the relaxed module at a list of inputs; column j of the result
// is the new state for input j.
MatrixXd evaluate_module(const ModuleOperator& m, const MatrixXd& own, const MatrixXd& partner, const MatrixXd& xi,
                         double omega) {
  const Index count = own.cols();
  MatrixXd out(m.state_dim, count);
  parallel_for(count, [&](std::ptrdiff_t j) {
    VectorXd next;
    try {
      next = m.relaxed_solve(own.col(j), partner.col(j), xi.col(j), omega);
    } catch (const std::exception& e) {
      throw NumericalError("module " + m.name + " failed at node " + std::to_string(j) + " with xi = " +
                           describe_point(xi.col(j)) + ": " + e.what());
    }
    if (!next.allFinite())
      throw NumericalError("module " + m.name + " produced a non-finite state at node " + std::to_string(j) +
                           " with xi = " + describe_point(xi.col(j)));
    out.col(j) = next;
  });
  return out;
}

// Coupling vectors g(u) at every node, as columns.
MatrixXd coupling_values(const ModuleOperator& m, const MatrixXd& states) {
  if (!m.interface) return states;
  MatrixXd out(m.coupling_dim, states.cols());
  parallel_for(states.cols(), [&](std::ptrdiff_t j) { out.col(j) = m.couple(states.col(j)); });
  return out;
}

double matrix_update(const CoeffMatrix& next, const CoeffMatrix& prev, const Gramian& g) {
  const double diff = weighted_frobenius(next - prev, g);
  const double ref = weighted_frobenius(next, g);
  if (ref > 0.0) return diff / ref;
  return diff > 0.0 ? INFINITY : 0.0;
}

}  // namespace

PropagationReport standard_nisp(const ModuleOperator& m1, const ModuleOperator& m2, const TotalDegreeBasis& basis,
                                const QuadratureRule& rule, const NispConfig& cfg,
                                const std::optional<std::pair<CoeffMatrix, CoeffMatrix>>& init) {
  const auto start = Clock::now();
  check_setup(m1, m2, basis, rule, cfg);
  const MatrixXd psi = basis_at_nodes(basis, rule);
  const MatrixXd xi1 = input_gpc(0, m1.param_dim, rule, psi) * psi;
  const MatrixXd xi2 = input_gpc(m1.param_dim, m2.param_dim, rule, psi) * psi;
  auto [u1, u2] = initial_coeffs(m1, m2, basis, cfg, init);

  PropagationReport rep;
  rep.method = "standard";
  rep.rule_size = rule.size();
  rep.order = basis.order();
  rep.dim = basis.dim();
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const MatrixXd own1 = u1 * psi;
    const MatrixXd v2 = coupling_values(m2, u2 * psi);
    CoeffMatrix u1n = project(evaluate_module(m1, own1, v2, xi1, cfg.relaxation), rule, psi);

    const MatrixXd own2 = u2 * psi;
    const MatrixXd v1 = coupling_values(m1, u1n * psi);
    CoeffMatrix u2n = project(evaluate_module(m2, own2, v1, xi2, cfg.relaxation), rule, psi);

    const double r1 = matrix_update(u1n, u1, m1.gramian);
    const double r2 = matrix_update(u2n, u2, m2.gramian);
    u1 = std::move(u1n);
    u2 = std::move(u2n);
    rep.module_calls[0] += rule.size();
    rep.module_calls[1] += rule.size();
    rep.iterations = it;
    rep.diagnostics.push_back({it, 1, 0, basis.order(), rule.size(), r1});
    rep.diagnostics.push_back({it, 2, 0, basis.order(), rule.size(), r2});
    if (r1 <= cfg.tol && r2 <= cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.u1 = std::move(u1);
  rep.u2 = std::move(u2);
  rep.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return rep;
}

namespace {

struct HalfStep {
  CoeffMatrix next;
  int d = 0;
  int p_tilde_used = 0;
  int p_tilde_next = 0;
  Index active = 0;
};

HalfStep reduced_half_step(const ModuleOperator& mod, const ModuleOperator& partner, const CoeffMatrix& own,
                           const CoeffMatrix& partner_coeffs, const CoeffMatrix& params, const QuadratureRule& rule,
                           const MatrixXd& psi, int p_tilde, int p_cap, double eps_dim, double eps_ord,
                           double omega, const ReductionTolerances& tols) {
  // Partner coupling vectors as a gPC matrix over the global rule.
  CoeffMatrix v_hat = partner.interface ? project(coupling_values(partner, partner_coeffs * psi), rule, psi)
                                        : partner_coeffs;
  const StackedInput stack = stack_inputs(own, v_hat, params, mod.gramian, partner.coupling_gramian,
                                          Gramian::identity(params.rows()));
  const KlReduction kl = dimension_reduce(stack, eps_dim, tols.svd_rank);
  const MatrixXd theta = theta_at_nodes(kl, psi);
  const VectorXd w = rule.weight_vector();

  const ReducedBasis rb_lo = reduced_basis_auto(theta, w, kl.d, p_tilde, tols);
  const ReducedBasis rb_hi = reduced_basis_auto(theta, w, kl.d, p_tilde + 1, tols);
  const SparseQuadrature sq = sparse_quadrature_auto(theta, w, kl.d, 2 * (p_tilde + 1), tols);

  const Index a = static_cast<Index>(sq.active.size());
  const Index n_own = kl.offsets[1];
  const Index n_partner = kl.offsets[2] - kl.offsets[1];
  const Index n_par = kl.offsets[3] - kl.offsets[2];
  MatrixXd in_own(n_own, a), in_partner(n_partner, a), in_xi(n_par, a);
  for (Index k = 0; k < a; ++k) {
    const VectorXd z = kl.at(theta.col(sq.active[static_cast<size_t>(k)]));
    in_own.col(k) = kl.block(z, 0);
    in_partner.col(k) = kl.block(z, 1);
    in_xi.col(k) = kl.block(z, 2);
  }
  const MatrixXd samples = evaluate_module(mod, in_own, in_partner, in_xi, omega);

  HalfStep out;
  const CoeffMatrix lo = lift_to_global(reduced_project(samples, sq, rb_lo), rb_lo, rule, psi);
  const CoeffMatrix hi = lift_to_global(reduced_project(samples, sq, rb_hi), rb_hi, rule, psi);
  out.p_tilde_next = select_order(p_tilde, lo, hi, mod.gramian, eps_ord, p_cap);
  out.next = lo;
  out.d = kl.d;
  out.p_tilde_used = p_tilde;
  out.active = a;
  return out;
}

}  // namespace

PropagationReport reduced_nisp(const ModuleOperator& m1, const ModuleOperator& m2, const TotalDegreeBasis& basis,
                               const QuadratureRule& rule, const NispConfig& cfg, const ReducedConfig& rcfg,
                               const std::optional<std::pair<CoeffMatrix, CoeffMatrix>>& init) {
  const auto start = Clock::now();
  check_setup(m1, m2, basis, rule, cfg);
  for (int i = 0; i < 2; ++i) {
    if (!(rcfg.eps_dim[i] > 0.0 && rcfg.eps_dim[i] < 1.0) || !(rcfg.eps_ord[i] > 0.0 && rcfg.eps_ord[i] < 1.0))
      throw InvalidArgument("reduced_nisp: tolerances must lie in (0,1)");
  }
  const MatrixXd psi = basis_at_nodes(basis, rule);
  const CoeffMatrix xi1 = input_gpc(0, m1.param_dim, rule, psi);
  const CoeffMatrix xi2 = input_gpc(m1.param_dim, m2.param_dim, rule, psi);
  auto [u1, u2] = initial_coeffs(m1, m2, basis, cfg, init);

  PropagationReport rep;
  rep.method = "reduced";
  rep.rule_size = rule.size();
  rep.order = basis.order();
  rep.dim = basis.dim();
  int pt1 = 0;
  int pt2 = 0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    HalfStep h1;
    try {
      h1 = reduced_half_step(m1, m2, u1, u2, xi1, rule, psi, pt1, basis.order(), rcfg.eps_dim[0], rcfg.eps_ord[0],
                             cfg.relaxation, rcfg.tols);
    } catch (const Error& e) {
      throw NumericalError("reduced_nisp: module 1 stage, iteration " + std::to_string(it) + ": " + e.what());
    }
    HalfStep h2;
    try {
      h2 = reduced_half_step(m2, m1, u2, h1.next, xi2, rule, psi, pt2, basis.order(), rcfg.eps_dim[1],
                             rcfg.eps_ord[1], cfg.relaxation, rcfg.tols);
    } catch (const Error& e) {
      throw NumericalError("reduced_nisp: module 2 stage, iteration " + std::to_string(it) + ": " + e.what());
    }
    const double r1 = matrix_update(h1.next, u1, m1.gramian);
    const double r2 = matrix_update(h2.next, u2, m2.gramian);
    u1 = std::move(h1.next);
    u2 = std::move(h2.next);
    pt1 = h1.p_tilde_next;
    pt2 = h2.p_tilde_next;
    rep.module_calls[0] += h1.active;
    rep.module_calls[1] += h2.active;
    rep.iterations = it;
    rep.diagnostics.push_back({it, 1, h1.d, h1.p_tilde_used, h1.active, r1});
    rep.diagnostics.push_back({it, 2, h2.d, h2.p_tilde_used, h2.active, r2});
    // A committed order-p~ matrix can be stationary while p~ is still rising.
    const bool orders_settled = h1.p_tilde_next == h1.p_tilde_used && h2.p_tilde_next == h2.p_tilde_used;
    if (r1 <= cfg.tol && r2 <= cfg.tol && orders_settled) {
      rep.converged = true;
      break;
    }
  }
  rep.u1 = std::move(u1);
  rep.u2 = std::move(u2);
  rep.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return rep;
}

double relative_error(const CoeffMatrix& u1, const CoeffMatrix& u2, const CoeffMatrix& r1, const CoeffMatrix& r2,
                      const Gramian& g1, const Gramian& g2) {
  const Index c = std::max({u1.cols(), r1.cols()});
  const double e1 = weighted_frobenius(resize_columns(u1, c) - resize_columns(r1, c), g1);
  const double e2 = weighted_frobenius(resize_columns(u2, c) - resize_columns(r2, c), g2);
  const double n1 = weighted_frobenius(r1, g1);
  const double n2 = weighted_frobenius(r2, g2);
  const double den = std::sqrt(n1 * n1 + n2 * n2);
  const double num = std::sqrt(e1 * e1 + e2 * e2);
  if (den > 0.0) return num / den;
  return num;
}

ErrorDecomposition error_decomposition(const PropagationReport& report,
                                       const std::pair<CoeffMatrix, CoeffMatrix>& reference, const Gramian& g1,
                                       const Gramian& g2, const PropagationReport* standard) {
  ErrorDecomposition out;
  out.total = relative_error(report.u1, report.u2, reference.first, reference.second, g1, g2);
  if (standard != nullptr) {
    out.components.emplace_back(
        "truncation", relative_error(standard->u1, standard->u2, reference.first, reference.second, g1, g2));
    out.components.emplace_back("reduction",
                                relative_error(report.u1, report.u2, standard->u1, standard->u2, g1, g2));
  }
  return out;
}

}  // namespace cnisp
