// Acceptance run: one PASS/FAIL line per criterion, numbered 1 to 15.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cnisp/commands.hpp"
#include "cnisp/mms.hpp"
#include "cnisp/nisp.hpp"
#include "cnisp/poisson.hpp"
#include "cnisp/reduction.hpp"
#include "cnisp/synthetic.hpp"

using namespace cnisp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Random stacked input [own; partner; params] over `cols` coefficients with
// decaying columns and random diagonal Gramians on the state blocks.
StackedInput random_stack(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd c(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) c(i, j) = n(rng) / (1.0 + j);
  VectorXd g(rows);
  for (Index i = 0; i < rows; ++i) g(i) = 0.5 + std::abs(n(rng));
  const Index a = rows / 3;
  return stack_inputs(c.topRows(a), c.middleRows(a, a), c.bottomRows(rows - 2 * a), Gramian::diagonal(g.head(a)),
                      Gramian::diagonal(g.segment(a, a)), Gramian::identity(rows - 2 * a));
}

Outcome quadrature_exactness() {
  double worst = 0.0;
  for (int s = 1; s <= 6; ++s)
    for (int q = 0; q <= 4; ++q) {
      worst = std::max(worst, max_monomial_error(tensor_quadrature(s, q), 2 * q + 1));
      worst = std::max(worst, max_monomial_error(smolyak_quadrature(s, q), 2 * q + 1));
    }
  return {worst <= 1e-12, fmt("max moment error %.3e over tensor and Smolyak rules, s<=6, q<=4", worst)};
}

Outcome basis_orthonormality() {
  const TotalDegreeBasis basis(6, 4);
  const auto rule = tensor_quadrature(6, 4);
  const MatrixXd psi = basis_at_nodes(basis, rule);
  const MatrixXd gram = psi * rule.weight_vector().asDiagonal() * psi.transpose();
  const double dev = (gram - MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff();
  return {dev <= 1e-10, fmt("max |Gram - I| = %.3e for 210 polynomials", dev)};
}

Outcome truncation_identity() {
  std::mt19937_64 rng(101);
  double worst_identity = 0.0;
  double worst_ratio_excess = -1.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int s = 2 + trial % 3;
    const int p = 2 + trial % 2;
    const TotalDegreeBasis basis(s, p);
    const auto rule = smolyak_quadrature(s, p + 1);
    const MatrixXd psi = basis_at_nodes(basis, rule);
    const VectorXd w = rule.weight_vector();
    const StackedInput y = random_stack(rng, 6 + 3 * (trial % 4), basis.size());
    for (double eps : {1e-1, 1e-2, 1e-4}) {
      const KlReduction kl = dimension_reduce(y, eps);
      const MatrixXd theta = theta_at_nodes(kl, psi);
      const MatrixXd z = y.coeff * psi;
      const MatrixXd fit = (kl.map * theta).colwise() + kl.mean;
      const MatrixXd err = y.sqrt_apply(z - fit);
      const MatrixXd fl = y.sqrt_apply(z.colwise() - kl.mean);
      double lhs = 0.0, total = 0.0;
      for (Index j = 0; j < rule.size(); ++j) {
        lhs += w(j) * err.col(j).squaredNorm();
        total += w(j) * fl.col(j).squaredNorm();
      }
      const double tail = kl.singular_values.tail(kl.singular_values.size() - kl.d).squaredNorm();
      worst_identity = std::max(worst_identity, std::abs(lhs - tail));
      worst_ratio_excess = std::max(worst_ratio_excess, std::sqrt(std::max(lhs, 0.0) / total) - eps);
    }
  }
  const bool ok = worst_identity <= 1e-8 && worst_ratio_excess <= 1e-12;
  return {ok, fmt("max |err^2 - tail| = %.3e", worst_identity) +
                  fmt(", max (ratio - eps_dim) = %.3e over 50 stacks x 3 tolerances", worst_ratio_excess)};
}

Outcome reduced_orthogonality() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  int indefinite = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int s = 3 + trial % 2;
    const TotalDegreeBasis basis(s, 2);
    const auto rule = smolyak_quadrature(s, 3);
    const MatrixXd psi = basis_at_nodes(basis, rule);
    const VectorXd w = rule.weight_vector();
    const KlReduction kl = dimension_reduce(random_stack(rng, 9, basis.size()), 5e-2);
    const MatrixXd theta = theta_at_nodes(kl, psi);
    const int order = kl.d <= 2 ? 3 : 2;
    const ReducedBasis rb = reduced_basis(build_hankel(theta, w, kl.d, order), theta, kl.d, order);
    const MatrixXd gram = rb.node_evals * w.asDiagonal() * rb.node_evals.transpose();
    worst = std::max(worst, (gram - MatrixXd(rb.sign.asDiagonal())).cwiseAbs().maxCoeff());
    if (rb.sign.minCoeff() < 0.0) ++indefinite;
  }
  return {worst <= 1e-8 && indefinite > 0,
          fmt("max |Phi W Phi^T - S| = %.3e", worst) + ", indefinite cases " + std::to_string(indefinite) + "/20"};
}

Outcome sparse_quadrature() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto rule = smolyak_quadrature(4, 4);
  const VectorXd w = rule.weight_vector();
  bool ok = true;
  std::ostringstream detail;
  detail << "Q = " << rule.size();
  for (auto [d, pt] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {2, 2}, {3, 2}}) {
    // theta = A xi with a random d x 4 map scaled into the unit box.
    MatrixXd a(d, 4);
    for (Index i = 0; i < a.size(); ++i) a(i) = u(rng);
    a = a.array().colwise() / a.cwiseAbs().rowwise().sum().array();
    MatrixXd theta(d, rule.size());
    for (Index j = 0; j < rule.size(); ++j) theta.col(j) = a * rule.nodes[static_cast<size_t>(j)];
    const int degree = 2 * (pt + 1);
    const SparseQuadrature sq = optimal_quadrature(theta, w, d, degree);
    const double mis = moment_mismatch(theta, w, sq, d, degree);
    const auto bound = binomial(degree + d, d);
    const bool case_ok = mis <= 1e-8 && sq.active.size() <= bound;
    ok = ok && case_ok;
    detail << "; (d=" << d << ",p=" << pt << ") active " << sq.active.size() << "<=" << bound
           << fmt(" mismatch %.1e", mis);
  }
  const bool table_check = binomial(11, 3) == 165;
  detail << "; bound at (d=3,p=3) is " << binomial(11, 3);
  return {ok && table_check, detail.str()};
}

Outcome reduced_equivalence() {
  auto prob = std::make_shared<const SyntheticProblem>(SyntheticParams{});
  const auto [m1, m2] = synthetic_modules(prob);
  const TotalDegreeBasis basis(2, 2);
  const auto rule = smolyak_quadrature(2, 2);
  NispConfig cfg;
  cfg.relaxation = 1.0;
  ReducedConfig rc;
  rc.eps_dim = {1e-14, 1e-14};
  rc.eps_ord = {1e-14, 1e-14};
  const PropagationReport s = standard_nisp(m1, m2, basis, rule, cfg);
  const PropagationReport r = reduced_nisp(m1, m2, basis, rule, cfg, rc);
  const double diff = std::max((r.u1 - s.u1).cwiseAbs().maxCoeff(), (r.u2 - s.u2).cwiseAbs().maxCoeff());
  return {diff <= 1e-6 && s.converged && r.converged, fmt("max coefficient difference %.3e", diff)};
}

std::string slope_detail(const MmsResult& r) {
  std::ostringstream os;
  for (const auto& p : r.points) os << "m=" << p.m << fmt(" err %.3e; ", p.mean_error);
  os << fmt("slope %.4f", r.slope);
  return os.str();
}

Outcome mms_poisson_slope() {
  BgsConfig bgs;
  bgs.tol = 1e-10;
  bgs.max_iters = 500;
  const MmsResult r = mms_poisson(PoissonParams{}, {11, 21, 41}, 10, 12345, bgs);
  return {r.slope >= 1.8 && r.slope <= 2.2, slope_detail(r)};
}

Outcome mms_boussinesq_slope() {
  BgsConfig bgs;
  bgs.relaxation = 1.0;
  bgs.tol = 1e-10;
  bgs.max_iters = 500;
  const MmsResult r = mms_boussinesq(BoussinesqParams{}, {8, 16, 32}, 5, 12345, bgs);
  return {r.slope >= 1.7 && r.slope <= 2.2, slope_detail(r)};
}

// Shared benchmark data for criteria 9 to 14.
struct Benchmarks {
  SweepResult poisson;
  SweepResult boussinesq;
};

RunConfig bench_config(const std::string& problem, std::vector<int> ps, int reference_order) {
  RunConfig cfg;
  cfg.problem = problem;
  cfg.s1 = 3;
  cfg.s2 = 3;
  cfg.sweep_p = std::move(ps);
  cfg.reference_order = reference_order;
  return resolve_config(cfg);
}

const Benchmarks& benchmarks() {
  static const Benchmarks b = [] {
    Benchmarks out;
    const RunConfig pc = bench_config("poisson", {1, 2, 3, 4}, -1);
    out.poisson = run_sweep(pc, {{3, 3}}, *pc.sweep_p, std::cerr);
    const RunConfig bc = bench_config("boussinesq", {2}, 0);
    out.boussinesq = run_sweep(bc, {{3, 3}}, *bc.sweep_p, std::cerr);
    return out;
  }();
  return b;
}

const SweepRow& poisson_row(int p) {
  for (const auto& r : benchmarks().poisson.rows)
    if (r.p == p) return r;
  throw std::logic_error("missing benchmark row");
}

Outcome standard_decay() {
  std::ostringstream os;
  bool ok = true;
  for (int p = 1; p <= 3; ++p) {
    os << "p=" << p << fmt(" eps_s %.3e; ", poisson_row(p).eps_s);
    if (p > 1) ok = ok && poisson_row(p - 1).eps_s >= 2.0 * poisson_row(p).eps_s;
  }
  return {ok, os.str()};
}

Outcome reduced_plateau() {
  const SweepRow& a = poisson_row(3);
  const SweepRow& b = poisson_row(4);
  const double r_ratio = std::max(a.eps_r, b.eps_r) / std::min(a.eps_r, b.eps_r);
  const double s_ratio = a.eps_s / b.eps_s;
  const bool ok = r_ratio < 2.0 && s_ratio >= 2.0 && a.eps_r <= 5e-2 && b.eps_r <= 5e-2;
  return {ok, fmt("eps_r %.3e", a.eps_r) + fmt(" -> %.3e", b.eps_r) + fmt(" (ratio %.2f)", r_ratio) +
                  fmt("; eps_s ratio %.2f", s_ratio)};
}

std::vector<const SweepRow*> all_rows() {
  std::vector<const SweepRow*> rows;
  for (const auto& r : benchmarks().poisson.rows) rows.push_back(&r);
  for (const auto& r : benchmarks().boussinesq.rows) rows.push_back(&r);
  return rows;
}

Outcome budget_dominance() {
  std::ostringstream os;
  bool ok = true;
  for (const SweepRow* r : all_rows()) {
    const long long cs = r->standard->total_calls(), cr = r->reduced->total_calls();
    ok = ok && cr <= cs;
    os << (r == all_rows().back() ? "boussinesq" : "poisson") << " p=" << r->p << " C_s " << cs << " C_r " << cr
       << "; ";
  }
  const SweepRow& p4 = poisson_row(4);
  const double speedup =
      static_cast<double>(p4.standard->total_calls()) / static_cast<double>(p4.reduced->total_calls());
  os << fmt("poisson p=4 call speedup %.2f", speedup);
  return {ok && speedup >= 3.0, os.str()};
}

Outcome dimension_bound() {
  std::ostringstream os;
  bool ok = true;
  for (const SweepRow* r : all_rows()) {
    const auto* a = r->reduced->last(0);
    const auto* b = r->reduced->last(1);
    ok = ok && a != nullptr && b != nullptr && a->d >= r->s1 && b->d >= r->s2;
    if (a != nullptr && b != nullptr) os << "p=" << r->p << " d1=" << a->d << " d2=" << b->d << "; ";
  }
  return {ok, os.str()};
}

Outcome iteration_stability() {
  std::ostringstream os;
  bool ok = true;
  for (int p = 2; p <= 4; ++p) {
    const SweepRow& r = poisson_row(p);
    for (const PropagationReport* rep : {&*r.standard, &*r.reduced}) {
      ok = ok && rep->converged && rep->iterations >= 8 && rep->iterations <= 12;
      os << "poisson p=" << p << " " << rep->method << " " << rep->iterations << (rep->converged ? "" : "(nc)")
         << "; ";
    }
  }
  for (const auto& r : benchmarks().boussinesq.rows)
    for (const PropagationReport* rep : {&*r.standard, &*r.reduced}) {
      ok = ok && rep->converged && std::abs(rep->iterations - 9) <= 2;
      os << "boussinesq p=" << r.p << " " << rep->method << " " << rep->iterations
         << (rep->converged ? "" : "(nc)") << "; ";
    }
  return {ok, os.str()};
}

Outcome moments_vs_monte_carlo() {
  const PropagationReport& rep = *poisson_row(3).standard;
  auto prob = std::make_shared<const PoissonProblem>(PoissonParams{});
  const auto [m1, m2] = poisson_modules(prob);
  BgsConfig bgs;
  bgs.tol = 1e-10;
  bgs.max_iters = 500;
  const int count = 10000;
  const MatrixXd xi = uniform_samples(count, 6, 777);
  const Index n1 = m1.state_dim, n2 = m2.state_dim;
  MatrixXd states(n1 + n2, count);
  for (int k = 0; k < count; ++k) {
    const VectorXd x = xi.row(k).transpose();
    const BgsResult r = bgs_solve(m1, m2, x.head(3), x.tail(3), bgs);
    states.col(k) << r.u1, r.u2;
  }
  const VectorXd mc_mean = states.rowwise().mean();
  const VectorXd mc_std =
      ((states.colwise() - mc_mean).array().square().rowwise().sum() / (count - 1.0)).sqrt().matrix();
  VectorXd g_mean(n1 + n2), g_std(n1 + n2);
  g_mean << rep.u1.col(0), rep.u2.col(0);
  g_std << rep.u1.rightCols(rep.u1.cols() - 1).rowwise().norm(), rep.u2.rightCols(rep.u2.cols() - 1).rowwise().norm();
  auto rel = [&](const VectorXd& a, const VectorXd& b) {
    const double num = std::hypot(m1.gramian.norm(a.head(n1) - b.head(n1)), m2.gramian.norm(a.tail(n2) - b.tail(n2)));
    return num / std::hypot(m1.gramian.norm(b.head(n1)), m2.gramian.norm(b.tail(n2)));
  };
  const double em = rel(g_mean, mc_mean), es = rel(g_std, mc_std);
  return {em <= 0.01 && es <= 0.05, fmt("mean rel. diff %.3e", em) + fmt(", std rel. diff %.3e", es)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome bench_determinism() {
  RunConfig cfg;
  cfg.problem = "poisson";
  cfg.s1 = 2;
  cfg.s2 = 2;
  cfg.sweep_p = std::vector<int>{1, 2};
  cfg.seed = 99;
  cfg = resolve_config(cfg);
  const auto base = std::filesystem::temp_directory_path() / "cnisp_acceptance_determinism";
  std::filesystem::remove_all(base);
  std::vector<std::filesystem::path> dirs{base / "a", base / "b"};
  for (const auto& d : dirs) {
    cfg.out = d.string();
    std::ostringstream out, err;
    if (cmd_bench(cfg, out, err) != kExitOk) return {false, "bench failed: " + err.str()};
  }
  int compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
    const auto name = entry.path().filename();
    // timing.csv holds wall-clock times and is excluded by design.
    if (entry.path().extension() != ".csv" || name == "timing.csv") continue;
    if (slurp(entry.path()) != slurp(dirs[1] / name)) return {false, name.string() + " differs"};
    ++compared;
  }
  return {compared > 0, std::to_string(compared) + " numeric CSV files byte-identical"};
}

std::set<int> parse_list(const std::string& text) {
  std::set<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1 to 15"};
  std::string only, known;
  app.add_option("--only", only, "comma-separated criteria to run (default all)");
  app.add_option("--known-failures", known,
                 "comma-separated criteria whose FAIL does not change the exit status");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"quadrature exactness", quadrature_exactness},
      {"basis orthonormality", basis_orthonormality},
      {"truncation error identity", truncation_identity},
      {"reduced-basis orthogonality", reduced_orthogonality},
      {"sparse quadrature", sparse_quadrature},
      {"reduced/standard equivalence", reduced_equivalence},
      {"MMS Poisson slope", mms_poisson_slope},
      {"MMS Boussinesq slope", mms_boussinesq_slope},
      {"standard NISP decay", standard_decay},
      {"reduced NISP plateau", reduced_plateau},
      {"budget dominance", budget_dominance},
      {"dimension lower bound", dimension_bound},
      {"iteration stability", iteration_stability},
      {"moments vs Monte Carlo", moments_vs_monte_carlo},
      {"bench determinism", bench_determinism},
  };
  const std::set<int> selected = parse_list(only);
  const std::set<int> tolerated = parse_list(known);
  int passed = 0, run = 0, unexpected = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && selected.count(id) == 0) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ++run;
    if (o.pass)
      ++passed;
    else if (tolerated.count(id) == 0)
      ++unexpected;
    std::printf("criterion %2d %s: %s: %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("summary: %d/%d PASS\n", passed, run);
  return unexpected == 0 ? 0 : 1;
}
