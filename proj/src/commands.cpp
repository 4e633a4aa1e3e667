#include "cnisp/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <ostream>

#include "cnisp/boussinesq.hpp"
#include "cnisp/mms.hpp"
#include "cnisp/parallel.hpp"
#include "cnisp/poisson.hpp"
#include "cnisp/synthetic.hpp"
#include "json.hpp"

namespace cnisp {

namespace {

using json = nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write '" + path.string() + "'");
  return os;
}

// Row-wise standard deviation of a gPC matrix with an orthonormal basis.
VectorXd std_dev(const CoeffMatrix& c) {
  if (c.cols() <= 1) return VectorXd::Zero(c.rows());
  return c.rightCols(c.cols() - 1).rowwise().norm();
}

NispConfig nisp_config(const RunConfig& cfg) {
  NispConfig n;
  n.relaxation = *cfg.relaxation;
  n.tol = cfg.nisp_tol;
  n.max_iters = cfg.nisp_max_iters;
  return n;
}

ReducedConfig reduced_config(const RunConfig& cfg) {
  ReducedConfig r;
  r.eps_dim = cfg.eps_dim;
  r.eps_ord = cfg.eps_ord;
  return r;
}

json matrix_json(const MatrixXd& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::vector<double>(m.data(), m.data() + m.size());
  return j;
}

MatrixXd matrix_from_json(const json& j) {
  const Index r = j.at("rows").get<Index>();
  const Index c = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != r * c) throw InvalidArgument("report json: matrix size mismatch");
  return Eigen::Map<const MatrixXd>(data.data(), r, c);
}

json report_json(const PropagationReport& r) {
  json j;
  j["method"] = r.method;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["module_calls"] = {r.module_calls[0], r.module_calls[1]};
  j["wall_time"] = r.wall_time;
  j["rule_size"] = r.rule_size;
  j["order"] = r.order;
  j["dim"] = r.dim;
  json diag = json::array();
  for (const auto& d : r.diagnostics)
    diag.push_back({{"iter", d.iter},
                    {"module", d.module},
                    {"d", d.d},
                    {"p_tilde", d.p_tilde},
                    {"q_tilde", d.q_tilde},
                    {"update_norm", d.update_norm}});
  j["diagnostics"] = diag;
  j["u1"] = matrix_json(r.u1);
  j["u2"] = matrix_json(r.u2);
  return j;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitNumerical;
  }
}

std::string row_tag(const SweepRow& r) {
  return "s" + std::to_string(r.s1) + "-" + std::to_string(r.s2) + "_p" + std::to_string(r.p);
}

int level_for(const RunConfig& cfg, int p) { return p + (*cfg.q - cfg.p); }

void print_plan(const RunConfig& cfg, const std::vector<std::pair<int, int>>& dims, const std::vector<int>& ps,
                std::ostream& out) {
  out << format_config(cfg) << "\n";
  int max_p = 0;
  for (int p : ps) max_p = std::max(max_p, p);
  for (const auto& [s1, s2] : dims) {
    for (int p : ps) {
      const int q = level_for(cfg, p);
      out << "plan s1=" << s1 << " s2=" << s2 << " p=" << p << " q=" << q
          << " basis=" << total_degree_indices(s1 + s2, p).size() << " nodes=" << smolyak_quadrature(s1 + s2, q).size()
          << "\n";
    }
    if (cfg.reference_order != 0) {
      const int ro = cfg.reference_order == -1 ? max_p + 1 : cfg.reference_order;
      out << "plan reference s1=" << s1 << " s2=" << s2 << " order=" << ro
          << " nodes=" << smolyak_quadrature(s1 + s2, ro).size() << "\n";
    }
  }
}

void write_artifacts(const RunConfig& cfg, const SweepResult& res, const std::filesystem::path& dir) {
  json j;
  j["config"] = format_config(cfg);
  json refs = json::array();
  for (const auto& r : res.references)
    refs.push_back({{"s1", r.s1}, {"s2", r.s2}, {"order", r.order}, {"rule_size", r.rule_size},
                    {"report", report_json(r.report)}});
  j["references"] = refs;
  json rows = json::array();
  for (const auto& r : res.rows) {
    json row{{"s1", r.s1}, {"s2", r.s2}, {"p", r.p}, {"q", r.q}, {"rule_size", r.rule_size},
             {"eps_s", r.eps_s}, {"eps_r", r.eps_r}};
    if (r.standard) row["standard"] = report_json(*r.standard);
    if (r.reduced) row["reduced"] = report_json(*r.reduced);
    rows.push_back(row);
  }
  j["rows"] = rows;
  open_out(dir / "report.json") << j.dump(1) << "\n";
  {
    auto os = open_out(dir / "table.csv");
    write_table_csv(res, os);
  }
  {
    auto os = open_out(dir / "timing.csv");
    write_timing_csv(res, os);
  }
  for (const auto& r : res.rows) {
    for (const auto* rep : {r.standard ? &*r.standard : nullptr, r.reduced ? &*r.reduced : nullptr}) {
      if (rep == nullptr) continue;
      auto os = open_out(dir / ("diagnostics_" + row_tag(r) + "_" + rep->method + ".csv"));
      write_diagnostics_csv(*rep, os);
    }
  }
}

// Densities of the scalar outputs and mean/std fields of one report.
void write_statistics(const RunConfig& cfg, const ProblemSetup& prob, const PropagationReport& rep,
                      const std::filesystem::path& dir) {
  const TotalDegreeBasis basis(rep.dim, rep.order);
  const MatrixXd xi = uniform_samples(cfg.kde_samples, rep.dim, cfg.seed);
  std::vector<std::vector<double>> values(prob.qoi_names.size());
  for (auto& v : values) v.resize(static_cast<size_t>(xi.rows()));
  for (Index k = 0; k < xi.rows(); ++k) {
    const VectorXd psi = basis.eval(xi.row(k).transpose());
    const auto q = prob.qoi(rep.u1 * psi, rep.u2 * psi);
    for (size_t i = 0; i < q.size(); ++i) values[i][static_cast<size_t>(k)] = q[i];
  }
  for (size_t i = 0; i < values.size(); ++i) {
    const DensityEstimate est = kde(values[i], cfg.kde_points);
    auto os = open_out(dir / ("density_" + prob.qoi_names[i] + "_" + rep.method + ".csv"));
    os << "x,density\n";
    for (size_t k = 0; k < est.grid.size(); ++k) os << fmt(est.grid[k]) << "," << fmt(est.density[k]) << "\n";
  }
  auto os = open_out(dir / ("moments_" + rep.method + ".csv"));
  prob.write_moments(rep.u1, rep.u2, os);
}

}  // namespace

ProblemSetup make_problem(const RunConfig& cfg, int s1, int s2) {
  ProblemSetup ps;
  ps.name = cfg.problem;
  if (is_poisson_family(cfg.problem)) {
    PoissonParams pp;
    pp.m = *cfg.m;
    pp.s1 = s1;
    pp.s2 = s2;
    pp.manufactured = cfg.problem == "mms-poisson";
    auto prob = std::make_shared<const PoissonProblem>(pp);
    std::tie(ps.m1, ps.m2) = poisson_modules(prob);
    ps.qoi_names = {"E"};
    ps.qoi = [prob](const VectorXd& u1, const VectorXd& u2) { return std::vector<double>{prob->energy(u1, u2)}; };
    ps.write_moments = [prob](const CoeffMatrix& u1, const CoeffMatrix& u2, std::ostream& os) {
      os << "subdomain,x1,x2,mean,std\n";
      const int m = prob->m();
      for (int i = 0; i < 2; ++i) {
        const CoeffMatrix c = (i == 0 ? u1 : u2).topRows(prob->nodes());
        const VectorXd sd = std_dev(c);
        for (int iy = 0; iy < m; ++iy)
          for (int ix = 0; ix < m; ++ix) {
            const Index k = prob->node_index(ix, iy);
            const auto x = prob->node_coord(i, ix, iy);
            os << i + 1 << "," << fmt(x[0]) << "," << fmt(x[1]) << "," << fmt(c(k, 0)) << "," << fmt(sd(k)) << "\n";
          }
      }
    };
  } else if (cfg.problem == "boussinesq") {
    BoussinesqParams bp;
    bp.m = *cfg.m;
    bp.s1 = s1;
    bp.s2 = s2;
    auto prob = std::make_shared<const BoussinesqProblem>(bp);
    std::tie(ps.m1, ps.m2) = boussinesq_modules(prob);
    ps.qoi_names = {"K", "E"};
    ps.qoi = [prob](const VectorXd& u1, const VectorXd& u2) {
      const auto [k, e] = prob->qoi(u1, u2);
      return std::vector<double>{k, e};
    };
    ps.write_moments = [prob](const CoeffMatrix& u1, const CoeffMatrix& u2, std::ostream& os) {
      os << "field,x,y,mean,std\n";
      const Index n = prob->cells();
      const char* names[4] = {"u", "v", "p", "T"};
      for (int f = 0; f < 4; ++f) {
        const CoeffMatrix c = f < 3 ? CoeffMatrix(u1.middleRows(f * n, n)) : u2;
        const VectorXd sd = std_dev(c);
        for (int j = 0; j < prob->m(); ++j)
          for (int i = 0; i < prob->m(); ++i) {
            const Index k = prob->cell(i, j);
            os << names[f] << "," << fmt(prob->center(i)) << "," << fmt(prob->center(j)) << "," << fmt(c(k, 0))
               << "," << fmt(sd(k)) << "\n";
          }
      }
    };
  } else if (cfg.problem == "custom") {
    SyntheticParams sp;
    sp.s1 = s1;
    sp.s2 = s2;
    sp.seed = cfg.seed;
    auto prob = std::make_shared<const SyntheticProblem>(sp);
    std::tie(ps.m1, ps.m2) = synthetic_modules(prob);
    ps.qoi_names = {"S"};
    ps.qoi = [](const VectorXd& u1, const VectorXd& u2) { return std::vector<double>{u1.sum() + u2.sum()}; };
    ps.write_moments = [](const CoeffMatrix& u1, const CoeffMatrix& u2, std::ostream& os) {
      os << "module,index,mean,std\n";
      for (int i = 0; i < 2; ++i) {
        const CoeffMatrix& c = i == 0 ? u1 : u2;
        const VectorXd sd = std_dev(c);
        for (Index k = 0; k < c.rows(); ++k) os << i + 1 << "," << k << "," << fmt(c(k, 0)) << "," << fmt(sd(k)) << "\n";
      }
    };
  } else {
    throw ConfigError("problem '" + cfg.problem +
                      "' has a parameter-dependent forcing and is only available to the verify command");
  }
  return ps;
}

SweepResult run_sweep(const RunConfig& cfg, const std::vector<std::pair<int, int>>& dims, const std::vector<int>& ps,
                      std::ostream& log, SweepResult* partial) {
  if (dims.empty() || ps.empty()) throw ConfigError("empty sweep: no (s, p) pairs to run");
  SweepResult local;
  SweepResult& res = partial != nullptr ? *partial : local;
  const NispConfig ncfg = nisp_config(cfg);
  const ReducedConfig rcfg = reduced_config(cfg);
  int max_p = 0;
  for (int p : ps) max_p = std::max(max_p, p);

  for (const auto& [s1, s2] : dims) {
    const ProblemSetup prob = make_problem(cfg, s1, s2);
    const int s = s1 + s2;
    const SweepReference* ref = nullptr;
    if (cfg.reference_order != 0) {
      SweepReference r;
      r.s1 = s1;
      r.s2 = s2;
      r.order = cfg.reference_order == -1 ? max_p + 1 : cfg.reference_order;
      const QuadratureRule rule = smolyak_quadrature(s, r.order);
      r.rule_size = rule.size();
      log << "reference s1=" << s1 << " s2=" << s2 << " order=" << r.order << " nodes=" << rule.size() << "\n";
      r.report = standard_nisp(prob.m1, prob.m2, TotalDegreeBasis(s, r.order), rule, ncfg);
      res.references.push_back(std::move(r));
      ref = &res.references.back();
    }
    for (int p : ps) {
      SweepRow row;
      row.s1 = s1;
      row.s2 = s2;
      row.p = p;
      row.q = level_for(cfg, p);
      const TotalDegreeBasis basis(s, p);
      const QuadratureRule rule = smolyak_quadrature(s, row.q);
      row.rule_size = rule.size();
      row.eps_s = kNaN;
      row.eps_r = kNaN;
      auto error_of = [&](const PropagationReport& r) {
        if (ref == nullptr) return kNaN;
        return relative_error(r.u1, r.u2, ref->report.u1, ref->report.u2, prob.m1.gramian, prob.m2.gramian);
      };
      if (cfg.method != "reduced") {
        log << "standard s1=" << s1 << " s2=" << s2 << " p=" << p << " nodes=" << rule.size() << "\n";
        row.standard = standard_nisp(prob.m1, prob.m2, basis, rule, ncfg);
        row.eps_s = error_of(*row.standard);
      }
      if (cfg.method != "standard") {
        log << "reduced s1=" << s1 << " s2=" << s2 << " p=" << p << " nodes=" << rule.size() << "\n";
        row.reduced = reduced_nisp(prob.m1, prob.m2, basis, rule, ncfg, rcfg);
        row.eps_r = error_of(*row.reduced);
      }
      res.rows.push_back(std::move(row));
    }
  }
  return res;
}

void write_table_csv(const SweepResult& r, std::ostream& os) {
  os << "s1,s2,p,q,Q,eps_s,C_s,iters_s,converged_s,d1,p_tilde1,Q_tilde1,d2,p_tilde2,Q_tilde2,eps_r,C_r,iters_r,"
        "converged_r,speedup\n";
  for (const auto& row : r.rows) {
    os << row.s1 << "," << row.s2 << "," << row.p << "," << row.q << "," << row.rule_size << "," << fmt(row.eps_s)
       << ",";
    if (row.standard)
      os << row.standard->total_calls() << "," << row.standard->iterations << "," << row.standard->converged << ",";
    else
      os << ",,,";
    if (row.reduced) {
      const auto* a = row.reduced->last(0);
      const auto* b = row.reduced->last(1);
      for (const auto* d : {a, b}) {
        if (d != nullptr)
          os << d->d << "," << d->p_tilde << "," << d->q_tilde << ",";
        else
          os << ",,,";
      }
      os << fmt(row.eps_r) << "," << row.reduced->total_calls() << "," << row.reduced->iterations << ","
         << row.reduced->converged << ",";
    } else {
      os << ",,,,,,,,,,";
    }
    if (row.standard && row.reduced && row.reduced->total_calls() > 0)
      os << fmt(static_cast<double>(row.standard->total_calls()) / static_cast<double>(row.reduced->total_calls()));
    os << "\n";
  }
}

void write_timing_csv(const SweepResult& r, std::ostream& os) {
  os << "kind,s1,s2,p,wall_time,wall_speedup\n";
  for (const auto& ref : r.references)
    os << "reference," << ref.s1 << "," << ref.s2 << "," << ref.order << "," << fmt(ref.report.wall_time) << ",\n";
  for (const auto& row : r.rows) {
    if (row.standard)
      os << "standard," << row.s1 << "," << row.s2 << "," << row.p << "," << fmt(row.standard->wall_time) << ",\n";
    if (row.reduced) {
      os << "reduced," << row.s1 << "," << row.s2 << "," << row.p << "," << fmt(row.reduced->wall_time) << ",";
      if (row.standard && row.reduced->wall_time > 0.0) os << fmt(row.standard->wall_time / row.reduced->wall_time);
      os << "\n";
    }
  }
}

void write_diagnostics_csv(const PropagationReport& r, std::ostream& os) {
  os << "iter,module,d,p_tilde,Q_tilde,update_norm\n";
  for (const auto& d : r.diagnostics)
    os << d.iter << "," << d.module << "," << d.d << "," << d.p_tilde << "," << d.q_tilde << ","
       << fmt(d.update_norm) << "\n";
}

std::string report_to_json(const PropagationReport& r) { return report_json(r).dump(); }

PropagationReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("report json: ") + e.what());
  }
  try {
    PropagationReport r;
    r.method = j.at("method").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    const auto calls = j.at("module_calls").get<std::vector<long long>>();
    if (calls.size() != 2) throw InvalidArgument("report json: module_calls needs two entries");
    r.module_calls = {calls[0], calls[1]};
    r.wall_time = j.at("wall_time").get<double>();
    r.rule_size = j.at("rule_size").get<Index>();
    r.order = j.at("order").get<int>();
    r.dim = j.at("dim").get<int>();
    for (const auto& d : j.at("diagnostics"))
      r.diagnostics.push_back({d.at("iter").get<int>(), d.at("module").get<int>(), d.at("d").get<int>(),
                               d.at("p_tilde").get<int>(), d.at("q_tilde").get<Index>(),
                               d.at("update_norm").get<double>()});
    r.u1 = matrix_from_json(j.at("u1"));
    r.u2 = matrix_from_json(j.at("u2"));
    return r;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("report json: ") + e.what());
  }
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    set_thread_count(cfg.threads);
    const std::vector<std::pair<int, int>> dims{{cfg.s1, cfg.s2}};
    const std::vector<int> ps{cfg.p};
    if (cfg.dry_run) {
      print_plan(cfg, dims, ps, out);
      return static_cast<int>(kExitOk);
    }
    const ProblemSetup prob = make_problem(cfg, cfg.s1, cfg.s2);
    const std::filesystem::path dir(cfg.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.out + "': " + ec.message());
    SweepResult res;
    try {
      run_sweep(cfg, dims, ps, err, &res);
    } catch (const Error&) {
      write_artifacts(cfg, res, dir);
      throw;
    }
    write_artifacts(cfg, res, dir);
    const SweepRow& row = res.rows.front();
    for (const auto* rep : {row.standard ? &*row.standard : nullptr, row.reduced ? &*row.reduced : nullptr}) {
      if (rep == nullptr) continue;
      write_statistics(cfg, prob, *rep, dir);
      if (!rep->converged) err << "warning: " << rep->method << " NISP did not converge within the iteration cap\n";
    }
    write_table_csv(res, out);
    return static_cast<int>(kExitOk);
  });
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    set_thread_count(cfg.threads);
    std::vector<std::pair<int, int>> dims;
    if (cfg.sweep_s.empty())
      dims.emplace_back(cfg.s1, cfg.s2);
    else
      for (int s : cfg.sweep_s) dims.emplace_back(s, s);
    const std::vector<int> ps = cfg.sweep_p.value_or(std::vector<int>{cfg.p});
    if (ps.empty()) throw ConfigError("bench: empty sweep, stochastic.sweep_p lists no orders");
    if (cfg.dry_run) {
      print_plan(cfg, dims, ps, out);
      return static_cast<int>(kExitOk);
    }
    const std::filesystem::path dir(cfg.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.out + "': " + ec.message());
    SweepResult res;
    try {
      run_sweep(cfg, dims, ps, err, &res);
    } catch (const Error&) {
      write_artifacts(cfg, res, dir);
      throw;
    }
    write_artifacts(cfg, res, dir);
    write_table_csv(res, out);
    return static_cast<int>(kExitOk);
  });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    set_thread_count(cfg.threads);
    if (cfg.problem == "custom") throw ConfigError("verify: the custom problem has no manufactured solution");
    if (cfg.verify_m.size() < 2) throw ConfigError("verify: the slope needs at least two mesh sizes in verify.m");
    if (cfg.dry_run) {
      out << format_config(cfg);
      return static_cast<int>(kExitOk);
    }
    BgsConfig bgs;
    bgs.tol = cfg.bgs_tol;
    bgs.relaxation = *cfg.relaxation;
    bgs.max_iters = cfg.bgs_max_iters;
    MmsResult r;
    if (is_poisson_family(cfg.problem)) {
      PoissonParams pp;
      pp.s1 = cfg.s1;
      pp.s2 = cfg.s2;
      r = mms_poisson(pp, cfg.verify_m, *cfg.verify_samples, cfg.seed, bgs);
    } else {
      BoussinesqParams bp;
      bp.s1 = cfg.s1;
      bp.s2 = cfg.s2;
      r = mms_boussinesq(bp, cfg.verify_m, *cfg.verify_samples, cfg.seed, bgs);
    }
    for (const auto& w : r.warnings) err << "warning: " << w << "\n";
    const std::filesystem::path dir(cfg.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.out + "': " + ec.message());
    auto os = open_out(dir / "convergence.csv");
    os << "m,dx,mean_error,samples,excluded\n";
    for (const auto& p : r.points)
      os << p.m << "," << fmt(p.dx) << "," << fmt(p.mean_error) << "," << p.samples << "," << p.excluded << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "slope %.4f\n", r.slope);
    out << buf;
    return static_cast<int>(kExitOk);
  });
}

}  // namespace cnisp
