#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "cnisp/commands.hpp"
#include "cnisp/config.hpp"

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

const Flag kFlags[] = {
    {"--problem", "run.problem", "poisson | boussinesq | mms-poisson | mms-boussinesq | custom"},
    {"--method", "run.method", "standard | reduced | both"},
    {"--seed", "run.seed", "seed of every random draw"},
    {"--threads", "run.threads", "worker threads, 0 for all cores"},
    {"--out", "run.out", "output directory"},
    {"--s", "stochastic.s", "stochastic dimension of each module (s1 = s2)"},
    {"--s1", "stochastic.s1", "stochastic dimension of module 1"},
    {"--s2", "stochastic.s2", "stochastic dimension of module 2"},
    {"--p", "stochastic.p", "gPC order"},
    {"--q", "stochastic.q", "sparse-grid level, at least p"},
    {"--sweep-p", "stochastic.sweep_p", "bench orders, comma separated"},
    {"--sweep-s", "stochastic.sweep_s", "bench dimensions s1 = s2, comma separated"},
    {"--reference-order", "stochastic.reference_order", "auto, none or an order"},
    {"--eps-dim1", "reduction.eps_dim1", "dimension tolerance of module 1"},
    {"--eps-dim2", "reduction.eps_dim2", "dimension tolerance of module 2"},
    {"--eps-ord1", "reduction.eps_ord1", "order tolerance of module 1"},
    {"--eps-ord2", "reduction.eps_ord2", "order tolerance of module 2"},
    {"--relaxation", "bgs.relaxation", "relaxation factor in (0,1]"},
    {"--bgs-tol", "bgs.tol", "deterministic BGS tolerance"},
    {"--tol", "nisp.tol", "stochastic-loop tolerance"},
    {"--max-iters", "nisp.max_iters", "stochastic-loop iteration cap"},
    {"--m", "mesh.m", "mesh size"},
    {"--kde-samples", "output.kde_samples", "surrogate samples for the densities"},
    {"--verify-m", "verify.m", "verify mesh sizes, comma separated"},
    {"--samples", "verify.samples", "verify Monte Carlo samples"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled non-intrusive spectral projection: standard and reduced NISP"};
  app.require_subcommand(1);
  std::string config_path;
  bool dry_run = false;
  std::vector<std::pair<std::string, std::string>> overrides;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file ([section] key = value)");
    sub->add_flag("--dry-run", dry_run, "print the resolved config and rule sizes without solving");
    for (const Flag& f : kFlags) {
      const std::string key = f.key;
      sub->add_option_function<std::string>(
          f.name, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, f.help);
    }
  };
  CLI::App* run = app.add_subcommand("run", "propagate one (s, p) configuration and write all artifacts");
  CLI::App* verify = app.add_subcommand("verify", "manufactured-solution convergence study");
  CLI::App* bench = app.add_subcommand("bench", "sweep (s, p) with both methods against a shared reference");
  for (CLI::App* sub : {run, verify, bench}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cnisp::kExitOk : cnisp::kExitUsage;
  }

  cnisp::RunConfig cfg;
  try {
    if (!config_path.empty()) cnisp::load_config_file(config_path, cfg);
    for (const auto& [key, value] : overrides) cnisp::set_config_value(cfg, key, value);
    if (dry_run) cfg.dry_run = true;
    cfg = cnisp::resolve_config(cfg);
  } catch (const cnisp::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cnisp::kExitIo;
  } catch (const cnisp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cnisp::kExitUsage;
  }

  if (run->parsed()) return cnisp::cmd_run(cfg, std::cout, std::cerr);
  if (verify->parsed()) return cnisp::cmd_verify(cfg, std::cout, std::cerr);
  return cnisp::cmd_bench(cfg, std::cout, std::cerr);
}
