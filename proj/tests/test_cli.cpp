#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cnisp/commands.hpp"
#include "cnisp/config.hpp"

namespace cnisp {
namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

TEST(Config, ParsesSectionsAndComments) {
  const auto path = temp_file("cnisp_cfg_ok.ini",
                              "# benchmark\n[run]\nproblem = custom\nseed = 42\n\n[stochastic]\ns = 2\n"
                              "sweep_p = 1, 2,3\n[reduction]\neps_dim1 = 1e-3  # inline\n");
  RunConfig cfg;
  load_config_file(path.string(), cfg);
  EXPECT_EQ(cfg.problem, "custom");
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.s1, 2);
  EXPECT_EQ(cfg.s2, 2);
  ASSERT_TRUE(cfg.sweep_p.has_value());
  EXPECT_EQ(*cfg.sweep_p, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(cfg.eps_dim[0], 1e-3);
}

TEST(Config, ErrorsNameTheLine) {
  const auto path = temp_file("cnisp_cfg_bad.ini", "[run]\nproblem = custom\nseed = many\n");
  RunConfig cfg;
  try {
    load_config_file(path.string(), cfg);
    FAIL() << "a non-numeric seed must be rejected";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  const auto bad_key = temp_file("cnisp_cfg_key.ini", "[run]\nflavour = x\n");
  EXPECT_THROW(load_config_file(bad_key.string(), cfg), ConfigError);
  EXPECT_THROW(load_config_file("/nonexistent/cnisp.ini", cfg), IoError);
}

TEST(Config, LaterValuesOverrideFile) {
  const auto path = temp_file("cnisp_cfg_override.ini", "[stochastic]\np = 3\n");
  RunConfig cfg;
  load_config_file(path.string(), cfg);
  set_config_value(cfg, "stochastic.p", "1");
  EXPECT_EQ(resolve_config(cfg).p, 1);
}

TEST(Config, ProblemDefaults) {
  RunConfig cfg;
  cfg.problem = "boussinesq";
  const RunConfig b = resolve_config(cfg);
  EXPECT_EQ(*b.m, 16);
  EXPECT_EQ(*b.relaxation, 1.0);
  cfg.problem = "poisson";
  const RunConfig p = resolve_config(cfg);
  EXPECT_EQ(*p.m, 11);
  EXPECT_EQ(*p.relaxation, 0.9);
  EXPECT_EQ(*p.q, p.p);
  cfg.p = 3;
  cfg.q = 2;
  EXPECT_THROW(resolve_config(cfg), ConfigError) << "level below order";
}

TEST(Config, FormatRoundTrip) {
  RunConfig cfg;
  cfg.problem = "custom";
  cfg.eps_ord = {2e-3, 5e-4};
  cfg.sweep_p = std::vector<int>{1, 2};
  const RunConfig a = resolve_config(cfg);
  const auto path = temp_file("cnisp_cfg_round.ini", format_config(a));
  RunConfig b;
  load_config_file(path.string(), b);
  EXPECT_EQ(format_config(resolve_config(b)), format_config(a));
}

TEST(Report, JsonRoundTrip) {
  PropagationReport r;
  r.method = "reduced";
  r.u1 = CoeffMatrix::Random(3, 4);
  r.u2 = CoeffMatrix::Random(2, 4);
  r.iterations = 7;
  r.converged = true;
  r.module_calls = {123, 456};
  r.rule_size = 85;
  r.order = 2;
  r.dim = 6;
  r.diagnostics.push_back({1, 0, 3, 2, 35, 0.25});
  const PropagationReport b = report_from_json(report_to_json(r));
  EXPECT_EQ(b.method, r.method);
  EXPECT_TRUE(b.u1 == r.u1) << "coefficients must survive bit for bit";
  EXPECT_TRUE(b.u2 == r.u2);
  EXPECT_EQ(b.module_calls, r.module_calls);
  ASSERT_EQ(b.diagnostics.size(), 1u);
  EXPECT_EQ(b.diagnostics[0].q_tilde, 35);
  EXPECT_THROW(report_from_json("{not json"), InvalidArgument);
}

TEST(Bench, TableIsDeterministic) {
  RunConfig cfg;
  cfg.problem = "custom";
  cfg.s1 = 1;
  cfg.s2 = 1;
  cfg.sweep_p = std::vector<int>{1, 2};
  cfg = resolve_config(cfg);
  std::string tables[2];
  for (auto& t : tables) {
    std::ostringstream log, os;
    write_table_csv(run_sweep(cfg, {{1, 1}}, *cfg.sweep_p, log), os);
    t = os.str();
  }
  EXPECT_EQ(tables[0], tables[1]);
  EXPECT_EQ(tables[0].rfind("s1,s2,p,q,Q,eps_s", 0), 0u) << tables[0];
}

TEST(Commands, ExitCodes) {
  RunConfig cfg;
  cfg.problem = "custom";
  cfg.sweep_p = std::vector<int>{};
  cfg = resolve_config(cfg);
  std::ostringstream out, err;
  EXPECT_EQ(cmd_bench(cfg, out, err), kExitUsage) << "empty sweep";
  EXPECT_EQ(cmd_verify(cfg, out, err), kExitUsage) << "no manufactured solution";
  cfg.sweep_p.reset();
  cfg.s1 = cfg.s2 = 1;
  cfg.out = (std::filesystem::temp_directory_path() / "cnisp_cli_run").string();
  EXPECT_EQ(cmd_run(cfg, out, err), kExitOk) << err.str();
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(cfg.out) / "table.csv"));
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(cfg.out) / "report.json"));
  const auto blocker = temp_file("cnisp_cli_blocker", "x");
  cfg.out = (blocker / "sub").string();
  EXPECT_EQ(cmd_run(cfg, out, err), kExitIo);
}

}  // namespace
}  // namespace cnisp
