#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cnisp/config.hpp"
#include "cnisp/nisp.hpp"

namespace cnisp {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitIo = 2, kExitNumerical = 3 };

// Module pair of a configured problem plus its scalar outputs and a writer
// for mean/std fields.
struct ProblemSetup {
  std::string name;
  ModuleOperator m1;
  ModuleOperator m2;
  std::vector<std::string> qoi_names;
  std::function<std::vector<double>(const VectorXd& u1, const VectorXd& u2)> qoi;
  // CSV rows of mean and standard deviation per grid point.
  std::function<void(const CoeffMatrix& u1, const CoeffMatrix& u2, std::ostream& os)> write_moments;
};

ProblemSetup make_problem(const RunConfig& cfg, int s1, int s2);

struct SweepRow {
  int s1 = 0;
  int s2 = 0;
  int p = 0;
  int q = 0;
  Index rule_size = 0;
  std::optional<PropagationReport> standard;
  std::optional<PropagationReport> reduced;
  double eps_s = 0.0;  // NaN without a reference
  double eps_r = 0.0;
};

struct SweepReference {
  int s1 = 0;
  int s2 = 0;
  int order = 0;
  Index rule_size = 0;
  PropagationReport report;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepReference> references;
};

// Runs every (s, p) pair of the sweep with the configured methods. Each s
// shares one reference solution of order max p + 1 unless switched off.
// Rows completed before a failure stay in `partial`.
SweepResult run_sweep(const RunConfig& cfg, const std::vector<std::pair<int, int>>& dims, const std::vector<int>& ps,
                      std::ostream& log, SweepResult* partial = nullptr);

// Deterministic columns only; wall times go to timing.csv.
void write_table_csv(const SweepResult& r, std::ostream& os);
void write_timing_csv(const SweepResult& r, std::ostream& os);
void write_diagnostics_csv(const PropagationReport& r, std::ostream& os);

std::string report_to_json(const PropagationReport& r);
PropagationReport report_from_json(const std::string& text);

// Subcommands. Messages go to `out`, errors to `err`; the return value is
// the process exit code.
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace cnisp
