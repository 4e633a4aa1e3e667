#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cnisp/errors.hpp"

namespace cnisp {

// Bad key, value or syntax in a config file or flag.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Every setting of the command-line front end. Values left unset resolve to
// problem-dependent defaults in resolve_config.
struct RunConfig {
  std::string problem = "poisson";  // poisson | boussinesq | mms-poisson | mms-boussinesq | custom
  std::string method = "both";      // standard | reduced | both
  int s1 = 3;
  int s2 = 3;
  int p = 2;
  std::optional<int> q;  // default p
  // Orders and dimensions (s1 = s2) of the bench sweep; unset means the
  // single configured p and (s1, s2).
  std::optional<std::vector<int>> sweep_p;
  std::vector<int> sweep_s;
  // Reference order for the error columns: -1 means max p + 1, 0 switches
  // the reference off. The reference rule level equals its order, which
  // already integrates the degree-2p products exactly.
  int reference_order = -1;
  std::array<double, 2> eps_dim{1e-4, 1e-5};
  std::array<double, 2> eps_ord{1e-3, 1e-3};
  double bgs_tol = 1e-6;
  std::optional<double> relaxation;  // 0.9 for Poisson, 1.0 otherwise
  int bgs_max_iters = 200;
  double nisp_tol = 1e-8;
  int nisp_max_iters = 100;
  std::optional<int> m;  // 11 for Poisson, 16 for Boussinesq
  int kde_samples = 10000;
  int kde_points = 200;
  std::vector<int> verify_m;             // default {11,21,41} or {8,16,32}
  std::optional<int> verify_samples;     // default 10 or 5
  std::uint64_t seed = 12345;
  int threads = 0;
  std::string out = "out";
  bool dry_run = false;
};

// Sets one "section.key" entry from its text value.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Reads "[section]" headers, "key = value" lines and "#" comments into cfg.
// Errors name the file and line. A missing file raises IoError.
void load_config_file(const std::string& path, RunConfig& cfg);

// Fills problem-dependent defaults and checks ranges.
RunConfig resolve_config(RunConfig cfg);

bool is_poisson_family(const std::string& problem);
bool is_boussinesq_family(const std::string& problem);

// Resolved config in the file syntax, readable back by load_config_file.
std::string format_config(const RunConfig& cfg);

}  // namespace cnisp
