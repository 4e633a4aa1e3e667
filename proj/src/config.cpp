#include "cnisp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace cnisp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw ConfigError(key + ": trailing characters in '" + v + "'");
    return out;
  } catch (const std::logic_error&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_int(key, item));
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

bool is_poisson_family(const std::string& problem) { return problem == "poisson" || problem == "mms-poisson"; }
bool is_boussinesq_family(const std::string& problem) {
  return problem == "boussinesq" || problem == "mms-boussinesq";
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "run.problem") c.problem = v;
  else if (key == "run.method") c.method = v;
  else if (key == "run.seed") c.seed = to_u64(key, v);
  else if (key == "run.threads") c.threads = to_int(key, v);
  else if (key == "run.out") c.out = v;
  else if (key == "run.dry_run") c.dry_run = to_bool(key, v);
  else if (key == "stochastic.s") c.s1 = c.s2 = to_int(key, v);
  else if (key == "stochastic.s1") c.s1 = to_int(key, v);
  else if (key == "stochastic.s2") c.s2 = to_int(key, v);
  else if (key == "stochastic.p") c.p = to_int(key, v);
  else if (key == "stochastic.q") c.q = to_int(key, v);
  else if (key == "stochastic.sweep_p") c.sweep_p = to_int_list(key, v);
  else if (key == "stochastic.sweep_s") c.sweep_s = to_int_list(key, v);
  else if (key == "stochastic.reference_order") c.reference_order = v == "auto" ? -1 : v == "none" ? 0 : to_int(key, v);
  else if (key == "reduction.eps_dim1") c.eps_dim[0] = to_double(key, v);
  else if (key == "reduction.eps_dim2") c.eps_dim[1] = to_double(key, v);
  else if (key == "reduction.eps_ord1") c.eps_ord[0] = to_double(key, v);
  else if (key == "reduction.eps_ord2") c.eps_ord[1] = to_double(key, v);
  else if (key == "bgs.tol") c.bgs_tol = to_double(key, v);
  else if (key == "bgs.relaxation") c.relaxation = to_double(key, v);
  else if (key == "bgs.max_iters") c.bgs_max_iters = to_int(key, v);
  else if (key == "nisp.tol") c.nisp_tol = to_double(key, v);
  else if (key == "nisp.max_iters") c.nisp_max_iters = to_int(key, v);
  else if (key == "mesh.m") c.m = to_int(key, v);
  else if (key == "output.kde_samples") c.kde_samples = to_int(key, v);
  else if (key == "output.kde_points") c.kde_points = to_int(key, v);
  else if (key == "verify.m") c.verify_m = to_int_list(key, v);
  else if (key == "verify.samples") c.verify_samples = to_int(key, v);
  else throw ConfigError("unknown key '" + key + "'");
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    try {
      set_config_value(cfg, section + "." + key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

RunConfig resolve_config(RunConfig c) {
  static const std::vector<std::string> problems{"poisson", "boussinesq", "mms-poisson", "mms-boussinesq", "custom"};
  if (std::find(problems.begin(), problems.end(), c.problem) == problems.end())
    throw ConfigError("run.problem: unknown problem '" + c.problem + "'");
  if (c.method != "standard" && c.method != "reduced" && c.method != "both")
    throw ConfigError("run.method: expected standard, reduced or both, got '" + c.method + "'");
  const bool pois = is_poisson_family(c.problem);
  const bool bous = is_boussinesq_family(c.problem);
  if (!c.relaxation) c.relaxation = pois ? 0.9 : 1.0;
  if (!c.m) c.m = pois ? 11 : 16;
  if (c.verify_m.empty()) c.verify_m = bous ? std::vector<int>{8, 16, 32} : std::vector<int>{11, 21, 41};
  if (!c.verify_samples) c.verify_samples = bous ? 5 : 10;
  if (!c.q) c.q = c.p;

  if (c.s1 < 1 || c.s2 < 1) throw ConfigError("stochastic.s1/s2: must be positive");
  if (c.p < 0) throw ConfigError("stochastic.p: must be non-negative");
  if (*c.q < c.p) throw ConfigError("stochastic.q: level must be >= order p");
  for (int p : c.sweep_p.value_or(std::vector<int>{}))
    if (p < 0) throw ConfigError("stochastic.sweep_p: orders must be non-negative");
  for (int s : c.sweep_s)
    if (s < 1) throw ConfigError("stochastic.sweep_s: dimensions must be positive");
  if (c.reference_order < -1) throw ConfigError("stochastic.reference_order: expected auto, none or an order");
  for (int i = 0; i < 2; ++i) {
    if (!(c.eps_dim[i] > 0.0 && c.eps_dim[i] < 1.0)) throw ConfigError("reduction.eps_dim: must lie in (0,1)");
    if (!(c.eps_ord[i] > 0.0 && c.eps_ord[i] < 1.0)) throw ConfigError("reduction.eps_ord: must lie in (0,1)");
  }
  if (!(c.bgs_tol > 0.0 && c.bgs_tol < 1.0)) throw ConfigError("bgs.tol: must lie in (0,1)");
  if (!(*c.relaxation > 0.0 && *c.relaxation <= 1.0)) throw ConfigError("bgs.relaxation: must lie in (0,1]");
  if (c.bgs_max_iters < 1) throw ConfigError("bgs.max_iters: must be positive");
  if (!(c.nisp_tol > 0.0 && c.nisp_tol < 1.0)) throw ConfigError("nisp.tol: must lie in (0,1)");
  if (c.nisp_max_iters < 1) throw ConfigError("nisp.max_iters: must be positive");
  if (*c.m < 2) throw ConfigError("mesh.m: must be at least 2");
  if (c.kde_samples < 2) throw ConfigError("output.kde_samples: must be at least 2");
  if (c.kde_points < 2) throw ConfigError("output.kde_points: must be at least 2");
  if (*c.verify_samples < 1) throw ConfigError("verify.samples: must be positive");
  if (c.threads < 0) throw ConfigError("run.threads: must be non-negative");
  return c;
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[run]\nproblem = " << c.problem << "\nmethod = " << c.method << "\nseed = " << c.seed
     << "\nthreads = " << c.threads << "\nout = " << c.out << "\n\n";
  os << "[stochastic]\ns1 = " << c.s1 << "\ns2 = " << c.s2 << "\np = " << c.p << "\n";
  if (c.q) os << "q = " << *c.q << "\n";
  if (c.sweep_p) os << "sweep_p = " << join(*c.sweep_p) << "\n";
  if (!c.sweep_s.empty()) os << "sweep_s = " << join(c.sweep_s) << "\n";
  os << "reference_order = "
     << (c.reference_order == -1 ? std::string("auto")
                                 : c.reference_order == 0 ? std::string("none") : std::to_string(c.reference_order))
     << "\n\n";
  os << "[reduction]\neps_dim1 = " << num(c.eps_dim[0]) << "\neps_dim2 = " << num(c.eps_dim[1])
     << "\neps_ord1 = " << num(c.eps_ord[0]) << "\neps_ord2 = " << num(c.eps_ord[1]) << "\n\n";
  os << "[bgs]\ntol = " << num(c.bgs_tol) << "\n";
  if (c.relaxation) os << "relaxation = " << num(*c.relaxation) << "\n";
  os << "max_iters = " << c.bgs_max_iters << "\n\n";
  os << "[nisp]\ntol = " << num(c.nisp_tol) << "\nmax_iters = " << c.nisp_max_iters << "\n\n";
  if (c.m) os << "[mesh]\nm = " << *c.m << "\n\n";
  os << "[output]\nkde_samples = " << c.kde_samples << "\nkde_points = " << c.kde_points << "\n\n";
  os << "[verify]\n";
  if (!c.verify_m.empty()) os << "m = " << join(c.verify_m) << "\n";
  if (c.verify_samples) os << "samples = " << *c.verify_samples << "\n";
  return os.str();
}

}  // namespace cnisp
