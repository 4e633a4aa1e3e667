#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cnisp/boussinesq.hpp"
#include "cnisp/coupling.hpp"
#include "cnisp/poisson.hpp"

namespace cnisp {

struct MmsPoint {
  int m = 0;
  double dx = 0.0;
  double mean_error = 0.0;
  int samples = 0;   // samples that entered the mean
  int excluded = 0;  // samples dropped after a BGS failure
};

struct MmsResult {
  std::vector<MmsPoint> points;
  double slope = 0.0;
  std::vector<std::string> warnings;
};

// Least-squares slope of log(err) against log(dx).
double fit_loglog_slope(const std::vector<double>& dx, const std::vector<double>& err);

// Sample-averaged manufactured-solution error per mesh size. The same
// uniform parameter draws are used at every m. A sample whose BGS solve fails
// is dropped with a warning while fewer than 10% fail; otherwise the run fails.
MmsResult mms_poisson(const PoissonParams& base, const std::vector<int>& ms, int samples, std::uint64_t seed,
                      const BgsConfig& bgs);
MmsResult mms_boussinesq(const BoussinesqParams& base, const std::vector<int>& ms, int samples, std::uint64_t seed,
                         const BgsConfig& bgs);

}  // namespace cnisp
