#include "cnisp/mms.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

#include "cnisp/errors.hpp"
#include "cnisp/gpc.hpp"
#include "cnisp/parallel.hpp"

namespace cnisp {

double fit_loglog_slope(const std::vector<double>& dx, const std::vector<double>& err) {
  if (dx.size() != err.size()) throw InvalidArgument("fit_loglog_slope: size mismatch");
  if (dx.size() < 2) throw InvalidArgument("convergence slope needs at least two mesh sizes");
  const double n = static_cast<double>(dx.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t k = 0; k < dx.size(); ++k) {
    if (!(dx[k] > 0.0) || !(err[k] > 0.0)) throw DomainError("fit_loglog_slope: non-positive value");
    const double x = std::log(dx[k]);
    const double y = std::log(err[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) throw InvalidArgument("fit_loglog_slope: mesh sizes must differ");
  return (n * sxy - sx * sy) / den;
}

namespace {

// Runs one sample per index; returns the error or NaN when BGS failed.
MmsPoint average(int m, double dx, int samples, const std::function<double(int)>& sample,
                 std::vector<std::string>& warnings) {
  std::vector<double> errs(static_cast<size_t>(samples), 0.0);
  std::vector<std::string> notes(static_cast<size_t>(samples));
  parallel_for(static_cast<Index>(samples), [&](Index k) {
    try {
      errs[static_cast<size_t>(k)] = sample(static_cast<int>(k));
    } catch (const NumericalError& e) {
      errs[static_cast<size_t>(k)] = std::nan("");
      notes[static_cast<size_t>(k)] = e.what();
    }
  });
  MmsPoint pt;
  pt.m = m;
  pt.dx = dx;
  double sum = 0.0;
  for (int k = 0; k < samples; ++k) {
    if (std::isnan(errs[static_cast<size_t>(k)])) {
      ++pt.excluded;
      std::ostringstream os;
      os << "m=" << m << " sample " << k << " excluded: " << notes[static_cast<size_t>(k)];
      warnings.push_back(os.str());
    } else {
      sum += errs[static_cast<size_t>(k)];
      ++pt.samples;
    }
  }
  if (pt.samples == 0 || pt.excluded * 10 >= samples) {
    std::ostringstream os;
    os << "manufactured-solution study failed at m=" << m << ": " << pt.excluded << " of " << samples
       << " samples did not converge";
    throw NumericalError(os.str());
  }
  pt.mean_error = sum / pt.samples;
  return pt;
}

MmsResult finish(MmsResult r) {
  std::vector<double> dx, err;
  for (const auto& p : r.points) {
    dx.push_back(p.dx);
    err.push_back(p.mean_error);
  }
  r.slope = fit_loglog_slope(dx, err);
  return r;
}

void check_inputs(const std::vector<int>& ms, int samples) {
  if (ms.size() < 2) throw InvalidArgument("convergence slope needs at least two mesh sizes");
  if (samples < 1) throw InvalidArgument("manufactured-solution study needs at least one sample");
}

}  // namespace

MmsResult mms_poisson(const PoissonParams& base, const std::vector<int>& ms, int samples, std::uint64_t seed,
                      const BgsConfig& bgs) {
  check_inputs(ms, samples);
  const MatrixXd xi = uniform_samples(samples, base.s1 + base.s2, seed);
  MmsResult r;
  for (int m : ms) {
    PoissonParams p = base;
    p.m = m;
    p.manufactured = true;
    auto prob = std::make_shared<const PoissonProblem>(p);
    const auto mods = poisson_modules(prob);
    r.points.push_back(average(m, prob->spacing(), samples, [&](int k) {
      const VectorXd x1 = xi.row(k).head(p.s1).transpose();
      const VectorXd x2 = xi.row(k).tail(p.s2).transpose();
      const BgsResult res = bgs_solve(mods.first, mods.second, x1, x2, bgs);
      return prob->manufactured_error(res.u1, res.u2);
    }, r.warnings));
  }
  return finish(std::move(r));
}

MmsResult mms_boussinesq(const BoussinesqParams& base, const std::vector<int>& ms, int samples, std::uint64_t seed,
                         const BgsConfig& bgs) {
  check_inputs(ms, samples);
  const MatrixXd xi = uniform_samples(samples, base.s1 + base.s2, seed);
  MmsResult r;
  for (int m : ms) {
    BoussinesqParams p = base;
    p.m = m;
    auto prob = std::make_shared<const BoussinesqProblem>(p);
    r.points.push_back(average(m, prob->spacing(), samples, [&](int k) {
      const VectorXd x1 = xi.row(k).head(p.s1).transpose();
      const VectorXd x2 = xi.row(k).tail(p.s2).transpose();
      auto forcing = std::make_shared<const BoussinesqForcing>(prob->manufactured_forcing(x1, x2));
      const auto mods = boussinesq_modules(prob, forcing);
      const BgsResult res = bgs_solve(mods.first, mods.second, x1, x2, bgs);
      return prob->manufactured_error(res.u1, res.u2, x2);
    }, r.warnings));
  }
  return finish(std::move(r));
}

}  // namespace cnisp
