#include "cnisp/kl.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "cnisp/errors.hpp"

namespace cnisp {

namespace {

constexpr double kPi = std::numbers::pi;

// Bisection on a bracket with a sign change; the functions here are
// monotone inside their brackets, so the root is unique.
double bisect(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a);
  double fb = f(b);
  if (!(fa * fb < 0.0)) throw NumericalError("kl root search: no sign change in bracket");
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
    const double c = 0.5 * (a + b);
    const double fc = f(c);
    if (fc == 0.0) return c;
    if ((fc < 0.0) == (fa < 0.0)) {
      a = c;
      fa = fc;
    } else {
      b = c;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<double> kl_roots(double l, int count) {
  if (!(l > 0.0)) throw InvalidArgument("kl_roots: correlation length must be positive");
  std::vector<double> roots;
  roots.reserve(static_cast<size_t>(std::max(count, 0)));
  auto f = [l](double z) { return l * z + std::tan(0.5 * z); };
  for (int j = 1; j <= count; ++j) {
    const double a = (2 * j - 1) * kPi;
    const double b = (2 * j + 1) * kPi;
    const double eps = 1e-9;
    const double z = bisect(f, a + eps, b - eps);
    if (std::abs(f(z)) > 1e-10 * std::max(1.0, l * z))
      throw NumericalError("kl_roots: root refinement did not converge");
    roots.push_back(z);
  }
  return roots;
}

std::vector<KlMode> kl_modes(double l, int count) {
  if (!(l > 0.0)) throw InvalidArgument("kl_modes: correlation length must be positive");
  std::vector<KlMode> modes;
  for (int j = 1; j <= count; ++j) {
    KlMode m;
    m.odd_function = (j % 2 == 0);
    const double a = (j - 1) * kPi + 1e-12;
    const double b = j * kPi - (m.odd_function ? 0.0 : 1e-12);
    if (m.odd_function) {
      m.zeta = bisect([l](double z) { return l * z + std::tan(0.5 * z); }, a, b);
    } else {
      m.zeta = bisect([l](double z) { return 1.0 - l * z * std::tan(0.5 * z); }, a, b);
    }
    const double z = m.zeta;
    m.eigenvalue = 2.0 * l / (1.0 + l * l * z * z);
    const double norm = m.odd_function ? z - std::sin(z) : z + std::sin(z);
    m.amplitude = 2.0 * std::sqrt(l * z / (1.0 + l * l * z * z)) / std::sqrt(norm);
    modes.push_back(m);
  }
  return modes;
}

double kl_mode_value(const KlMode& m, double t) {
  return m.amplitude * (m.odd_function ? std::sin(m.zeta * t) : std::cos(m.zeta * t));
}

double kl_mode_deriv(const KlMode& m, double t) {
  return m.amplitude * m.zeta * (m.odd_function ? std::cos(m.zeta * t) : -std::sin(m.zeta * t));
}

double kl_mode_deriv2(const KlMode& m, double t) { return -m.zeta * m.zeta * kl_mode_value(m, t); }

KlField::KlField(double mean, double scale, double corr_len, int terms, std::vector<Interval> box)
    : mean_(mean), scale_(scale), corr_len_(corr_len), terms_(terms), box_(std::move(box)) {
  if (terms < 0) throw InvalidArgument("KlField: negative term count");
  if (box_.empty()) throw InvalidArgument("KlField: empty domain");
  for (const auto& iv : box_) {
    if (!(iv.hi > iv.lo)) throw InvalidArgument("KlField: degenerate interval");
    modes_.push_back(kl_modes(corr_len / (iv.hi - iv.lo), std::max(terms, 1)));
  }
  // Enumerate mode tuples and keep the `terms` largest products.
  const int n = spatial_dim();
  std::vector<std::vector<int>> all;
  std::vector<int> cur(static_cast<size_t>(n), 0);
  const int per = std::max(terms, 1);
  for (;;) {
    all.push_back(cur);
    int k = n - 1;
    while (k >= 0 && ++cur[static_cast<size_t>(k)] == per) cur[static_cast<size_t>(k--)] = 0;
    if (k < 0) break;
  }
  auto product = [&](const std::vector<int>& t) {
    double v = 1.0;
    for (int k = 0; k < n; ++k) v *= modes_[static_cast<size_t>(k)][static_cast<size_t>(t[static_cast<size_t>(k)])].eigenvalue;
    return v;
  };
  auto total = [](const std::vector<int>& t) {
    int s = 0;
    for (int e : t) s += e;
    return s;
  };
  std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    const double pa = product(a);
    const double pb = product(b);
    if (std::abs(pa - pb) > 1e-14 * std::max(pa, pb)) return pa > pb;
    if (total(a) != total(b)) return total(a) < total(b);
    return a < b;
  });
  tuples_.assign(all.begin(), all.begin() + terms);
}

double KlField::term_eigenvalue(int j) const {
  double v = 1.0;
  for (int k = 0; k < spatial_dim(); ++k)
    v *= modes_[static_cast<size_t>(k)][static_cast<size_t>(tuples_[static_cast<size_t>(j)][static_cast<size_t>(k)])].eigenvalue;
  return v;
}

double KlField::local(int k, double x) const {
  const Interval& iv = box_[static_cast<size_t>(k)];
  return (x - 0.5 * (iv.lo + iv.hi)) / (iv.hi - iv.lo);
}

double KlField::factor(int j, int k, const double* x, int order) const {
  const KlMode& m = modes_[static_cast<size_t>(k)][static_cast<size_t>(tuples_[static_cast<size_t>(j)][static_cast<size_t>(k)])];
  const double t = local(k, x[k]);
  const double len = box_[static_cast<size_t>(k)].hi - box_[static_cast<size_t>(k)].lo;
  switch (order) {
    case 0:
      return kl_mode_value(m, t);
    case 1:
      return kl_mode_deriv(m, t) / len;
    default:
      return kl_mode_deriv2(m, t) / (len * len);
  }
}

double KlField::gamma(int j, const double* x) const {
  double v = 1.0;
  for (int k = 0; k < spatial_dim(); ++k) v *= factor(j, k, x, 0);
  return v;
}

double KlField::gamma_deriv(int j, int k, const double* x) const {
  double v = 1.0;
  for (int c = 0; c < spatial_dim(); ++c) v *= factor(j, c, x, c == k ? 1 : 0);
  return v;
}

double KlField::gamma_deriv2(int j, int k, const double* x) const {
  double v = 1.0;
  for (int c = 0; c < spatial_dim(); ++c) v *= factor(j, c, x, c == k ? 2 : 0);
  return v;
}

double KlField::coefficient() const { return std::sqrt(3.0) * scale_; }

double KlField::eval(const double* x, const Eigen::VectorXd& xi) const {
  if (xi.size() < terms_) throw InvalidArgument("KlField: too few random parameters");
  double acc = 0.0;
  for (int j = 0; j < terms_; ++j) acc += gamma(j, x) * xi(j);
  return mean_ + coefficient() * acc;
}

double KlField::deriv(int k, const double* x, const Eigen::VectorXd& xi) const {
  double acc = 0.0;
  for (int j = 0; j < terms_; ++j) acc += gamma_deriv(j, k, x) * xi(j);
  return coefficient() * acc;
}

double KlField::deriv2(int k, const double* x, const Eigen::VectorXd& xi) const {
  double acc = 0.0;
  for (int j = 0; j < terms_; ++j) acc += gamma_deriv2(j, k, x) * xi(j);
  return coefficient() * acc;
}

}  // namespace cnisp
