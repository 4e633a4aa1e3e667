#include "cnisp/boussinesq.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>
#include <vector>

#include "cnisp/errors.hpp"

namespace cnisp {

namespace {

constexpr double kPi = std::numbers::pi;
using Triplet = Eigen::Triplet<double>;

enum class Stencil { gradient, laplacian };

// Central difference along x (dir 0) or y (dir 1) on an m x m cell grid.
// A missing neighbour is replaced by a ghost value ghost_lo/hi * u_P.
SparseMatrix central(int m, double h, int dir, Stencil kind, double ghost_lo, double ghost_hi) {
  std::vector<Triplet> tr;
  auto idx = [m](int i, int j) { return static_cast<Index>(j) * m + i; };
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const Index p = idx(i, j);
      const int pos = dir == 0 ? i : j;
      const bool has_lo = pos > 0;
      const bool has_hi = pos < m - 1;
      const Index lo = dir == 0 ? idx(i - 1, j) : idx(i, j - 1);
      const Index hi = dir == 0 ? idx(i + 1, j) : idx(i, j + 1);
      if (kind == Stencil::gradient) {
        const double c = 0.5 / h;
        if (has_hi) tr.emplace_back(p, hi, c); else tr.emplace_back(p, p, c * ghost_hi);
        if (has_lo) tr.emplace_back(p, lo, -c); else tr.emplace_back(p, p, -c * ghost_lo);
      } else {
        const double c = 1.0 / (h * h);
        tr.emplace_back(p, p, -2.0 * c);
        if (has_hi) tr.emplace_back(p, hi, c); else tr.emplace_back(p, p, c * ghost_hi);
        if (has_lo) tr.emplace_back(p, lo, c); else tr.emplace_back(p, p, c * ghost_lo);
      }
    }
  }
  SparseMatrix a(static_cast<Index>(m) * m, static_cast<Index>(m) * m);
  a.setFromTriplets(tr.begin(), tr.end());
  return a;
}

SparseMatrix diag(const VectorXd& d) {
  SparseMatrix a(d.size(), d.size());
  a.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Index k = 0; k < d.size(); ++k) a.insert(k, k) = d(k);
  return a;
}

void append_block(std::vector<Triplet>& tr, const SparseMatrix& a, Index r0, Index c0, Index skip_row) {
  for (Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      if (r0 + it.row() != skip_row) tr.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
}

}  // namespace

BoussinesqProblem::BoussinesqProblem(const BoussinesqParams& params) : params_(params) {
  if (params_.m < 3) throw InvalidArgument("BoussinesqProblem: need at least 3 cells per side");
  if (params_.s1 < 0 || params_.s2 < 0) throw InvalidArgument("BoussinesqProblem: negative stochastic dimension");
  ra_ = KlField(params_.ra_mean, params_.delta_ra, params_.l_ra, params_.s1, {Interval{0.0, 1.0}, Interval{0.0, 1.0}});
  h_ = KlField(0.0, params_.delta_h, params_.l_h, params_.s2, {Interval{0.0, 1.0}});
  build_operators();
}

void BoussinesqProblem::build_operators() {
  const int m = params_.m;
  const double h = spacing();
  dx_u_ = central(m, h, 0, Stencil::gradient, -1.0, -1.0);
  dy_u_ = central(m, h, 1, Stencil::gradient, -1.0, -1.0);
  lap_u_ = central(m, h, 0, Stencil::laplacian, -1.0, -1.0) + central(m, h, 1, Stencil::laplacian, -1.0, -1.0);
  // T ghosts: 2 T_h - T_P on the left (constant part added separately),
  // -T_P on the right, T_P on the adiabatic walls.
  dx_t_ = central(m, h, 0, Stencil::gradient, -1.0, -1.0);
  dy_t_ = central(m, h, 1, Stencil::gradient, 1.0, 1.0);
  lap_t_ = central(m, h, 0, Stencil::laplacian, -1.0, -1.0) + central(m, h, 1, Stencil::laplacian, 1.0, 1.0);
  gx_p_ = central(m, h, 0, Stencil::gradient, 1.0, 1.0);
  gy_p_ = central(m, h, 1, Stencil::gradient, 1.0, 1.0);

  const Index n = cells();
  std::vector<Triplet> lp, dvx, dvy, wu, wv;
  const double c2 = 1.0 / (h * h);
  const double cf = 0.5 / h;
  // Wall flux of grad p + F equals Pr (lap u).n, written in curl-curl form:
  // Pr d/dt (d u_t / dn) with the inward normal derivative of the tangential
  // velocity taken one-sided from the first two cell centres.
  const double wall[2] = {3.0, -1.0 / 3.0};
  const double cw = params_.pr / (2.0 * h * h * h);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const Index p = cell(i, j);
      if (i < m - 1) {
        lp.emplace_back(p, cell(i + 1, j), c2);
        lp.emplace_back(p, p, -c2);
        dvx.emplace_back(p, p, cf);
        dvx.emplace_back(p, cell(i + 1, j), cf);
      }
      if (i > 0) {
        lp.emplace_back(p, cell(i - 1, j), c2);
        lp.emplace_back(p, p, -c2);
        dvx.emplace_back(p, p, -cf);
        dvx.emplace_back(p, cell(i - 1, j), -cf);
      }
      if (j < m - 1) {
        lp.emplace_back(p, cell(i, j + 1), c2);
        lp.emplace_back(p, p, -c2);
        dvy.emplace_back(p, p, cf);
        dvy.emplace_back(p, cell(i, j + 1), cf);
      }
      if (j > 0) {
        lp.emplace_back(p, cell(i, j - 1), c2);
        lp.emplace_back(p, p, -c2);
        dvy.emplace_back(p, p, -cf);
        dvy.emplace_back(p, cell(i, j - 1), -cf);
      }
      // Tangential derivative along the wall, reflected past the corners
      // where the wall-normal derivative of a no-slip velocity vanishes.
      auto along = [&](int t, std::vector<std::pair<int, double>>& out) {
        if (t + 1 < m) out.emplace_back(t + 1, 1.0); else out.emplace_back(t, -1.0);
        if (t > 0) out.emplace_back(t - 1, -1.0); else out.emplace_back(t, 1.0);
      };
      std::vector<std::pair<int, double>> tj, ti;
      along(j, tj);
      along(i, ti);
      for (int k = 0; k < 2; ++k) {
        if (i == 0)
          for (auto [jj, c] : tj) wv.emplace_back(p, cell(k, jj), cw * c * wall[k]);
        if (i == m - 1)
          for (auto [jj, c] : tj) wv.emplace_back(p, cell(m - 1 - k, jj), cw * c * wall[k]);
        if (j == 0)
          for (auto [ii, c] : ti) wu.emplace_back(p, cell(ii, k), cw * c * wall[k]);
        if (j == m - 1)
          for (auto [ii, c] : ti) wu.emplace_back(p, cell(ii, m - 1 - k), cw * c * wall[k]);
      }
    }
  }
  auto make = [n](std::vector<Triplet>& tr) {
    SparseMatrix a(n, n);
    a.setFromTriplets(tr.begin(), tr.end());
    return a;
  };
  lap_p_ = make(lp);
  div_x_ = make(dvx);
  div_y_ = make(dvy);
  wall_u_ = make(wu);
  wall_v_ = make(wv);
}

VectorXd BoussinesqProblem::rayleigh(const VectorXd& xi1) const {
  const int m = params_.m;
  VectorXd ra(cells());
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const double x[2] = {center(i), center(j)};
      ra(cell(i, j)) = ra_.eval(x, xi1);
    }
  return ra;
}

double BoussinesqProblem::hot_wall(double y, const VectorXd& xi2, int derivative) const {
  const double* x = &y;
  const double s = std::sin(kPi * y);
  const double sq = s * s;
  const double d1 = kPi * std::sin(2.0 * kPi * y);
  const double d2 = 2.0 * kPi * kPi * std::cos(2.0 * kPi * y);
  switch (derivative) {
    case 0:
      return params_.th_mean + h_.eval(x, xi2) * sq;
    case 1:
      return h_.deriv(0, x, xi2) * sq + h_.eval(x, xi2) * d1;
    default:
      return h_.deriv2(0, x, xi2) * sq + 2.0 * h_.deriv(0, x, xi2) * d1 + h_.eval(x, xi2) * d2;
  }
}

VectorXd BoussinesqProblem::residual_flow(const VectorXd& u1, const VectorXd& t, const VectorXd& xi1,
                                          const BoussinesqForcing& f) const {
  const Index n = cells();
  if (u1.size() != 3 * n || t.size() != n) throw InvalidArgument("BoussinesqProblem: state size mismatch");
  const double pr = params_.pr;
  const VectorXd u = u1.segment(0, n);
  const VectorXd v = u1.segment(n, n);
  const VectorXd p = u1.segment(2 * n, n);
  VectorXd fx = u.cwiseProduct(dx_u_ * u) + v.cwiseProduct(dy_u_ * u);
  VectorXd fy = u.cwiseProduct(dx_u_ * v) + v.cwiseProduct(dy_u_ * v) - pr * rayleigh(xi1).cwiseProduct(t);
  if (!f.empty()) {
    fx += f.fu;
    fy += f.fv;
  }
  VectorXd r(3 * n);
  r.segment(0, n) = fx + gx_p_ * p - pr * (lap_u_ * u);
  r.segment(n, n) = fy + gy_p_ * p - pr * (lap_u_ * v);
  r.segment(2 * n, n) = lap_p_ * p + div_x_ * fx + div_y_ * fy + wall_u_ * u + wall_v_ * v;
  r(2 * n) = p(0);
  return r;
}

SparseMatrix BoussinesqProblem::jacobian_flow(const VectorXd& u1) const {
  const Index n = cells();
  const double pr = params_.pr;
  const VectorXd u = u1.segment(0, n);
  const VectorXd v = u1.segment(n, n);
  const SparseMatrix du = diag(u);
  const SparseMatrix dv = diag(v);
  const SparseMatrix adv = du * dx_u_ + dv * dy_u_;
  const SparseMatrix jxu = SparseMatrix(diag(dx_u_ * u) + adv);
  const SparseMatrix jxv = diag(dy_u_ * u);
  const SparseMatrix jyu = diag(dx_u_ * v);
  const SparseMatrix jyv = SparseMatrix(adv + diag(dy_u_ * v));

  std::vector<Triplet> tr;
  append_block(tr, SparseMatrix(jxu - pr * lap_u_), 0, 0, -1);
  append_block(tr, jxv, 0, n, -1);
  append_block(tr, gx_p_, 0, 2 * n, -1);
  append_block(tr, jyu, n, 0, -1);
  append_block(tr, SparseMatrix(jyv - pr * lap_u_), n, n, -1);
  append_block(tr, gy_p_, n, 2 * n, -1);
  append_block(tr, SparseMatrix(div_x_ * jxu + div_y_ * jyu + wall_u_), 2 * n, 0, 2 * n);
  append_block(tr, SparseMatrix(div_x_ * jxv + div_y_ * jyv + wall_v_), 2 * n, n, 2 * n);
  append_block(tr, lap_p_, 2 * n, 2 * n, 2 * n);
  tr.emplace_back(2 * n, 2 * n, 1.0);
  SparseMatrix j(3 * n, 3 * n);
  j.setFromTriplets(tr.begin(), tr.end());
  return j;
}

VectorXd BoussinesqProblem::newton_flow(const VectorXd& u1, const VectorXd& t, const VectorXd& xi1,
                                        const BoussinesqForcing& f) const {
  const VectorXd r = residual_flow(u1, t, xi1, f);
  const SparseMatrix j = jacobian_flow(u1);
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(j);
  if (lu.info() != Eigen::Success) throw NumericalError("BoussinesqProblem: singular flow Jacobian");
  const VectorXd step = lu.solve(r);
  if (lu.info() != Eigen::Success || !step.allFinite()) throw NumericalError("BoussinesqProblem: flow Newton solve failed");
  return u1 - step;
}

VectorXd BoussinesqProblem::residual_energy(const VectorXd& t, const VectorXd& u1, const VectorXd& xi2,
                                            const BoussinesqForcing& f) const {
  const Index n = cells();
  if (u1.size() < 2 * n || t.size() != n) throw InvalidArgument("BoussinesqProblem: state size mismatch");
  const int m = params_.m;
  const double h = spacing();
  const VectorXd u = u1.segment(0, n);
  const VectorXd v = u1.segment(n, n);
  VectorXd tx = dx_t_ * t;
  VectorXd lap = lap_t_ * t;
  for (int j = 0; j < m; ++j) {
    const double th = hot_wall(center(j), xi2);
    tx(cell(0, j)) -= th / h;
    lap(cell(0, j)) += 2.0 * th / (h * h);
  }
  VectorXd r = u.cwiseProduct(tx) + v.cwiseProduct(dy_t_ * t) - lap;
  if (!f.empty()) r += f.ft;
  return r;
}

VectorXd BoussinesqProblem::solve_energy(const VectorXd& u1, const VectorXd& xi2, const BoussinesqForcing& f) const {
  const Index n = cells();
  if (u1.size() < 2 * n) throw InvalidArgument("BoussinesqProblem: velocity size mismatch");
  const VectorXd u = u1.segment(0, n);
  const VectorXd v = u1.segment(n, n);
  const SparseMatrix a = SparseMatrix(diag(u) * dx_t_ + diag(v) * dy_t_ - lap_t_);
  const VectorXd r0 = residual_energy(VectorXd::Zero(n), u1, xi2, f);
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericalError("BoussinesqProblem: singular energy operator");
  const VectorXd t = lu.solve(VectorXd(-r0));
  if (lu.info() != Eigen::Success || !t.allFinite()) throw NumericalError("BoussinesqProblem: energy solve failed");
  return t;
}

std::pair<double, double> BoussinesqProblem::qoi(const VectorXd& u1, const VectorXd& t) const {
  const Index n = cells();
  const double a = spacing() * spacing();
  const double k = 0.5 * (u1.segment(0, n).squaredNorm() + u1.segment(n, n).squaredNorm()) * a;
  return {k, t.sum() * a};
}

double BoussinesqProblem::exact_u(double x, double y) {
  const double s = std::sin(kPi * x);
  return -s * s * std::sin(2.0 * kPi * y);
}

double BoussinesqProblem::exact_v(double x, double y) {
  const double s = std::sin(kPi * y);
  return std::sin(2.0 * kPi * x) * s * s;
}

double BoussinesqProblem::exact_p(double x, double y) { return std::cos(kPi * x) * std::cos(kPi * y); }

double BoussinesqProblem::exact_t(double x, double y, const VectorXd& xi2) const {
  return std::cos(0.5 * kPi * x) * hot_wall(y, xi2);
}

BoussinesqForcing BoussinesqProblem::manufactured_forcing(const VectorXd& xi1, const VectorXd& xi2) const {
  const int m = params_.m;
  const double pr = params_.pr;
  const double pi2 = kPi * kPi;
  const VectorXd ra = rayleigh(xi1);
  BoussinesqForcing f;
  f.fu.resize(cells());
  f.fv.resize(cells());
  f.ft.resize(cells());
  for (int j = 0; j < m; ++j) {
    const double y = center(j);
    const double th = hot_wall(y, xi2, 0);
    const double th1 = hot_wall(y, xi2, 1);
    const double th2 = hot_wall(y, xi2, 2);
    for (int i = 0; i < m; ++i) {
      const double x = center(i);
      const double sx = std::sin(kPi * x), sy = std::sin(kPi * y);
      const double s2x = std::sin(2 * kPi * x), s2y = std::sin(2 * kPi * y);
      const double c2x = std::cos(2 * kPi * x), c2y = std::cos(2 * kPi * y);
      const double u = exact_u(x, y), v = exact_v(x, y);
      const double ux = -kPi * s2x * s2y, uy = -2 * kPi * sx * sx * c2y;
      const double uxx = -2 * pi2 * c2x * s2y, uyy = 4 * pi2 * sx * sx * s2y;
      const double vx = 2 * kPi * c2x * sy * sy, vy = kPi * s2x * s2y;
      const double vxx = -4 * pi2 * s2x * sy * sy, vyy = 2 * pi2 * s2x * c2y;
      const double px = -kPi * sx * std::cos(kPi * y), py = -kPi * std::cos(kPi * x) * sy;
      const double cx = std::cos(0.5 * kPi * x), sxh = std::sin(0.5 * kPi * x);
      const double t = cx * th;
      const double tx = -0.5 * kPi * sxh * th, ty = cx * th1;
      const double txx = -0.25 * pi2 * cx * th, tyy = cx * th2;
      const Index k = cell(i, j);
      f.fu(k) = -(u * ux + v * uy + px - pr * (uxx + uyy));
      f.fv(k) = -(u * vx + v * vy + py - pr * (vxx + vyy) - pr * ra(k) * t);
      f.ft(k) = -(u * tx + v * ty - (txx + tyy));
    }
  }
  return f;
}

double BoussinesqProblem::manufactured_error(const VectorXd& u1, const VectorXd& t, const VectorXd& xi2) const {
  const int m = params_.m;
  const Index n = cells();
  VectorXd eu(n), ev(n), ep(n), et(n);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const Index k = cell(i, j);
      eu(k) = exact_u(center(i), center(j));
      ev(k) = exact_v(center(i), center(j));
      ep(k) = exact_p(center(i), center(j));
      et(k) = exact_t(center(i), center(j), xi2);
    }
  VectorXd p = u1.segment(2 * n, n);
  p.array() -= p.mean();
  ep.array() -= ep.mean();
  const double err = (u1.segment(0, n) - eu).squaredNorm() + (u1.segment(n, n) - ev).squaredNorm() +
                     (p - ep).squaredNorm() + (t - et).squaredNorm();
  const double ref = eu.squaredNorm() + ev.squaredNorm() + ep.squaredNorm() + et.squaredNorm();
  return std::sqrt(err / ref);
}

Gramian BoussinesqProblem::gramian(int i) const {
  const double a = spacing() * spacing();
  return Gramian::identity(i == 0 ? 3 * cells() : cells(), a);
}

std::pair<ModuleOperator, ModuleOperator> boussinesq_modules(std::shared_ptr<const BoussinesqProblem> prob,
                                                              std::shared_ptr<const BoussinesqForcing> forcing) {
  const Index n = prob->cells();
  const double a = prob->spacing() * prob->spacing();
  auto f = forcing ? forcing : std::make_shared<const BoussinesqForcing>();

  ModuleOperator m1;
  m1.name = "boussinesq-flow";
  m1.state_dim = 3 * n;
  m1.param_dim = prob->params().s1;
  m1.gramian = prob->gramian(0);
  m1.solve = [prob, f](const VectorXd& own, const VectorXd& t, const VectorXd& xi) {
    return prob->newton_flow(own, t, xi, *f);
  };
  m1.interface = [n](const VectorXd& u) -> VectorXd { return u.head(2 * n); };
  m1.coupling_dim = 2 * n;
  m1.coupling_gramian = Gramian::identity(2 * n, a);

  ModuleOperator m2;
  m2.name = "boussinesq-energy";
  m2.state_dim = n;
  m2.param_dim = prob->params().s2;
  m2.gramian = prob->gramian(1);
  m2.solve = [prob, f](const VectorXd&, const VectorXd& vel, const VectorXd& xi) {
    return prob->solve_energy(vel, xi, *f);
  };
  m2.coupling_dim = n;
  m2.coupling_gramian = Gramian::identity(n, a);
  return {m1, m2};
}

}  // namespace cnisp
