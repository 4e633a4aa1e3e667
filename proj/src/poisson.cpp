#include "cnisp/poisson.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>

#include "cnisp/errors.hpp"

namespace cnisp {

namespace {

constexpr double kPi = std::numbers::pi;
using Triplet = Eigen::Triplet<double>;

// Bilinear shape functions on [-1,1]^2 with corner order
// (0,0), (1,0), (0,1), (1,1) in local (ix, iy) offsets.
constexpr int kCornerX[4] = {0, 1, 0, 1};
constexpr int kCornerY[4] = {0, 0, 1, 1};

double shape(int a, double r, double s) {
  const double ra = kCornerX[a] ? 1.0 : -1.0;
  const double sa = kCornerY[a] ? 1.0 : -1.0;
  return 0.25 * (1.0 + ra * r) * (1.0 + sa * s);
}

void shape_grad(int a, double r, double s, double& dr, double& ds) {
  const double ra = kCornerX[a] ? 1.0 : -1.0;
  const double sa = kCornerY[a] ? 1.0 : -1.0;
  dr = 0.25 * ra * (1.0 + sa * s);
  ds = 0.25 * sa * (1.0 + ra * r);
}

// Laplacian and gradient of the manufactured solution.
double exact_lap(double x1, double x2) { return -1.25 * PoissonProblem::exact(x1, x2) * kPi * kPi; }

void exact_grad(double x1, double x2, double& g1, double& g2) {
  g1 = -0.5 / kPi * std::sin(0.5 * kPi * x1) * std::sin(kPi * x2);
  g2 = 1.0 / kPi * std::cos(0.5 * kPi * x1) * std::cos(kPi * x2);
}

}  // namespace

PoissonProblem::PoissonProblem(const PoissonParams& params) : params_(params) {
  if (params_.m < 3) throw InvalidArgument("PoissonProblem: need at least 3 nodes per side");
  if (params_.s1 < 0 || params_.s2 < 0) throw InvalidArgument("PoissonProblem: negative stochastic dimension");
  // Table values of delta are coefficients of variation: std = abar * delta.
  fields_[0] = KlField(params_.abar1, params_.abar1 * params_.delta1, params_.l1, params_.s1,
                       {Interval{-1.0, 0.0}, Interval{0.0, 1.0}});
  fields_[1] = KlField(params_.abar2, params_.abar2 * params_.delta2, params_.l2, params_.s2,
                       {Interval{0.0, 1.0}, Interval{0.0, 1.0}});
  assemble(0);
  assemble(1);
}

std::array<double, 2> PoissonProblem::node_coord(int i, int ix, int iy) const {
  const double h = spacing();
  return {(i == 0 ? -1.0 : 0.0) + ix * h, iy * h};
}

bool PoissonProblem::is_dirichlet(int i, int ix, int iy) const {
  const int last = params_.m - 1;
  if (iy == 0 || iy == last) return true;
  return i == 0 ? ix == 0 : ix == last;
}

double PoissonProblem::exact(double x1, double x2) {
  return std::cos(0.5 * kPi * x1) * std::sin(kPi * x2) / (kPi * kPi);
}

double PoissonProblem::source(int i, const double* x, const VectorXd& xi) const {
  if (!params_.manufactured) return i == 0 ? params_.b1 : params_.b2;
  const KlField& f = fields_[static_cast<size_t>(i)];
  double g1 = 0.0, g2 = 0.0;
  exact_grad(x[0], x[1], g1, g2);
  return -f.eval(x, xi) * exact_lap(x[0], x[1]) - f.deriv(0, x, xi) * g1 - f.deriv(1, x, xi) * g2;
}

void PoissonProblem::assemble(int i) {
  const int m = params_.m;
  const Index n = nodes();
  const double h = spacing();
  const KlField& field = fields_[static_cast<size_t>(i)];
  const int s = field.terms();
  const double gp = 1.0 / std::sqrt(3.0);
  const double det = 0.25 * h * h;

  auto& dir = dirichlet_[static_cast<size_t>(i)];
  dir.assign(static_cast<size_t>(n), 0);
  for (int iy = 0; iy < m; ++iy)
    for (int ix = 0; ix < m; ++ix) dir[static_cast<size_t>(node_index(ix, iy))] = is_dirichlet(i, ix, iy) ? 1 : 0;

  std::vector<std::vector<Triplet>> kt(static_cast<size_t>(s + 1));
  std::vector<Triplet> mt;
  std::vector<VectorXd> loads(static_cast<size_t>(s + 1), VectorXd::Zero(n));

  for (int ey = 0; ey < m - 1; ++ey) {
    for (int ex = 0; ex < m - 1; ++ex) {
      Index ids[4];
      for (int a = 0; a < 4; ++a) ids[a] = node_index(ex + kCornerX[a], ey + kCornerY[a]);
      const auto origin = node_coord(i, ex, ey);
      for (int qy = 0; qy < 2; ++qy) {
        for (int qx = 0; qx < 2; ++qx) {
          const double r = qx ? gp : -gp;
          const double sq = qy ? gp : -gp;
          const double x[2] = {origin[0] + 0.5 * h * (1.0 + r), origin[1] + 0.5 * h * (1.0 + sq)};
          double nval[4], gx[4], gy[4];
          for (int a = 0; a < 4; ++a) {
            nval[a] = shape(a, r, sq);
            double dr, ds;
            shape_grad(a, r, sq, dr, ds);
            gx[a] = dr * 2.0 / h;
            gy[a] = ds * 2.0 / h;
          }
          std::vector<double> coef(static_cast<size_t>(s + 1));
          coef[0] = field.mean();
          for (int j = 0; j < s; ++j) coef[static_cast<size_t>(j + 1)] = field.coefficient() * field.gamma(j, x);

          // Source terms, affine in xi like the diffusivity.
          std::vector<double> src(static_cast<size_t>(s + 1), 0.0);
          if (params_.manufactured) {
            double g1 = 0.0, g2 = 0.0;
            exact_grad(x[0], x[1], g1, g2);
            const double lap = exact_lap(x[0], x[1]);
            src[0] = -field.mean() * lap;
            for (int j = 0; j < s; ++j)
              src[static_cast<size_t>(j + 1)] =
                  -field.coefficient() *
                  (field.gamma(j, x) * lap + field.gamma_deriv(j, 0, x) * g1 + field.gamma_deriv(j, 1, x) * g2);
          } else {
            src[0] = i == 0 ? params_.b1 : params_.b2;
          }

          for (int a = 0; a < 4; ++a) {
            for (int t = 0; t <= s; ++t) loads[static_cast<size_t>(t)](ids[a]) += src[static_cast<size_t>(t)] * nval[a] * det;
            for (int b = 0; b < 4; ++b) {
              const double kab = (gx[a] * gx[b] + gy[a] * gy[b]) * det;
              for (int t = 0; t <= s; ++t) kt[static_cast<size_t>(t)].emplace_back(ids[a], ids[b], coef[static_cast<size_t>(t)] * kab);
              mt.emplace_back(ids[a], ids[b], nval[a] * nval[b] * det);
            }
          }
        }
      }
    }
  }

  // Symmetric elimination of the homogeneous Dirichlet nodes.
  auto& terms = stiff_terms_[static_cast<size_t>(i)];
  terms.clear();
  for (int t = 0; t <= s; ++t) {
    std::vector<Triplet> kept;
    kept.reserve(kt[static_cast<size_t>(t)].size());
    for (const auto& tr : kt[static_cast<size_t>(t)])
      if (!dir[static_cast<size_t>(tr.row())] && !dir[static_cast<size_t>(tr.col())]) kept.push_back(tr);
    if (t == 0)
      for (Index k = 0; k < n; ++k)
        if (dir[static_cast<size_t>(k)]) kept.emplace_back(k, k, 1.0);
    SparseMatrix a(n, n);
    a.setFromTriplets(kept.begin(), kept.end());
    terms.push_back(std::move(a));
    for (Index k = 0; k < n; ++k)
      if (dir[static_cast<size_t>(k)]) loads[static_cast<size_t>(t)](k) = 0.0;
  }
  load_terms_[static_cast<size_t>(i)] = std::move(loads);
  SparseMatrix mass(n, n);
  mass.setFromTriplets(mt.begin(), mt.end());
  mass_[static_cast<size_t>(i)] = std::move(mass);

  // Interface multipliers live on the nodes of x1 = 0 that are not on the
  // outer Dirichlet boundary; the two corner columns stay empty.
  const int ix_if = i == 0 ? m - 1 : 0;
  std::vector<Triplet> ct;
  for (int k = 1; k < m - 1; ++k) ct.emplace_back(node_index(ix_if, k), k, 1.0);
  SparseMatrix c(n, m);
  c.setFromTriplets(ct.begin(), ct.end());
  interface_[static_cast<size_t>(i)] = std::move(c);
}

SparseMatrix PoissonProblem::stiffness(int i, const VectorXd& xi) const {
  const auto& terms = stiff_terms_[static_cast<size_t>(i)];
  const int s = fields_[static_cast<size_t>(i)].terms();
  if (xi.size() != s) throw InvalidArgument("PoissonProblem: parameter dimension mismatch");
  SparseMatrix a = terms[0];
  for (int j = 0; j < s; ++j) a += xi(j) * terms[static_cast<size_t>(j + 1)];
  return a;
}

VectorXd PoissonProblem::load(int i, const VectorXd& xi) const {
  const auto& terms = load_terms_[static_cast<size_t>(i)];
  const int s = fields_[static_cast<size_t>(i)].terms();
  if (xi.size() != s) throw InvalidArgument("PoissonProblem: parameter dimension mismatch");
  VectorXd b = terms[0];
  if (params_.manufactured)
    for (int j = 0; j < s; ++j) b += xi(j) * terms[static_cast<size_t>(j + 1)];
  return b;
}

VectorXd PoissonProblem::solve_first(const VectorXd& v2, const VectorXd& xi1) const {
  const int m = params_.m;
  const Index n = nodes();
  if (v2.size() != m) throw InvalidArgument("PoissonProblem: interface vector has wrong size");
  const SparseMatrix a = stiffness(0, xi1);
  const SparseMatrix& c = interface_[0];
  std::vector<Triplet> tr;
  tr.reserve(static_cast<size_t>(a.nonZeros() + 2 * c.nonZeros() + 2));
  for (Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) tr.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < c.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(c, k); it; ++it) {
      tr.emplace_back(it.row(), n + it.col(), it.value());
      tr.emplace_back(n + it.col(), it.row(), it.value());
    }
  tr.emplace_back(n, n, 1.0);
  tr.emplace_back(n + m - 1, n + m - 1, 1.0);
  SparseMatrix k(n + m, n + m);
  k.setFromTriplets(tr.begin(), tr.end());
  VectorXd rhs(n + m);
  rhs.head(n) = load(0, xi1);
  rhs.tail(m) = v2;
  rhs(n) = 0.0;
  rhs(n + m - 1) = 0.0;
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(k);
  if (lu.info() != Eigen::Success) throw NumericalError("PoissonProblem: singular saddle-point system");
  VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw NumericalError("PoissonProblem: saddle-point solve failed");
  return sol;
}

VectorXd PoissonProblem::solve_second(const VectorXd& v1, const VectorXd& xi2) const {
  if (v1.size() != params_.m) throw InvalidArgument("PoissonProblem: multiplier vector has wrong size");
  const SparseMatrix a = stiffness(1, xi2);
  const VectorXd rhs = interface_[1] * v1 + load(1, xi2);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw NumericalError("PoissonProblem: stiffness factorization failed");
  return ldlt.solve(rhs);
}

std::pair<VectorXd, VectorXd> PoissonProblem::solve_monolithic(const VectorXd& xi1, const VectorXd& xi2) const {
  const int m = params_.m;
  const Index n = nodes();
  const SparseMatrix a1 = stiffness(0, xi1);
  const SparseMatrix a2 = stiffness(1, xi2);
  std::vector<Triplet> tr;
  auto add = [&](const SparseMatrix& mat, Index r0, Index c0, double scale, bool transpose) {
    for (Index k = 0; k < mat.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(mat, k); it; ++it) {
        if (transpose)
          tr.emplace_back(r0 + it.col(), c0 + it.row(), scale * it.value());
        else
          tr.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
      }
  };
  add(a1, 0, 0, 1.0, false);
  add(a2, n, n, 1.0, false);
  add(interface_[0], 0, 2 * n, 1.0, false);
  add(interface_[1], n, 2 * n, -1.0, false);
  add(interface_[0], 2 * n, 0, 1.0, true);
  add(interface_[1], 2 * n, n, -1.0, true);
  tr.emplace_back(2 * n, 2 * n, 1.0);
  tr.emplace_back(2 * n + m - 1, 2 * n + m - 1, 1.0);
  SparseMatrix k(2 * n + m, 2 * n + m);
  k.setFromTriplets(tr.begin(), tr.end());
  VectorXd rhs = VectorXd::Zero(2 * n + m);
  rhs.head(n) = load(0, xi1);
  rhs.segment(n, n) = load(1, xi2);
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(k);
  if (lu.info() != Eigen::Success) throw NumericalError("PoissonProblem: singular monolithic system");
  const VectorXd sol = lu.solve(rhs);
  VectorXd u1(n + m);
  u1.head(n) = sol.head(n);
  u1.tail(m) = sol.tail(m);
  return {u1, sol.segment(n, n)};
}

double PoissonProblem::energy(const VectorXd& u1_state, const VectorXd& u2_state) const {
  const Index n = nodes();
  const VectorXd a = u1_state.head(n);
  const VectorXd b = u2_state.head(n);
  return 0.5 * (a.dot(mass_[0] * a) + b.dot(mass_[1] * b));
}

double PoissonProblem::manufactured_error(const VectorXd& u1_state, const VectorXd& u2_state) const {
  const int m = params_.m;
  const double h = spacing();
  // Three-point Gauss on each element.
  const double gp[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double err = 0.0;
  double ref = 0.0;
  for (int i = 0; i < 2; ++i) {
    const VectorXd& u = i == 0 ? u1_state : u2_state;
    for (int ey = 0; ey < m - 1; ++ey)
      for (int ex = 0; ex < m - 1; ++ex) {
        const auto origin = node_coord(i, ex, ey);
        for (int qy = 0; qy < 3; ++qy)
          for (int qx = 0; qx < 3; ++qx) {
            double uh = 0.0;
            for (int a = 0; a < 4; ++a)
              uh += u(node_index(ex + kCornerX[a], ey + kCornerY[a])) * shape(a, gp[qx], gp[qy]);
            const double x1 = origin[0] + 0.5 * h * (1.0 + gp[qx]);
            const double x2 = origin[1] + 0.5 * h * (1.0 + gp[qy]);
            const double ue = exact(x1, x2);
            const double w = gw[qx] * gw[qy] * 0.25 * h * h;
            err += w * (uh - ue) * (uh - ue);
            ref += w * ue * ue;
          }
      }
  }
  return std::sqrt(err / ref);
}

Gramian PoissonProblem::gramian(int i) const {
  if (i == 1) return Gramian::sparse(mass_[1]);
  const Index n = nodes();
  const int m = params_.m;
  std::vector<Triplet> tr;
  for (Index k = 0; k < mass_[0].outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(mass_[0], k); it; ++it) tr.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < m; ++k) tr.emplace_back(n + k, n + k, 1.0);
  SparseMatrix g(n + m, n + m);
  g.setFromTriplets(tr.begin(), tr.end());
  return Gramian::sparse(g);
}

std::pair<ModuleOperator, ModuleOperator> poisson_modules(std::shared_ptr<const PoissonProblem> prob) {
  const int m = prob->m();
  const Index n = prob->nodes();
  const double h = prob->spacing();

  ModuleOperator m1;
  m1.name = "poisson-1";
  m1.state_dim = n + m;
  m1.param_dim = prob->params().s1;
  m1.gramian = prob->gramian(0);
  m1.solve = [prob](const VectorXd&, const VectorXd& v2, const VectorXd& xi) { return prob->solve_first(v2, xi); };
  m1.interface = [n, m](const VectorXd& u) -> VectorXd { return u.segment(n, m); };
  m1.coupling_dim = m;
  m1.coupling_gramian = Gramian::identity(m, h);

  ModuleOperator m2;
  m2.name = "poisson-2";
  m2.state_dim = n;
  m2.param_dim = prob->params().s2;
  m2.gramian = prob->gramian(1);
  m2.solve = [prob](const VectorXd&, const VectorXd& v1, const VectorXd& xi) { return prob->solve_second(v1, xi); };
  m2.interface = [prob](const VectorXd& u) -> VectorXd { return prob->interface_matrix(1).transpose() * u; };
  m2.coupling_dim = m;
  m2.coupling_gramian = Gramian::identity(m, h);
  return {m1, m2};
}

}  // namespace cnisp
