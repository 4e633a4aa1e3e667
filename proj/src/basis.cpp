#include "cnisp/basis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>

#include "cnisp/errors.hpp"

namespace cnisp {

Recurrence legendre_recurrence(int n) {
  Recurrence rec;
  rec.alpha.assign(static_cast<size_t>(std::max(n, 0)), 0.0);
  rec.beta.resize(static_cast<size_t>(std::max(n, 0)));
  for (int k = 0; k < n; ++k) {
    // beta_0 is the unit mass of the probability density.
    rec.beta[k] = k == 0 ? 1.0 : static_cast<double>(k) * k / (4.0 * k * k - 1.0);
  }
  return rec;
}

UnivariateRule golub_welsch(const Recurrence& rec, int n) {
  if (n < 1) throw InvalidArgument("golub_welsch: node count must be positive");
  if (static_cast<int>(rec.alpha.size()) < n || static_cast<int>(rec.beta.size()) < n)
    throw InvalidArgument("golub_welsch: recurrence shorter than node count");

  MatrixXd jacobi = MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    jacobi(k, k) = rec.alpha[k];
    if (k + 1 < n) {
      const double off = std::sqrt(rec.beta[k + 1]);
      jacobi(k, k + 1) = off;
      jacobi(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(jacobi);
  if (eig.info() != Eigen::Success) throw NumericalError("golub_welsch: eigen-solver failed");

  UnivariateRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = eig.eigenvalues()(k);
    const double v0 = eig.eigenvectors()(0, k);
    rule.weights[k] = rec.beta[0] * v0 * v0;
    total += rule.weights[k];
  }
  for (double& w : rule.weights) w /= total;
  // Symmetric densities give symmetric rules; snap the roundoff.
  bool symmetric = std::all_of(rec.alpha.begin(), rec.alpha.begin() + n,
                               [](double a) { return a == 0.0; });
  if (symmetric) {
    for (int k = 0; k < n / 2; ++k) {
      const double x = 0.5 * (rule.nodes[n - 1 - k] - rule.nodes[k]);
      const double w = 0.5 * (rule.weights[n - 1 - k] + rule.weights[k]);
      rule.nodes[k] = -x;
      rule.nodes[n - 1 - k] = x;
      rule.weights[k] = w;
      rule.weights[n - 1 - k] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  }
  return rule;
}

const UnivariateRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, UnivariateRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, golub_welsch(legendre_recurrence(n), n)).first;
  return it->second;
}

void legendre_orthonormal(double x, int p, double* out) {
  // Standard Legendre recurrence, then scale by sqrt(2n+1).
  double prev = 1.0;
  double cur = x;
  out[0] = 1.0;
  if (p >= 1) out[1] = std::sqrt(3.0) * x;
  for (int n = 1; n < p; ++n) {
    const double next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
    prev = cur;
    cur = next;
    out[n + 1] = std::sqrt(2.0 * (n + 1) + 1.0) * next;
  }
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    if (r > std::numeric_limits<std::uint64_t>::max() / num)
      throw InvalidArgument("binomial coefficient overflows");
    r = r * num / static_cast<std::uint64_t>(i);
  }
  return r;
}

namespace {

void fill_degree(int s, int remaining, int pos, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (pos == s - 1) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[pos] = e;
    fill_degree(s, remaining - e, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

std::vector<MultiIndex> total_degree_indices(int s, int p) {
  if (s < 1) throw InvalidArgument("total_degree_indices: s must be >= 1");
  if (p < 0) throw InvalidArgument("total_degree_indices: p must be >= 0");
  const std::uint64_t count = binomial(p + s, s);
  if (count > 50'000'000ULL) throw InvalidArgument("total_degree_indices: basis too large");
  std::vector<MultiIndex> out;
  out.reserve(count);
  MultiIndex cur(s, 0);
  for (int deg = 0; deg <= p; ++deg) fill_degree(s, deg, 0, cur, out);
  return out;
}

TotalDegreeBasis::TotalDegreeBasis(int s, int p) : s_(s), p_(p), indices_(total_degree_indices(s, p)) {}

int TotalDegreeBasis::degree(Index j) const {
  int d = 0;
  for (int e : indices_[static_cast<size_t>(j)]) d += e;
  return d;
}

VectorXd TotalDegreeBasis::eval(const VectorXd& xi, bool check_domain) const {
  if (xi.size() != s_) throw InvalidArgument("eval_basis: point dimension mismatch");
  if (check_domain) {
    for (Index k = 0; k < xi.size(); ++k)
      if (!(std::abs(xi(k)) <= 1.0 + 1e-12)) throw DomainError("eval_basis: point outside [-1,1]^s");
  }
  MatrixXd table(p_ + 1, s_);
  for (int k = 0; k < s_; ++k) legendre_orthonormal(xi(k), p_, table.col(k).data());
  VectorXd out(size());
  for (Index j = 0; j < size(); ++j) {
    const MultiIndex& a = indices_[static_cast<size_t>(j)];
    double v = 1.0;
    for (int k = 0; k < s_; ++k)
      if (a[k] != 0) v *= table(a[k], k);
    out(j) = v;
  }
  return out;
}

MatrixXd TotalDegreeBasis::eval_at(const std::vector<VectorXd>& nodes) const {
  MatrixXd out(size(), static_cast<Index>(nodes.size()));
  for (size_t j = 0; j < nodes.size(); ++j) out.col(static_cast<Index>(j)) = eval(nodes[j]);
  return out;
}

VectorXd QuadratureRule::weight_vector() const {
  return Eigen::Map<const VectorXd>(weights.data(), static_cast<Index>(weights.size()));
}

QuadratureRule tensor_quadrature(int s, int q, std::int64_t cap) {
  if (s < 1 || q < 0) throw InvalidArgument("tensor_quadrature: need s >= 1 and q >= 0");
  const int n = q + 1;
  double count = std::pow(static_cast<double>(n), s);
  if (count > static_cast<double>(cap)) throw ResourceError("tensor_quadrature: node count exceeds cap");
  const UnivariateRule& r1 = gauss_legendre(n);

  QuadratureRule rule;
  rule.dim = s;
  rule.level = q;
  rule.kind = RuleKind::Tensor;
  const auto total = static_cast<std::int64_t>(count);
  rule.nodes.reserve(static_cast<size_t>(total));
  rule.weights.reserve(static_cast<size_t>(total));
  std::vector<int> idx(s, 0);
  for (std::int64_t j = 0; j < total; ++j) {
    VectorXd x(s);
    double w = 1.0;
    for (int k = 0; k < s; ++k) {
      x(k) = r1.nodes[idx[k]];
      w *= r1.weights[idx[k]];
    }
    rule.nodes.push_back(std::move(x));
    rule.weights.push_back(w);
    // Odometer with the last coordinate fastest.
    for (int k = s - 1; k >= 0; --k) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }
  return rule;
}

namespace {

void compositions(int total, int parts, std::vector<int>& cur, int pos, std::vector<std::vector<int>>& out) {
  if (pos == parts - 1) {
    cur[pos] = total;
    out.push_back(cur);
    return;
  }
  for (int i = 0; i <= total; ++i) {
    cur[pos] = i;
    compositions(total - i, parts, cur, pos + 1, out);
  }
}

}  // namespace

QuadratureRule smolyak_quadrature(int s, int q, std::int64_t cap) {
  if (s < 1 || q < 0) throw InvalidArgument("smolyak_quadrature: need s >= 1 and q >= 0");

  // Sorted table of distinct univariate node values across levels 0..q.
  std::vector<double> values;
  for (int l = 0; l <= q; ++l)
    for (double x : gauss_legendre(l + 1).nodes) values.push_back(x);
  std::sort(values.begin(), values.end());
  std::vector<double> unique;
  for (double x : values)
    if (unique.empty() || x - unique.back() > 1e-12) unique.push_back(x);
  auto id_of = [&](double x) {
    auto it = std::lower_bound(unique.begin(), unique.end(), x - 1e-12);
    return static_cast<int>(it - unique.begin());
  };
  std::vector<std::vector<int>> level_ids(q + 1);
  for (int l = 0; l <= q; ++l)
    for (double x : gauss_legendre(l + 1).nodes) level_ids[l].push_back(id_of(x));

  std::map<std::vector<int>, double> merged;
  std::int64_t raw = 0;
  const int kmin = std::max(0, q - s + 1);
  for (int k = kmin; k <= q; ++k) {
    const double coeff = ((q - k) % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(binomial(s - 1, q - k));
    std::vector<std::vector<int>> levels;
    std::vector<int> cur(s, 0);
    compositions(k, s, cur, 0, levels);
    for (const auto& lv : levels) {
      std::int64_t block = 1;
      for (int l : lv) block *= (l + 1);
      raw += block;
      if (raw > cap) throw ResourceError("smolyak_quadrature: node count exceeds cap");
      std::vector<int> idx(s, 0);
      std::vector<int> key(s);
      for (std::int64_t j = 0; j < block; ++j) {
        double w = coeff;
        for (int d = 0; d < s; ++d) {
          key[d] = level_ids[lv[d]][idx[d]];
          w *= gauss_legendre(lv[d] + 1).weights[idx[d]];
        }
        merged[key] += w;
        for (int d = s - 1; d >= 0; --d) {
          if (++idx[d] <= lv[d]) break;
          idx[d] = 0;
        }
      }
    }
  }

  QuadratureRule rule;
  rule.dim = s;
  rule.level = q;
  rule.kind = RuleKind::Smolyak;
  rule.nodes.reserve(merged.size());
  rule.weights.reserve(merged.size());
  for (const auto& [key, w] : merged) {
    VectorXd x(s);
    for (int d = 0; d < s; ++d) x(d) = unique[key[d]];
    rule.nodes.push_back(std::move(x));
    rule.weights.push_back(w);
  }
#ifndef NDEBUG
  if (max_monomial_error(rule, 2 * q + 1) > 1e-12)
    throw NumericalError("smolyak_quadrature: monomial exactness check failed");
#endif
  return rule;
}

double uniform_moment(const MultiIndex& alpha) {
  double v = 1.0;
  for (int a : alpha) {
    if (a % 2 == 1) return 0.0;
    v *= 1.0 / (a + 1.0);
  }
  return v;
}

double max_monomial_error(const QuadratureRule& rule, int deg) {
  const auto indices = total_degree_indices(rule.dim, deg);
  double worst = 0.0;
  std::vector<double> acc(indices.size(), 0.0);
  MatrixXd powers(deg + 1, rule.dim);
  for (Index j = 0; j < rule.size(); ++j) {
    const VectorXd& x = rule.nodes[static_cast<size_t>(j)];
    for (int k = 0; k < rule.dim; ++k) {
      powers(0, k) = 1.0;
      for (int e = 1; e <= deg; ++e) powers(e, k) = powers(e - 1, k) * x(k);
    }
    for (size_t a = 0; a < indices.size(); ++a) {
      double v = rule.weights[static_cast<size_t>(j)];
      for (int k = 0; k < rule.dim; ++k) v *= powers(indices[a][k], k);
      acc[a] += v;
    }
  }
  for (size_t a = 0; a < indices.size(); ++a)
    worst = std::max(worst, std::abs(acc[a] - uniform_moment(indices[a])));
  return worst;
}

void write_rule_csv(const QuadratureRule& rule, std::ostream& os) {
  os.precision(17);
  for (Index j = 0; j < rule.size(); ++j) {
    for (int k = 0; k < rule.dim; ++k) os << rule.nodes[static_cast<size_t>(j)](k) << ',';
    os << rule.weights[static_cast<size_t>(j)] << '\n';
  }
}

}  // namespace cnisp
