#pragma once

#include <cstdint>
#include <utility>

#include "cnisp/coupling.hpp"

namespace cnisp {

struct SyntheticParams {
  Index n1 = 3;
  Index n2 = 2;
  int s1 = 1;
  int s2 = 1;
  // Spectral norm of each coupling map; below 1 the BGS sweep contracts.
  double coupling = 0.3;
  std::uint64_t seed = 7;
};

// Affine coupled pair
//   u1 = k A1 u2 + B1 xi1 + c1,   u2 = k A2 u1 + B2 xi2 + c2
// with random A_i of unit spectral norm. The coupled solution is affine in xi.
class SyntheticProblem {
 public:
  explicit SyntheticProblem(const SyntheticParams& params);

  const SyntheticParams& params() const { return params_; }
  VectorXd solve_first(const VectorXd& u2, const VectorXd& xi1) const;
  VectorXd solve_second(const VectorXd& u1, const VectorXd& xi2) const;
  // Direct solve of the coupled linear system.
  std::pair<VectorXd, VectorXd> exact(const VectorXd& xi1, const VectorXd& xi2) const;

 private:
  SyntheticParams params_;
  MatrixXd a1_, a2_, b1_, b2_;
  VectorXd c1_, c2_;
};

// Whole states are exchanged; Gramians are identities.
std::pair<ModuleOperator, ModuleOperator> synthetic_modules(std::shared_ptr<const SyntheticProblem> prob);

}  // namespace cnisp
