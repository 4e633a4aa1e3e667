#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cnisp/coupling.hpp"
#include "cnisp/reduction.hpp"

namespace cnisp {

struct NispConfig {
  double relaxation = 0.9;
  double tol = 1e-8;
  int max_iters = 100;
  // Start from the deterministic BGS solution at xi = 0 in column 0;
  // otherwise start from zero matrices.
  bool mean_init = true;
};

struct ReducedConfig {
  std::array<double, 2> eps_dim{1e-4, 1e-5};
  std::array<double, 2> eps_ord{1e-3, 1e-3};
  ReductionTolerances tols;
};

struct IterationDiagnostics {
  int iter = 0;
  int module = 0;
  int d = 0;
  int p_tilde = 0;
  Index q_tilde = 0;
  double update_norm = 0.0;
};

struct PropagationReport {
  std::string method;
  CoeffMatrix u1;
  CoeffMatrix u2;
  int iterations = 0;
  bool converged = false;
  std::array<long long, 2> module_calls{0, 0};
  double wall_time = 0.0;
  Index rule_size = 0;
  int order = 0;
  int dim = 0;
  std::vector<IterationDiagnostics> diagnostics;

  long long total_calls() const { return module_calls[0] + module_calls[1]; }
  // Diagnostics of the last recorded half-iteration of module i (0 or 1).
  const IterationDiagnostics* last(int module) const;
};

// Coefficient matrix of coordinates [offset, offset+count) of the global xi.
CoeffMatrix input_gpc(int offset, int count, const QuadratureRule& rule, const MatrixXd& psi);

// Initial coefficient pair: deterministic BGS at xi = 0 in column 0.
std::pair<CoeffMatrix, CoeffMatrix> mean_initial_coeffs(const ModuleOperator& m1, const ModuleOperator& m2,
                                                         Index basis_size, const NispConfig& cfg);

PropagationReport standard_nisp(const ModuleOperator& m1, const ModuleOperator& m2, const TotalDegreeBasis& basis,
                                const QuadratureRule& rule, const NispConfig& cfg,
                                const std::optional<std::pair<CoeffMatrix, CoeffMatrix>>& init = std::nullopt);

PropagationReport reduced_nisp(const ModuleOperator& m1, const ModuleOperator& m2, const TotalDegreeBasis& basis,
                               const QuadratureRule& rule, const NispConfig& cfg, const ReducedConfig& rcfg,
                               const std::optional<std::pair<CoeffMatrix, CoeffMatrix>>& init = std::nullopt);

// sqrt(sum_i ||U_i - R_i||^2_{G_i}) / sqrt(sum_i ||R_i||^2_{G_i}); coefficient
// matrices of a lower order are zero-padded to the reference size.
double relative_error(const CoeffMatrix& u1, const CoeffMatrix& u2, const CoeffMatrix& r1, const CoeffMatrix& r2,
                      const Gramian& g1, const Gramian& g2);

struct ErrorDecomposition {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> components;
};

// Total error of `report` against `reference`; when a standard report of the
// same order is given, splits into the truncation part (standard vs
// reference) and the reduction part (report vs standard).
ErrorDecomposition error_decomposition(const PropagationReport& report,
                                       const std::pair<CoeffMatrix, CoeffMatrix>& reference, const Gramian& g1,
                                       const Gramian& g2, const PropagationReport* standard = nullptr);

}  // namespace cnisp
