#pragma once

// Linear objective over affine PSD constraints, linear equalities and box
// bounds on real decision variables:
//
//   minimize  c^T x
//   s.t.      F_b(x) = F_b0 + sum_i x_i F_bi  >= 0   for every block b
//             a_k^T x = b_k
//             l_i <= x_i <= u_i
//
// The default backend is an in-process primal-dual interior-point method.
// Equalities are eliminated exactly before the conic solve, so the cone
// problem is a pure LMI in the free coordinates.

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "encopt/channel.hpp"

namespace encopt {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// F(x) = F0 + sum_i x_i F_i with symmetric blocks sharing one dimension.
class LinearMatrixExpr {
 public:
  explicit LinearMatrixExpr(Index dim = 0);

  Index dim() const { return dim_; }

  RealMatrix& constant() { return constant_; }
  const RealMatrix& constant() const { return constant_; }

  /// Adds `value` at (row, col) and, off the diagonal, at (col, row).
  void add_entry(Index var, Index row, Index col, double value);
  void add_constant(Index row, Index col, double value);

  /// Coefficient of variable `var` (zero matrix if absent).
  SparseMatrix coefficient(Index var) const;
  const std::map<Index, std::map<std::pair<Index, Index>, double>>& terms() const { return terms_; }

  RealMatrix evaluate(const RealVector& x) const;
  Index max_variable() const;

 private:
  Index dim_;
  RealMatrix constant_;
  // var -> (row, col) -> value, full symmetric storage
  std::map<Index, std::map<std::pair<Index, Index>, double>> terms_;
};

struct LinearEquality {
  std::vector<std::pair<Index, double>> terms;
  double rhs = 0;
};

struct SdpProblem {
  Index num_vars = 0;
  RealVector objective;
  std::vector<LinearMatrixExpr> psd_constraints;
  std::vector<LinearEquality> equalities;
  std::vector<std::optional<double>> lower;  // empty or num_vars entries
  std::vector<std::optional<double>> upper;

  explicit SdpProblem(Index n = 0) : num_vars(n), objective(RealVector::Zero(n)) {}

  void set_bounds(Index var, std::optional<double> lo, std::optional<double> hi);

  /// Throws Error(precondition) when an index is out of range or data is not finite.
  void validate() const;
};

enum class SdpStatus { optimal, infeasible, numerical_failure };

const char* to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::numerical_failure;
  RealVector x;
  double objective = 0;
  double dual_objective = 0;
  double max_violation = 0;  // equality residual, bound and PSD violations
  int iterations = 0;
  std::string message;
};

struct SolverSettings {
  double tol = 1e-8;
  int max_iters = 250;
  bool verbose = false;
};

/// Maximum constraint violation of x: equality residuals, bound violations
/// and the negative part of the smallest eigenvalue of every PSD block.
double constraint_violation(const SdpProblem& p, const RealVector& x);

/// Solves with the in-process interior-point backend. Deterministic for
/// identical inputs; single-threaded.
SdpSolution solve_sdp(const SdpProblem& p, const SolverSettings& settings = {});

// ---------------------------------------------------------------------------
// Reduced (equality-free) form, shared by the backends and the SDPA export.

/// x = offset + basis * w; every equality of the original problem holds for
/// every w.
struct AffineParameterization {
  RealVector offset;
  SparseMatrix basis;  // num_vars x num_free
};

/// minimize c^T w  s.t.  C_b + sum_j w_j A_bj >= 0. Box bounds become one
/// diagonal block at the end.
struct ReducedProblem {
  Index num_vars = 0;
  RealVector objective;
  double objective_offset = 0;
  std::vector<RealMatrix> constants;
  std::vector<std::vector<SparseMatrix>> coefficients;  // [block][var]
  AffineParameterization param;
};

/// Returns nullopt when the equalities are inconsistent or a block that no
/// longer depends on any free variable is not PSD. Such constant blocks are
/// dropped from the reduced problem.
std::optional<ReducedProblem> reduce_problem(const SdpProblem& p, double tol = 1e-10);

/// Replaces the objective of an already reduced problem (the constraint
/// data is unchanged), so repeated solves with a new objective skip the
/// elimination.
void set_objective(ReducedProblem& red, const RealVector& objective);

/// Solves a problem previously reduced from `p` with the in-process backend.
SdpSolution solve_reduced(const SdpProblem& p, const ReducedProblem& red, const SolverSettings& settings = {});

/// SDPA sparse format of the reduced problem (variables are w). Numbers
/// are printed with 17 significant digits.
void write_sdpa(std::ostream& out, const ReducedProblem& r);

/// Backend contract; solve_sdp uses InteriorPointBackend.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual std::string name() const = 0;
  virtual SdpSolution solve(const SdpProblem& p, const SolverSettings& settings) const = 0;
};

class InteriorPointBackend final : public SdpBackend {
 public:
  std::string name() const override { return "interior-point"; }
  SdpSolution solve(const SdpProblem& p, const SolverSettings& settings) const override;
};

/// Writes the reduced problem to an SDPA file, runs
/// `<command> <problem> <solution>` and reads the first line of the
/// solution file as the SDPA primal vector (CSDP solution layout).
class SdpaFileBackend final : public SdpBackend {
 public:
  SdpaFileBackend(std::string command, std::string work_dir);
  std::string name() const override { return "sdpa-file:" + command_; }
  SdpSolution solve(const SdpProblem& p, const SolverSettings& settings) const override;

 private:
  std::string command_;
  std::string work_dir_;
};

}  // namespace encopt
