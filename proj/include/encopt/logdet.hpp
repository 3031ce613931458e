#pragma once

// Log-det rank heuristic. Each iteration solves
//
//   minimize  Tr[(Phi(E_i) + delta I)^-1 Phi(E)] + gamma eps
//   s.t.      purity LMI, Phi(E) >= 0, Tr_out Phi(E) = I, 0 <= eps <= 1,
//
// the linearization of log det(Phi(E) + delta I) + gamma eps at E_i. A
// rank-one limit is an isometric encoder, and for the exact input modes its
// worst-case purity is 1 - eps.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "encopt/channel.hpp"
#include "encopt/oracle.hpp"
#include "encopt/sdp.hpp"
#include "encopt/sos_lmi.hpp"

namespace encopt {

struct HeuristicConfig {
  double delta = 0.01;
  double gamma = 10.0;
  int max_iters = 500;
  double obj_tol = 1e-7;
  double rank_ratio_tol = 1e-3;
  std::uint64_t seed = 0;
  std::optional<double> k;  // default: choose_k(P)
  LmiForm form = LmiForm::compact;
  SolverSettings solver;
  OracleConfig oracle;  // mode is overwritten by run()
  bool verbose = false;  // one progress line per iteration on stderr

  /// Throws Error(precondition) when delta <= 0, gamma <= 0,
  /// rank_ratio_tol outside (0, 1), max_iters < 1 or obj_tol < 0.
  void validate() const;

  /// gamma preset per built-in channel: 15 for bit-flip, 6.1 for amplitude
  /// damping, 10 otherwise.
  static double preset_gamma(const std::string& channel_name);
};

struct IterationRecord {
  int index = 0;
  double epsilon = 0;
  std::vector<double> tau;
  RealVector eigenvalues;  // of Phi(E), descending
  double linearized_objective = 0;
  double surrogate = 0;  // log det(Phi(E) + delta I) + gamma eps
  SdpStatus status = SdpStatus::optimal;
  int solver_iterations = 0;
};

enum class Classification { certified_local_optimum, rank_deficient, not_converged };

const char* to_string(Classification c);

struct OptimizationResult {
  std::vector<IterationRecord> trace;
  SuperopMatrix final_superop{ComplexMatrix::Identity(1, 1), 1, 1};
  std::optional<ComplexMatrix> encoder;  // present iff certified
  bool certified = false;
  bool converged = false;       // stopping rule met before max_iters
  bool lower_bound = false;     // general_r: 1 - eps only bounds the purity from below
  bool initial_flagged = false; // initial point was not a rank-one feasible point
  double epsilon = 1;           // solver value at the last iterate
  double reported_purity = 0;   // oracle value when certified in exact modes, else 1 - eps
  double worst_case_purity_oracle = std::numeric_limits<double>::quiet_NaN();
  double leading_eigenvalue = 0;
  double k = 0;
  Classification classification = Classification::not_converged;
  std::string message;
};

/// Coefficients of Tr[(Phi_prev + delta I)^-1 Phi(E)] over the layout.
/// Throws Error(conditioning) when Phi_prev + delta I is not safely
/// positive definite.
RealVector linearized_objective(const ChoiMatrix& phi_prev, double delta, const DecisionLayout& layout);

/// log det(Phi + delta I).
double logdet_surrogate(const ComplexMatrix& phi, double delta);

/// E0 = V (x) V^* with V a Haar-random n x r isometry drawn from a seeded
/// Gaussian matrix (QR with the R diagonal made positive).
ComplexMatrix random_isometry(Index n, Index r, std::uint64_t seed);
SuperopMatrix random_rank_one_initial(Index r, Index n, std::uint64_t seed);

/// Runs the heuristic from `initial` (an r -> n superoperator). Throws
/// Error(inconsistency) when a certified result disagrees with the oracle.
OptimizationResult run(const KrausChannel& channel, Index r, InputMode mode, const HeuristicConfig& config,
                       const SuperopMatrix& initial);

}  // namespace encopt
