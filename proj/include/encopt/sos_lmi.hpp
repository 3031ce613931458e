#pragma once

// Worst-case purity constraint as an LMI.
//
// For an input parameter vector x the encoded input |phi><phi| is written
// through real monomials: phi (x) phi^* = W M z(x), where z(x) collects all
// degree-2 monomials (cross terms scaled by sqrt 2, so <z|z> = |x|^4), M
// selects the reduced monomial vector y = M z and W maps it back to the
// vectorized state. The output purity is the quartic form
//
//   purity(x) = y^T E'^T P E' y,   E' = [Re(E W); Im(E W)],
//
// and "purity(x) >= (1 - eps) |x|^4 for all x" is relaxed to the existence
// of a PSD Gram matrix
//
//   Q = M^T E'^T P E' M - (1 - eps) M^T M + sum_i tau_i S_i >= 0,
//
// with {S_i} spanning the Gram kernel. Using E'^T E' = I (true on the
// rank-one manifold) and P = k I - (k I - P), a Schur complement gives
//
//   [ (kI - P)^-1     E' M                                 ]
//   [ (E' M)^T        (k + eps - 1) M^T M + sum_i tau_i S_i ]  >= 0.
//
// The relaxation is exact for two real parameters and for three real
// parameters at degree four, i.e. for real and complex qubit inputs.

#include <optional>
#include <string>
#include <vector>

#include "encopt/channel.hpp"
#include "encopt/sdp.hpp"

namespace encopt {

enum class InputMode { real_qubit, complex_qubit, general_r };

const char* to_string(InputMode mode);
/// Throws Error(unknown_name).
InputMode parse_input_mode(const std::string& text);

/// Number of real input parameters: r for real_qubit, 2r - 1 otherwise.
Index num_input_params(Index r, InputMode mode);

/// The input state for parameter vector x. Real mode: phi = x. Complex
/// modes: phi_i = x_{2i} + i x_{2i+1} for i < r - 1 and phi_{r-1} = x_{2r-2}.
ComplexVector input_state(Index r, InputMode mode, const RealVector& x);

/// Degree-2 monomials of x in graded lexicographic order, cross terms
/// scaled by sqrt 2.
RealVector monomials(const RealVector& x);

struct MonomialMap {
  Index r = 0;
  InputMode mode = InputMode::real_qubit;
  Index num_params = 0;  // v
  ComplexMatrix W;       // r^2 x dim_y, W^dag W = I
  RealMatrix M;          // dim_y x v(v+1)/2
};

/// Reduced coordinates y are the Hermitian coordinates of |phi><phi|:
/// diagonal entries, then sqrt 2 Re and sqrt 2 Im of each upper entry, in
/// row-major order (imaginary parts omitted in real mode).
MonomialMap monomial_map(Index r, InputMode mode);

/// Sparse basis of {K symmetric : z(x)^T K z(x) == 0} for v variables.
/// Each element has max-abs entry 1 and a positive first nonzero entry.
std::vector<RealMatrix> gram_kernel_basis(Index v);

/// [[Re(A^dag A), -Im(A^dag A)], [Im(A^dag A), Re(A^dag A)]].
RealMatrix build_P(const SuperopMatrix& a);

/// max(2, 1.05 lambda_max(P)) for P != 0, and 1 for P = 0.
double choose_k(const RealMatrix& p);

struct SosContext {
  Index r = 0;
  Index n = 0;
  InputMode mode = InputMode::real_qubit;
  RealMatrix P;
  double k = 0;
  MonomialMap map;
  std::vector<RealMatrix> kernel;

  /// Throws Error(precondition) when k I - P is not positive definite with
  /// margin 1e-6 k.
  static SosContext create(const KrausChannel& channel, Index r, InputMode mode,
                           std::optional<double> k = std::nullopt);

  bool exact() const { return mode != InputMode::general_r; }
};

/// Decision variables: the Hermitian Choi matrix C = Phi(E) of the encoder
/// superoperator (nr x nr, one real per diagonal entry and a Re/Im pair per
/// upper entry, row-major), then eps, then tau_1..tau_K.
class DecisionLayout {
 public:
  DecisionLayout(Index n, Index r, Index num_tau);

  Index n() const { return n_; }
  Index r() const { return r_; }
  Index choi_dim() const { return n_ * r_; }
  Index num_choi_vars() const { return choi_dim() * choi_dim(); }
  Index num_tau() const { return num_tau_; }
  Index num_vars() const { return num_choi_vars() + 1 + num_tau_; }
  Index epsilon() const { return num_choi_vars(); }
  Index tau(Index i) const { return num_choi_vars() + 1 + i; }

  /// C(a, b) = sum coef * x_var.
  std::vector<std::pair<Index, Complex>> choi_entry(Index a, Index b) const;
  /// E[(i, j), (k, l)] = C[(i, k), (j, l)].
  std::vector<std::pair<Index, Complex>> superop_entry(Index row, Index col) const;

  ComplexMatrix choi(const RealVector& x) const;
  SuperopMatrix superop(const RealVector& x) const;
  /// Writes the Hermitian part of c into the Choi coordinates of x.
  void set_choi(RealVector& x, const ComplexMatrix& c) const;

  /// Coefficients of x -> Re Tr(G C(x)) for Hermitian G.
  RealVector trace_functional(const ComplexMatrix& g) const;

 private:
  Index n_, r_, num_tau_;
  std::vector<Index> index_;  // (a, b) with a <= b -> first variable
};

enum class LmiForm {
  compact,      // one Schur block, corner (k + eps - 1) M^T M + sum tau S
  cross_terms,  // real_qubit only: (kI-P)^-1 and the two 2x2 inverse blocks
};

/// Block dimensions of the emitted LMI (diagonal blocks, corner last).
std::vector<Index> lmi_block_sizes(const SosContext& ctx, LmiForm form = LmiForm::compact);

LinearMatrixExpr build_purity_lmi(const SosContext& ctx, const DecisionLayout& layout,
                                  LmiForm form = LmiForm::compact);

/// Purity LMI, PSD embedding of Phi(E), the 2 r^2 real trace-preservation
/// equalities and 0 <= eps <= 1.
SdpProblem assemble_problem(const SosContext& ctx, const DecisionLayout& layout, const RealVector& objective,
                            LmiForm form = LmiForm::compact);

/// Adds equalities pinning every Choi coordinate to those of `superop`.
void freeze_encoder(SdpProblem& problem, const DecisionLayout& layout, const SuperopMatrix& superop);

DecisionLayout make_layout(const SosContext& ctx);

/// The 3x3 Gram-kernel matrix of the real qubit case and the four
/// cross-term selectors S_1 = e1 e2^T / sqrt 2, S_2 = e3 e2^T / sqrt 2,
/// S_3 = e1 e1^T, S_4 = e3 e3^T.
RealMatrix real_qubit_kernel();
std::vector<RealMatrix> real_qubit_cross_selectors();

}  // namespace encopt
