#pragma once

// Independent worst-case purity evaluation for a fixed encoder: a grid over
// the input parameterization followed by coordinate-descent refinement,
// plus closed-form purity expressions for the built-in encoder families.

#include <string>

#include "encopt/channel.hpp"
#include "encopt/channel_zoo.hpp"
#include "encopt/sos_lmi.hpp"

namespace encopt {

struct OracleConfig {
  int resolution = 720;  // grid points per angle (capped in general_r mode)
  double refinement_tol = 1e-10;
  InputMode mode = InputMode::real_qubit;
  long long max_grid_points = 2'000'000;  // general_r budget over all angles

  void validate() const;
};

struct OracleResult {
  double min_purity = 1;
  RealVector argmin_angles;
  ComplexVector argmin_state;
  double cross_check_residual = 0;  // |Omega form - Kraus form| at the argmin
  int grid_per_angle = 0;
  long long evaluations = 0;
};

/// Input state for the oracle's angles.
///  real_qubit:    (cos t, sin t), t in [0, pi)
///  complex_qubit: (cos(t/2), e^{i s} sin(t/2)), t in [0, pi], s in [0, 2 pi)
///  general_r:     hyperspherical angles t_1..t_{r-1} in [0, pi/2] followed
///                 by phases s_1..s_{r-1}; the first amplitude is real and
///                 nonnegative, amplitude j > 0 carries phase s_j.
ComplexVector oracle_state(Index r, InputMode mode, const RealVector& angles);
Index oracle_num_angles(Index r, InputMode mode);

/// Purity of the channel output for the pure input E|phi>, via the Kraus sum.
double output_purity(const KrausChannel& channel, const ComplexMatrix& encoder, const ComplexVector& phi);

/// Precomputed Omega restricted to the code space.
class PurityForm {
 public:
  PurityForm(const KrausChannel& channel, const ComplexMatrix& encoder);
  double operator()(const ComplexVector& phi) const;
  Index r() const { return r_; }

 private:
  Index r_;
  ComplexMatrix omega_;  // r^2 x r^2
};

/// Throws Error(dimension_mismatch) for incompatible shapes and
/// Error(inconsistency) when the Omega and Kraus evaluations disagree by more
/// than 1e-10 at the minimizer.
OracleResult worst_case_purity(const KrausChannel& channel, const ComplexMatrix& encoder,
                               const OracleConfig& cfg = {});

/// Closed forms for real qubit inputs phi = (cos t, sin t) (t = phi_params(0)).
///   bf_a, bf_b: 1 - 2pq cos^2(2t + 2 alpha)
///   bf_c:       1 - 4pq(p^2 + q^2) cos^2(2t + 2 alpha)
///   ad_d:       1 - 2pq (x1^2 sin^2 alpha + x2^2)^2
///   ad_f:       1 - 2pq[(1 + sin2a sin2b - 2pq sin^4 a) x1^4 - (1 + cos2a + sin2a sin2b) x1^2 + 1]
///   identity:   1
/// Params: p, alpha, beta. Throws Error(unknown_name).
double analytic_purity(const std::string& family, const ParamMap& params, const RealVector& phi_params);

/// Analytic family of a built-in encoder under a built-in channel, or "" if
/// none applies (d and e have a closed form only at beta = 0).
std::string analytic_family(const std::string& channel_name, const std::string& encoder_name,
                            const ParamMap& encoder_params);

struct CrossValidationReport {
  std::string family;
  double max_deviation = 0;  // over random points and the minimizer
  double oracle_min = 0;
  double analytic_min = 0;
  int points = 0;
};

/// Compares the oracle with the analytic family at 100 seeded random inputs
/// and at the minimum. Throws Error(inconsistency) above 1e-8.
CrossValidationReport cross_validate(const std::string& family, const ParamMap& params, const KrausChannel& channel,
                                     const ComplexMatrix& encoder, const OracleConfig& cfg = {});

}  // namespace encopt
