#pragma once

// Shared fixtures for the unit, property and acceptance tests: seeded random
// objects and brute-force reference computations that do not go through the
// library code paths they are compared against.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "encopt/channel.hpp"
#include "encopt/channel_zoo.hpp"
#include "encopt/logdet.hpp"
#include "encopt/oracle.hpp"
#include "encopt/sos_lmi.hpp"

namespace encopt::testing {

using std::numbers::pi;

inline ComplexMatrix random_complex(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double re = g(rng);
      m(i, j) = Complex(re, g(rng));
    }
  return m;
}

inline ComplexMatrix random_unitary(Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_complex(d, d, rng));
  return qr.householderQ() * ComplexMatrix::Identity(d, d);
}

// Random channel with `count` Kraus operators: rows of a random isometry
// C^n -> C^{count n}, cut into blocks.
inline KrausChannel random_channel(Index n, Index count, std::mt19937_64& rng) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_complex(count * n, n, rng));
  const ComplexMatrix v = qr.householderQ() * ComplexMatrix::Identity(count * n, n);
  std::vector<ComplexMatrix> ks;
  for (Index i = 0; i < count; ++i) ks.push_back(v.middleRows(i * n, n));
  return KrausChannel(ks, 1e-10);
}

inline ComplexVector random_state(Index d, std::mt19937_64& rng) {
  ComplexVector v = random_complex(d, 1, rng);
  return v / v.norm();
}

inline DensityMatrix random_density(Index d, std::mt19937_64& rng) {
  const ComplexMatrix g = random_complex(d, d, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (rho + rho.adjoint()) / 2.0;
  return DensityMatrix(rho);
}

// Tr(rho'^2) for rho' = sum_i A_i rho A_i^dag, written out without library help.
inline double kraus_purity(const KrausChannel& ch, const ComplexMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(ch.dim_out(), ch.dim_out());
  for (const auto& a : ch.kraus()) out += a * rho * a.adjoint();
  return (out * out).trace().real();
}

// Worst-case purity of a two-dimensional code space under real inputs by a
// dense scan of t in [0, pi), refined by ternary search around the best cell.
inline double scan_real_qubit(const KrausChannel& ch, const ComplexMatrix& enc, int samples = 20000) {
  auto f = [&](double t) {
    ComplexVector phi(2);
    phi << std::cos(t), std::sin(t);
    const ComplexVector psi = enc * phi;
    return kraus_purity(ch, psi * psi.adjoint());
  };
  double best = 2, best_t = 0;
  const double h = pi / samples;
  for (int i = 0; i < samples; ++i) {
    const double v = f(i * h);
    if (v < best) best = v, best_t = i * h;
  }
  double lo = best_t - h, hi = best_t + h;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (f(m1) < f(m2))
      hi = m2;
    else
      lo = m1;
  }
  return std::min(best, f((lo + hi) / 2));
}

inline KrausChannel double_bit_flip(double p) { return builtin_channel("bitflip2", {{"p", p}}); }
inline KrausChannel double_ad(double p) { return builtin_channel("ad2", {{"p", p}}); }

// Minimum eps for which the purity LMI admits some tau with the encoder
// frozen to `enc`.
inline SdpSolution frozen_threshold(const KrausChannel& ch, const ComplexMatrix& enc, InputMode mode,
                                    LmiForm form = LmiForm::compact) {
  const SosContext ctx = SosContext::create(ch, enc.cols(), mode);
  const DecisionLayout layout = make_layout(ctx);
  RealVector c = RealVector::Zero(layout.num_vars());
  c(layout.epsilon()) = 1;
  SdpProblem p = assemble_problem(ctx, layout, c, form);
  freeze_encoder(p, layout, superop_of_operator(enc));
  return solve_sdp(p);
}

// Largest increase of the surrogate between consecutive iterations.
inline double max_surrogate_increase(const OptimizationResult& r) {
  double worst = 0;
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    worst = std::max(worst, r.trace[i].surrogate - r.trace[i - 1].surrogate);
  return worst;
}

}  // namespace encopt::testing
