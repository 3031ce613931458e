#include "encopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace encopt {

namespace {

constexpr double kPi = std::numbers::pi;

double get(const ParamMap& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

struct Axis {
  double lo;
  double step;
  int count;
};

std::vector<Axis> grid_axes(Index r, InputMode mode, int res, long long budget) {
  if (mode == InputMode::real_qubit) return {{0.0, kPi / res, res}};
  if (mode == InputMode::complex_qubit) return {{0.0, kPi / (res - 1), res}, {0.0, 2 * kPi / res, res}};
  const Index na = oracle_num_angles(r, mode);
  int g = std::max(4, static_cast<int>(std::floor(std::pow(static_cast<double>(budget), 1.0 / static_cast<double>(na)))));
  g = std::min(g, res);
  std::vector<Axis> axes;
  for (Index i = 0; i < r - 1; ++i) axes.push_back({0.0, (kPi / 2) / (g - 1), g});
  for (Index i = 0; i < r - 1; ++i) axes.push_back({0.0, 2 * kPi / g, g});
  return axes;
}

// Golden-section search of f on [a, b].
template <typename F>
double golden_min(F&& f, double a, double b, double xtol, double& fbest) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = fc < fd ? c : d;
  fbest = std::min(fc, fd);
  return x;
}

}  // namespace

void OracleConfig::validate() const {
  detail::require(resolution >= 8, ErrorCode::precondition, "oracle resolution must be at least 8");
  detail::require(refinement_tol > 0, ErrorCode::precondition, "refinement tolerance must be positive");
  detail::require(max_grid_points >= 16, ErrorCode::precondition, "grid budget too small");
}

Index oracle_num_angles(Index r, InputMode mode) {
  switch (mode) {
    case InputMode::real_qubit: return r - 1;
    case InputMode::complex_qubit: return 2;
    case InputMode::general_r: return 2 * r - 2;
  }
  return 0;
}

ComplexVector oracle_state(Index r, InputMode mode, const RealVector& angles) {
  detail::require(angles.size() == oracle_num_angles(r, mode), ErrorCode::dimension_mismatch,
                  "wrong number of oracle angles");
  ComplexVector phi(r);
  if (mode == InputMode::real_qubit) {
    detail::require(r == 2, ErrorCode::precondition, "real_qubit mode requires r = 2");
    phi << std::cos(angles(0)), std::sin(angles(0));
    return phi;
  }
  if (mode == InputMode::complex_qubit) {
    detail::require(r == 2, ErrorCode::precondition, "complex_qubit mode requires r = 2");
    phi << std::cos(angles(0) / 2), std::polar(std::sin(angles(0) / 2), angles(1));
    return phi;
  }
  // hyperspherical: phi_0 = cos t1, phi_1 = sin t1 cos t2, ..., phi_{r-1} = sin t1 ... sin t_{r-1}
  double s = 1.0;
  for (Index j = 0; j < r; ++j) {
    const double amp = j + 1 < r ? s * std::cos(angles(j)) : s;
    if (j + 1 < r) s *= std::sin(angles(j));
    phi(j) = j == 0 ? Complex(amp) : std::polar(amp, angles(r - 1 + j - 1));
  }
  return phi;
}

double output_purity(const KrausChannel& channel, const ComplexMatrix& encoder, const ComplexVector& phi) {
  const ComplexVector psi = encoder * phi;
  ComplexMatrix rho = ComplexMatrix::Zero(channel.dim_out(), channel.dim_out());
  for (const auto& a : channel.kraus()) {
    const ComplexVector v = a * psi;
    rho.noalias() += v * v.adjoint();
  }
  return rho.squaredNorm();
}

PurityForm::PurityForm(const KrausChannel& channel, const ComplexMatrix& encoder) : r_(encoder.cols()) {
  detail::require(encoder.rows() == channel.dim_in(), ErrorCode::dimension_mismatch,
                  "encoder output dimension differs from the channel input");
  const ComplexMatrix ee = kron(encoder, encoder);
  omega_ = ee.adjoint() * compute_omega(channel) * ee;
}

double PurityForm::operator()(const ComplexVector& phi) const {
  ComplexVector u(r_ * r_);
  for (Index a = 0; a < r_; ++a) u.segment(a * r_, r_) = phi(a) * phi;
  return (u.adjoint() * omega_ * u)(0).real();
}

OracleResult worst_case_purity(const KrausChannel& channel, const ComplexMatrix& encoder, const OracleConfig& cfg) {
  cfg.validate();
  detail::require(channel.dim_in() == channel.dim_out(), ErrorCode::dimension_mismatch,
                  "error channel must map a space to itself");
  detail::require(encoder.rows() == channel.dim_in(), ErrorCode::dimension_mismatch,
                  "encoder output dimension differs from the channel input");
  const Index r = encoder.cols();
  const PurityForm form(channel, encoder);
  OracleResult out;
  const auto axes = grid_axes(r, cfg.mode, cfg.resolution, cfg.max_grid_points);
  const Index na = static_cast<Index>(axes.size());
  out.grid_per_angle = axes.empty() ? 0 : axes.back().count;

  auto eval = [&](const RealVector& ang) {
    ++out.evaluations;
    return form(oracle_state(r, cfg.mode, ang));
  };

  // Grid scan keeping the best few points as refinement seeds.
  constexpr std::size_t kSeeds = 8;
  std::vector<std::pair<double, RealVector>> seeds;
  std::vector<int> idx(static_cast<std::size_t>(na), 0);
  RealVector ang(na);
  for (;;) {
    for (Index a = 0; a < na; ++a) ang(a) = axes[static_cast<std::size_t>(a)].lo + idx[static_cast<std::size_t>(a)] * axes[static_cast<std::size_t>(a)].step;
    const double v = eval(ang);
    if (seeds.size() < kSeeds || v < seeds.back().first) {
      auto pos = std::upper_bound(seeds.begin(), seeds.end(), v,
                                  [](double x, const std::pair<double, RealVector>& s) { return x < s.first; });
      seeds.insert(pos, {v, ang});
      if (seeds.size() > kSeeds) seeds.pop_back();
    }
    Index a = 0;
    for (; a < na; ++a) {
      if (++idx[static_cast<std::size_t>(a)] < axes[static_cast<std::size_t>(a)].count) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
    if (a == na) break;
  }

  double best = std::numeric_limits<double>::infinity();
  RealVector best_ang;
  for (auto& [v0, start] : seeds) {
    RealVector x = start;
    double fx = v0;
    RealVector h(na);
    for (Index a = 0; a < na; ++a) h(a) = axes[static_cast<std::size_t>(a)].step;
    for (int sweep = 0; sweep < 200; ++sweep) {
      const double before = fx;
      double max_move = 0;
      for (Index a = 0; a < na; ++a) {
        RealVector trial = x;
        auto f1 = [&](double t) {
          trial(a) = t;
          return eval(trial);
        };
        double fnew;
        const double t = golden_min(f1, x(a) - h(a), x(a) + h(a), 1e-12, fnew);
        if (fnew < fx) {
          max_move = std::max(max_move, std::abs(t - x(a)));
          h(a) = std::max(4 * std::abs(t - x(a)), 1e-7);
          x(a) = t;
          fx = fnew;
        } else {
          h(a) = std::max(h(a) / 2, 1e-7);
        }
      }
      if (before - fx <= cfg.refinement_tol * 1e-2 || max_move < 1e-12) break;
    }
    if (fx < best) {
      best = fx;
      best_ang = x;
    }
  }
  out.min_purity = best;
  out.argmin_angles = best_ang;
  out.argmin_state = oracle_state(r, cfg.mode, best_ang);
  const double direct = output_purity(channel, encoder, out.argmin_state);
  out.cross_check_residual = std::abs(direct - best);
  if (out.cross_check_residual > 1e-10)
    throw Error(ErrorCode::inconsistency, "Omega form " + format_decimal(best) + " and Kraus form " +
                                              format_decimal(direct) + " disagree at the minimizer");
  return out;
}

double analytic_purity(const std::string& family, const ParamMap& params, const RealVector& phi_params) {
  if (family == "identity") return 1.0;
  detail::require(phi_params.size() >= 1, ErrorCode::dimension_mismatch, "analytic purity needs the input angle");
  const double p = get(params, "p", std::numeric_limits<double>::quiet_NaN());
  detail::require(std::isfinite(p) && p >= 0 && p <= 1, ErrorCode::out_of_range, "analytic purity needs p in [0, 1]");
  const double q = 1 - p;
  const double a = get(params, "alpha", 0.0), b = get(params, "beta", 0.0);
  const double t = phi_params(0);
  const double x1 = std::cos(t), x2 = std::sin(t);
  if (family == "bf_a" || family == "bf_b") {
    const double c = std::cos(2 * t + 2 * a);
    return 1 - 2 * p * q * c * c;
  }
  if (family == "bf_c") {
    const double c = std::cos(2 * t + 2 * a);
    return 1 - 4 * p * q * (p * p + q * q) * c * c;
  }
  if (family == "ad_d") {
    const double s = std::sin(a);
    const double u = x1 * x1 * s * s + x2 * x2;
    return 1 - 2 * p * q * u * u;
  }
  if (family == "ad_f") {
    const double s = std::sin(a);
    const double cross = std::sin(2 * a) * std::sin(2 * b);
    const double x1sq = x1 * x1;
    return 1 - 2 * p * q *
                   ((1 + cross - 2 * p * q * s * s * s * s) * x1sq * x1sq - (1 + std::cos(2 * a) + cross) * x1sq + 1);
  }
  throw Error(ErrorCode::unknown_name, "unknown analytic family '" + family + "'");
}

std::string analytic_family(const std::string& channel_name, const std::string& encoder_name,
                            const ParamMap& encoder_params) {
  if (channel_name == "bitflip2") {
    if (encoder_name == "a") return "bf_a";
    if (encoder_name == "b") return "bf_b";
    if (encoder_name == "c") return "bf_c";
  }
  if (channel_name == "ad2") {
    if ((encoder_name == "d" || encoder_name == "e") && get(encoder_params, "beta", 0.0) == 0.0) return "ad_d";
    if (encoder_name == "f") return "ad_f";
  }
  return "";
}

CrossValidationReport cross_validate(const std::string& family, const ParamMap& params, const KrausChannel& channel,
                                     const ComplexMatrix& encoder, const OracleConfig& cfg) {
  detail::require(family == "identity" || cfg.mode == InputMode::real_qubit, ErrorCode::precondition,
                  "closed forms are stated for real qubit inputs");
  CrossValidationReport rep;
  rep.family = family;
  const Index r = encoder.cols();
  const PurityForm form(channel, encoder);
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto analytic_at = [&](const RealVector& ang) {
    if (family == "identity") return 1.0;
    return analytic_purity(family, params, ang);
  };
  const Index na = oracle_num_angles(r, cfg.mode);
  for (int i = 0; i < 100; ++i) {
    RealVector ang(na);
    for (Index a = 0; a < na; ++a) ang(a) = 2 * kPi * unif(rng);
    const double v = form(oracle_state(r, cfg.mode, ang));
    rep.max_deviation = std::max(rep.max_deviation, std::abs(v - analytic_at(ang)));
    ++rep.points;
  }
  const OracleResult res = worst_case_purity(channel, encoder, cfg);
  rep.oracle_min = res.min_purity;
  rep.max_deviation = std::max(rep.max_deviation, std::abs(res.min_purity - analytic_at(res.argmin_angles)));

  // analytic minimum by a dense scan refined with golden sections
  if (family == "identity") {
    rep.analytic_min = 1.0;
  } else {
    const int n = std::max(cfg.resolution, 8);
    double best = std::numeric_limits<double>::infinity(), best_t = 0;
    RealVector ang(1);
    for (int i = 0; i < n; ++i) {
      ang(0) = kPi * i / n;
      const double v = analytic_at(ang);
      if (v < best) {
        best = v;
        best_t = ang(0);
      }
    }
    double fmin;
    golden_min(
        [&](double t) {
          RealVector a1(1);
          a1(0) = t;
          return analytic_at(a1);
        },
        best_t - kPi / n, best_t + kPi / n, 1e-12, fmin);
    rep.analytic_min = std::min(best, fmin);
  }
  rep.max_deviation = std::max(rep.max_deviation, std::abs(rep.oracle_min - rep.analytic_min));
  ++rep.points;
  if (rep.max_deviation > 1e-8)
    throw Error(ErrorCode::inconsistency, "oracle and closed form '" + family + "' disagree: oracle min " +
                                              format_decimal(rep.oracle_min) + ", analytic min " +
                                              format_decimal(rep.analytic_min) + ", max deviation " +
                                              format_decimal(rep.max_deviation));
  return rep;
}

}  // namespace encopt
