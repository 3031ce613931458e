// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "support.hpp"

using namespace encopt;
using namespace encopt::testing;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::vector<OptimizationResult> all_results;
std::vector<OptimizationResult> certified_results;

OptimizationResult record(OptimizationResult r) {
  all_results.push_back(r);
  if (r.certified) certified_results.push_back(r);
  return r;
}

HeuristicConfig preset(const std::string& channel) {
  HeuristicConfig cfg;
  cfg.gamma = HeuristicConfig::preset_gamma(channel);
  return cfg;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Best of eight random restarts on the two-qubit bit flip reaches 0.82.
Verdict bitflip_restarts() {
  const KrausChannel ch = double_bit_flip(0.1);
  double best = 0;
  int certified = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const OptimizationResult r =
        record(run(ch, 2, InputMode::real_qubit, preset("bitflip2"), random_rank_one_initial(2, 4, seed)));
    if (!r.certified) continue;
    ++certified;
    best = std::max(best, r.reported_purity);
  }
  return {std::abs(best - 0.82) <= 2e-3, fmt("best purity %.6f over %.0f certified restarts", best, certified)};
}

Verdict start_four_local_optimum() {
  const OptimizationResult r = record(run(double_bit_flip(0.1), 2, InputMode::real_qubit, preset("bitflip2"),
                                          superop_of_operator(builtin_encoder("start4", {}).kraus)));
  return {r.certified && std::abs(r.epsilon - 0.2952) <= 2e-3,
          fmt("certified %.0f, eps %.6f after %.0f iterations", r.certified, r.epsilon, double(r.trace.size()))};
}

Verdict amplitude_damping_from_d() {
  HeuristicConfig cfg = preset("ad2");
  cfg.max_iters = 1500;
  const OptimizationResult r =
      record(run(double_ad(0.1), 2, InputMode::real_qubit, cfg,
                 superop_of_operator(builtin_encoder("d", {{"alpha", 0.5}, {"beta", 0.3}}).kraus)));
  return {r.certified && std::abs(r.reported_purity - 0.82) <= 2e-3,
          fmt("certified %.0f, purity %.6f after %.0f iterations", r.certified, r.reported_purity,
              double(r.trace.size()))};
}

Verdict oracle_golden_values() {
  const KrausChannel bf = double_bit_flip(0.1);
  const KrausChannel ad = double_ad(0.1);
  const double err = std::max({std::abs(worst_case_purity(bf, builtin_encoder("a", {}).kraus).min_purity - 0.82),
                               std::abs(worst_case_purity(bf, builtin_encoder("c", {}).kraus).min_purity - 0.7048),
                               std::abs(worst_case_purity(bf, builtin_encoder("repetition", {}).kraus).min_purity -
                                        0.6724),
                               std::abs(worst_case_purity(ad, builtin_encoder("d", {}).kraus).min_purity - 0.82)});
  return {err <= 1e-6, fmt("max deviation %.3e", err)};
}

// With the encoder frozen, the smallest feasible eps is 1 - (worst-case purity).
Verdict frozen_threshold_matches_oracle() {
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const KrausChannel ch = seed % 2 ? double_ad(0.1 + 0.01 * double(seed)) : double_bit_flip(0.05 + 0.01 * double(seed));
    const ComplexMatrix e = random_isometry(4, 2, 1000 + seed);
    const SdpSolution s = frozen_threshold(ch, e, InputMode::real_qubit);
    if (s.status != SdpStatus::optimal) return {false, "solver status " + std::string(to_string(s.status))};
    worst = std::max(worst, std::abs(s.objective - (1 - worst_case_purity(ch, e).min_purity)));
  }
  return {worst <= 1e-4, fmt("max |eps* - (1 - oracle)| = %.3e over 25 encoders", worst)};
}

Verdict properties() {
  std::mt19937_64 rng(2024);
  double worst_rearrange = 0, worst_form = 0, worst_tp = 0, worst_grad = 0;
  // Isometric superoperator, rank-one Choi matrix and pure outputs on a random
  // pure input must agree.
  int disagreements = 0;
  for (int t = 0; t < 200; ++t) {
    const Index n = 2 + t % 3;
    const KrausChannel ch = t % 2 == 0 ? KrausChannel(std::vector<ComplexMatrix>{random_unitary(n, rng)}, 1e-10) : random_channel(n, 2 + t % 3, rng);
    const PurePreservation pp = is_pure_preserving(kraus_to_superop(ch), 1e-8);
    const ComplexVector psi = random_state(n, rng);
    const bool pure_out = std::abs(kraus_purity(ch, psi * psi.adjoint()) - 1) <= 1e-10;
    disagreements += pp.pure_preserving != pure_out || pp.pure_preserving != (pp.choi_rank.rank == 1);
  }
  for (int t = 0; t < 100; ++t) {
    const Index m = 2 + t % 2, n = 2 + t % 3;
    const SuperopMatrix x(random_complex(n * n, m * m, rng), m, n);
    worst_rearrange = std::max(worst_rearrange, (rearrange_inv(rearrange(x)).matrix() - x.matrix()).norm());

    const KrausChannel ch = random_channel(n + 2, 1 + t % 3, rng);
    const ComplexMatrix e = random_isometry(n + 2, m, 500 + t);
    const ComplexVector phi = random_state(m, rng);
    const ComplexVector psi = e * phi;
    worst_form = std::max(worst_form, std::abs(PurityForm(ch, e)(phi) - kraus_purity(ch, psi * psi.adjoint())));

    const ChoiMatrix c = rearrange(superop_of_operator(e));
    const ComplexMatrix tr_out = c.partial_trace_output();
    worst_tp = std::max(worst_tp, (tr_out - ComplexMatrix::Identity(m, m)).norm());
  }
  const DecisionLayout layout(4, 2, 1);
  const ComplexMatrix phi = rearrange(random_rank_one_initial(2, 4, 11)).matrix();
  const RealVector f = linearized_objective(ChoiMatrix(phi, 2, 4), 0.01, layout);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix g = random_complex(8, 8, rng);
    const ComplexMatrix h = (g + g.adjoint()) / 2.0;
    RealVector x = RealVector::Zero(layout.num_vars());
    layout.set_choi(x, h);
    const double fd = (logdet_surrogate(phi + 1e-6 * h, 0.01) - logdet_surrogate(phi - 1e-6 * h, 0.01)) / 2e-6;
    worst_grad = std::max(worst_grad, std::abs(f.dot(x) - fd) / std::abs(fd));
  }
  double worst_increase = 0;
  for (const auto& r : all_results) worst_increase = std::max(worst_increase, max_surrogate_increase(r));
  const bool ok = disagreements == 0 && worst_rearrange == 0 && worst_form <= 1e-10 && worst_tp <= 1e-10 && worst_grad <= 1e-6 &&
                  worst_increase <= 1e-6;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%d pure-preservation disagreements, rearrange %.1e, purity form %.1e, trace-preserving %.1e, "
                "gradient %.1e, surrogate rise %.1e",
                disagreements, worst_rearrange, worst_form, worst_tp, worst_grad, worst_increase);
  return {ok, buf};
}

// Three-dimensional code space in the bit-flip cube: 1 - eps is a lower bound
// on the oracle value.
Verdict general_r_lower_bound() {
  const KrausChannel ch = builtin_channel("bitflip3", {{"p", 0.1}});
  HeuristicConfig cfg = preset("bitflip3");
  cfg.max_iters = 10;
  cfg.oracle.resolution = 60;
  OracleConfig oc = cfg.oracle;
  oc.mode = InputMode::general_r;
  double worst_gap = -1;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const OptimizationResult r = record(run(ch, 3, InputMode::general_r, cfg, random_rank_one_initial(3, 8, seed)));
    if (!r.lower_bound) return {false, "result not flagged as a lower bound"};
    if (!r.encoder) continue;
    const double oracle = worst_case_purity(ch, *r.encoder, oc).min_purity;
    worst_gap = std::max(worst_gap, r.reported_purity - oracle);
    ++checked;
  }
  return {checked > 0 && worst_gap <= 2e-3,
          fmt("max (reported - oracle) = %.3e over %.0f certified seeds", worst_gap, checked)};
}

Verdict leading_eigenvalue() {
  double worst = 0;
  for (const auto& r : certified_results) {
    const double rank_dim = double(r.final_superop.dim_in());
    worst = std::max(worst, std::abs(r.leading_eigenvalue - rank_dim));
  }
  return {!certified_results.empty() && worst <= 1e-6,
          fmt("max |lambda_1 - r| = %.3e over %.0f certified runs", worst, double(certified_results.size()))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"bit-flip restarts reach 0.82", bitflip_restarts},
      {"start4 stalls at eps 0.2952", start_four_local_optimum},
      {"amplitude damping from family d reaches 0.82", amplitude_damping_from_d},
      {"oracle golden values", oracle_golden_values},
      {"frozen-encoder threshold equals oracle", frozen_threshold_matches_oracle},
      {"property checks", properties},
      {"general_r reports a lower bound", general_r_lower_bound},
      {"certified results have lambda_1 = r", leading_eigenvalue},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %zu %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
