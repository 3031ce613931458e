#include "encopt/logdet.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace encopt {

void HeuristicConfig::validate() const {
  auto need = [](bool ok, const std::string& m) { detail::require(ok, ErrorCode::precondition, m); };
  need(std::isfinite(delta) && delta > 0, "delta must be positive");
  need(std::isfinite(gamma) && gamma > 0, "gamma must be positive");
  need(rank_ratio_tol > 0 && rank_ratio_tol < 1, "rank_ratio_tol must lie in (0, 1)");
  need(max_iters >= 1, "max_iters must be at least 1");
  need(obj_tol >= 0, "obj_tol must be nonnegative");
  need(!k || *k > 0, "k must be positive");
  oracle.validate();
}

double HeuristicConfig::preset_gamma(const std::string& channel_name) {
  if (channel_name.rfind("bitflip", 0) == 0) return 15.0;
  if (channel_name.rfind("ad", 0) == 0) return 6.1;
  return 10.0;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::certified_local_optimum: return "certified_local_optimum";
    case Classification::rank_deficient: return "rank_deficient";
    case Classification::not_converged: return "not_converged";
  }
  return "?";
}

namespace {

struct ShiftedInverse {
  ComplexMatrix inverse;
  double logdet = 0;
};

ShiftedInverse shifted_inverse(const ComplexMatrix& phi, double delta) {
  const ComplexMatrix h = (phi + phi.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  RealVector shifted = es.eigenvalues().array() + delta;
  const double lo = shifted.minCoeff(), hi = shifted.maxCoeff();
  if (!(lo > 0) || hi / lo > 1e12)
    throw Error(ErrorCode::conditioning, "Phi + delta I is not safely positive definite (smallest eigenvalue " +
                                             std::to_string(lo) + ")");
  ShiftedInverse out;
  out.inverse = es.eigenvectors() * shifted.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
  out.logdet = shifted.array().log().sum();
  return out;
}

// Projects a Hermitian matrix onto {C >= 0, Tr_out C = I_r}: clip negative
// eigenvalues, then congruence by I (x) T^{-1/2} with T = Tr_out C.
ComplexMatrix project_feasible(const ComplexMatrix& c, Index n, Index r) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es((c + c.adjoint()) / 2.0);
  const RealVector ev = es.eigenvalues().cwiseMax(0.0);
  ComplexMatrix psd = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  const ComplexMatrix t = ChoiMatrix(psd, r, n).partial_trace_output();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> ts((t + t.adjoint()) / 2.0);
  detail::require(ts.eigenvalues().minCoeff() > 1e-12, ErrorCode::degenerate_input,
                  "initial point cannot be projected onto a trace-preserving map");
  const ComplexMatrix tih =
      ts.eigenvectors() * ts.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * ts.eigenvectors().adjoint();
  const ComplexMatrix x = kron(ComplexMatrix::Identity(n, n), tih);
  return x * psd * x.adjoint();
}

}  // namespace

RealVector linearized_objective(const ChoiMatrix& phi_prev, double delta, const DecisionLayout& layout) {
  detail::require(delta > 0, ErrorCode::precondition, "delta must be positive");
  return layout.trace_functional(shifted_inverse(phi_prev.matrix(), delta).inverse);
}

double logdet_surrogate(const ComplexMatrix& phi, double delta) {
  return shifted_inverse(phi, delta).logdet;
}

ComplexMatrix random_isometry(Index n, Index r, std::uint64_t seed) {
  detail::require(r >= 1 && r <= n, ErrorCode::precondition, "isometry needs 1 <= r <= n");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(n, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, r);
  const ComplexMatrix rr = qr.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
  for (Index j = 0; j < r; ++j) {
    const Complex d = rr(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

SuperopMatrix random_rank_one_initial(Index r, Index n, std::uint64_t seed) {
  return superop_of_operator(random_isometry(n, r, seed));
}

OptimizationResult run(const KrausChannel& channel, Index r, InputMode mode, const HeuristicConfig& config,
                       const SuperopMatrix& initial) {
  config.validate();
  const SosContext ctx = SosContext::create(channel, r, mode, config.k);
  const DecisionLayout layout = make_layout(ctx);
  const Index n = ctx.n;
  detail::require(initial.dim_in() == r && initial.dim_out() == n, ErrorCode::dimension_mismatch,
                  "initial superoperator must map C^r to C^n");

  OptimizationResult res;
  res.k = ctx.k;
  res.lower_bound = !ctx.exact();

  ComplexMatrix prev = rearrange(initial).matrix();
  {
    const ChoiMatrix c0(prev, r, n);
    const double tp = detail::max_abs(c0.partial_trace_output() - ComplexMatrix::Identity(r, r));
    const RealVector ev = hermitian_eigenvalues(prev);
    const bool feasible = detail::hermitian_residual(prev) <= 1e-6 && ev(ev.size() - 1) >= -1e-6 && tp <= 1e-6;
    const bool rank_one = ev(0) > 0 && (ev.array() > config.rank_ratio_tol * ev(0)).count() == 1;
    if (!feasible) prev = project_feasible(prev, n, r);
    res.initial_flagged = !feasible || !rank_one;
  }

  SdpProblem problem = assemble_problem(ctx, layout, RealVector::Zero(layout.num_vars()), config.form);
  auto reduced = reduce_problem(problem);
  detail::require(reduced.has_value(), ErrorCode::inconsistency, "constraint set of the heuristic is infeasible");

  OracleConfig oracle_cfg = config.oracle;
  oracle_cfg.mode = mode;

  ComplexMatrix current = prev;
  bool failed = false;
  for (int it = 0; it < config.max_iters; ++it) {
    RealVector c = layout.trace_functional(shifted_inverse(prev, config.delta).inverse);
    c(layout.epsilon()) += config.gamma;
    problem.objective = c;
    set_objective(*reduced, c);
    const SdpSolution sol = solve_reduced(problem, *reduced, config.solver);

    IterationRecord rec;
    rec.index = it;
    rec.status = sol.status;
    rec.solver_iterations = sol.iterations;
    const bool usable = sol.status == SdpStatus::optimal ||
                        (sol.status == SdpStatus::numerical_failure && sol.max_violation <= 1e-6);
    if (!usable) {
      res.message = std::string("SDP step ") + std::to_string(it) + " returned " + to_string(sol.status) +
                    (sol.message.empty() ? "" : ": " + sol.message);
      failed = true;
      break;
    }
    current = layout.choi(sol.x);
    rec.epsilon = sol.x(layout.epsilon());
    for (Index i = 0; i < layout.num_tau(); ++i) rec.tau.push_back(sol.x(layout.tau(i)));
    rec.eigenvalues = hermitian_eigenvalues(current);
    rec.linearized_objective = sol.objective;
    rec.surrogate = logdet_surrogate(current, config.delta) + config.gamma * rec.epsilon;
    res.epsilon = rec.epsilon;
    const bool have_prev = !res.trace.empty();
    const double prev_surrogate = have_prev ? res.trace.back().surrogate : 0.0;
    if (config.verbose)
      std::fprintf(stderr, "iter %4d  eps %.10f  surrogate %.10f  lambda1 %.8f  lambda2 %.3e  ipm %d\n", it,
                   rec.epsilon, rec.surrogate, rec.eigenvalues(0),
                   rec.eigenvalues.size() > 1 ? rec.eigenvalues(1) : 0.0, sol.iterations);
    res.trace.push_back(std::move(rec));
    if (have_prev &&
        std::abs(res.trace.back().surrogate - prev_surrogate) <= config.obj_tol * (1 + std::abs(prev_surrogate))) {
      res.converged = true;
      break;
    }
    prev = current;
  }

  res.final_superop = rearrange_inv(ChoiMatrix(current, r, n));
  if (res.trace.empty()) {
    res.classification = Classification::not_converged;
    res.reported_purity = 0;
    return res;
  }
  const RankEstimate rank = detect_rank(current, config.rank_ratio_tol);
  res.leading_eigenvalue = rank.eigenvalues(0);
  res.reported_purity = 1 - res.epsilon;

  if (rank.rank == 1) {
    ComplexMatrix enc;
    try {
      enc = extract_kraus_rank_one(ChoiMatrix(current, r, n), config.rank_ratio_tol);
    } catch (const Error& e) {
      res.classification = failed || !res.converged ? Classification::not_converged : Classification::rank_deficient;
      if (!res.message.empty()) res.message += "; ";
      res.message += e.what();
      return res;
    }
    const OracleResult oracle = worst_case_purity(channel, enc, oracle_cfg);
    res.worst_case_purity_oracle = oracle.min_purity;
    if (ctx.exact()) {
      if (std::abs(oracle.min_purity - (1 - res.epsilon)) > 2e-3)
        throw Error(ErrorCode::inconsistency, "certified encoder has oracle purity " +
                                                  format_decimal(oracle.min_purity) + " but 1 - eps = " +
                                                  format_decimal(1 - res.epsilon));
      res.reported_purity = oracle.min_purity;
    } else if (oracle.min_purity < res.reported_purity - 2e-3) {
      throw Error(ErrorCode::inconsistency, "lower bound " + format_decimal(res.reported_purity) +
                                                " exceeds the oracle purity " + format_decimal(oracle.min_purity));
    }
    res.encoder = enc;
    res.certified = true;
    res.classification = Classification::certified_local_optimum;
    return res;
  }
  res.classification = failed || !res.converged ? Classification::not_converged : Classification::rank_deficient;
  return res;
}

}  // namespace encopt
