// encopt: command-line front end.
//
//   encopt optimize --channel builtin:bitflip2:p=0.1 --r 2 --restarts 8 --out run.json
//   encopt verify   --channel builtin:ad2:p=0.1 --encoder builtin:d:alpha=0.3
//   encopt channels
//
// Exit codes: 0 success, 2 every restart failed, 64 usage error, 65 invalid
// encoder or channel data.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "encopt/channel_zoo.hpp"
#include "encopt/logdet.hpp"
#include "encopt/oracle.hpp"
#include "encopt/report.hpp"

using namespace encopt;

namespace {

constexpr int kExitFailed = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

struct OptimizeArgs {
  std::string channel;
  Index r = 2;
  std::string mode = "real_qubit";
  double delta = 0.01;
  std::optional<double> gamma;
  std::optional<double> k;
  int max_iters = 500;
  int restarts = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string init = "random";
  std::string lmi_form = "compact";
  int resolution = 720;
  std::string out;
  bool verbose = false;
};

struct VerifyArgs {
  std::string channel;
  std::string encoder;
  std::string mode = "real_qubit";
  int resolution = 720;
};

std::string channel_name_of(const std::string& uri) {
  std::string name;
  ParamMap params;
  return parse_builtin_uri(uri, name, params) ? name : std::string();
}

std::string format_angles(const RealVector& a) {
  std::string s = "[";
  for (Index i = 0; i < a.size(); ++i) s += (i ? ", " : "") + format_decimal(a(i));
  return s + "]";
}

int cmd_optimize(const OptimizeArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  RunInput input;
  input.channel = a.channel;
  input.r = a.r;
  input.restarts = a.restarts;
  input.seed = a.seed;
  input.init = a.init;
  input.jobs = a.jobs;
  HeuristicConfig& cfg = input.config;
  std::optional<KrausChannel> channel_opt;
  std::optional<SuperopMatrix> fixed_initial;
  try {
    input.mode = parse_input_mode(a.mode);
    cfg.delta = a.delta;
    cfg.gamma = a.gamma ? *a.gamma : HeuristicConfig::preset_gamma(channel_name_of(a.channel));
    cfg.k = a.k;
    cfg.max_iters = a.max_iters;
    cfg.form = a.lmi_form == "cross_terms" ? LmiForm::cross_terms : LmiForm::compact;
    cfg.oracle.resolution = a.resolution;
    cfg.oracle.mode = input.mode;
    cfg.verbose = a.verbose && a.jobs == 1;
    cfg.validate();
    if (a.restarts < 1 || a.jobs < 1) throw Error(ErrorCode::precondition, "--restarts and --jobs must be >= 1");
    if (a.r < 2) throw Error(ErrorCode::precondition, "--r must be at least 2");
  } catch (const Error& e) {
    std::cerr << "encopt optimize: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    channel_opt = resolve_channel(a.channel);
    if (a.init != "random") {
      const EncoderSpec enc = resolve_encoder(a.init);
      fixed_initial = superop_of_operator(enc.kraus);
    }
  } catch (const Error& e) {
    std::cerr << "encopt optimize: " << e.what() << "\n";
    return kExitData;
  }
  const KrausChannel& channel = *channel_opt;

  RunReport report;
  report.input = input;
  report.restarts.resize(static_cast<std::size_t>(a.restarts));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < a.restarts; i = next++) {
      RestartRecord& rec = report.restarts[static_cast<std::size_t>(i)];
      rec.index = i;
      rec.seed = a.seed + static_cast<std::uint64_t>(i);
      rec.initial = a.init;
      HeuristicConfig c = cfg;
      c.seed = rec.seed;
      try {
        const SuperopMatrix init =
            fixed_initial ? *fixed_initial : random_rank_one_initial(a.r, channel.dim_in(), rec.seed);
        rec.result = run(channel, a.r, input.mode, c, init);
      } catch (const Error& e) {
        rec.result = OptimizationResult{};
        rec.result.message = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::min(a.jobs, a.restarts);
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  report.best = select_best(report.restarts, input.mode);
  if (report.best) {
    const OptimizationResult& b = report.restarts[static_cast<std::size_t>(*report.best)].result;
    if (b.encoder) {
      const OracleResult o = worst_case_purity(channel, *b.encoder, cfg.oracle);
      report.verification = Verification{o.min_purity, o.argmin_angles, o.grid_per_angle, o.cross_check_residual};
    }
  }
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& rec : report.restarts) {
    const OptimizationResult& r = rec.result;
    std::printf("restart %d  seed %llu  %s  eps %.6f  purity %.6f  iterations %zu%s%s\n", rec.index,
                static_cast<unsigned long long>(rec.seed), to_string(r.classification), r.epsilon,
                r.reported_purity, r.trace.size(), r.message.empty() ? "" : "  ", r.message.c_str());
  }
  if (report.best) {
    const OptimizationResult& b = report.restarts[static_cast<std::size_t>(*report.best)].result;
    std::printf("best restart %d: %s %.6f (eps %.6f)\n", *report.best,
                b.lower_bound ? "purity lower bound" : "worst-case purity", b.reported_purity, b.epsilon);
  } else {
    std::printf("no restart produced a certified encoder\n");
  }
  if (!a.out.empty()) {
    try {
      save_report(a.out, report);
    } catch (const Error& e) {
      std::cerr << "encopt optimize: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  return report.best ? 0 : kExitFailed;
}

int cmd_verify(const VerifyArgs& a) {
  OracleConfig cfg;
  try {
    cfg.mode = parse_input_mode(a.mode);
    cfg.resolution = a.resolution;
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << "encopt verify: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const KrausChannel channel = resolve_channel(a.channel);
    const EncoderSpec enc = resolve_encoder(a.encoder);
    if (enc.ambient_dim() != channel.dim_in())
      throw Error(ErrorCode::dimension_mismatch, "encoder has " + std::to_string(enc.ambient_dim()) +
                                                     " rows but the channel acts on dimension " +
                                                     std::to_string(channel.dim_in()));
    const OracleResult res = worst_case_purity(channel, enc.kraus, cfg);
    std::printf("worst-case purity %s\n", format_decimal(res.min_purity).c_str());
    std::printf("argmin angles %s\n", format_angles(res.argmin_angles).c_str());
    std::printf("grid %d per angle, %lld evaluations, cross-check residual %.3e\n", res.grid_per_angle,
                static_cast<long long>(res.evaluations), res.cross_check_residual);

    std::string family;
    if (cfg.mode == InputMode::real_qubit) family = analytic_family(channel_name_of(a.channel), enc.name, enc.params);
    if (family.empty()) {
      std::printf("cross-validation: no closed form for this channel and encoder\n");
      return 0;
    }
    std::string cname;
    ParamMap cparams;
    parse_builtin_uri(a.channel, cname, cparams);
    ParamMap fparams = enc.params;
    if (cparams.count("p")) fparams["p"] = cparams.at("p");
    const CrossValidationReport cv = cross_validate(family, fparams, channel, enc.kraus, cfg);
    std::printf("cross-validation (%s): pass, max deviation %.3e, analytic minimum %s\n", family.c_str(),
                cv.max_deviation, format_decimal(cv.analytic_min).c_str());
    return 0;
  } catch (const Error& e) {
    std::cerr << "encopt verify: " << e.what() << "\n";
    return e.code() == ErrorCode::inconsistency ? kExitFailed : kExitData;
  }
}

int cmd_channels() {
  std::printf("channels:\n");
  for (const auto& c : builtin_channel_list())
    std::printf("  %-10s %-24s %s\n", c.name.c_str(), c.params.c_str(), c.description.c_str());
  std::printf("encoders:\n");
  for (const auto& e : builtin_encoder_list())
    std::printf("  %-10s %-24s %s\n", e.name.c_str(), e.params.c_str(), e.description.c_str());
  std::printf("URI syntax: builtin:<name>[:key=value,...], e.g. builtin:bitflip2:p=0.1\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encoder design for maximal worst-case output purity"};
  app.require_subcommand(1);

  OptimizeArgs oa;
  auto* opt = app.add_subcommand("optimize", "run the log-det heuristic from seeded restarts");
  opt->add_option("--channel", oa.channel, "channel file or builtin:<name>:p=..")->required();
  opt->add_option("--r", oa.r, "code-space dimension");
  opt->add_option("--mode", oa.mode, "real_qubit | complex_qubit | general_r");
  opt->add_option("--delta", oa.delta, "log-det regularization");
  opt->add_option("--gamma", oa.gamma, "weight of eps (default: channel preset)");
  opt->add_option("--k", oa.k, "SOS shift constant (default: from the channel)");
  opt->add_option("--max-iters", oa.max_iters, "SDP iterations per restart");
  opt->add_option("--restarts", oa.restarts, "number of seeded restarts");
  opt->add_option("--seed", oa.seed, "seed of restart 0; restart i uses seed + i");
  opt->add_option("--jobs", oa.jobs, "restarts run concurrently");
  opt->add_option("--init", oa.init, "random, or an encoder file / builtin URI used by every restart");
  opt->add_option("--lmi-form", oa.lmi_form, "compact | cross_terms")->check(CLI::IsMember({"compact", "cross_terms"}));
  opt->add_option("--resolution", oa.resolution, "oracle grid points per angle");
  opt->add_option("--out", oa.out, "report JSON path");
  opt->add_flag("--verbose", oa.verbose, "per-iteration progress on stderr (single job only)");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "worst-case purity of a fixed encoder");
  ver->add_option("--channel", va.channel, "channel file or builtin URI")->required();
  ver->add_option("--encoder", va.encoder, "encoder file or builtin URI")->required();
  ver->add_option("--mode", va.mode, "real_qubit | complex_qubit | general_r");
  ver->add_option("--resolution", va.resolution, "grid points per angle");

  auto* chs = app.add_subcommand("channels", "list built-in channels and encoders");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (opt->parsed()) return cmd_optimize(oa);
  if (ver->parsed()) return cmd_verify(va);
  if (chs->parsed()) return cmd_channels();
  return kExitUsage;
}
