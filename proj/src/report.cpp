#include "encopt/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace encopt {

namespace {

using json = nlohmann::ordered_json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json vector_json(const RealVector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

RealVector vector_from(const json& a) {
  RealVector v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Index>(i)) = a[i].get<double>();
  return v;
}

json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from(const json& rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = r ? static_cast<Index>(rows[0].size()) : 0;
  ComplexMatrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != c) throw Error(ErrorCode::schema, "ragged matrix in report");
    for (Index j = 0; j < c; ++j) {
      const json& e = row[static_cast<std::size_t>(j)];
      m(i, j) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

SdpStatus status_from(const std::string& s) {
  if (s == "optimal") return SdpStatus::optimal;
  if (s == "infeasible") return SdpStatus::infeasible;
  if (s == "numerical_failure") return SdpStatus::numerical_failure;
  throw Error(ErrorCode::schema, "unknown solver status '" + s + "'");
}

Classification classification_from(const std::string& s) {
  if (s == "certified_local_optimum") return Classification::certified_local_optimum;
  if (s == "rank_deficient") return Classification::rank_deficient;
  if (s == "not_converged") return Classification::not_converged;
  throw Error(ErrorCode::schema, "unknown classification '" + s + "'");
}

const char* form_name(LmiForm f) { return f == LmiForm::compact ? "compact" : "cross_terms"; }

LmiForm form_from(const std::string& s) {
  if (s == "compact") return LmiForm::compact;
  if (s == "cross_terms") return LmiForm::cross_terms;
  throw Error(ErrorCode::schema, "unknown LMI form '" + s + "'");
}

json result_json(const OptimizationResult& r) {
  json trace = json::array();
  for (const auto& rec : r.trace) {
    trace.push_back({{"index", rec.index},
                     {"epsilon", rec.epsilon},
                     {"tau", rec.tau},
                     {"eigenvalues", vector_json(rec.eigenvalues)},
                     {"linearized_objective", rec.linearized_objective},
                     {"surrogate", rec.surrogate},
                     {"status", to_string(rec.status)},
                     {"solver_iterations", rec.solver_iterations}});
  }
  const ChoiMatrix choi = rearrange(r.final_superop);
  return {{"classification", to_string(r.classification)},
          {"certified", r.certified},
          {"converged", r.converged},
          {"lower_bound", r.lower_bound},
          {"initial_flagged", r.initial_flagged},
          {"epsilon", r.epsilon},
          {"reported_purity", r.reported_purity},
          {"oracle_purity", number_or_null(r.worst_case_purity_oracle)},
          {"leading_eigenvalue", r.leading_eigenvalue},
          {"k", r.k},
          {"iterations", r.trace.size()},
          {"message", r.message},
          {"encoder", r.encoder ? matrix_json(*r.encoder) : json(nullptr)},
          {"final_choi", {{"dim_in", choi.dim_in()}, {"dim_out", choi.dim_out()}, {"matrix", matrix_json(choi.matrix())}}},
          {"trace", trace}};
}

OptimizationResult result_from(const json& j) {
  OptimizationResult r;
  r.classification = classification_from(j.at("classification").get<std::string>());
  r.certified = j.at("certified").get<bool>();
  r.converged = j.at("converged").get<bool>();
  r.lower_bound = j.at("lower_bound").get<bool>();
  r.initial_flagged = j.at("initial_flagged").get<bool>();
  r.epsilon = j.at("epsilon").get<double>();
  r.reported_purity = j.at("reported_purity").get<double>();
  r.worst_case_purity_oracle = number_or_nan(j.at("oracle_purity"));
  r.leading_eigenvalue = j.at("leading_eigenvalue").get<double>();
  r.k = j.at("k").get<double>();
  r.message = j.at("message").get<std::string>();
  if (!j.at("encoder").is_null()) r.encoder = matrix_from(j.at("encoder"));
  const json& fc = j.at("final_choi");
  r.final_superop = rearrange_inv(
      ChoiMatrix(matrix_from(fc.at("matrix")), fc.at("dim_in").get<Index>(), fc.at("dim_out").get<Index>()));
  for (const json& t : j.at("trace")) {
    IterationRecord rec;
    rec.index = t.at("index").get<int>();
    rec.epsilon = t.at("epsilon").get<double>();
    rec.tau = t.at("tau").get<std::vector<double>>();
    rec.eigenvalues = vector_from(t.at("eigenvalues"));
    rec.linearized_objective = t.at("linearized_objective").get<double>();
    rec.surrogate = t.at("surrogate").get<double>();
    rec.status = status_from(t.at("status").get<std::string>());
    rec.solver_iterations = t.at("solver_iterations").get<int>();
    r.trace.push_back(std::move(rec));
  }
  return r;
}

}  // namespace

std::optional<int> select_best(const std::vector<RestartRecord>& restarts, InputMode mode) {
  std::optional<int> best;
  for (std::size_t i = 0; i < restarts.size(); ++i) {
    const OptimizationResult& r = restarts[i].result;
    const bool eligible = r.certified || (mode == InputMode::general_r && !r.trace.empty() &&
                                          r.classification != Classification::not_converged);
    if (!eligible) continue;
    if (!best || r.epsilon < restarts[static_cast<std::size_t>(*best)].result.epsilon) best = static_cast<int>(i);
  }
  return best;
}

std::string to_json(const RunReport& report) {
  const HeuristicConfig& c = report.input.config;
  json input = {{"channel", report.input.channel},
                {"r", report.input.r},
                {"mode", to_string(report.input.mode)},
                {"config",
                 {{"delta", c.delta},
                  {"gamma", c.gamma},
                  {"k", c.k ? json(*c.k) : json(nullptr)},
                  {"max_iters", c.max_iters},
                  {"obj_tol", c.obj_tol},
                  {"rank_ratio_tol", c.rank_ratio_tol},
                  {"lmi_form", form_name(c.form)},
                  {"solver_tol", c.solver.tol},
                  {"oracle_resolution", c.oracle.resolution}}},
                {"restarts", report.input.restarts},
                {"seed", report.input.seed},
                {"init", report.input.init},
                {"jobs", report.input.jobs}};
  json restarts = json::array();
  for (const auto& r : report.restarts)
    restarts.push_back({{"index", r.index}, {"seed", r.seed}, {"initial", r.initial}, {"result", result_json(r.result)}});
  json best = nullptr;
  if (report.best) {
    const OptimizationResult& b = report.restarts.at(static_cast<std::size_t>(*report.best)).result;
    best = {{"restart", *report.best},
            {"epsilon", b.epsilon},
            {"purity", b.reported_purity},
            {"lower_bound", b.lower_bound},
            {"encoder", b.encoder ? matrix_json(*b.encoder) : json(nullptr)}};
  }
  json verification = nullptr;
  if (report.verification) {
    const Verification& v = *report.verification;
    verification = {{"oracle_purity", v.oracle_purity},
                    {"argmin_angles", vector_json(v.argmin_angles)},
                    {"resolution", v.resolution},
                    {"cross_check_residual", v.cross_check_residual}};
  }
  json doc = {{"schema", "encopt.run_report"},
              {"schema_version", std::to_string(kReportSchemaMajor) + "." + std::to_string(kReportSchemaMinor)},
              {"tool_version", report.tool_version},
              {"input", input},
              {"restarts", restarts},
              {"best", best},
              {"verification", verification},
              {"wall_clock_seconds", report.wall_clock_seconds}};
  return doc.dump(2) + "\n";
}

RunReport parse_report(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("schema").get<std::string>() != "encopt.run_report")
      throw Error(ErrorCode::schema, "not an encopt run report");
    const std::string version = doc.at("schema_version").get<std::string>();
    const int major = std::stoi(version.substr(0, version.find('.')));
    if (major != kReportSchemaMajor)
      throw Error(ErrorCode::schema, "unsupported report schema version " + version);

    RunReport rep;
    rep.tool_version = doc.at("tool_version").get<std::string>();
    rep.wall_clock_seconds = doc.at("wall_clock_seconds").get<double>();
    const json& in = doc.at("input");
    rep.input.channel = in.at("channel").get<std::string>();
    rep.input.r = in.at("r").get<Index>();
    rep.input.mode = parse_input_mode(in.at("mode").get<std::string>());
    const json& c = in.at("config");
    rep.input.config.delta = c.at("delta").get<double>();
    rep.input.config.gamma = c.at("gamma").get<double>();
    if (!c.at("k").is_null()) rep.input.config.k = c.at("k").get<double>();
    rep.input.config.max_iters = c.at("max_iters").get<int>();
    rep.input.config.obj_tol = c.at("obj_tol").get<double>();
    rep.input.config.rank_ratio_tol = c.at("rank_ratio_tol").get<double>();
    rep.input.config.form = form_from(c.at("lmi_form").get<std::string>());
    rep.input.config.solver.tol = c.at("solver_tol").get<double>();
    rep.input.config.oracle.resolution = c.at("oracle_resolution").get<int>();
    rep.input.restarts = in.at("restarts").get<int>();
    rep.input.seed = in.at("seed").get<std::uint64_t>();
    rep.input.init = in.at("init").get<std::string>();
    rep.input.jobs = in.at("jobs").get<int>();
    for (const json& r : doc.at("restarts")) {
      RestartRecord rec;
      rec.index = r.at("index").get<int>();
      rec.seed = r.at("seed").get<std::uint64_t>();
      rec.initial = r.at("initial").get<std::string>();
      rec.result = result_from(r.at("result"));
      rep.restarts.push_back(std::move(rec));
    }
    if (!doc.at("best").is_null()) rep.best = doc.at("best").at("restart").get<int>();
    if (!doc.at("verification").is_null()) {
      const json& v = doc.at("verification");
      Verification ver;
      ver.oracle_purity = v.at("oracle_purity").get<double>();
      ver.argmin_angles = vector_from(v.at("argmin_angles"));
      ver.resolution = v.at("resolution").get<int>();
      ver.cross_check_residual = v.at("cross_check_residual").get<double>();
      rep.verification = ver;
    }
    return rep;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, std::string("malformed report: ") + e.what());
  }
}

void save_report(const std::filesystem::path& path, const RunReport& report) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::precondition, "cannot write " + path.string());
  f << to_json(report);
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::precondition, "cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_report(ss.str());
}

}  // namespace encopt
