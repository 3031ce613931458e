#include "encopt/channel_zoo.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace encopt {

namespace {

using json = nlohmann::json;
using cd = std::complex<double>;

double param(const ParamMap& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double required_param(const ParamMap& params, const std::string& key, const std::string& owner) {
  auto it = params.find(key);
  if (it == params.end()) throw Error(ErrorCode::precondition, owner + " requires parameter " + key);
  return it->second;
}

ComplexMatrix sigma_x() {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(0, 1) = s(1, 0) = 1;
  return s;
}

ComplexMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.begin()->size());
  ComplexMatrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

double parse_double(const std::string& text) {
  double value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) throw Error(ErrorCode::schema, "not a number: '" + text + "'");
  return value;
}

double json_number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>());
  throw Error(ErrorCode::schema, where + ": expected a number or decimal string");
}

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({format_decimal(m(i, j).real()), format_decimal(m(i, j).imag())}));
    rows.push_back(row);
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& rows, Index expected_rows, Index expected_cols, const std::string& where) {
  if (!rows.is_array()) throw Error(ErrorCode::schema, where + ": matrix must be an array of rows");
  if (static_cast<Index>(rows.size()) != expected_rows)
    throw Error(ErrorCode::schema, where + ": expected " + std::to_string(expected_rows) + " rows");
  ComplexMatrix m(expected_rows, expected_cols);
  for (Index i = 0; i < expected_rows; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != expected_cols)
      throw Error(ErrorCode::schema, where + ": ragged row " + std::to_string(i));
    for (Index j = 0; j < expected_cols; ++j) {
      const json& entry = row[static_cast<std::size_t>(j)];
      if (!entry.is_array() || entry.size() != 2)
        throw Error(ErrorCode::schema, where + ": entry must be [re, im]");
      m(i, j) = cd(json_number(entry[0], where), json_number(entry[1], where));
    }
  }
  return m;
}

json params_to_json(const ParamMap& params) {
  json out = json::object();
  for (const auto& [k, v] : params) out[k] = format_decimal(v);
  return out;
}

ParamMap params_from_json(const json& j) {
  ParamMap out;
  if (j.is_null()) return out;
  if (!j.is_object()) throw Error(ErrorCode::schema, "params must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = json_number(it.value(), "params." + it.key());
  return out;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::schema, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::schema, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

Index json_dim(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 1)
    throw Error(ErrorCode::schema, std::string("missing or invalid '") + key + "'");
  return static_cast<Index>(j[key].get<long long>());
}

std::string canonical_key(const std::string& key) {
  if (key == "α") return "alpha";
  if (key == "β") return "beta";
  return key;
}

}  // namespace

std::string format_decimal(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

KrausChannel make_bit_flip(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::out_of_range, "bit-flip p must lie in [0, 1]");
  return KrausChannel({std::sqrt(p) * sigma_x(), std::sqrt(1.0 - p) * ComplexMatrix::Identity(2, 2)});
}

KrausChannel make_amplitude_damping(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::out_of_range, "amplitude damping p must lie in (0, 1)");
  ComplexMatrix h1 = ComplexMatrix::Zero(2, 2);
  h1(0, 0) = 1;
  h1(1, 1) = std::sqrt(p);
  ComplexMatrix h2 = ComplexMatrix::Zero(2, 2);
  h2(0, 1) = std::sqrt(1.0 - p);
  return KrausChannel({h1, h2});
}

KrausChannel tensor_power(const KrausChannel& ch, int k) {
  if (k < 1) throw Error(ErrorCode::precondition, "tensor power needs k >= 1");
  double count = std::pow(static_cast<double>(ch.kraus().size()), k);
  if (count > 4096) throw Error(ErrorCode::size_limit, "tensor power would create more than 4096 Kraus operators");
  std::vector<ComplexMatrix> ops = ch.kraus();
  for (int step = 1; step < k; ++step) {
    std::vector<ComplexMatrix> next;
    next.reserve(ops.size() * ch.kraus().size());
    for (const auto& left : ops)
      for (const auto& right : ch.kraus()) next.push_back(kron(left, right));
    ops = std::move(next);
  }
  return KrausChannel(std::move(ops));
}

KrausChannel builtin_channel(const std::string& name, const ParamMap& params) {
  const double p = required_param(params, "p", name);
  if (name == "bitflip") return make_bit_flip(p);
  if (name == "bitflip2") return tensor_power(make_bit_flip(p), 2);
  if (name == "bitflip3") return tensor_power(make_bit_flip(p), 3);
  if (name == "ad") return make_amplitude_damping(p);
  if (name == "ad2") return tensor_power(make_amplitude_damping(p), 2);
  if (name == "ad3") return tensor_power(make_amplitude_damping(p), 3);
  throw Error(ErrorCode::unknown_name, "unknown builtin channel '" + name + "'");
}

EncoderSpec builtin_encoder(const std::string& name, const ParamMap& params) {
  EncoderSpec spec{name, params, {}};
  const double alpha = param(params, "alpha", 0.0);
  const double beta = param(params, "beta", 0.0);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double h = 1.0 / std::sqrt(2.0);
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
  const double s10 = 1.0 / std::sqrt(10.0);

  if (name == "repetition") {
    spec.kraus = from_rows({{1, 0}, {0, 0}, {0, 0}, {0, 1}});
  } else if (name == "a") {
    spec.kraus = h * from_rows({{ca, -sa}, {ca, -sa}, {sa, ca}, {sa, ca}});
  } else if (name == "b") {
    spec.kraus = h * from_rows({{ca, -sa}, {sa, ca}, {ca, -sa}, {sa, ca}});
  } else if (name == "c") {
    spec.kraus = h * from_rows({{ca, -sa}, {sa, ca}, {sa, ca}, {ca, -sa}});
  } else if (name == "d") {
    spec.kraus = from_rows({{ca, 0}, {0, cb}, {sa, 0}, {0, sb}});
  } else if (name == "e") {
    spec.kraus = from_rows({{ca, 0}, {sa, 0}, {0, cb}, {0, sb}});
  } else if (name == "f") {
    spec.kraus = from_rows({{ca, 0}, {0, cb}, {0, sb}, {sa, 0}});
  } else if (name == "start1") {
    spec.kraus = s10 * from_rows({{2, 0}, {s2, -s6}, {s3, 1}, {1, s3}});
  } else if (name == "start2") {
    spec.kraus = s10 * from_rows({{s2, 0}, {s3, -s6}, {1, s2}, {2, s2}});
  } else if (name == "start3") {
    spec.kraus = s10 * from_rows({{2, 0}, {s2, s6}, {s3, -1}, {-1, s3}});
  } else if (name == "start4") {
    spec.kraus = s10 * from_rows({{s3, -1}, {s2, s6}, {2, 0}, {1, -s3}});
  } else {
    throw Error(ErrorCode::unknown_name, "unknown builtin encoder '" + name + "'");
  }
  return spec;
}

const std::vector<BuiltinInfo>& builtin_channel_list() {
  static const std::vector<BuiltinInfo> list = {
      {"bitflip", "p in [0,1]", "single-qubit bit flip {sqrt(p) X, sqrt(1-p) I}"},
      {"bitflip2", "p in [0,1]", "bit flip on each of two qubits (n = 4)"},
      {"bitflip3", "p in [0,1]", "bit flip on each of three qubits (n = 8)"},
      {"ad", "p in (0,1)", "single-qubit amplitude damping {diag(1, sqrt(p)), sqrt(1-p)|0><1|}"},
      {"ad2", "p in (0,1)", "amplitude damping on each of two qubits (n = 4)"},
      {"ad3", "p in (0,1)", "amplitude damping on each of three qubits (n = 8)"},
  };
  return list;
}

const std::vector<BuiltinInfo>& builtin_encoder_list() {
  static const std::vector<BuiltinInfo> list = {
      {"a", "alpha (default 0)", "4x2 isometry, rows (c,-s),(c,-s),(s,c),(s,c) / sqrt 2"},
      {"b", "alpha (default 0)", "4x2 isometry, rows (c,-s),(s,c),(c,-s),(s,c) / sqrt 2"},
      {"c", "alpha (default 0)", "4x2 isometry, rows (c,-s),(s,c),(s,c),(c,-s) / sqrt 2"},
      {"d", "alpha, beta (default 0)", "4x2 isometry, columns (ca,0,sa,0) and (0,cb,0,sb)"},
      {"e", "alpha, beta (default 0)", "4x2 isometry, columns (ca,sa,0,0) and (0,0,cb,sb)"},
      {"f", "alpha, beta (default 0)", "4x2 isometry, columns (ca,0,0,sa) and (0,cb,sb,0)"},
      {"repetition", "-", "|00><0| + |11><1|"},
      {"start1", "-", "fixed 4x2 starting isometry no. 1"},
      {"start2", "-", "fixed 4x2 starting isometry no. 2"},
      {"start3", "-", "fixed 4x2 starting isometry no. 3"},
      {"start4", "-", "fixed 4x2 starting isometry no. 4"},
  };
  return list;
}

double isometry_residual(const ComplexMatrix& e) {
  const Index r = e.cols();
  return (e.adjoint() * e - ComplexMatrix::Identity(r, r)).cwiseAbs().maxCoeff();
}

void save_channel(const std::filesystem::path& path, const KrausChannel& ch, const std::string& name,
                  const ParamMap& params) {
  json j;
  j["name"] = name;
  j["params"] = params_to_json(params);
  j["dim_in"] = ch.dim_in();
  j["dim_out"] = ch.dim_out();
  json ops = json::array();
  for (const auto& a : ch.kraus()) ops.push_back(matrix_to_json(a));
  j["kraus"] = ops;
  write_json(path, j);
}

KrausChannel load_channel(const std::filesystem::path& path, double tp_tol) {
  const json j = read_json(path);
  if (!j.is_object()) throw Error(ErrorCode::schema, "channel file must hold an object");
  const Index n = json_dim(j, "dim_in");
  const Index m = json_dim(j, "dim_out");
  if (!j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].empty())
    throw Error(ErrorCode::schema, "'kraus' must be a non-empty array");
  std::vector<ComplexMatrix> ops;
  for (std::size_t i = 0; i < j["kraus"].size(); ++i)
    ops.push_back(matrix_from_json(j["kraus"][i], m, n, "kraus[" + std::to_string(i) + "]"));
  try {
    return KrausChannel(std::move(ops), tp_tol);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": invariant sum A_i^dag A_i = I violated (" + e.what() + ")");
  }
}

void save_encoder(const std::filesystem::path& path, const EncoderSpec& enc) {
  json j;
  j["name"] = enc.name;
  j["params"] = params_to_json(enc.params);
  j["dim_in"] = enc.kraus.cols();
  j["dim_out"] = enc.kraus.rows();
  j["kraus"] = json::array({matrix_to_json(enc.kraus)});
  write_json(path, j);
}

EncoderSpec load_encoder(const std::filesystem::path& path, double iso_tol) {
  const json j = read_json(path);
  if (!j.is_object()) throw Error(ErrorCode::schema, "encoder file must hold an object");
  const Index r = json_dim(j, "dim_in");
  const Index n = json_dim(j, "dim_out");
  if (!j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].size() != 1)
    throw Error(ErrorCode::schema, "encoder 'kraus' must hold exactly one operator");
  EncoderSpec enc;
  enc.name = j.value("name", std::string("file"));
  enc.params = params_from_json(j.contains("params") ? j["params"] : json());
  enc.kraus = matrix_from_json(j["kraus"][0], n, r, "kraus[0]");
  const double res = isometry_residual(enc.kraus);
  if (res > iso_tol)
    throw Error(ErrorCode::not_isometry,
                path.string() + ": invariant E^dag E = I violated by " + std::to_string(res));
  return enc;
}

ParamMap parse_params(const std::string& text) {
  ParamMap out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::schema, "parameter '" + item + "' is not k=v");
    out[canonical_key(item.substr(0, eq))] = parse_double(item.substr(eq + 1));
  }
  return out;
}

bool parse_builtin_uri(const std::string& uri, std::string& name, ParamMap& params) {
  static const std::string prefix = "builtin:";
  if (uri.rfind(prefix, 0) != 0) return false;
  const std::string rest = uri.substr(prefix.size());
  const auto colon = rest.find(':');
  name = rest.substr(0, colon);
  params = colon == std::string::npos ? ParamMap{} : parse_params(rest.substr(colon + 1));
  return true;
}

KrausChannel resolve_channel(const std::string& uri) {
  std::string name;
  ParamMap params;
  if (parse_builtin_uri(uri, name, params)) return builtin_channel(name, params);
  return load_channel(uri);
}

EncoderSpec resolve_encoder(const std::string& uri) {
  std::string name;
  ParamMap params;
  if (parse_builtin_uri(uri, name, params)) return builtin_encoder(name, params);
  return load_encoder(uri);
}

}  // namespace encopt
