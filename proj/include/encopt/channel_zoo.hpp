#pragma once

// Built-in error channels and encoder families, tensor powers, and the JSON
// interchange format for channels and encoders.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "encopt/channel.hpp"

namespace encopt {

using ParamMap = std::map<std::string, double>;

struct NamedChannelSpec {
  std::string name;
  ParamMap params;
  Index dim_in = 0;
  Index dim_out = 0;
};

/// An n x r isometry E (E^dag E = I_r) encoding C^r into C^n.
struct EncoderSpec {
  std::string name;
  ParamMap params;
  ComplexMatrix kraus;

  Index codespace_dim() const { return kraus.cols(); }
  Index ambient_dim() const { return kraus.rows(); }
};

/// {sqrt(p) sigma_x, sqrt(1-p) I}, p in [0, 1].
KrausChannel make_bit_flip(double p);

/// {diag(1, sqrt(p)), sqrt(1-p)|0><1|}, p in (0, 1).
KrausChannel make_amplitude_damping(double p);

/// All k-fold tensor products of the Kraus factors, first factor leftmost.
KrausChannel tensor_power(const KrausChannel& ch, int k);

/// Built-in channels: bitflip, bitflip2, bitflip3, ad, ad2, ad3 (param p).
KrausChannel builtin_channel(const std::string& name, const ParamMap& params);

/// Built-in encoders: repetition; a, b, c (alpha); d, e, f (alpha, beta);
/// start1..start4 (fixed seed points for the double bit-flip channel).
EncoderSpec builtin_encoder(const std::string& name, const ParamMap& params);

struct BuiltinInfo {
  std::string name;
  std::string params;
  std::string description;
};

/// Stable, documented listings for the CLI.
const std::vector<BuiltinInfo>& builtin_channel_list();
const std::vector<BuiltinInfo>& builtin_encoder_list();

/// Max |E^dag E - I|.
double isometry_residual(const ComplexMatrix& e);

// JSON interchange. Complex entries are [re, im] pairs written as decimal
// strings with 17 significant digits; numbers are accepted on input.

void save_channel(const std::filesystem::path& path, const KrausChannel& ch, const std::string& name,
                  const ParamMap& params = {});
KrausChannel load_channel(const std::filesystem::path& path, double tp_tol = 1e-8);

void save_encoder(const std::filesystem::path& path, const EncoderSpec& enc);
EncoderSpec load_encoder(const std::filesystem::path& path, double iso_tol = 1e-8);

/// Splits "builtin:<name>[:k=v,...]"; false when `uri` is not a builtin URI.
bool parse_builtin_uri(const std::string& uri, std::string& name, ParamMap& params);

/// Resolves "builtin:<name>[:k=v,...]" or a file path.
KrausChannel resolve_channel(const std::string& uri);
EncoderSpec resolve_encoder(const std::string& uri);

/// Parses "k=v,k=v" (keys alpha/beta also accept the Greek letters).
ParamMap parse_params(const std::string& text);

std::string format_decimal(double value);

}  // namespace encopt
