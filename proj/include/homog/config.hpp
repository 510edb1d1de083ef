#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homog/harness.hpp"
#include "json.hpp"

namespace homog {

/// Environment variable overriding [output] dir; the --out flag wins over it.
inline constexpr const char* kOutDirEnv = "NLHOMOG_OUT_DIR";

struct RunConfig {
  StudyConfig study;
  std::string out_dir = "out";
  std::vector<std::string> formats{"json", "csv", "svg"};
  int verbosity = 1;
  std::uint64_t seed = 0;
  /// eps for solve-eps when no --eps flag is given.
  std::optional<double> eps;
  /// [probe] delta was written explicitly; probe-weak requires it.
  bool probe_delta_given = false;
  std::string source;  // path the config was read from
};

/// Parses the INI-style document ([kernel], [coefficient], [grid], [study],
/// [rhs], [solver], [stencil], [diagnostics], [probe], [validation], [output]).
/// Lists are written "[a, b, c]"; strings may be quoted.
RunConfig parse_config_ini(const std::string& text, const std::string& origin = "<string>");

/// The same schema as a JSON object with one member per section.
RunConfig parse_config_json(const std::string& text, const std::string& origin = "<string>");

/// Dispatches on the extension (.json or anything else as INI). Throws
/// ConfigError with the file and key on every problem.
RunConfig load_config(const std::string& path);

/// Resolved config as JSON in the input schema.
nlohmann::ordered_json to_json(const RunConfig& config);

/// Accepts "p/q" or a decimal.
double parse_rational(const std::string& text);

}  // namespace homog
