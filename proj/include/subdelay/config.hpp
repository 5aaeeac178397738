#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace subdelay {

/// Invalid or ill-formed configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
  ConfigError(int line_number, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
        line(line_number) {}
  int line;
};

/// A run failed numerically (solver breakdown, non-finite values); exit code 1.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class StudyKind {
  solve,
  study_time,
  study_space,
  study_delay_nodes,
  check_kernel,
  check_truncation,
};

enum class OutputFormat { csv, json };

std::string to_string(StudyKind kind);
std::string to_string(OutputFormat format);

/// One validated run description. Each kind accepts exactly its own key set;
/// unknown or inapplicable keys are rejected. The benchmark problem pins
/// b = -1, tau = 1, K = 3; those keys are accepted but must match.
struct StudyConfig {
  StudyKind kind = StudyKind::solve;
  double alpha = 0.5;
  double p = 0.01;
  double b = -1.0;
  double tau = 1.0;
  int K = 3;
  double a_scale = 0.01;          // a(x) = -a_scale * x
  std::vector<int> N_list;        // single entry unless the kind sweeps N
  std::vector<int> M_list;        // single entry unless the kind sweeps M
  double h = 0.0;                 // temporal studies: M = round(1/h)
  std::string problem = "manufactured";  // solve only: or "zero"
  std::string output;             // empty = derived from kind and format
  OutputFormat format = OutputFormat::csv;

  bool operator==(const StudyConfig&) const = default;
};

StudyConfig parse_config(const std::string& text);
nlohmann::json emit_config(const StudyConfig& config);

struct RunReport {
  nlohmann::json config_echo;
  double wall_seconds = 0.0;
  std::string output_path;
  std::string summary;
};

/// Runs the configured study and writes the output file. Numerical failures
/// surface as NumericalError, configuration problems as ConfigError.
RunReport dispatch(const StudyConfig& config,
                   const std::string& output_override = {},
                   std::optional<OutputFormat> format_override = {},
                   unsigned threads = 0);

}  // namespace subdelay
