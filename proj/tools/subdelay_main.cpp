#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "subdelay/config.hpp"

namespace {

std::string read_config_text(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    return buffer.str();
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw subdelay::ConfigError(1, "cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L1/linear-FEM solver and convergence studies for the "
               "constant-delay reaction-subdiffusion equation"};
  app.require_subcommand(1);

  const char* kinds[] = {"solve",        "study-time",       "study-space",
                         "study-delay-nodes", "check-kernel", "check-truncation"};
  std::string config_path;
  std::string output_path;
  std::string format_name;
  unsigned threads = 0;
  bool full_reproduction = false;
  std::string selected;

  for (const char* kind : kinds) {
    auto* sub = app.add_subcommand(kind);
    sub->add_option("--config", config_path,
                    "JSON configuration file ('-' or omitted reads stdin)");
    sub->add_option("--output", output_path, "output file path");
    sub->add_option("--format", format_name, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", threads,
                    "concurrent table rows (default: all processors)");
    if (std::string(kind) == "study-space")
      sub->add_flag("--full", full_reproduction,
                    "full-reproduction time resolution (N = 30000)");
    sub->callback([kind, &selected] { selected = kind; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string text = read_config_text(config_path);
    subdelay::StudyConfig config = subdelay::parse_config(text);
    if (subdelay::to_string(config.kind) != selected)
      throw subdelay::ConfigError(
          1, "config kind '" + subdelay::to_string(config.kind) +
                 "' does not match subcommand '" + selected + "'");
    if (selected == "study-space" && full_reproduction) config.N_list = {30000};

    std::optional<subdelay::OutputFormat> format_override;
    if (format_name == "csv") format_override = subdelay::OutputFormat::csv;
    if (format_name == "json") format_override = subdelay::OutputFormat::json;

    const subdelay::RunReport report =
        subdelay::dispatch(config, output_path, format_override, threads);
    std::cout << "config: " << report.config_echo.dump() << "\n"
              << "output: " << report.output_path << "\n"
              << "summary: " << report.summary << "\n";
    std::fprintf(stdout, "wall time: %.3f s\n", report.wall_seconds);
    return 0;
  } catch (const subdelay::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
