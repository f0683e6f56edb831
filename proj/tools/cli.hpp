#pragma once

// Run configurations, dispatch to the library and report emission for the
// `sconvex` command-line tool.

#include <json.hpp>

#include <string>
#include <vector>

namespace sconvex::cli {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitFail = 2 };

struct Report {
  std::string command;
  nlohmann::json config;  // effective configuration after defaults and flags
  std::string input_digest;
  std::string status;     // PASS, FAIL, feasible, infeasible
  int exit_code = kExitOk;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> caveats;
  double wall_clock_seconds = 0.0;

  // Side outputs, empty when not produced.
  std::string transitions_csv;
  std::string transitions_halfspaces_csv;
  std::string svg;

  nlohmann::json to_json(bool with_wall_clock = true) const;
};

// Reads a config file, validates it and returns the document. Throws
// ConfigError with file:line diagnostics.
nlohmann::json load_config(const std::string& path);

// Throws ConfigError listing every schema issue.
void validate_config(const nlohmann::json& config, const std::string& source_text = "",
                     const std::string& origin = "<config>");

std::string fnv1a_digest(const std::string& text);

Report run(const nlohmann::json& config, bool want_svg = false);

// Writes report.json plus CSV/SVG side outputs into `dir`.
void write_outputs(const Report& report, const std::string& dir);

// Full command line entry point; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace sconvex::cli
