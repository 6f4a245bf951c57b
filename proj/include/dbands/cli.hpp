#pragma once

// Command-line front end: argument parsing into a RunConfig, execution into
// a ResultBundle, and CSV / JSON / SVG writers.

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbands/potential.hpp"

namespace dbands::cli {

inline constexpr const char* kToolName = "darboux-bands";
inline constexpr const char* kToolVersion = "1.0.0";

/// Invalid flags, values or combinations (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PotentialDescriptor {
  std::string kind = "lame";
  std::map<std::string, double> params;
};

struct RunConfig {
  std::string command;
  PotentialDescriptor potential;
  /// Command options after validation: numbers, integers, strings or arrays.
  nlohmann::json options = nlohmann::json::object();
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json", "svg"};
};

/// RunConfig from its JSON text; ConfigError on malformed or non-finite input.
RunConfig parse_config(const std::string& text);
/// Canonical JSON text (sorted keys, two-space indent).
std::string serialize(const RunConfig& cfg);
/// Argument vector (without the program name handling) into a RunConfig.
/// Throws ConfigError; help requests are reported through `help`.
RunConfig config_from_args(int argc, const char* const* argv, std::string* help = nullptr);

PotentialSpec build_potential(const PotentialDescriptor& d);

struct Table {
  std::string name;
  std::vector<std::string> columns;  // "name [meaning]"
  std::vector<std::vector<std::string>> rows;
};

struct Plot {
  std::string name;
  std::string svg;
};

struct ResultBundle {
  nlohmann::json meta;
  nlohmann::json data;
  std::vector<Table> tables;
  std::vector<Plot> plots;
  std::vector<std::string> warnings;  // echoed to stderr
  std::string summary;                // echoed to stdout
};

/// Run the configured computation. Library errors propagate.
ResultBundle execute(const RunConfig& cfg);

/// Files written into cfg.out_dir: <command>.json, <command>_<table>.csv,
/// <command>_<plot>.svg, and config.json.
void write_bundle(const ResultBundle& b, const RunConfig& cfg);

std::string to_csv(const Table& t);
/// 17 significant digits; "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double v);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool points = false;
};

std::string svg_plot(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<Series>& series,
                     const std::vector<double>& hlines = {});

/// Entry point: 0 success, 2 config error, 3 numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dbands::cli
