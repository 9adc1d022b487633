#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "config.hpp"

namespace nmqfi::cli {

enum class Format { Csv, Json };

inline constexpr const char* kSubcommands[] = {"response", "moments",     "qfi",    "estimate",
                                               "sequential", "sweep", "correlation", "limits"};

/// Default output format of a subcommand.
Format default_format(const std::string& subcommand);

/// Runs one subcommand on a parsed config and returns the rendered output.
std::string execute(const std::string& subcommand, const Config& config, Format format);

struct RunRequest {
  std::string subcommand;
  std::string config_path;
  std::string out_path;  ///< empty writes to stdout
  std::optional<Format> format;
  std::optional<std::uint64_t> seed;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Loads, executes and writes; errors are reported on err with the config
/// path and subcommand. Returns the process exit status.
int run(const RunRequest& request, std::ostream& out, std::ostream& err);

/// Shortest-free 17-significant-digit rendering, locale independent.
std::string format_double(double value);

}  // namespace nmqfi::cli
