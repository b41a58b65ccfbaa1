#pragma once

#include "dscaler/config.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace dscaler {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2 };

/// Writes `contents` to a temporary sibling of `path` and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);

/// Subcommands.  Data goes to files or `out`; human messages go to `err`.
/// They throw; run_command maps exceptions onto exit codes.
void cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_bounds(const RunConfig& cfg, std::optional<Index> N, std::ostream& out, std::ostream& err);
void cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_check_class_a(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Runs `body` and converts failures: ConfigError, CapabilityError,
/// std::invalid_argument and std::domain_error give 1; anything else gives 2.
int run_command(const std::function<void()>& body, std::ostream& err);

}  // namespace dscaler
