#pragma once

#include "dscaler/channel.hpp"
#include "dscaler/kernel.hpp"
#include "dscaler/sweep.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dscaler {

struct KernelSection {
  std::string family = "brownian";  // brownian | ou | custom
  double T0 = 1.0;
  double sigma2 = 1.0;
  double eta = 1.0;
  std::string table;  // CSV path for custom kernels, resolved against the working directory
  std::optional<ClassAParams> class_a;  // unset: not claimed

  bool operator==(const KernelSection&) const = default;
};

struct SweepSection {
  std::vector<Index> N_list{64, 128, 256, 512, 1024};
  std::vector<PowerSchedule> schedules{PowerSchedule{Total{1.0}}};
  double d0 = 0.5;
  bool simulate = false;
  std::uint64_t seed = 1;
  Index trials = 1000;
  Index sim_max_N = 512;
  bool discretization = true;

  bool operator==(const SweepSection&) const = default;
};

struct SpectrumSection {
  std::string source = "analytic";  // analytic | nystrom | sampled
  Index count = 10;
  Index N = 128;

  bool operator==(const SpectrumSection&) const = default;
};

struct BoundsSection {
  Index N = 256;
  PowerSchedule schedule{Total{1.0}};
  bool simulate = false;

  bool operator==(const BoundsSection&) const = default;
};

struct SimSection {
  double noise_variance = 1.0;
  Index recon_grid = 0;
  std::string dump_trials;  // per-trial CSV path; empty disables

  bool operator==(const SimSection&) const = default;
};

struct CheckSection {
  Index lipschitz_grid = 48;
  Index eigenfunction_grid = 97;
  Index k_max = 10;
  Index envelope_count = 512;

  bool operator==(const CheckSection&) const = default;
};

struct OutputSection {
  std::string dir = "out";
  std::string rows_file = "sweep.csv";
  std::string summary_file = "summary.json";
  std::string spectrum_file = "spectrum.csv";

  bool operator==(const OutputSection&) const = default;
};

struct ToleranceSection {
  double rate_rel = 1e-9;
  double tail_rel = 1e-6;
  double fit_span = 4.0;

  bool operator==(const ToleranceSection&) const = default;
};

struct RunConfig {
  KernelSection kernel;
  ChannelConfig channel;
  SweepSection sweep;
  SpectrumSection spectrum;
  BoundsSection bounds;
  SimSection sim;
  CheckSection check;
  OutputSection output;
  ToleranceSection tolerances;
  int jobs = 0;  // 0 means all hardware threads

  bool operator==(const RunConfig&) const = default;
};

using Override = std::pair<std::string, std::string>;  // "section.key", value

/// Parses "section.key=value".  Throws ConfigError.
Override parse_override(const std::string& text);

/// INI text to RunConfig.  Precedence, lowest first: built-in defaults, the
/// text, DSCALER_SEED (when `env_seed` is set), then `overrides`.  Unknown
/// sections or keys are errors.  Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::vector<Override>& overrides = {},
                       const std::optional<std::string>& env_seed = std::nullopt);

/// Reads the file and the DSCALER_SEED environment variable.
RunConfig load_config(const std::string& path, const std::vector<Override>& overrides = {});

/// Canonical INI text; every key written, doubles with 17 significant digits.
std::string serialize_config(const RunConfig& cfg);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Builds the kernel, loading the custom table when needed.  Throws ConfigError.
KernelSpec build_kernel(const RunConfig& cfg);

/// Loads a square numeric CSV table (no header).  Throws ConfigError.
MatrixXd load_table_csv(const std::string& path);

SweepConfig build_sweep_config(const RunConfig& cfg, const KernelSpec& kernel);

}  // namespace dscaler
