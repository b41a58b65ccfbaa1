#pragma once

#include "dscaler/achievable.hpp"
#include "dscaler/channel.hpp"
#include "dscaler/kernel.hpp"
#include "dscaler/rdf.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dscaler {

/// Power regime of a schedule.
///  - InWindow: the upper bound matches the lower bound in order.
///  - LowerBoundOnly: N P(N) grows past the window ceiling e^{N^m}.
///  - SubThreshold: P(N) N^{1/2-eps} stays bounded; distortion does not vanish.
enum class Regime { InWindow, LowerBoundOnly, SubThreshold };

std::string to_string(Regime r);

/// m = min(1, gamma/tau, alpha/(x-1), (2 alpha - 1)/(2(x-1)), beta/(x+tau)); tau = 0 drops gamma/tau.
double window_ceiling_exponent(const ClassAParams& p);

/// Structural classification; a NearExponential schedule without class
/// parameters cannot be certified and is reported LowerBoundOnly.
Regime classify_regime(const PowerSchedule& sched, const std::optional<ClassAParams>& p);

struct SweepConfig {
  KernelSpec kernel;
  std::vector<Index> N_list;
  std::vector<PowerSchedule> schedules;
  ChannelConfig ch;
  double d0 = 0.5;
  bool simulate = false;
  std::uint64_t seed = 1;
  Index trials = 1000;
  Index sim_max_N = 512;        // rows above this N leave the simulation columns empty
  double noise_variance = 1.0;
  Index recon_grid = 0;
  bool discretization = true;   // compute A^(N), B^(N)
  int jobs = 1;

  /// Throws ConfigError.
  void validate() const;
};

struct BoundsRow {
  Index N = 0;
  std::string schedule;
  double log_NP = 0.0;
  double P = 0.0;
  double C_u = 0.0;
  double theta_low = 0.0;
  double D_l = 0.0;
  Regime regime = Regime::InWindow;
  double C_a = 0.0;
  double theta_a = 0.0;
  double D_a = 0.0;
  double A_N = 0.0;
  double B_N = 0.0;
  double D_b = 0.0;
  double D_u = 0.0;
  std::optional<double> sim_mean;
  std::optional<double> sim_stderr;
  std::string error;  // non-empty when the row failed; numeric fields are then NaN
};

/// Spectrum model for lower-bound evaluation: the certified analytic model when
/// the kernel has closed-form eigenvalues and class parameters, otherwise a
/// Nystrom spectrum on `fallback_N` points.
SpectrumModel lower_bound_model(const KernelSpec& spec, Index fallback_N = 2048);

/// One row.  Failures are caught and recorded in BoundsRow::error.
BoundsRow compute_row(const SweepConfig& cfg, const SpectrumModel& model, Index N, const PowerSchedule& sched);

/// Rows ordered by schedule (config order), then by N.
std::vector<BoundsRow> run_sweep(const SweepConfig& cfg);

/// Sweep CSV: fixed header, one line per row, 17 significant digits.
std::string rows_to_csv(std::span<const BoundsRow> rows);

extern const char* const kSweepCsvHeader;

enum class FitColumn { D_l, D_u };

std::string to_string(FitColumn c);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  Index n_points = 0;
  double expected_slope = 0.0;  // 1 - x
  double span = 0.0;            // max / min of log(N P(N)) over the fitted rows
};

/// Least squares of log(column) on log(log(N P(N))) over rows that are not
/// SubThreshold, have no error, log(NP) > 1 and a positive value.  Throws
/// std::domain_error with the required span when fewer than 4 rows qualify or
/// the log(NP) span is below `min_span`.
ScalingFit fit_scaling(std::span<const BoundsRow> rows, const ClassAParams& p, FitColumn column,
                       double min_span = 4.0);

}  // namespace dscaler
