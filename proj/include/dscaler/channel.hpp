#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>

namespace dscaler {

using Eigen::Index;
using Eigen::VectorXd;

// Sum power schedules P(N).
struct PerSensor {  // P(N) = N * P_ind
  double P_ind = 1.0;
  bool operator==(const PerSensor&) const = default;
};
struct Total {  // P(N) = P_tot
  double P_tot = 1.0;
  bool operator==(const Total&) const = default;
};
struct Polynomial {  // P(N) = N^exponent
  double exponent = 0.0;
  bool operator==(const Polynomial&) const = default;
};
struct NearExponential {  // P(N) = e^{N^q} / N
  double q = 0.4;
  bool operator==(const NearExponential&) const = default;
};
struct SubThresholdPower {  // P(N) = e^{-N}
  bool operator==(const SubThresholdPower&) const = default;
};

struct PowerSchedule {
  std::variant<PerSensor, Total, Polynomial, NearExponential, SubThresholdPower> family = Total{};

  /// log P(N); finite even where P(N) itself under- or overflows.
  double log_power(Index N) const;
  double power(Index N) const;
  /// log(N P(N)).
  double log_total_power(Index N) const;
  /// Stable textual form, e.g. "total:1", "near_exponential:0.4", "sub_threshold".
  std::string name() const;

  bool operator==(const PowerSchedule&) const = default;
};

/// Parses the form produced by PowerSchedule::name().  Throws ConfigError.
PowerSchedule parse_schedule(const std::string& text);

struct ConstantGain {
  double h = 1.0;
  bool operator==(const ConstantGain&) const = default;
};
struct SeededUniformGain {
  std::uint64_t seed = 0;
  bool operator==(const SeededUniformGain&) const = default;
};

/// Sensor-to-collector gains h_{i0} in [h_lower, h_upper] and K channel uses
/// per source realization.
struct ChannelConfig {
  double h_lower = 1.0;
  double h_upper = 1.0;
  std::variant<ConstantGain, SeededUniformGain> gain_mode = ConstantGain{};
  int K_uses = 1;

  /// Throws ConfigError if the bounds or the constant gain are inconsistent.
  void validate() const;

  /// h_{10}..h_{N0}.  Seeded gains are a pure function of (seed, N), so every
  /// consumer of the same (seed, N) sees the same channel.
  VectorXd realize_gains(Index N) const;

  bool operator==(const ChannelConfig&) const = default;
};

/// log(1 + e^v) without overflow.
double softplus(double v);

}  // namespace dscaler
