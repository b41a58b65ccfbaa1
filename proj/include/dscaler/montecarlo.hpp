#pragma once

#include "dscaler/channel.hpp"
#include "dscaler/kernel.hpp"
#include "dscaler/philox.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dscaler {

/// One-shot uncoded amplify-and-forward experiment.
///
/// This is a deliberately simple, physically realizable scheme (analog
/// scaling at the sensors, linear MMSE at the collector).  It is NOT the
/// order-optimal separation scheme behind the upper bound; it must respect
/// the converse D >= D_l and usually sits above D_u.
struct SimConfig {
  Index N = 64;
  Index trials = 1000;
  std::uint64_t seed = 1;
  PowerSchedule sched;
  ChannelConfig ch;
  Index recon_grid = 0;         // reconstruction quadrature points; 0 means 10 N
  double noise_variance = 1.0;  // receiver noise per channel use (1 in the channel model)
  int jobs = 1;
  bool keep_trials = false;     // retain per-trial distortions in the result
};

struct SimResult {
  double mean_distortion = 0.0;
  double std_error = 0.0;
  Index trials = 0;
  double mean_energy = 0.0;  // average over trials of K sum_i X_i^2
  double power_budget = 0.0; // P(N)
  bool blind = false;        // scaling underflowed; collector estimates 0
  std::vector<double> per_trial;
};

/// Draws (S(t_1), ..., S(t_N)) ~ N(0, [K(p_i, p_j)]).  The factorization is a
/// pivoted LDL^T with negative pivots clamped, so zero-variance directions
/// (Brownian motion at t = 0) come out exactly zero.
class GaussianSampler {
 public:
  GaussianSampler(const KernelSpec& spec, const Eigen::Ref<const VectorXd>& points);
  VectorXd draw(Philox4x32& rng) const;
  Index dimension() const { return factor_.rows(); }

 private:
  MatrixXd factor_;  // covariance = factor_ factor_^T
};

/// Convenience wrapper over GaussianSampler at the equally spaced sensor positions.
VectorXd sample_process(const KernelSpec& spec, Index N, Philox4x32& rng);

/// Runs cfg.trials independent trials.  Trial i draws from Philox stream i, so
/// results do not depend on cfg.jobs.  Throws std::domain_error for N < 2 or
/// trials < 1.
SimResult simulate_af_uncoded(const SimConfig& cfg, const KernelSpec& spec);

enum class Placement { BelowLower, InsideSandwich, AboveUpper };

std::string to_string(Placement p);

struct Comparison {
  bool violation = false;      // mean + 3 std_error < D_l
  double ratio_lower = 0.0;    // mean / D_l
  double ratio_upper = 0.0;    // mean / D_u
  Placement placement = Placement::InsideSandwich;
};

Comparison empirical_vs_bounds(const SimResult& sim, double dl, double du);

/// Per-trial CSV: "trial,distortion" header then one row per trial.
std::string trials_csv(const SimResult& sim);

}  // namespace dscaler
