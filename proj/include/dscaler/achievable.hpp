#pragma once

#include "dscaler/channel.hpp"
#include "dscaler/kernel.hpp"
#include "dscaler/spectrum.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dscaler {

/// Everything the separation-based upper bound needs at one sensor count.
struct AchievabilityContext {
  KernelSpec kernel;
  SampledCovariance sc;
  Index quadrature = 1000;  // total midpoint nodes over [0,T0], >= 10 N
  double d0 = 0.5;          // amplify-and-forward rate constant
  int K_uses = 1;

  /// Midpoint nodes per sensor interval [t_i, t_{i+1}].
  Index nodes_per_interval() const;
};

/// quadrature = max(10 N, 1000).  Throws std::domain_error for N < 2 or d0 <= 0.
AchievabilityContext make_achievability_context(const KernelSpec& spec, Index N, double d0 = 0.5, int K_uses = 1,
                                                EigenMethod method = EigenMethod::Auto);

/// R_a^N(theta') = sum_k 1/2 log(1 + mu_k / theta').
double achievable_rate(double theta_p, const SampledCovariance& sc);

/// Route used to evaluate the D_a^N integrand.
///  - Dense: Cholesky of (Sigma_N' + theta' I), blocked over quadrature nodes.
///  - StateSpace: Gauss-Markov kernels only.  The integrand is the posterior
///    variance of S(t) given S(t_i) + noise of variance theta' (N-1)/T0, which a
///    Rauch-Tung-Striebel smoother and Brownian-bridge interpolation give in O(M).
///  - Auto: StateSpace when available, Dense otherwise.
enum class DistortionMethod { Auto, Dense, StateSpace };

/// D_a^N(theta') = T0^{-1} int (K(t,t) - (T0/(N-1)) rho^T (Sigma_N' + theta' I)^{-1} rho) dt, clamped at 0.
double achievable_distortion(double theta_p, const AchievabilityContext& ctx,
                             DistortionMethod method = DistortionMethod::Auto);

struct DiscretizationTerms {
  double A = 0.0;
  double B = 0.0;
};

/// A^(N) and B^(N) by midpoint quadrature on each sensor interval.
DiscretizationTerms discretization_terms(const AchievabilityContext& ctx);

/// D_b^N(theta') = T0^{-1} sum_k (1/theta' + 1/mu_k)^{-1}; zero eigenvalues contribute 0.
double d_b(double theta_p, const SampledCovariance& sc);

enum class CapacityRegime { InWindow, SubThreshold };

std::string to_string(CapacityRegime r);

struct AfCapacity {
  double value = 0.0;
  CapacityRegime flag = CapacityRegime::InWindow;
};

/// True when lim P(N) N^{1/2 - eps} > 1 for some eps > 0, decided from the schedule family.
bool satisfies_af_threshold(const PowerSchedule& sched);

/// C_a^N = min((d0 K / 2) log(N P(N)), C_u^N) with the threshold flag.
/// N P(N) <= 1 gives SubThreshold with C_a^N = 0.
AfCapacity af_capacity(Index N, const PowerSchedule& sched, const AchievabilityContext& ctx, const ChannelConfig& ch);

/// Same with C_u^N supplied by the caller.
AfCapacity af_capacity_given_cu(Index N, const PowerSchedule& sched, double d0, int K_uses, double C_u);

/// Inverse of achievable_rate: |achievable_rate(result) - R| <= rel_tol max(1, R).
/// R = 0 maps to theta'_max = sum(mu) / 2e-12, above which the rate is below 1e-12.
double theta_a_of_rate(double R, const SampledCovariance& sc, double rel_tol = 1e-9);

struct ThetaBrackets {
  double lower = 0.0;  // vartheta_L^N = log(N+1) N^{-m}
  double upper = 0.0;  // vartheta_U^N = 1/log(N+1)
};

/// m = min(x, x gamma/tau, alpha x/(x-1), beta x/(x+tau)); tau = 0 drops the second term.
double bracket_exponent(const ClassAParams& p);

ThetaBrackets theta_brackets(Index N, const ClassAParams& p);

/// Rate interval on which the two-sided theta_a bound is claimed.
struct RateInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(lo <= hi); }
};

RateInterval theta_a_rate_interval(Index N, const ClassAParams& p);

/// x^x d_l / (8^x R^x) and 2^x x^{2x} d_u / ((x-1)^x R^x).
double theta_a_lower_bound(double R, const ClassAParams& p);
double theta_a_upper_bound(double R, const ClassAParams& p);

struct ThetaBracketReport {
  enum class Status { Pass, Fail, NotApplicable };
  Status status = Status::NotApplicable;
  RateInterval interval;
  std::vector<double> rates;
  std::vector<double> thetas;
  double worst_lower_ratio = 0.0;  // max of lower bound / theta_a, <= 1 on pass
  double worst_upper_ratio = 0.0;  // max of theta_a / upper bound, <= 1 on pass
  double first_failing_rate = 0.0;
};

/// Samples `samples` rates log-uniformly across the claimed interval and checks the
/// two-sided bound.  An empty interval gives NotApplicable.
ThetaBracketReport theta_a_bracket_check(Index N, const SampledCovariance& sc, const ClassAParams& p, int samples = 10);

/// The same inequality at caller-chosen rates.
ThetaBracketReport theta_a_check_rates(const SampledCovariance& sc, const ClassAParams& p, std::span<const double> rates);

struct UpperBound {
  double D_u = 0.0;
  double D_a = 0.0;
  double theta_a = 0.0;
  double C_a = 0.0;
  CapacityRegime flag = CapacityRegime::InWindow;
  double A = 0.0;
  double B = 0.0;
  double D_b = 0.0;
  double order_reference = 0.0;  // N^{1/2 - alpha}, NaN without class parameters
};

/// D_u^N = D_a^N(theta_a^N(C_a^N)) with its discretization components.  Under the
/// threshold (SubThreshold flag) D_u is the blind-estimate distortion
/// T0^{-1} int K(t,t) dt; the other fields are still reported.
UpperBound upper_bound_distortion(Index N, const PowerSchedule& sched, const AchievabilityContext& ctx,
                                  const ChannelConfig& ch, const std::optional<ClassAParams>& p,
                                  bool with_discretization = true);

/// Same with C_u^N supplied by the caller.
UpperBound upper_bound_given_cu(Index N, const PowerSchedule& sched, const AchievabilityContext& ctx, double C_u,
                                const std::optional<ClassAParams>& p, bool with_discretization = true);

}  // namespace dscaler
