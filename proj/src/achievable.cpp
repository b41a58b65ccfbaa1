#include "dscaler/achievable.hpp"

#include "dscaler/errors.hpp"
#include "dscaler/lower_bound.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dscaler {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Midpoint nodes and weights covering [0, T0] interval by interval.
struct Quadrature {
  VectorXd nodes;
  double weight = 0.0;
  Index per_interval = 1;
};

Quadrature quadrature_nodes(const AchievabilityContext& ctx) {
  const SampledCovariance& sc = ctx.sc;
  Quadrature q;
  q.per_interval = ctx.nodes_per_interval();
  const double step = sc.spacing / static_cast<double>(q.per_interval);
  q.weight = step;
  q.nodes.resize((sc.N - 1) * q.per_interval);
  for (Index i = 0; i + 1 < sc.N; ++i) {
    for (Index j = 0; j < q.per_interval; ++j) {
      q.nodes(i * q.per_interval + j) = sc.positions(i) + (static_cast<double>(j) + 0.5) * step;
    }
  }
  return q;
}

double distortion_dense(double theta_p, const AchievabilityContext& ctx) {
  const SampledCovariance& sc = ctx.sc;
  const MatrixXd sigma = sc.has_matrix() ? sc.matrix : sampled_matrix(ctx.kernel, sc.N);
  MatrixXd shifted = sigma;
  shifted.diagonal().array() += theta_p;
  const Eigen::LLT<MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky of Sigma_N' + theta' I failed");

  const Quadrature q = quadrature_nodes(ctx);
  const Index M = q.nodes.size();
  constexpr Index kBlock = 256;
  double total = 0.0;
  for (Index start = 0; start < M; start += kBlock) {
    const Index count = std::min(kBlock, M - start);
    MatrixXd rho(sc.N, count);
    double diag = 0.0;
    for (Index c = 0; c < count; ++c) {
      const double t = q.nodes(start + c);
      rho.col(c) = kernel_row(ctx.kernel, t, sc.positions);
      diag += eval_kernel(ctx.kernel, t, t);
    }
    llt.matrixL().solveInPlace(rho);
    total += diag - sc.spacing * rho.squaredNorm();
  }
  return std::max(0.0, q.weight * total / sc.T0);
}

double distortion_state_space(double theta_p, const AchievabilityContext& ctx) {
  const SampledCovariance& sc = ctx.sc;
  const KernelSpec& k = ctx.kernel;
  const Index N = sc.N;
  const MarkovChain chain = markov_chain(k, sc.positions);
  const double r = theta_p / sc.spacing;  // observation noise variance per sample

  // Forward Kalman filter (variances only) followed by the RTS backward pass.
  VectorXd pred(N), filt(N), smooth(N), cross(N > 1 ? N - 1 : 0);
  for (Index i = 0; i < N; ++i) {
    pred(i) = (i == 0) ? chain.initial_variance
                       : chain.gain(i - 1) * chain.gain(i - 1) * filt(i - 1) + chain.innovation(i - 1);
    filt(i) = pred(i) * r / (pred(i) + r);
  }
  smooth(N - 1) = filt(N - 1);
  for (Index i = N - 2; i >= 0; --i) {
    const double g = filt(i) * chain.gain(i) / pred(i + 1);
    smooth(i) = filt(i) + g * g * (smooth(i + 1) - pred(i + 1));
    cross(i) = g * smooth(i + 1);
  }

  // Between neighbours, S(t) depends on the data only through (S_i, S_{i+1}).
  const Quadrature q = quadrature_nodes(ctx);
  double total = 0.0;
  for (Index i = 0; i + 1 < N; ++i) {
    const double a = sc.positions(i), b = sc.positions(i + 1);
    const double kaa = eval_kernel(k, a, a), kab = eval_kernel(k, a, b), kbb = eval_kernel(k, b, b);
    const double det = kaa * kbb - kab * kab;
    for (Index j = 0; j < q.per_interval; ++j) {
      const double t = q.nodes(i * q.per_interval + j);
      const double kta = eval_kernel(k, t, a), ktb = eval_kernel(k, t, b);
      double ca = 0.0, cb = 0.0;
      if (kaa <= 0.0) {
        cb = ktb / kbb;  // S_i is identically zero
      } else {
        ca = (kbb * kta - kab * ktb) / det;
        cb = (kaa * ktb - kab * kta) / det;
      }
      const double bridge = eval_kernel(k, t, t) - (ca * kta + cb * ktb);
      const double carried = ca * ca * smooth(i) + 2.0 * ca * cb * cross(i) + cb * cb * smooth(i + 1);
      total += std::max(0.0, bridge) + carried;
    }
  }
  return std::max(0.0, q.weight * total / sc.T0);
}

}  // namespace

Index AchievabilityContext::nodes_per_interval() const {
  const Index intervals = sc.N - 1;
  return (quadrature + intervals - 1) / intervals;
}

AchievabilityContext make_achievability_context(const KernelSpec& spec, Index N, double d0, int K_uses,
                                                EigenMethod method) {
  if (N < 2) throw std::domain_error("achievability needs N >= 2");
  if (!(d0 > 0.0)) throw std::domain_error("d0 must be positive");
  if (K_uses < 1) throw std::domain_error("K_uses must be positive");
  AchievabilityContext ctx;
  ctx.kernel = spec;
  ctx.sc = build_sampled_covariance(spec, N, method);
  ctx.quadrature = std::max<Index>(10 * N, 1000);
  ctx.d0 = d0;
  ctx.K_uses = K_uses;
  return ctx;
}

double achievable_rate(double theta_p, const SampledCovariance& sc) {
  if (!(theta_p > 0.0)) throw std::domain_error("water level must be positive");
  double sum = 0.0;
  for (Index k = 0; k < sc.eigenvalues.size(); ++k) sum += std::log1p(sc.eigenvalues(k) / theta_p);
  return 0.5 * sum;
}

double achievable_distortion(double theta_p, const AchievabilityContext& ctx, DistortionMethod method) {
  if (!(theta_p > 0.0)) throw std::domain_error("water level must be positive");
  if (method == DistortionMethod::Auto) {
    method = is_gauss_markov(ctx.kernel) ? DistortionMethod::StateSpace : DistortionMethod::Dense;
  }
  return method == DistortionMethod::StateSpace ? distortion_state_space(theta_p, ctx)
                                                : distortion_dense(theta_p, ctx);
}

DiscretizationTerms discretization_terms(const AchievabilityContext& ctx) {
  const SampledCovariance& sc = ctx.sc;
  const KernelSpec& k = ctx.kernel;
  const Quadrature q = quadrature_nodes(ctx);
  double first = 0.0, second = 0.0, norm_sum = 0.0;
  for (Index i = 0; i + 1 < sc.N; ++i) {
    const double a = sc.positions(i);
    const double kaa = eval_kernel(k, a, a);
    const VectorXd rho_a = kernel_row(k, a, sc.positions);
    for (Index j = 0; j < q.per_interval; ++j) {
      const double t = q.nodes(i * q.per_interval + j);
      const VectorXd rho_t = kernel_row(k, t, sc.positions);
      first += rho_a(i) - rho_t(i);
      second += eval_kernel(k, t, t) - kaa;
      norm_sum += (rho_a - rho_t).norm();
    }
  }
  DiscretizationTerms out;
  out.A = q.weight * (2.0 * first + second) / sc.T0;
  out.B = 2.0 * q.weight * norm_sum / sc.T0;
  return out;
}

double d_b(double theta_p, const SampledCovariance& sc) {
  if (!(theta_p > 0.0)) throw std::domain_error("water level must be positive");
  double sum = 0.0;
  for (Index k = 0; k < sc.eigenvalues.size(); ++k) {
    const double mu = sc.eigenvalues(k);
    if (mu > 0.0) sum += theta_p * mu / (theta_p + mu);
  }
  return sum / sc.T0;
}

std::string to_string(CapacityRegime r) { return r == CapacityRegime::InWindow ? "InWindow" : "SubThreshold"; }

bool satisfies_af_threshold(const PowerSchedule& sched) {
  if (const auto* p = std::get_if<Polynomial>(&sched.family)) return p->exponent > -0.5;
  return !std::holds_alternative<SubThresholdPower>(sched.family);
}

AfCapacity af_capacity_given_cu(Index N, const PowerSchedule& sched, double d0, int K_uses, double C_u) {
  if (N < 2) throw std::domain_error("amplify-and-forward capacity needs N >= 2");
  const double log_np = sched.log_total_power(N);
  AfCapacity out;
  if (log_np <= 0.0) {
    out.flag = CapacityRegime::SubThreshold;
    out.value = 0.0;
    return out;
  }
  out.flag = satisfies_af_threshold(sched) ? CapacityRegime::InWindow : CapacityRegime::SubThreshold;
  out.value = std::min(0.5 * d0 * static_cast<double>(K_uses) * log_np, C_u);
  return out;
}

AfCapacity af_capacity(Index N, const PowerSchedule& sched, const AchievabilityContext& ctx, const ChannelConfig& ch) {
  const double C_u = miso_capacity(ch.realize_gains(N), sched.log_power(N), ctx.K_uses);
  return af_capacity_given_cu(N, sched, ctx.d0, ctx.K_uses, C_u);
}

double theta_a_of_rate(double R, const SampledCovariance& sc, double rel_tol) {
  if (!(R >= 0.0)) throw std::domain_error("rate must be nonnegative");
  if (sc.eigenvalues.size() == 0 || !(sc.eigenvalues(0) > 0.0)) {
    throw std::domain_error("sampled covariance has no positive eigenvalue");
  }
  if (R == 0.0) return sc.eigenvalues.sum() / 2e-12;
  const double tol = rel_tol * std::max(1.0, R);
  double lo = sc.eigenvalues(0), hi = sc.eigenvalues(0);
  while (achievable_rate(hi, sc) > R) hi *= std::exp(1.0);
  while (achievable_rate(lo, sc) <= R) lo *= std::exp(-1.0);
  double log_lo = std::log(lo), log_hi = std::log(hi);
  for (int it = 0; it < 400; ++it) {
    const double log_mid = 0.5 * (log_lo + log_hi);
    const double theta = std::exp(log_mid);
    const double r = achievable_rate(theta, sc);
    if (std::abs(r - R) <= tol) return theta;
    if (r > R) {
      log_lo = log_mid;
    } else {
      log_hi = log_mid;
    }
  }
  throw NumericalError("theta_a_of_rate did not reach the requested precision");
}

double bracket_exponent(const ClassAParams& p) {
  double m = std::min(p.x, p.alpha * p.x / (p.x - 1.0));
  m = std::min(m, p.beta * p.x / (p.x + p.tau));
  if (p.tau > 0.0) m = std::min(m, p.x * p.gamma / p.tau);
  return m;
}

ThetaBrackets theta_brackets(Index N, const ClassAParams& p) {
  if (N < 2) throw std::domain_error("theta brackets need N >= 2");
  const double n = static_cast<double>(N);
  const double log_n1 = std::log(n + 1.0);
  return ThetaBrackets{log_n1 * std::pow(n, -bracket_exponent(p)), 1.0 / log_n1};
}

RateInterval theta_a_rate_interval(Index N, const ClassAParams& p) {
  const ThetaBrackets br = theta_brackets(N, p);
  const double x = p.x;
  RateInterval iv;
  iv.lo = 2.0 * std::pow(p.d_u, 1.0 / x) * x * x / (x - 1.0) * std::pow(br.upper, -1.0 / x);
  iv.hi = x * std::pow(p.d_l, 1.0 / x) / 8.0 * std::pow(br.lower, -1.0 / x);
  return iv;
}

double theta_a_lower_bound(double R, const ClassAParams& p) {
  const double x = p.x;
  return std::pow(x, x) * p.d_l / (std::pow(8.0, x) * std::pow(R, x));
}

double theta_a_upper_bound(double R, const ClassAParams& p) {
  const double x = p.x;
  return std::pow(2.0, x) * std::pow(x, 2.0 * x) * p.d_u / (std::pow(x - 1.0, x) * std::pow(R, x));
}

ThetaBracketReport theta_a_check_rates(const SampledCovariance& sc, const ClassAParams& p, std::span<const double> rates) {
  ThetaBracketReport report;
  report.status = ThetaBracketReport::Status::Pass;
  if (!rates.empty()) report.interval = RateInterval{rates.front(), rates.back()};
  for (const double R : rates) {
    const double theta = theta_a_of_rate(R, sc);
    const double lower_ratio = theta_a_lower_bound(R, p) / theta;
    const double upper_ratio = theta / theta_a_upper_bound(R, p);
    report.rates.push_back(R);
    report.thetas.push_back(theta);
    report.worst_lower_ratio = std::max(report.worst_lower_ratio, lower_ratio);
    report.worst_upper_ratio = std::max(report.worst_upper_ratio, upper_ratio);
    if ((lower_ratio > 1.0 || upper_ratio > 1.0) && report.status == ThetaBracketReport::Status::Pass) {
      report.status = ThetaBracketReport::Status::Fail;
      report.first_failing_rate = R;
    }
  }
  return report;
}

ThetaBracketReport theta_a_bracket_check(Index N, const SampledCovariance& sc, const ClassAParams& p, int samples) {
  const RateInterval iv = theta_a_rate_interval(N, p);
  if (iv.empty()) {
    ThetaBracketReport report;
    report.status = ThetaBracketReport::Status::NotApplicable;
    report.interval = iv;
    return report;
  }
  std::vector<double> rates;
  const int n = std::max(samples, 1);
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    rates.push_back(iv.lo * std::pow(iv.hi / iv.lo, f));
  }
  ThetaBracketReport report = theta_a_check_rates(sc, p, rates);
  report.interval = iv;
  return report;
}

UpperBound upper_bound_given_cu(Index N, const PowerSchedule& sched, const AchievabilityContext& ctx, double C_u,
                                const std::optional<ClassAParams>& p, bool with_discretization) {
  const AfCapacity cap = af_capacity_given_cu(N, sched, ctx.d0, ctx.K_uses, C_u);
  UpperBound ub;
  ub.C_a = cap.value;
  ub.flag = cap.flag;
  ub.theta_a = theta_a_of_rate(cap.value, ctx.sc);
  ub.D_a = achievable_distortion(ub.theta_a, ctx);
  ub.D_b = d_b(ub.theta_a, ctx.sc);
  if (with_discretization) {
    const DiscretizationTerms terms = discretization_terms(ctx);
    ub.A = terms.A;
    ub.B = terms.B;
  } else {
    ub.A = ub.B = kNaN;
  }
  ub.order_reference = p ? std::pow(static_cast<double>(N), 0.5 - p->alpha) : kNaN;
  ub.D_u = cap.flag == CapacityRegime::InWindow ? ub.D_a : kernel_diagonal_integral(ctx.kernel) / ctx.sc.T0;
  return ub;
}

UpperBound upper_bound_distortion(Index N, const PowerSchedule& sched, const AchievabilityContext& ctx,
                                  const ChannelConfig& ch, const std::optional<ClassAParams>& p,
                                  bool with_discretization) {
  const double C_u = miso_capacity(ch.realize_gains(N), sched.log_power(N), ctx.K_uses);
  return upper_bound_given_cu(N, sched, ctx, C_u, p, with_discretization);
}

}  // namespace dscaler
