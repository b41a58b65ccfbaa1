#include "dscaler/sweep.hpp"

#include "dscaler/errors.hpp"
#include "dscaler/lower_bound.hpp"
#include "dscaler/montecarlo.hpp"
#include "dscaler/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dscaler {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

const char* const kSweepCsvHeader = "N,P,C_u,theta_low,D_l,regime,C_a,theta_a,D_a,A_N,B_N,D_b,D_u,sim_mean,sim_stderr";

std::string to_string(Regime r) {
  switch (r) {
    case Regime::InWindow:
      return "InWindow";
    case Regime::LowerBoundOnly:
      return "LowerBoundOnly";
    case Regime::SubThreshold:
      return "SubThreshold";
  }
  return "unknown";
}

std::string to_string(FitColumn c) { return c == FitColumn::D_l ? "D_l" : "D_u"; }

double window_ceiling_exponent(const ClassAParams& p) {
  double m = std::min(1.0, p.alpha / (p.x - 1.0));
  m = std::min(m, (2.0 * p.alpha - 1.0) / (2.0 * (p.x - 1.0)));
  m = std::min(m, p.beta / (p.x + p.tau));
  if (p.tau > 0.0) m = std::min(m, p.gamma / p.tau);
  return m;
}

Regime classify_regime(const PowerSchedule& sched, const std::optional<ClassAParams>& p) {
  if (!satisfies_af_threshold(sched)) return Regime::SubThreshold;
  if (const auto* ne = std::get_if<NearExponential>(&sched.family)) {
    // N P(N) = e^{N^q}; the window needs N P(N) / e^{N^m} -> 0, i.e. q < m.
    if (!p || !(ne->q < window_ceiling_exponent(*p))) return Regime::LowerBoundOnly;
  }
  return Regime::InWindow;
}

void SweepConfig::validate() const {
  if (N_list.empty()) throw ConfigError("sweep N_list is empty");
  if (N_list.front() < 4) throw ConfigError("sweep N_list entries must be at least 4");
  for (std::size_t i = 1; i < N_list.size(); ++i) {
    if (N_list[i] <= N_list[i - 1]) throw ConfigError("sweep N_list must be strictly increasing");
  }
  if (!(d0 > 0.0)) throw ConfigError("d0 must be positive");
  if (simulate && trials < 1) throw ConfigError("simulation needs at least one trial");
  ch.validate();
}

SpectrumModel lower_bound_model(const KernelSpec& spec, Index fallback_N) {
  if (spec.classA && is_gauss_markov(spec)) return adaptive_spectrum_model(spec);
  return spectrum_model(nystrom_spectrum(spec, fallback_N));
}

BoundsRow compute_row(const SweepConfig& cfg, const SpectrumModel& model, Index N, const PowerSchedule& sched) {
  BoundsRow row;
  row.N = N;
  row.schedule = sched.name();
  row.log_NP = sched.log_total_power(N);
  row.P = sched.power(N);
  row.regime = classify_regime(sched, cfg.kernel.classA);
  try {
    // One gain realization per (seed, N) feeds both bounds.
    const VectorXd gains = cfg.ch.realize_gains(N);
    const double C_u = miso_capacity(gains, sched.log_power(N), cfg.ch.K_uses);
    const LowerBound lb = lower_bound_from_capacity(C_u, model, cfg.kernel.T0);
    row.C_u = C_u;
    row.theta_low = lb.theta;
    row.D_l = lb.D_l;

    const AchievabilityContext ctx = make_achievability_context(cfg.kernel, N, cfg.d0, cfg.ch.K_uses);
    const UpperBound ub = upper_bound_given_cu(N, sched, ctx, C_u, cfg.kernel.classA, cfg.discretization);
    row.C_a = ub.C_a;
    row.theta_a = ub.theta_a;
    row.D_a = ub.D_a;
    row.A_N = ub.A;
    row.B_N = ub.B;
    row.D_b = ub.D_b;
    row.D_u = ub.D_u;

    if (cfg.simulate && N <= cfg.sim_max_N) {
      SimConfig sim;
      sim.N = N;
      sim.trials = cfg.trials;
      sim.seed = cfg.seed;
      sim.sched = sched;
      sim.ch = cfg.ch;
      sim.noise_variance = cfg.noise_variance;
      sim.recon_grid = cfg.recon_grid;
      const SimResult res = simulate_af_uncoded(sim, cfg.kernel);
      row.sim_mean = res.mean_distortion;
      row.sim_stderr = res.std_error;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.C_u = row.theta_low = row.D_l = row.C_a = row.theta_a = row.D_a = kNaN;
    row.A_N = row.B_N = row.D_b = row.D_u = kNaN;
  }
  return row;
}

std::vector<BoundsRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<BoundsRow> rows(cfg.schedules.size() * cfg.N_list.size());
  if (rows.empty()) return rows;
  const SpectrumModel model = lower_bound_model(cfg.kernel);
  const Index per = static_cast<Index>(cfg.N_list.size());
  parallel_for(static_cast<Index>(rows.size()), cfg.jobs, [&](Index i) {
    const auto& sched = cfg.schedules[static_cast<std::size_t>(i / per)];
    const Index N = cfg.N_list[static_cast<std::size_t>(i % per)];
    rows[static_cast<std::size_t>(i)] = compute_row(cfg, model, N, sched);
  });
  return rows;
}

std::string rows_to_csv(std::span<const BoundsRow> rows) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  for (const BoundsRow& r : rows) {
    out += std::to_string(r.N);
    for (double v : {r.P, r.C_u, r.theta_low, r.D_l}) {
      out += ',';
      append_number(out, v);
    }
    out += ',';
    out += to_string(r.regime);
    for (double v : {r.C_a, r.theta_a, r.D_a, r.A_N, r.B_N, r.D_b, r.D_u}) {
      out += ',';
      append_number(out, v);
    }
    out += ',';
    if (r.sim_mean) append_number(out, *r.sim_mean);
    out += ',';
    if (r.sim_stderr) append_number(out, *r.sim_stderr);
    out += '\n';
  }
  return out;
}

ScalingFit fit_scaling(std::span<const BoundsRow> rows, const ClassAParams& p, FitColumn column, double min_span) {
  std::vector<double> xs, ys;
  double lo = INFINITY, hi = 0.0;
  for (const BoundsRow& r : rows) {
    const double value = column == FitColumn::D_l ? r.D_l : r.D_u;
    if (!r.error.empty() || r.regime == Regime::SubThreshold || !(r.log_NP > 1.0) || !(value > 0.0)) continue;
    xs.push_back(std::log(r.log_NP));
    ys.push_back(std::log(value));
    lo = std::min(lo, r.log_NP);
    hi = std::max(hi, r.log_NP);
  }
  const std::size_t n = xs.size();
  if (n < 4) {
    throw std::domain_error("scaling fit needs at least 4 eligible rows, got " + std::to_string(n));
  }
  const double span = hi / lo;
  if (span < min_span) {
    std::ostringstream msg;
    msg << "log(N P(N)) spans a factor " << span << " but the fit requires at least " << min_span;
    throw std::domain_error(msg.str());
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  ScalingFit fit;
  fit.n_points = static_cast<Index>(n);
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double sse = std::max(0.0, syy - fit.slope * sxy);
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.slope_stderr = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
  fit.expected_slope = 1.0 - p.x;
  fit.span = span;
  return fit;
}

}  // namespace dscaler
