// Acceptance suite: one PASS/FAIL line per criterion, detail lines indented.

#include "dscaler/achievable.hpp"
#include "dscaler/commands.hpp"
#include "dscaler/config.hpp"
#include "dscaler/lower_bound.hpp"
#include "dscaler/rdf.hpp"
#include "dscaler/spectrum.hpp"
#include "dscaler/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

using namespace dscaler;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int worker_count() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return v;
}

// Slope of least squares y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Smallest grid value from which `holds` is true through the end of the grid; NaN if it fails at the end.
double onset(const std::vector<double>& grid, const std::function<bool(double)>& holds, bool ascending = true) {
  double first = NAN;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = ascending ? grid[grid.size() - 1 - i] : grid[i];
    if (!holds(v)) break;
    first = v;
  }
  return first;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void note(const char* fmt, auto... args) {
    if constexpr (sizeof...(args) == 0) {
      notes.emplace_back(fmt);
    } else {
      char buf[512];
      std::snprintf(buf, sizeof buf, fmt, args...);
      notes.emplace_back(buf);
    }
  }
  void require(bool ok, const char* fmt, auto... args) {
    if (!ok) {
      pass = false;
      note(fmt, args...);
    }
  }
};

Outcome spectrum_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  const Spectrum s = nystrom_spectrum(brownian_motion(1.0), 512);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (Index k = 0; k < 10; ++k) {
    const double ref = 1.0 / (std::numbers::pi * std::numbers::pi * (k + 0.5) * (k + 0.5));
    worst = std::max(worst, std::abs(s.eigenvalues(k) - ref) / ref);
  }
  o.note("max relative error %.3e over k < 10, %.2f s", worst, elapsed);
  o.require(worst <= 0.01, "relative error above 1%");
  o.require(elapsed < 10.0, "runtime above 10 s");
  return o;
}

Outcome round_trip() {
  Outcome o;
  for (const KernelSpec& spec : {brownian_motion(1.0), ornstein_uhlenbeck(1.0, 1.0, 1.0)}) {
    const SpectrumModel model = adaptive_spectrum_model(spec);
    double worst = 0.0;
    for (const double R : {0.5, 2.0, 10.0, 50.0}) {
      const double err = std::abs(rate_at(theta_of_rate(R, model), model) - R) / std::max(1.0, R);
      worst = std::max(worst, err);
    }
    o.note("%s: max |R(theta(R)) - R| / max(1,R) = %.3e", family_name(spec).c_str(), worst);
    o.require(worst <= 1e-9, "%s round trip above 1e-9", family_name(spec).c_str());
  }
  return o;
}

Outcome order_inequalities() {
  Outcome o;
  const KernelSpec bm = brownian_motion(1.0);
  const ClassAParams p = *bm.classA;
  const SpectrumModel model = adaptive_spectrum_model(bm);

  // theta(R) >= d_l (x/4)^x R^-x on R in [0.5, 500].
  {
    const auto holds = [&](double R) { return theta_of_rate(R, model) >= theta_lower_order(R, p); };
    const std::vector<double> checked = geometric(0.5, 500.0, 61);
    bool all = true;
    for (const double R : checked) all = all && holds(R);
    o.note("water level lower order: holds on R in [0.5, 500]: %s; onset over [0.01, 500] at R = %.4g",
           all ? "yes" : "no", onset(geometric(0.01, 500.0, 121), holds));
    o.require(all, "water level lower order violated");
  }
  // D(theta) >= d_l^{1/x} / (2 T0) theta^{1-1/x} on theta in [1e-7, 0.4].
  {
    const auto holds = [&](double t) { return distortion_at(t, model, 1.0) >= distortion_lower_order(t, p, 1.0); };
    bool all = true;
    for (const double t : geometric(1e-7, 0.4, 61)) all = all && holds(t);
    o.note("distortion lower order: holds on theta in [1e-7, 0.4]: %s; onset over [1e-7, 10] at theta <= %.4g",
           all ? "yes" : "no", onset(geometric(1e-7, 10.0, 121), holds, false));
    o.require(all, "distortion lower order violated");
  }
  for (const Index N : {64, 256, 1024, 4096}) {
    const SampledCovariance sc = build_sampled_covariance(bm, N);
    // theta_a bracket on R in [1, N/4].
    const std::vector<double> rates = geometric(1.0, N / 4.0, 25);
    const ThetaBracketReport r = theta_a_check_rates(sc, p, rates);
    const auto bracket_holds = [&](double R) {
      const std::vector<double> one{R};
      return theta_a_check_rates(sc, p, one).status == ThetaBracketReport::Status::Pass;
    };
    const double last_ok = onset(geometric(1.0, 4.0 * N, 81), bracket_holds, false);
    o.note("N = %td: theta_a bracket on R in [1, %g]: %s (worst ratios %.3f, %.3f); holds from R = 1 up to %.4g",
           static_cast<std::ptrdiff_t>(N), N / 4.0, r.status == ThetaBracketReport::Status::Pass ? "pass" : "fail",
           r.worst_lower_ratio, r.worst_upper_ratio, last_ok);
    o.require(r.status == ThetaBracketReport::Status::Pass, "theta_a bracket fails at N = %td, R = %g",
              static_cast<std::ptrdiff_t>(N), r.first_failing_rate);

    // D_b(theta') <= 4 d_u^{1/x} / T0 ((x+1)/(x-1)) theta'^{1-1/x} on theta' in [1e-6, 1].
    double worst = 0.0;
    for (const double t : geometric(1e-6, 1.0, 41)) worst = std::max(worst, d_b(t, sc) / db_upper_order(t, p, 1.0));
    o.note("N = %td: max D_b / upper order over theta' in [1e-6, 1] = %.3f", static_cast<std::ptrdiff_t>(N), worst);
    o.require(worst <= 1.0, "D_b upper order violated at N = %td", static_cast<std::ptrdiff_t>(N));
  }
  return o;
}

Outcome discretization_slopes() {
  Outcome o;
  const auto t0 = Clock::now();
  std::vector<double> logN, logA, logB;
  for (const Index N : {64, 128, 256, 512, 1024}) {
    const DiscretizationTerms t = discretization_terms(make_achievability_context(brownian_motion(1.0), N));
    logN.push_back(std::log(static_cast<double>(N)));
    logA.push_back(std::log(t.A));
    logB.push_back(std::log(t.B));
  }
  const double sa = ols_slope(logN, logA), sb = ols_slope(logN, logB);
  const double elapsed = seconds_since(t0);
  o.note("slope A = %.4f, slope B = %.4f, %.2f s", sa, sb, elapsed);
  o.require(sa <= -0.8, "A slope above -0.8");
  o.require(sb <= -0.35, "B slope above -0.35");
  o.require(elapsed < 120.0, "runtime above 2 min");
  return o;
}

Outcome sandwich() {
  Outcome o;
  const auto t0 = Clock::now();
  SweepConfig cfg;
  cfg.kernel = brownian_motion(1.0);
  cfg.N_list = {8, 16, 32, 64, 128, 256, 512};
  cfg.schedules = {PowerSchedule{Total{1.0}}, PowerSchedule{PerSensor{1.0}}, PowerSchedule{Polynomial{-1.0 / 3.0}}};
  cfg.simulate = true;
  cfg.trials = 1000;
  cfg.sim_max_N = 512;
  cfg.jobs = worker_count();
  const std::vector<BoundsRow> rows = run_sweep(cfg);
  const double elapsed = seconds_since(t0);
  int in_window = 0, simulated = 0;
  double worst_z = -INFINITY;
  for (const BoundsRow& r : rows) {
    o.require(r.error.empty(), "row N = %td %s failed: %s", static_cast<std::ptrdiff_t>(r.N), r.schedule.c_str(),
              r.error.c_str());
    if (r.regime != Regime::InWindow) continue;
    ++in_window;
    o.require(r.D_l <= r.D_u, "D_l > D_u at N = %td %s", static_cast<std::ptrdiff_t>(r.N), r.schedule.c_str());
    if (!r.sim_mean) continue;
    ++simulated;
    worst_z = std::max(worst_z, (r.D_l - *r.sim_mean) / *r.sim_stderr);
    o.require(*r.sim_mean >= r.D_l - 3.0 * *r.sim_stderr, "simulated mean below D_l - 3 se at N = %td %s",
              static_cast<std::ptrdiff_t>(r.N), r.schedule.c_str());
  }
  o.note("%d InWindow rows, %d simulated; max (D_l - mean)/se = %.2f; %.1f s", in_window, simulated, worst_z, elapsed);
  o.require(in_window == static_cast<int>(rows.size()), "some rows not InWindow");
  o.require(simulated == static_cast<int>(rows.size()), "some rows not simulated");
  o.require(elapsed < 600.0, "runtime above 10 min");
  return o;
}

Outcome scaling_law() {
  Outcome o;
  const auto t0 = Clock::now();
  SweepConfig cfg;
  cfg.kernel = brownian_motion(1.0);
  for (Index N = 64; N <= 16384; N *= 2) cfg.N_list.push_back(N);
  cfg.schedules = {PowerSchedule{NearExponential{0.4}}};
  cfg.jobs = worker_count();
  const std::vector<BoundsRow> rows = run_sweep(cfg);
  const ClassAParams p = *cfg.kernel.classA;
  const ScalingFit fl = fit_scaling(rows, p, FitColumn::D_l);
  const ScalingFit fu = fit_scaling(rows, p, FitColumn::D_u);
  const double elapsed = seconds_since(t0);
  o.note("regime %s; D_l slope %.4f (r2 %.4f), D_u slope %.4f (r2 %.4f), expected %.1f, log(NP) span %.1f; %.1f s",
         to_string(rows.front().regime).c_str(), fl.slope, fl.r_squared, fu.slope, fu.r_squared, fl.expected_slope,
         fl.span, elapsed);
  o.require(fl.slope >= -1.2 && fl.slope <= -0.8, "D_l slope outside [-1.2, -0.8]");
  o.require(std::abs(fu.slope - fl.slope) <= 0.3, "D_u slope differs from D_l slope by more than 0.3");
  o.require(elapsed < 900.0, "runtime above 15 min");
  return o;
}

Outcome sub_threshold() {
  Outcome o;
  const KernelSpec bm = brownian_motion(1.0);
  const SpectrumModel model = adaptive_spectrum_model(bm);
  double lo = INFINITY, hi = -INFINITY, far = 0.0;
  for (Index N = 64; N <= 4096; N *= 2) {
    const double d = lower_bound_distortion(N, PowerSchedule{SubThresholdPower{}}, ChannelConfig{}, model, 1.0).D_l;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    far = std::max(far, std::abs(d - 0.5) / 0.5);
  }
  o.note("D_l in [%.8f, %.8f]; variation %.3e; max distance from 0.5 %.3e", lo, hi, (hi - lo) / lo, far);
  o.require((hi - lo) / lo < 0.05, "variation above 5%");
  o.require(far <= 0.10, "more than 10% from 0.5");
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / ("dscaler_acceptance_" + std::to_string(::getpid()));
  const std::string text =
      "[sweep]\nN_list = 8, 32, 128\nschedules = total:1, per_sensor:1\nsimulate = true\ntrials = 200\nseed = 17\n"
      "[channel]\ngain_mode = seeded_uniform\nh_lower = 0.4\ngain_seed = 3\n";
  std::string csv[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = base / std::to_string(run);
    const RunConfig cfg = parse_config(text, {{"output.dir", dir.string()}, {"run.jobs", std::to_string(1 + run)}});
    std::ostringstream out, err;
    cmd_sweep(cfg, out, err);
    csv[run] = slurp(dir / cfg.output.rows_file);
  }
  fs::remove_all(base);
  o.note("CSV sizes %zu and %zu bytes", csv[0].size(), csv[1].size());
  o.require(!csv[0].empty() && csv[0] == csv[1], "CSV differs between runs");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"spectrum oracle", spectrum_oracle},
      {"water-filling round trip", round_trip},
      {"order inequalities", order_inequalities},
      {"discretization slopes", discretization_slopes},
      {"sandwich", sandwich},
      {"scaling law", scaling_law},
      {"sub-threshold regime", sub_threshold},
      {"determinism", determinism},
  };
  int failed = 0;
  int index = 1;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    std::printf("%s %d %s\n", o.pass ? "PASS" : "FAIL", index++, c.name);
    for (const std::string& n : o.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
