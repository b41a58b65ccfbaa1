#include "dscaler/commands.hpp"

#include "dscaler/errors.hpp"
#include "dscaler/kernel_checks.hpp"
#include "dscaler/montecarlo.hpp"
#include "dscaler/spectrum.hpp"
#include "dscaler/sweep.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace dscaler {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json row_json(const BoundsRow& r) {
  json j;
  j["N"] = r.N;
  j["schedule"] = r.schedule;
  j["P"] = number_or_null(r.P);
  j["log_NP"] = number_or_null(r.log_NP);
  j["C_u"] = number_or_null(r.C_u);
  j["theta_low"] = number_or_null(r.theta_low);
  j["D_l"] = number_or_null(r.D_l);
  j["regime"] = to_string(r.regime);
  j["C_a"] = number_or_null(r.C_a);
  j["theta_a"] = number_or_null(r.theta_a);
  j["D_a"] = number_or_null(r.D_a);
  j["A_N"] = number_or_null(r.A_N);
  j["B_N"] = number_or_null(r.B_N);
  j["D_b"] = number_or_null(r.D_b);
  j["D_u"] = number_or_null(r.D_u);
  j["sim_mean"] = r.sim_mean ? json(*r.sim_mean) : json(nullptr);
  j["sim_stderr"] = r.sim_stderr ? json(*r.sim_stderr) : json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

json report_json(const CheckReport& r) {
  json j;
  j["condition"] = r.condition;
  j["passed"] = r.passed;
  j["max_ratio"] = number_or_null(r.max_ratio);
  j["max_observed"] = number_or_null(r.max_observed);
  j["witness"] = {{"k", r.witness.k}, {"t1", r.witness.t1}, {"s1", r.witness.s1},
                  {"t2", r.witness.t2}, {"s2", r.witness.s2}};
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

std::string output_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output.dir) / name).string();
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& contents) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + tmp.string() + "'");
    f << contents;
    f.flush();
    if (!f) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void cmd_spectrum(const RunConfig& cfg, std::ostream&, std::ostream& err) {
  const KernelSpec kernel = build_kernel(cfg);
  VectorXd values;
  if (cfg.spectrum.source == "analytic") {
    values = analytic_spectrum(kernel, cfg.spectrum.count).eigenvalues;
  } else if (cfg.spectrum.source == "nystrom") {
    values = nystrom_spectrum(kernel, cfg.spectrum.N).eigenvalues;
  } else {
    values = build_sampled_covariance(kernel, cfg.spectrum.N).eigenvalues;
  }
  std::string csv = "k,value\n";
  char buf[64];
  for (Index k = 0; k < values.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%td,%.17g\n", static_cast<std::ptrdiff_t>(k), values(k));
    csv += buf;
  }
  const std::string path = output_path(cfg, cfg.output.spectrum_file);
  write_file_atomic(path, csv);
  err << "wrote " << values.size() << " eigenvalues to " << path << "\n";
}

void cmd_bounds(const RunConfig& cfg, std::optional<Index> N_override, std::ostream& out, std::ostream& err) {
  const Index N = N_override.value_or(cfg.bounds.N);
  if (N < 2) throw ConfigError("bounds need N >= 2 sensors, got " + std::to_string(N));
  const KernelSpec kernel = build_kernel(cfg);
  SweepConfig sc = build_sweep_config(cfg, kernel);
  sc.simulate = false;
  const SpectrumModel model = lower_bound_model(kernel);
  BoundsRow row = compute_row(sc, model, N, cfg.bounds.schedule);
  if (!row.error.empty()) throw NumericalError(row.error);

  if (cfg.bounds.simulate) {
    SimConfig sim;
    sim.N = N;
    sim.trials = cfg.sweep.trials;
    sim.seed = cfg.sweep.seed;
    sim.sched = cfg.bounds.schedule;
    sim.ch = cfg.channel;
    sim.noise_variance = cfg.sim.noise_variance;
    sim.recon_grid = cfg.sim.recon_grid;
    sim.jobs = cfg.jobs;
    sim.keep_trials = !cfg.sim.dump_trials.empty();
    const SimResult res = simulate_af_uncoded(sim, kernel);
    row.sim_mean = res.mean_distortion;
    row.sim_stderr = res.std_error;
    if (sim.keep_trials) {
      write_file_atomic(cfg.sim.dump_trials, trials_csv(res));
      err << "wrote per-trial distortions to " << cfg.sim.dump_trials << "\n";
    }
    const Comparison cmp = empirical_vs_bounds(res, row.D_l, row.D_u);
    if (cmp.violation) err << "warning: simulated distortion falls significantly below the lower bound\n";
  }
  if (row.regime == Regime::SubThreshold) err << "note: schedule " << row.schedule << " is below the power threshold\n";
  out << row_json(row).dump(2) << "\n";
}

void cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const KernelSpec kernel = build_kernel(cfg);
  const SweepConfig sc = build_sweep_config(cfg, kernel);
  const std::vector<BoundsRow> rows = run_sweep(sc);
  for (const BoundsRow& r : rows) {
    if (!r.error.empty()) err << "row N=" << r.N << " " << r.schedule << " failed: " << r.error << "\n";
  }
  const std::string rows_path = output_path(cfg, cfg.output.rows_file);
  write_file_atomic(rows_path, rows_to_csv(rows));

  json summary;
  summary["config_hash"] = config_hash(cfg);
  summary["config"] = serialize_config(cfg);
  summary["rows_file"] = cfg.output.rows_file;
  json fits = json::array();
  json warnings = json::array();
  json regimes = json::object();
  const std::size_t per = sc.N_list.size();
  for (std::size_t s = 0; s < sc.schedules.size(); ++s) {
    const std::string name = sc.schedules[s].name();
    regimes[name] = to_string(classify_regime(sc.schedules[s], kernel.classA));
    if (!kernel.classA) continue;
    const std::span<const BoundsRow> block(rows.data() + s * per, per);
    for (const FitColumn column : {FitColumn::D_l, FitColumn::D_u}) {
      json entry = {{"schedule", name}, {"column", to_string(column)}};
      try {
        ScalingFit fit;
        try {
          fit = fit_scaling(block, *kernel.classA, column, cfg.tolerances.fit_span);
        } catch (const std::domain_error& e) {
          // Too short a span: still report the slope, flagged, when enough rows exist.
          fit = fit_scaling(block, *kernel.classA, column, 0.0);
          entry["warning"] = e.what();
        }
        entry["slope"] = fit.slope;
        entry["expected_slope"] = fit.expected_slope;
        entry["r_squared"] = fit.r_squared;
        entry["slope_stderr"] = fit.slope_stderr;
        entry["n_points"] = fit.n_points;
        entry["log_np_span"] = fit.span;
        fits.push_back(entry);
      } catch (const std::domain_error& e) {
        entry["warning"] = e.what();
        warnings.push_back(entry);
      }
    }
  }
  summary["fits"] = fits;
  summary["fit_warnings"] = warnings;
  summary["regimes"] = regimes;
  const std::string summary_path = output_path(cfg, cfg.output.summary_file);
  write_file_atomic(summary_path, summary.dump(2) + "\n");
  out << rows_path << "\n" << summary_path << "\n";
}

void cmd_check_class_a(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const KernelSpec kernel = build_kernel(cfg);
  json report;
  report["kernel"] = family_name(kernel);
  if (!kernel.classA) {
    report["status"] = "not claimed";
    report["conditions"] = json::array();
    out << report.dump(2) << "\n";
    return;
  }
  const ClassAParams& p = *kernel.classA;
  const Spectrum spectrum = is_gauss_markov(kernel) ? analytic_spectrum(kernel, cfg.check.envelope_count)
                                                    : nystrom_spectrum(kernel, cfg.check.envelope_count);
  // Nystrom eigenvalues are reliable only well below the grid size.
  const Index k_limit = spectrum.source == SpectrumSource::Nystrom ? cfg.check.envelope_count / 8 : -1;
  const CheckReport reports[] = {
      check_eigenvalue_envelope(spectrum, p, k_limit),
      check_lipschitz_kernel(kernel, p, cfg.check.lipschitz_grid),
      check_eigenfunction_lipschitz(kernel, p, cfg.check.k_max, cfg.check.eigenfunction_grid),
  };
  bool all = true;
  json conditions = json::array();
  for (const CheckReport& r : reports) {
    all = all && r.passed;
    conditions.push_back(report_json(r));
  }
  report["status"] = all ? "pass" : "fail";
  report["conditions"] = conditions;
  out << report.dump(2) << "\n";
}

int run_command(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CapabilityError& e) {
    err << "unsupported: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace dscaler
