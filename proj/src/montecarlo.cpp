#include "dscaler/montecarlo.hpp"

#include "dscaler/parallel.hpp"
#include "dscaler/spectrum.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace dscaler {

GaussianSampler::GaussianSampler(const KernelSpec& spec, const Eigen::Ref<const VectorXd>& points) {
  const MatrixXd gram = gram_matrix(spec, points);
  const Eigen::LDLT<MatrixXd> ldlt(gram);
  const VectorXd root_d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  const MatrixXd lower = MatrixXd(ldlt.matrixL()) * root_d.asDiagonal();
  factor_ = ldlt.transpositionsP().transpose() * lower;
}

VectorXd GaussianSampler::draw(Philox4x32& rng) const {
  std::normal_distribution<double> normal;
  VectorXd z(factor_.cols());
  for (Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return factor_ * z;
}

VectorXd sample_process(const KernelSpec& spec, Index N, Philox4x32& rng) {
  return GaussianSampler(spec, sensor_positions(N, spec.T0)).draw(rng);
}

SimResult simulate_af_uncoded(const SimConfig& cfg, const KernelSpec& spec) {
  if (cfg.N < 2) throw std::domain_error("simulation needs N >= 2");
  if (cfg.trials < 1) throw std::domain_error("simulation needs at least one trial");
  const Index N = cfg.N;
  const double T0 = spec.T0;
  const int uses = cfg.ch.K_uses;
  const VectorXd pos = sensor_positions(N, T0);
  const MatrixXd gram = gram_matrix(spec, pos);
  const VectorXd gains = cfg.ch.realize_gains(N);

  // Statistical power normalization: K c^2 sum_i K(t_i, t_i) = P(N).
  const double power = cfg.sched.power(N);
  const double scale = std::sqrt(power / (static_cast<double>(uses) * gram.diagonal().sum()));
  const bool blind = !(scale > 0.0) || !std::isfinite(scale);
  const double c = blind ? 0.0 : scale;
  const double noise_var = cfg.noise_variance / static_cast<double>(uses);  // after averaging K uses

  // Reconstruction nodes: midpoints, aligned with sensor intervals.
  const Index target = cfg.recon_grid > 0 ? cfg.recon_grid : 10 * N;
  const Index per = (target + N - 2) / (N - 1);
  const double step = (pos(1) - pos(0)) / static_cast<double>(per);
  const Index M = per * (N - 1);
  VectorXd nodes(M);
  for (Index i = 0; i + 1 < N; ++i) {
    for (Index j = 0; j < per; ++j) nodes(i * per + j) = pos(i) + (static_cast<double>(j) + 0.5) * step;
  }

  // Conditional moments of S(t) given the samples, via a pseudo-inverse of the Gram matrix.
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  const VectorXd& lam = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(lam.maxCoeff(), 0.0);
  const VectorXd inv = lam.unaryExpr([cutoff](double v) { return v > cutoff ? 1.0 / v : 0.0; });
  MatrixXd rho(N, M);
  double prior_var = 0.0;
  for (Index j = 0; j < M; ++j) {
    rho.col(j) = kernel_row(spec, nodes(j), pos);
    prior_var += eval_kernel(spec, nodes(j), nodes(j));
  }
  const MatrixXd proj = eig.eigenvectors().transpose() * rho;               // V^T rho
  const MatrixXd beta = eig.eigenvectors() * (inv.asDiagonal() * proj);     // G^+ rho
  const double explained = (proj.array().square().colwise() * inv.array()).sum();
  const double residual_var = std::max(0.0, prior_var - explained) * step / T0;

  // Linear MMSE from the scalar averaged observation Y = c h^T S + Zbar.
  const double var_y = c * c * gains.dot(gram * gains) + (blind ? 0.0 : noise_var);
  const VectorXd cov_y = c * (rho.transpose() * gains);
  const VectorXd lmmse = var_y > 0.0 ? VectorXd(cov_y / var_y) : VectorXd::Zero(M);
  // Error at node j: (beta_j - a_j c h)^T S - a_j Zbar.
  const MatrixXd error_map = beta.transpose() - lmmse * (c * gains).transpose();

  std::vector<double> distortion(static_cast<std::size_t>(cfg.trials));
  std::vector<double> energy(static_cast<std::size_t>(cfg.trials));
  const GaussianSampler sampler(spec, pos);
  parallel_for(cfg.trials, cfg.jobs, [&](Index trial) {
    Philox4x32 rng(cfg.seed, static_cast<std::uint64_t>(trial));
    const VectorXd s = sampler.draw(rng);
    std::normal_distribution<double> normal;
    double zbar = 0.0;
    for (int u = 0; u < uses; ++u) zbar += normal(rng);
    zbar *= std::sqrt(cfg.noise_variance) / static_cast<double>(uses);
    const VectorXd err = error_map * s - lmmse * zbar;
    distortion[static_cast<std::size_t>(trial)] = err.squaredNorm() * step / T0 + residual_var;
    energy[static_cast<std::size_t>(trial)] = static_cast<double>(uses) * c * c * s.squaredNorm();
  });

  SimResult out;
  out.trials = cfg.trials;
  out.blind = blind;
  out.power_budget = power;
  const double n = static_cast<double>(cfg.trials);
  out.mean_distortion = compensated_sum(distortion) / n;
  out.mean_energy = compensated_sum(energy) / n;
  if (cfg.trials > 1) {
    std::vector<double> dev(distortion.size());
    for (std::size_t i = 0; i < dev.size(); ++i) {
      const double d = distortion[i] - out.mean_distortion;
      dev[i] = d * d;
    }
    out.std_error = std::sqrt(compensated_sum(dev) / (n - 1.0) / n);
  }
  if (cfg.keep_trials) out.per_trial = std::move(distortion);
  return out;
}

std::string to_string(Placement p) {
  switch (p) {
    case Placement::BelowLower:
      return "below-lower-bound";
    case Placement::InsideSandwich:
      return "inside-sandwich";
    case Placement::AboveUpper:
      return "above-upper-bound";
  }
  return "unknown";
}

Comparison empirical_vs_bounds(const SimResult& sim, double dl, double du) {
  Comparison cmp;
  cmp.violation = sim.mean_distortion + 3.0 * sim.std_error < dl;
  cmp.ratio_lower = sim.mean_distortion / dl;
  cmp.ratio_upper = sim.mean_distortion / du;
  if (sim.mean_distortion < dl) {
    cmp.placement = Placement::BelowLower;
  } else if (sim.mean_distortion <= du) {
    cmp.placement = Placement::InsideSandwich;
  } else {
    cmp.placement = Placement::AboveUpper;
  }
  return cmp;
}

std::string trials_csv(const SimResult& sim) {
  std::string out = "trial,distortion\n";
  char buf[64];
  for (std::size_t i = 0; i < sim.per_trial.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, sim.per_trial[i]);
    out += buf;
  }
  return out;
}

}  // namespace dscaler
