#include "doctest.h"

#include "dscaler/lower_bound.hpp"
#include "dscaler/montecarlo.hpp"
#include "dscaler/spectrum.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace dscaler;

static_assert(std::uniform_random_bit_generator<Philox4x32>);

TEST_CASE("philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("philox streams are reproducible and distinct") {
  Philox4x32 a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  bool differ_stream = false, differ_seed = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a(), vb = b(), vc = c(), vd = d();
    CHECK(va == vb);
    differ_stream = differ_stream || va != vc;
    differ_seed = differ_seed || va != vd;
  }
  CHECK(differ_stream);
  CHECK(differ_seed);
}

TEST_CASE("philox output looks uniform") {
  Philox4x32 g(2024, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = u(g);
    sum += v;
    sq += v * v;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("gaussian sampler reproduces the kernel covariance") {
  const KernelSpec bm = brownian_motion(1.0);
  const VectorXd p = sensor_positions(6, 1.0);
  const GaussianSampler sampler(bm, p);
  CHECK(sampler.dimension() == 6);
  Philox4x32 rng(11, 0);
  const int n = 40000;
  MatrixXd acc = MatrixXd::Zero(6, 6);
  for (int i = 0; i < n; ++i) {
    const VectorXd s = sampler.draw(rng);
    CHECK(s(0) == 0.0);
    acc += s * s.transpose();
  }
  acc /= n;
  CHECK((acc - gram_matrix(bm, p)).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("simulation preconditions") {
  SimConfig cfg;
  cfg.N = 1;
  CHECK_THROWS_AS(simulate_af_uncoded(cfg, brownian_motion(1.0)), std::domain_error);
  cfg.N = 8;
  cfg.trials = 0;
  CHECK_THROWS_AS(simulate_af_uncoded(cfg, brownian_motion(1.0)), std::domain_error);
}

TEST_CASE("simulation is deterministic and independent of the thread count") {
  SimConfig cfg;
  cfg.N = 24;
  cfg.trials = 200;
  cfg.seed = 99;
  cfg.sched = PowerSchedule{PerSensor{1.0}};
  cfg.ch = ChannelConfig{0.5, 1.0, SeededUniformGain{5}, 2};
  cfg.jobs = 1;
  const SimResult a = simulate_af_uncoded(cfg, ornstein_uhlenbeck(1.0, 1.0, 1.0));
  const SimResult b = simulate_af_uncoded(cfg, ornstein_uhlenbeck(1.0, 1.0, 1.0));
  cfg.jobs = 3;
  const SimResult c = simulate_af_uncoded(cfg, ornstein_uhlenbeck(1.0, 1.0, 1.0));
  CHECK(a.mean_distortion == b.mean_distortion);
  CHECK(a.std_error == b.std_error);
  CHECK(a.mean_distortion == c.mean_distortion);
  CHECK(a.mean_energy == c.mean_energy);
  cfg.seed = 100;
  CHECK(simulate_af_uncoded(cfg, ornstein_uhlenbeck(1.0, 1.0, 1.0)).mean_distortion != a.mean_distortion);
}

TEST_CASE("simulated distortion respects the converse and the energy budget") {
  const KernelSpec bm = brownian_motion(1.0);
  const SpectrumModel model = adaptive_spectrum_model(bm);
  for (const PowerSchedule& s : {PowerSchedule{Total{1.0}}, PowerSchedule{PerSensor{1.0}},
                                 PowerSchedule{Polynomial{-1.0 / 3.0}}, PowerSchedule{Total{100.0}}}) {
    for (const Index N : {4, 32}) {
      SimConfig cfg;
      cfg.N = N;
      cfg.trials = 400;
      cfg.seed = 1;
      cfg.sched = s;
      const SimResult r = simulate_af_uncoded(cfg, bm);
      const double dl = lower_bound_distortion(N, s, cfg.ch, model, 1.0).D_l;
      CHECK(r.mean_distortion >= dl - 3.0 * r.std_error);
      CHECK(r.mean_distortion <= 0.5 + 5.0 * r.std_error);
      CHECK(r.mean_energy <= r.power_budget * (1.0 + 5.0 / std::sqrt(400.0)));
      CHECK(r.power_budget == doctest::Approx(s.power(N)));
      CHECK_FALSE(r.blind);
    }
  }
}

TEST_CASE("underflowing power falls back to the blind estimate") {
  SimConfig cfg;
  cfg.N = 800;
  cfg.trials = 200;
  cfg.recon_grid = 800;
  cfg.sched = PowerSchedule{SubThresholdPower{}};
  const SimResult r = simulate_af_uncoded(cfg, brownian_motion(1.0));
  CHECK(r.blind);
  CHECK(r.mean_energy == 0.0);
  CHECK(std::abs(r.mean_distortion - 0.5) < 5.0 * r.std_error + 1e-3);
}

TEST_CASE("per-trial dump") {
  SimConfig cfg;
  cfg.N = 8;
  cfg.trials = 5;
  cfg.keep_trials = true;
  const SimResult r = simulate_af_uncoded(cfg, brownian_motion(1.0));
  REQUIRE(r.per_trial.size() == 5);
  const std::string csv = trials_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "trial,distortion");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
  cfg.keep_trials = false;
  CHECK(simulate_af_uncoded(cfg, brownian_motion(1.0)).per_trial.empty());
}

TEST_CASE("placement of an empirical mean against the bounds") {
  SimResult r;
  r.mean_distortion = 0.2;
  r.std_error = 0.01;
  CHECK(empirical_vs_bounds(r, 0.1, 0.3).placement == Placement::InsideSandwich);
  CHECK(empirical_vs_bounds(r, 0.1, 0.15).placement == Placement::AboveUpper);
  const Comparison below = empirical_vs_bounds(r, 0.21, 0.3);
  CHECK(below.placement == Placement::BelowLower);
  CHECK_FALSE(below.violation);
  CHECK(empirical_vs_bounds(r, 0.3, 0.4).violation);
  CHECK(empirical_vs_bounds(r, 0.1, 0.4).ratio_lower == doctest::Approx(2.0));
  CHECK(to_string(Placement::AboveUpper) == "above-upper-bound");
}
