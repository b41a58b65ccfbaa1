#include "dscaler/kernel_checks.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dscaler {

namespace {

// Relative slack for round-off when a bound is attained exactly.
constexpr double kSlack = 1e-12;

VectorXd uniform_grid(Index n, double T0) {
  VectorXd g(n);
  for (Index i = 0; i < n; ++i) g(i) = T0 * static_cast<double>(i) / static_cast<double>(n - 1);
  g(n - 1) = T0;
  return g;
}

}  // namespace

CheckReport check_lipschitz_kernel(const KernelSpec& spec, const ClassAParams& params, Index grid) {
  if (grid < 16) throw std::domain_error("kernel Lipschitz check needs at least 16 grid points per axis");
  CheckReport report;
  report.condition = "kernel-lipschitz";
  const VectorXd g = uniform_grid(grid, spec.T0);
  const MatrixXd k = gram_matrix(spec, g);
  const Index n = grid;
  double worst = 0.0;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      // Enumerate the second point lexicographically after the first.
      for (Index c = a; c < n; ++c) {
        for (Index d = (c == a ? b + 1 : 0); d < n; ++d) {
          const double dt = g(a) - g(c);
          const double ds = g(b) - g(d);
          const double dist = std::sqrt(dt * dt + ds * ds);
          const double ratio = std::abs(k(a, b) - k(c, d)) / std::pow(dist, params.alpha);
          if (ratio > worst) {
            worst = ratio;
            report.witness = Witness{-1, g(a), g(b), g(c), g(d)};
          }
        }
      }
    }
  }
  report.max_observed = worst;
  report.max_ratio = worst / params.B;
  report.passed = worst <= params.B * (1.0 + kSlack);
  std::ostringstream msg;
  msg << "max |dK|/dist^alpha = " << worst << " vs B = " << params.B << " at (" << report.witness.t1 << ", "
      << report.witness.s1 << ") - (" << report.witness.t2 << ", " << report.witness.s2 << ")";
  report.message = msg.str();
  return report;
}

CheckReport check_eigenvalue_envelope(const Spectrum& spectrum, const ClassAParams& params, Index k_limit) {
  const Index available = spectrum.eigenvalues.size();
  if (available <= params.K0 + 1) throw std::domain_error("spectrum must have more than K0 eigenvalues");
  const Index last = (k_limit < 0) ? available - 1 : std::min(k_limit, available - 1);
  CheckReport report;
  report.condition = "eigenvalue-envelope";
  Index first_bad = -1;
  for (Index k = params.K0 + 1; k <= last; ++k) {
    const double lambda = spectrum.eigenvalues(k);
    const double lo = params.lower_envelope(static_cast<double>(k));
    const double hi = params.upper_envelope(static_cast<double>(k));
    const double ratio = std::max(lambda > 0.0 ? lo / lambda : INFINITY, lambda / hi);
    if (ratio > report.max_ratio) {
      report.max_ratio = ratio;
      report.max_observed = lambda;
      if (first_bad < 0) report.witness.k = k;
    }
    if (ratio > 1.0 + kSlack && first_bad < 0) {
      first_bad = k;
      report.witness.k = k;
    }
  }
  report.passed = first_bad < 0;
  std::ostringstream msg;
  if (report.passed) {
    msg << "envelope holds for k in (" << params.K0 << ", " << last << "]";
  } else {
    const double lambda = spectrum.eigenvalues(first_bad);
    msg << "first violation at k = " << first_bad << ": lambda = " << lambda << ", envelope ["
        << params.lower_envelope(static_cast<double>(first_bad)) << ", "
        << params.upper_envelope(static_cast<double>(first_bad)) << "]";
  }
  report.message = msg.str();
  return report;
}

CheckReport check_eigenfunction_lipschitz(const KernelSpec& spec, const ClassAParams& params, Index k_max,
                                          Index grid) {
  if (grid < 2) throw std::domain_error("eigenfunction check needs at least 2 grid points");
  CheckReport report;
  report.condition = "eigenfunction-lipschitz";
  const VectorXd g = uniform_grid(grid, spec.T0);
  const MatrixXd phi = eigenfunction_samples(spec, k_max, g);
  const MatrixXd kern = gram_matrix(spec, g);  // kern(i, j) = K(g_i, g_j)
  const Index n = grid;

  // Distance powers are shared by every k.
  MatrixXd dist_gamma(n, n), dist_beta(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double d = std::abs(g(i) - g(j));
      dist_gamma(i, j) = std::pow(d, params.gamma);
      dist_beta(i, j) = std::pow(d, params.beta);
    }
  }

  bool failed = false;
  auto record = [&](double ratio, Index k, double t, double s1, double s2) {
    if (ratio > report.max_ratio) {
      report.max_ratio = ratio;
      if (!failed) report.witness = Witness{k, t, s1, t, s2};
    }
    if (ratio > 1.0 + kSlack && !failed) {
      failed = true;
      report.witness = Witness{k, t, s1, t, s2};
    }
  };

  for (Index k = 0; k <= k_max; ++k) {
    const double kk = static_cast<double>(k);
    const double limit_sq = params.B3 * std::pow(kk + params.B4, params.tau);
    const double limit_prod = params.B2 * std::pow(kk + params.B1, params.tau);
    const VectorXd sq = phi.row(k).transpose().array().square();
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        record(std::abs(sq(i) - sq(j)) / dist_gamma(i, j) / limit_sq, k, -1.0, g(i), g(j));
      }
    }
    // K(t, s) phi_k(s) as a function of s, for every t on the grid.
    for (Index ti = 0; ti < n; ++ti) {
      const VectorXd f = kern.row(ti).transpose().cwiseProduct(phi.row(k).transpose());
      for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
          record(std::abs(f(i) - f(j)) / dist_beta(i, j) / limit_prod, k, g(ti), g(i), g(j));
        }
      }
    }
  }
  report.passed = !failed;
  std::ostringstream msg;
  msg << "max observed/allowed = " << report.max_ratio << " (k = " << report.witness.k << ", s1 = "
      << report.witness.s1 << ", s2 = " << report.witness.s2;
  if (report.witness.t1 >= 0.0) msg << ", t = " << report.witness.t1;
  msg << ")";
  report.message = msg.str();
  return report;
}

}  // namespace dscaler
