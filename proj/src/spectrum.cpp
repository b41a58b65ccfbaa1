#include "dscaler/spectrum.hpp"

#include "dscaler/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace dscaler {

namespace {

constexpr double kPi = std::numbers::pi;

double ou_root_function(double w, double eta, double T0) {
  return (w * w - eta * eta) * std::sin(w * T0) - 2.0 * eta * w * std::cos(w * T0);
}

VectorXd eigenvalues_dense(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("dense symmetric eigensolver did not converge");
  return solver.eigenvalues();
}

// Eigenvalues of the Gram matrix of a Gauss-Markov chain, via its tridiagonal precision.
VectorXd markov_gram_eigenvalues(const MarkovChain& chain) {
  const Index n_all = chain.gain.size() + 1;
  Index first = 0;
  double initial = chain.initial_variance;
  if (initial <= 0.0) {
    // A deterministic first node contributes a zero eigenvalue and decouples from the rest.
    first = 1;
    if (n_all == 1) return VectorXd::Zero(1);
    initial = chain.innovation(0);
  }
  const Index n = n_all - first;
  VectorXd diag(n);
  VectorXd sub(std::max<Index>(n - 1, 0));
  for (Index i = 0; i < n; ++i) {
    const Index g = first + i;  // global node index
    double d = (i == 0) ? 1.0 / initial : 1.0 / chain.innovation(g - 1);
    if (i + 1 < n) {
      const double a = chain.gain(g);
      const double q = chain.innovation(g);
      d += a * a / q;
      sub(i) = -a / q;
    }
    diag(i) = d;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver did not converge");
  VectorXd out = VectorXd::Zero(n_all);
  out.head(n) = solver.eigenvalues().cwiseInverse();
  return out;
}

}  // namespace

double ou_frequency(double eta, double T0, Index k) {
  double lo = static_cast<double>(k) * kPi / T0;
  double hi = static_cast<double>(k + 1) * kPi / T0;
  // Sign of the root function at the left end of the bracket (limit from the right when k = 0).
  const double sign_lo = (k % 2 == 0) ? -1.0 : 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = ou_root_function(mid, eta, T0);
    if (f == 0.0) return mid;
    if ((f < 0.0) == (sign_lo < 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Spectrum analytic_spectrum(const KernelSpec& spec, Index count) {
  if (count < 0) throw std::domain_error("spectrum count must be nonnegative");
  Spectrum out;
  out.source = SpectrumSource::Analytic;
  out.T0 = spec.T0;
  out.tail_model = spec.classA;
  out.eigenvalues.resize(count);
  const double T0 = spec.T0;
  if (std::holds_alternative<BrownianMotion>(spec.family)) {
    for (Index k = 0; k < count; ++k) {
      const double m = (static_cast<double>(k) + 0.5) * kPi;
      out.eigenvalues(k) = T0 * T0 / (m * m);
    }
  } else if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec.family)) {
    for (Index k = 0; k < count; ++k) {
      const double w = ou_frequency(ou->eta, T0, k);
      out.eigenvalues(k) = 2.0 * ou->eta * ou->sigma2 / (w * w + ou->eta * ou->eta);
    }
  } else {
    throw CapabilityError("no closed-form spectrum for kernel family '" + family_name(spec) + "'");
  }
  return out;
}

VectorXd sensor_positions(Index N, double T0) {
  if (N < 2) throw std::domain_error("at least two sensors are required");
  VectorXd p(N);
  const double h = T0 / static_cast<double>(N - 1);
  for (Index i = 0; i < N; ++i) p(i) = static_cast<double>(i) * h;
  p(N - 1) = T0;
  return p;
}

VectorXd clamp_and_sort(VectorXd values, double rel) {
  std::sort(values.data(), values.data() + values.size(), std::greater<>());
  if (values.size() == 0) return values;
  const double cutoff = rel * std::max(values(0), 0.0);
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) < cutoff) values(i) = 0.0;
  }
  return values;
}

MatrixXd sampled_matrix(const KernelSpec& spec, Index N) {
  const VectorXd p = sensor_positions(N, spec.T0);
  return (spec.T0 / static_cast<double>(N - 1)) * gram_matrix(spec, p);
}

SampledCovariance build_sampled_covariance(const KernelSpec& spec, Index N, EigenMethod method) {
  if (N < 2) throw std::domain_error("sampled covariance needs N >= 2");
  SampledCovariance sc;
  sc.N = N;
  sc.T0 = spec.T0;
  sc.spacing = spec.T0 / static_cast<double>(N - 1);
  sc.positions = sensor_positions(N, spec.T0);

  double diag_sum = 0.0;
  for (Index i = 0; i < N; ++i) diag_sum += eval_kernel(spec, sc.positions(i), sc.positions(i));
  sc.trace = sc.spacing * diag_sum;

  if (method == EigenMethod::Auto) {
    method = is_gauss_markov(spec) ? EigenMethod::Tridiagonal : EigenMethod::Dense;
  }
  if (method == EigenMethod::Tridiagonal) {
    const MarkovChain chain = markov_chain(spec, sc.positions);
    sc.eigenvalues = clamp_and_sort(sc.spacing * markov_gram_eigenvalues(chain));
  } else {
    sc.matrix = sc.spacing * gram_matrix(spec, sc.positions);
    sc.eigenvalues = clamp_and_sort(eigenvalues_dense(sc.matrix));
  }
  return sc;
}

VectorXd rho_vector(const SampledCovariance& sc, const KernelSpec& spec, double t) {
  return kernel_row(spec, t, sc.positions);
}

Spectrum nystrom_spectrum(const KernelSpec& spec, Index N, EigenMethod method) {
  const SampledCovariance sc = build_sampled_covariance(spec, N, method);
  Spectrum out;
  out.eigenvalues = sc.eigenvalues;
  out.source = SpectrumSource::Nystrom;
  out.nystrom_N = N;
  out.T0 = spec.T0;
  return out;
}

MarkovChain markov_chain(const KernelSpec& spec, const Eigen::Ref<const VectorXd>& points) {
  if (!is_gauss_markov(spec)) {
    throw CapabilityError("kernel family '" + family_name(spec) + "' is not Gauss-Markov");
  }
  const Index n = points.size();
  MarkovChain chain;
  chain.initial_variance = n > 0 ? eval_kernel(spec, points(0), points(0)) : 0.0;
  chain.gain.resize(std::max<Index>(n - 1, 0));
  chain.innovation.resize(std::max<Index>(n - 1, 0));
  for (Index i = 0; i + 1 < n; ++i) {
    const double dt = points(i + 1) - points(i);
    if (!(dt > 0.0)) throw std::domain_error("Markov chain grid must be strictly increasing");
    if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec.family)) {
      chain.gain(i) = std::exp(-ou->eta * dt);
      chain.innovation(i) = -ou->sigma2 * std::expm1(-2.0 * ou->eta * dt);
    } else {
      // Brownian motion: independent increments; a zero-variance start carries no information.
      chain.gain(i) = points(i) > 0.0 ? 1.0 : 0.0;
      chain.innovation(i) = points(i) > 0.0 ? dt : points(i + 1);
    }
  }
  return chain;
}

MatrixXd eigenfunction_samples(const KernelSpec& spec, Index k_max, const Eigen::Ref<const VectorXd>& points,
                               Index nystrom_N) {
  const double T0 = spec.T0;
  MatrixXd out(k_max + 1, points.size());
  if (std::holds_alternative<BrownianMotion>(spec.family)) {
    const double amp = std::sqrt(2.0 / T0);
    for (Index k = 0; k <= k_max; ++k) {
      const double w = (static_cast<double>(k) + 0.5) * kPi / T0;
      out.row(k) = (amp * (w * points.array()).sin()).matrix().transpose();
    }
    return out;
  }
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec.family)) {
    const double eta = ou->eta;
    for (Index k = 0; k <= k_max; ++k) {
      const double w = ou_frequency(eta, T0, k);
      const double norm2 = (w * w + eta * eta) * T0 / 2.0 + (w * w - eta * eta) * std::sin(2 * w * T0) / (4 * w) +
                           eta * (1.0 - std::cos(2 * w * T0)) / 2.0;
      const double a = 1.0 / std::sqrt(norm2);
      const Eigen::ArrayXd wt = w * points.array();
      out.row(k) = (a * (w * wt.cos() + eta * wt.sin())).matrix().transpose();
    }
    return out;
  }
  // Nystrom eigenvectors scaled to unit L2 norm, linearly interpolated.
  const Index n = std::max<Index>(nystrom_N, k_max + 2);
  const VectorXd grid = sensor_positions(n, T0);
  const double h = T0 / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(h * gram_matrix(spec, grid));
  if (solver.info() != Eigen::Success) throw NumericalError("Nystrom eigensolver did not converge");
  for (Index k = 0; k <= k_max; ++k) {
    const VectorXd phi = solver.eigenvectors().col(n - 1 - k) / std::sqrt(h);
    for (Index j = 0; j < points.size(); ++j) {
      const double u = points(j) / h;
      const Index i = std::clamp<Index>(static_cast<Index>(u), 0, n - 2);
      const double f = u - static_cast<double>(i);
      out(k, j) = (1 - f) * phi(i) + f * phi(i + 1);
    }
  }
  return out;
}

}  // namespace dscaler
