#pragma once

#include "dscaler/kernel.hpp"
#include "dscaler/spectrum.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace dscaler {

/// Explicit head of a spectrum plus an optional certified tail.
///
/// With a tail model, sum_{k >= M} lambda_k <= d_u (M-1-c_u)^{1-x} / (x-1),
/// where M is the head length.
struct SpectrumModel {
  VectorXd head;
  std::optional<ClassAParams> tail;

  Index size() const { return head.size(); }
  /// Upper bound on the sum of all eigenvalues beyond the head (0 without a tail).
  double tail_bound() const;
  /// Largest value any eigenvalue beyond the head can take (0 without a tail).
  double tail_ceiling() const;
};

/// Head = spectrum.eigenvalues, tail = spectrum.tail_model.
SpectrumModel spectrum_model(const Spectrum& spectrum);

/// Analytic head that grows (doubling from `initial`) until the tail bound falls
/// below rel_tol times the head sum.  Needs closed-form eigenvalues and class
/// parameters on the kernel.
SpectrumModel adaptive_spectrum_model(const KernelSpec& spec, double rel_tol = 1e-6, Index initial = 1024);

/// R(theta) = sum_k max(0, 1/2 log(lambda_k / theta)), in nats.
/// Throws std::domain_error for theta <= 0 or when theta is below the resolved
/// part of a tailed model.
double rate_at(double theta, const SpectrumModel& model);

/// [head sum, head sum + tail bound] of T0^{-1} sum_k min(theta, lambda_k).
struct DistortionInterval {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
};

DistortionInterval distortion_interval(double theta, const SpectrumModel& model, double T0);

/// Midpoint of distortion_interval.
double distortion_at(double theta, const SpectrumModel& model, double T0);

/// Inverse of rate_at on (0, lambda_0]: |rate_at(result) - R| <= 1e-9 max(1, R).
double theta_of_rate(double R, const SpectrumModel& model, double rel_tol = 1e-9);

/// Lower bound on theta(R) valid for large R: d_l (x/4)^x R^{-x}.
template <typename Scalar>
Scalar theta_lower_order(Scalar R, const ClassAParams& p) {
  using std::pow;
  const Scalar x = Scalar(p.x);
  return Scalar(p.d_l) * pow(x / Scalar(4), x) * pow(R, -x);
}

/// Lower bound on D(theta) valid for small theta: d_l^{1/x} / (2 T0) theta^{1-1/x}.
template <typename Scalar>
Scalar distortion_lower_order(Scalar theta, const ClassAParams& p, Scalar T0) {
  using std::pow;
  const Scalar x = Scalar(p.x);
  return pow(Scalar(p.d_l), Scalar(1) / x) / (Scalar(2) * T0) * pow(theta, Scalar(1) - Scalar(1) / x);
}

/// Upper bound on D_b^N(theta'): 4 d_u^{1/x} / T0 ((x+1)/(x-1)) theta'^{1-1/x}.
template <typename Scalar>
Scalar db_upper_order(Scalar theta_p, const ClassAParams& p, Scalar T0) {
  using std::pow;
  if (!(p.x > 1.0)) throw std::domain_error("decay exponent x must exceed 1");
  const Scalar x = Scalar(p.x);
  return Scalar(4) * pow(Scalar(p.d_u), Scalar(1) / x) / T0 * ((x + Scalar(1)) / (x - Scalar(1))) *
         pow(theta_p, Scalar(1) - Scalar(1) / x);
}

}  // namespace dscaler
