#include "dscaler/rdf.hpp"

#include "dscaler/errors.hpp"

#include <cmath>
#include <sstream>

namespace dscaler {

double SpectrumModel::tail_bound() const {
  if (!tail) return 0.0;
  const ClassAParams& p = *tail;
  const double base = static_cast<double>(head.size() - 1 - p.c_u);
  if (!(base > 0.0) || head.size() <= p.K0) {
    throw std::domain_error("spectrum head must extend beyond K0 to bound the tail");
  }
  return p.d_u * std::pow(base, 1.0 - p.x) / (p.x - 1.0);
}

double SpectrumModel::tail_ceiling() const {
  if (!tail) return 0.0;
  return tail->upper_envelope(static_cast<double>(head.size()));
}

SpectrumModel spectrum_model(const Spectrum& spectrum) { return SpectrumModel{spectrum.eigenvalues, spectrum.tail_model}; }

SpectrumModel adaptive_spectrum_model(const KernelSpec& spec, double rel_tol, Index initial) {
  if (!spec.classA) throw CapabilityError("adaptive spectrum model needs class parameters for the tail");
  const ClassAParams& p = *spec.classA;
  Index M = std::max<Index>(initial, p.K0 + p.c_u + 2);
  for (;;) {
    SpectrumModel model{analytic_spectrum(spec, M).eigenvalues, p};
    if (model.tail_bound() < rel_tol * model.head.sum()) return model;
    if (M > (Index{1} << 26)) throw NumericalError("spectrum tail does not decay fast enough to certify");
    M *= 2;
  }
}

double rate_at(double theta, const SpectrumModel& model) {
  if (!(theta > 0.0)) throw std::domain_error("water level must be positive");
  if (model.tail && theta < model.tail_ceiling()) {
    std::ostringstream msg;
    msg << "water level " << theta << " is below the resolved spectrum head (" << model.size()
        << " eigenvalues); enlarge the head";
    throw std::domain_error(msg.str());
  }
  double sum = 0.0;
  for (Index k = 0; k < model.head.size(); ++k) {
    const double lambda = model.head(k);
    if (lambda <= theta) break;  // head is nonincreasing
    sum += 0.5 * std::log(lambda / theta);
  }
  return sum;
}

DistortionInterval distortion_interval(double theta, const SpectrumModel& model, double T0) {
  if (!(theta > 0.0)) throw std::domain_error("water level must be positive");
  double sum = 0.0;
  for (Index k = 0; k < model.head.size(); ++k) sum += std::min(theta, model.head(k));
  return DistortionInterval{sum / T0, (sum + model.tail_bound()) / T0};
}

double distortion_at(double theta, const SpectrumModel& model, double T0) {
  return distortion_interval(theta, model, T0).mid();
}

double theta_of_rate(double R, const SpectrumModel& model, double rel_tol) {
  if (!(R >= 0.0)) throw std::domain_error("rate must be nonnegative");
  if (model.head.size() == 0 || !(model.head(0) > 0.0)) {
    throw std::domain_error("spectrum model has no positive eigenvalue");
  }
  const double lambda0 = model.head(0);
  if (R == 0.0) return lambda0;
  const double tol = rel_tol * std::max(1.0, R);

  // Walk down from lambda_0 until the rate exceeds R; rate_at(lambda_0) = 0 < R.
  double hi = lambda0;
  double lo = lambda0 * std::exp(-1.0);
  double rate_lo = rate_at(lo, model);
  while (rate_lo <= R) {
    hi = lo;
    lo *= std::exp(-1.0);
    rate_lo = rate_at(lo, model);
  }
  if (std::abs(rate_lo - R) <= tol) return lo;
  // Bisection in log(theta); rate is monotone in theta.
  double log_lo = std::log(lo), log_hi = std::log(hi);
  for (int it = 0; it < 400; ++it) {
    const double log_mid = 0.5 * (log_lo + log_hi);
    const double theta = std::exp(log_mid);
    const double r = rate_at(theta, model);
    if (std::abs(r - R) <= tol) return theta;
    if (r > R) {
      log_lo = log_mid;
    } else {
      log_hi = log_mid;
    }
    if (log_hi - log_lo <= 0.0) break;
  }
  throw NumericalError("theta_of_rate did not reach the requested precision");
}

}  // namespace dscaler
