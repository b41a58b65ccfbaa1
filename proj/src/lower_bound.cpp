#include "dscaler/lower_bound.hpp"

#include <cmath>
#include <stdexcept>

namespace dscaler {

double miso_capacity(const Eigen::Ref<const VectorXd>& gains, double log_power, int K_uses) {
  const double gain_energy = gains.squaredNorm();
  if (gain_energy <= 0.0) return 0.0;
  return 0.5 * static_cast<double>(K_uses) * softplus(log_power + std::log(gain_energy));
}

double miso_capacity(Index N, const PowerSchedule& sched, const ChannelConfig& ch) {
  if (N < 1) throw std::domain_error("MISO capacity needs N >= 1");
  return miso_capacity(ch.realize_gains(N), sched.log_power(N), ch.K_uses);
}

LowerBound lower_bound_from_capacity(double C_u, const SpectrumModel& model, double T0) {
  LowerBound lb;
  lb.C_u = C_u;
  lb.theta = theta_of_rate(C_u, model);
  lb.interval = distortion_interval(lb.theta, model, T0);
  lb.D_l = lb.interval.mid();
  return lb;
}

LowerBound lower_bound_distortion(Index N, const PowerSchedule& sched, const ChannelConfig& ch,
                                  const SpectrumModel& model, double T0) {
  return lower_bound_from_capacity(miso_capacity(N, sched, ch), model, T0);
}

double lower_bound_order(Index N, const PowerSchedule& sched, const ClassAParams& p) {
  if (N < 2) throw std::domain_error("lower bound order needs N >= 2");
  const double log_np = sched.log_total_power(N);
  if (log_np <= 1.0) return 1.0;
  return std::min(std::pow(log_np, 1.0 - p.x), 1.0);
}

}  // namespace dscaler
