#pragma once

#include "dscaler/channel.hpp"
#include "dscaler/kernel.hpp"
#include "dscaler/rdf.hpp"

namespace dscaler {

/// C_u^N = (K/2) log(1 + P(N) sum_i h_{i0}^2): capacity of the ideal N-transmit,
/// 1-receive link, in nats per source realization.
double miso_capacity(Index N, const PowerSchedule& sched, const ChannelConfig& ch);

/// Same, for already-realized gains and a given log P(N).
double miso_capacity(const Eigen::Ref<const VectorXd>& gains, double log_power, int K_uses);

struct LowerBound {
  double C_u = 0.0;
  double theta = 0.0;  // theta(C_u)
  DistortionInterval interval;
  double D_l = 0.0;  // interval midpoint
};

/// D_l^N = D(theta(C_u^N)).
LowerBound lower_bound_distortion(Index N, const PowerSchedule& sched, const ChannelConfig& ch,
                                  const SpectrumModel& model, double T0);

/// Same with C_u^N supplied (e.g. computed on shared gains).
LowerBound lower_bound_from_capacity(double C_u, const SpectrumModel& model, double T0);

/// min((log(N P(N)))^{1-x}, 1), taking 1 whenever N P(N) <= e.
double lower_bound_order(Index N, const PowerSchedule& sched, const ClassAParams& p);

}  // namespace dscaler
