#include "dscaler/channel.hpp"

#include "dscaler/errors.hpp"
#include "dscaler/philox.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>

namespace dscaler {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& text, const std::string& context) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw ConfigError("bad number '" + text + "' in " + context);
  return v;
}

}  // namespace

double PowerSchedule::log_power(Index N) const {
  const double n = static_cast<double>(N);
  return std::visit(Overloaded{[&](const PerSensor& s) { return std::log(n) + std::log(s.P_ind); },
                               [&](const Total& s) { return std::log(s.P_tot); },
                               [&](const Polynomial& s) { return s.exponent * std::log(n); },
                               [&](const NearExponential& s) { return std::pow(n, s.q) - std::log(n); },
                               [&](const SubThresholdPower&) { return -n; }},
                    family);
}

double PowerSchedule::power(Index N) const { return std::exp(log_power(N)); }

double PowerSchedule::log_total_power(Index N) const { return std::log(static_cast<double>(N)) + log_power(N); }

std::string PowerSchedule::name() const {
  return std::visit(Overloaded{[](const PerSensor& s) { return "per_sensor:" + number(s.P_ind); },
                               [](const Total& s) { return "total:" + number(s.P_tot); },
                               [](const Polynomial& s) { return "polynomial:" + number(s.exponent); },
                               [](const NearExponential& s) { return "near_exponential:" + number(s.q); },
                               [](const SubThresholdPower&) { return std::string("sub_threshold"); }},
                    family);
}

PowerSchedule parse_schedule(const std::string& raw) {
  std::string text;
  for (char c : raw) {
    if (c != ' ' && c != '\t') text += c;
  }
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  auto need_arg = [&]() {
    if (arg.empty()) throw ConfigError("schedule '" + kind + "' needs a parameter (e.g. " + kind + ":1)");
    return parse_number(arg, "schedule '" + raw + "'");
  };
  PowerSchedule s;
  if (kind == "per_sensor") {
    s.family = PerSensor{need_arg()};
  } else if (kind == "total") {
    s.family = Total{need_arg()};
  } else if (kind == "polynomial") {
    s.family = Polynomial{need_arg()};
  } else if (kind == "near_exponential") {
    s.family = NearExponential{need_arg()};
  } else if (kind == "sub_threshold") {
    if (!arg.empty()) throw ConfigError("sub_threshold takes no parameter");
    s.family = SubThresholdPower{};
  } else {
    throw ConfigError("unknown power schedule '" + raw + "'");
  }
  if (const auto* p = std::get_if<PerSensor>(&s.family); p && !(p->P_ind > 0.0)) {
    throw ConfigError("per_sensor power must be positive");
  }
  if (const auto* p = std::get_if<Total>(&s.family); p && !(p->P_tot > 0.0)) {
    throw ConfigError("total power must be positive");
  }
  if (const auto* p = std::get_if<NearExponential>(&s.family); p && !(p->q > 0.0 && p->q < 1.0)) {
    throw ConfigError("near_exponential exponent must lie in (0, 1)");
  }
  return s;
}

void ChannelConfig::validate() const {
  if (!(h_lower > 0.0 && h_lower <= h_upper && h_upper <= 1.0)) {
    throw ConfigError("channel gains need 0 < h_lower <= h_upper <= 1");
  }
  if (K_uses < 1) throw ConfigError("K_uses must be a positive integer");
  if (const auto* c = std::get_if<ConstantGain>(&gain_mode); c && !(c->h >= h_lower && c->h <= h_upper)) {
    throw ConfigError("constant gain lies outside [h_lower, h_upper]");
  }
}

VectorXd ChannelConfig::realize_gains(Index N) const {
  if (const auto* c = std::get_if<ConstantGain>(&gain_mode)) return VectorXd::Constant(N, c->h);
  const auto& seeded = std::get<SeededUniformGain>(gain_mode);
  Philox4x32 rng(seeded.seed, static_cast<std::uint64_t>(N));
  std::uniform_real_distribution<double> uniform(h_lower, h_upper);
  VectorXd h(N);
  for (Index i = 0; i < N; ++i) h(i) = uniform(rng);
  return h;
}

double softplus(double v) { return v > 30.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

}  // namespace dscaler
