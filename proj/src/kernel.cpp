#include "dscaler/kernel.hpp"

#include "dscaler/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dscaler {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_domain(const KernelSpec& spec, double t) {
  if (!(t >= 0.0 && t <= spec.T0)) {
    std::ostringstream msg;
    msg << "kernel argument " << t << " outside [0, " << spec.T0 << "]";
    throw std::domain_error(msg.str());
  }
}

double bilinear(const MatrixXd& table, double T0, double t, double s) {
  const Index last = table.rows() - 1;
  const double u = t / T0 * static_cast<double>(last);
  const double v = s / T0 * static_cast<double>(last);
  const Index i = std::min<Index>(static_cast<Index>(u), last - 1);
  const Index j = std::min<Index>(static_cast<Index>(v), last - 1);
  const double fu = u - static_cast<double>(i);
  const double fv = v - static_cast<double>(j);
  return (1 - fu) * (1 - fv) * table(i, j) + fu * (1 - fv) * table(i + 1, j) +
         (1 - fu) * fv * table(i, j + 1) + fu * fv * table(i + 1, j + 1);
}

}  // namespace

std::vector<std::string> ClassAParams::violations() const {
  std::vector<std::string> out;
  if (!(x > 1.0)) out.emplace_back("x must exceed 1");
  if (!(d_l > 0.0)) out.emplace_back("d_l must be positive");
  if (!(d_u > 0.0)) out.emplace_back("d_u must be positive");
  if (c_l < 0 || c_u < 0) out.emplace_back("c_l and c_u must be nonnegative");
  if (K0 < c_u + 1) out.emplace_back("K0 must be at least c_u + 1");
  if (!(alpha > 0.5 && alpha <= 1.0)) out.emplace_back("alpha must lie in (1/2, 1]");
  if (!(B > 0.0)) out.emplace_back("B must be positive");
  if (!(beta > 0.0 && beta <= 1.0)) out.emplace_back("beta must lie in (0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) out.emplace_back("gamma must lie in (0, 1]");
  if (!(tau >= 0.0)) out.emplace_back("tau must be nonnegative");
  if (!(B1 > 0.0 && B2 > 0.0 && B3 > 0.0 && B4 > 0.0)) out.emplace_back("B1..B4 must be positive");
  if (out.empty()) {
    const double k = K0 + 1;
    if (lower_envelope(k) > upper_envelope(k)) {
      out.emplace_back("eigenvalue envelope is contradictory at k = K0 + 1");
    }
  }
  return out;
}

double ClassAParams::lower_envelope(double k) const { return d_l / std::pow(k + c_l, x); }

double ClassAParams::upper_envelope(double k) const { return d_u / std::pow(k - c_u, x); }

KernelSpec brownian_motion(double T0) {
  KernelSpec spec{BrownianMotion{}, T0, std::nullopt};
  spec.classA = default_class_a(spec);
  return spec;
}

KernelSpec ornstein_uhlenbeck(double sigma2, double eta, double T0) {
  if (!(sigma2 > 0.0 && eta > 0.0)) {
    throw std::invalid_argument("OU kernel needs sigma2 > 0 and eta > 0");
  }
  KernelSpec spec{OrnsteinUhlenbeck{sigma2, eta}, T0, std::nullopt};
  spec.classA = default_class_a(spec);
  return spec;
}

KernelSpec custom_grid(MatrixXd table, double T0) {
  if (table.rows() != table.cols() || table.rows() < 2) {
    throw std::invalid_argument("custom kernel table must be square with at least 2 points per axis");
  }
  const double scale = std::max(1.0, table.cwiseAbs().maxCoeff());
  if ((table - table.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("custom kernel table must be symmetric");
  }
  return KernelSpec{CustomGrid{std::move(table)}, T0, std::nullopt};
}

ClassAParams default_class_a(const KernelSpec& spec) {
  constexpr double pi = std::numbers::pi;
  const double T0 = spec.T0;
  return std::visit(
      Overloaded{
          [&](const BrownianMotion&) {
            // lambda_k = T0^2 / (pi^2 (k+1/2)^2), phi_k = sqrt(2/T0) sin((k+1/2) pi t / T0).
            ClassAParams p;
            p.x = 2.0;
            p.d_l = p.d_u = T0 * T0 / (pi * pi);
            p.c_l = 1;
            p.c_u = 0;
            p.K0 = 1;
            p.alpha = 1.0;
            p.B = 1.0;
            p.beta = p.gamma = 1.0;
            p.tau = 1.0;
            p.B3 = 1.1 * 2.0 * pi / (T0 * T0);
            p.B4 = 0.5;
            p.B2 = 1.1 * pi * std::sqrt(2.0 / T0);
            p.B1 = 1.0;
            return p;
          },
          [&](const OrnsteinUhlenbeck& ou) {
            // lambda_k = 2 eta sigma2 / (w_k^2 + eta^2) with w_k in (k pi/T0, (k+1) pi/T0).
            ClassAParams p;
            p.x = 2.0;
            p.d_l = p.d_u = 2.0 * ou.eta * ou.sigma2 * T0 * T0 / (pi * pi);
            p.c_l = 1 + static_cast<int>(std::ceil(ou.eta * T0 / pi));
            p.c_u = 0;
            p.K0 = 1;
            p.alpha = 1.0;
            p.B = std::sqrt(2.0) * ou.sigma2 * ou.eta;
            p.beta = p.gamma = 1.0;
            p.tau = 1.0;
            p.B3 = 7.0 * pi / (T0 * T0);
            p.B4 = 1.0;
            p.B2 = 2.0 * ou.sigma2 * pi / std::pow(T0, 1.5);
            p.B1 = 1.0 + ou.eta * T0 / pi;
            return p;
          },
          [&](const CustomGrid&) -> ClassAParams {
            throw CapabilityError("custom grid kernels have no default class parameters");
          }},
      spec.family);
}

std::string family_name(const KernelSpec& spec) {
  return std::visit(Overloaded{[](const OrnsteinUhlenbeck&) { return std::string("ou"); },
                               [](const BrownianMotion&) { return std::string("brownian"); },
                               [](const CustomGrid&) { return std::string("custom"); }},
                    spec.family);
}

double eval_kernel(const KernelSpec& spec, double t, double s) {
  check_domain(spec, t);
  check_domain(spec, s);
  return std::visit(
      Overloaded{[&](const OrnsteinUhlenbeck& ou) { return ou.sigma2 * std::exp(-ou.eta * std::abs(t - s)); },
                 [&](const BrownianMotion&) { return std::min(t, s); },
                 [&](const CustomGrid& g) {
                   // Evaluate on the sorted pair so interpolation is exactly symmetric.
                   return bilinear(g.table, spec.T0, std::min(t, s), std::max(t, s));
                 }},
      spec.family);
}

VectorXd kernel_row(const KernelSpec& spec, double t, const Eigen::Ref<const VectorXd>& s) {
  check_domain(spec, t);
  if (s.size() > 0) {
    check_domain(spec, s.minCoeff());
    check_domain(spec, s.maxCoeff());
  }
  return std::visit(
      Overloaded{[&](const OrnsteinUhlenbeck& ou) -> VectorXd {
                   return ou.sigma2 * (-ou.eta * (s.array() - t).abs()).exp();
                 },
                 [&](const BrownianMotion&) -> VectorXd { return s.array().min(t); },
                 [&](const CustomGrid& g) -> VectorXd {
                   VectorXd out(s.size());
                   for (Index j = 0; j < s.size(); ++j) {
                     out(j) = bilinear(g.table, spec.T0, std::min(t, s(j)), std::max(t, s(j)));
                   }
                   return out;
                 }},
      spec.family);
}

MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::Ref<const VectorXd>& points) {
  const Index n = points.size();
  MatrixXd g(n, n);
  for (Index j = 0; j < n; ++j) g.col(j) = kernel_row(spec, points(j), points);
  // Exact symmetry regardless of floating evaluation order.
  return 0.5 * (g + g.transpose());
}

double kernel_diagonal_integral(const KernelSpec& spec) {
  return std::visit(Overloaded{[&](const OrnsteinUhlenbeck& ou) { return ou.sigma2 * spec.T0; },
                               [&](const BrownianMotion&) { return 0.5 * spec.T0 * spec.T0; },
                               [&](const CustomGrid& g) {
                                 // Along a diagonal cell the bilinear surface is quadratic in the
                                 // cell coordinate; integrate it exactly.
                                 const MatrixXd& a = g.table;
                                 const Index n = a.rows();
                                 const double h = spec.T0 / static_cast<double>(n - 1);
                                 double sum = 0.0;
                                 for (Index i = 0; i + 1 < n; ++i) {
                                   sum += (a(i, i) + a(i + 1, i + 1)) / 3.0 + (a(i + 1, i) + a(i, i + 1)) / 6.0;
                                 }
                                 return h * sum;
                               }},
                    spec.family);
}

bool is_gauss_markov(const KernelSpec& spec) { return !std::holds_alternative<CustomGrid>(spec.family); }

}  // namespace dscaler
