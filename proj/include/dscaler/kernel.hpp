#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dscaler {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Membership record for the polynomial-decay class of Gaussian processes.
///
/// Envelope:  d_l/(k+c_l)^x <= lambda_k <= d_u/(k-c_u)^x for k > K0.
/// Kernel Lipschitz:  |K(t1,s1)-K(t2,s2)| <= B * dist^alpha.
/// Eigenfunction Lipschitz:  |phi_k^2(s1)-phi_k^2(s2)| <= B3 (k+B4)^tau |s1-s2|^gamma and
///                          |K(t,s1)phi_k(s1)-K(t,s2)phi_k(s2)| <= B2 (k+B1)^tau |s1-s2|^beta.
///
/// Eigenfunctions are taken with unit L2[0,T0] norm; B1..B4 depend on that.
struct ClassAParams {
  double x = 2.0;
  double d_l = 0.0;
  double d_u = 0.0;
  int c_l = 0;
  int c_u = 0;
  int K0 = 1;
  double alpha = 1.0;
  double B = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double tau = 0.0;
  double B1 = 1.0;
  double B2 = 1.0;
  double B3 = 1.0;
  double B4 = 1.0;

  /// Human-readable list of violated invariants; empty when valid.
  std::vector<std::string> violations() const;
  bool valid() const { return violations().empty(); }

  double lower_envelope(double k) const;
  double upper_envelope(double k) const;

  bool operator==(const ClassAParams&) const = default;
};

struct OrnsteinUhlenbeck {
  double sigma2 = 1.0;
  double eta = 1.0;
  bool operator==(const OrnsteinUhlenbeck&) const = default;
};

struct BrownianMotion {
  bool operator==(const BrownianMotion&) const = default;
};

/// Covariance sampled on a uniform (G x G) grid over [0,T0]^2, endpoints
/// included, evaluated by bilinear interpolation.
struct CustomGrid {
  MatrixXd table;
  bool operator==(const CustomGrid& o) const {
    return table.rows() == o.table.rows() && table.cols() == o.table.cols() && table == o.table;
  }
};

using KernelFamily = std::variant<OrnsteinUhlenbeck, BrownianMotion, CustomGrid>;

struct KernelSpec {
  KernelFamily family = BrownianMotion{};
  double T0 = 1.0;
  std::optional<ClassAParams> classA;

  bool operator==(const KernelSpec&) const = default;
};

KernelSpec brownian_motion(double T0 = 1.0);
KernelSpec ornstein_uhlenbeck(double sigma2 = 1.0, double eta = 1.0, double T0 = 1.0);
/// Throws std::invalid_argument for a non-square, non-symmetric or too small table.
KernelSpec custom_grid(MatrixXd table, double T0 = 1.0);

/// Documented class parameters for the built-in families.
/// Throws CapabilityError for CustomGrid.
ClassAParams default_class_a(const KernelSpec& spec);

std::string family_name(const KernelSpec& spec);

/// K(t,s). Throws std::domain_error unless 0 <= t,s <= T0.
double eval_kernel(const KernelSpec& spec, double t, double s);

/// (K(t, s_0), ..., K(t, s_{n-1})). Same domain rules as eval_kernel.
VectorXd kernel_row(const KernelSpec& spec, double t, const Eigen::Ref<const VectorXd>& s);

/// [K(p_i, p_j)].
MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::Ref<const VectorXd>& points);

/// int_0^T0 K(t,t) dt.  Dividing by T0 gives the blind-estimate distortion.
double kernel_diagonal_integral(const KernelSpec& spec);

/// True for kernels of Gauss-Markov processes (Brownian motion, OU).
bool is_gauss_markov(const KernelSpec& spec);

}  // namespace dscaler
