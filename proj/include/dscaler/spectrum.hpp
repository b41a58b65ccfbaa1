#pragma once

#include "dscaler/kernel.hpp"

#include <optional>

namespace dscaler {

enum class SpectrumSource { Analytic, Nystrom };

/// Ordered Karhunen-Loeve eigenvalues of a kernel, lambda_0 >= lambda_1 >= ... >= 0.
struct Spectrum {
  VectorXd eigenvalues;
  SpectrumSource source = SpectrumSource::Analytic;
  Index nystrom_N = 0;  // grid size when source == Nystrom
  double T0 = 1.0;
  std::optional<ClassAParams> tail_model;
};

/// Closed-form spectrum: Brownian motion directly, OU through its transcendental
/// root equation.  Throws CapabilityError for other families.
Spectrum analytic_spectrum(const KernelSpec& spec, Index count);

/// k-th positive root w_k of (w^2 - eta^2) sin(w T0) = 2 eta w cos(w T0), which lies in
/// (k pi / T0, (k+1) pi / T0).  Solved by bisection to 1e-12 absolute.
double ou_frequency(double eta, double T0, Index k);

/// How eigenvalues of the sampled covariance are computed.
///  - Dense: SelfAdjointEigenSolver on the full matrix.
///  - Tridiagonal: Gauss-Markov kernels only; the Gram precision matrix is
///    tridiagonal, so its eigenvalues come from an O(N^2) tridiagonal QR.
///  - Auto: Tridiagonal when available, Dense otherwise.
enum class EigenMethod { Auto, Dense, Tridiagonal };

/// Sigma_N' = (T0/(N-1)) [K(t_i, t_j)] at t_i = (i-1) T0/(N-1), plus its eigenvalues.
///
/// The dense matrix is stored only when the dense eigensolver produced the
/// eigenvalues; use sampled_matrix() to materialise it otherwise.
struct SampledCovariance {
  Index N = 0;
  double T0 = 1.0;
  double spacing = 1.0;     // T0/(N-1), also the scale factor of the matrix
  VectorXd positions;       // sensor positions t_1..t_N
  VectorXd eigenvalues;     // mu_k^{(N)'}, nonincreasing, clamped at zero
  MatrixXd matrix;          // empty unless built densely
  double trace = 0.0;       // (T0/(N-1)) sum_i K(t_i, t_i)

  bool has_matrix() const { return matrix.size() > 0; }
};

VectorXd sensor_positions(Index N, double T0);

/// Throws std::domain_error for N < 2 and CapabilityError when Tridiagonal is
/// requested for a non-Markov kernel.
SampledCovariance build_sampled_covariance(const KernelSpec& spec, Index N,
                                           EigenMethod method = EigenMethod::Auto);

MatrixXd sampled_matrix(const KernelSpec& spec, Index N);

/// rho_N(t): entry i is K(t, t_i).
VectorXd rho_vector(const SampledCovariance& sc, const KernelSpec& spec, double t);

/// Nystrom spectrum from the sampled covariance at N points.
Spectrum nystrom_spectrum(const KernelSpec& spec, Index N, EigenMethod method = EigenMethod::Auto);

/// Eigenvalues below rel * max are set to zero, then sorted nonincreasing.
VectorXd clamp_and_sort(VectorXd values, double rel = 1e-12);

/// Gauss-Markov state-space form of a kernel on an increasing grid:
/// S(p_0) ~ N(0, initial_variance), S(p_{i+1}) = gain_i S(p_i) + w_i, w_i ~ N(0, innovation_i).
struct MarkovChain {
  double initial_variance = 0.0;
  VectorXd gain;
  VectorXd innovation;
};

/// Throws CapabilityError for kernels that are not Gauss-Markov.
MarkovChain markov_chain(const KernelSpec& spec, const Eigen::Ref<const VectorXd>& points);

/// Unit-norm eigenfunctions phi_0..phi_{k_max} sampled at the given points
/// (rows = k, cols = points).  Analytic for Brownian/OU; otherwise from a
/// Nystrom eigendecomposition on `nystrom_N` points, linearly interpolated.
MatrixXd eigenfunction_samples(const KernelSpec& spec, Index k_max, const Eigen::Ref<const VectorXd>& points,
                               Index nystrom_N = 512);

}  // namespace dscaler
