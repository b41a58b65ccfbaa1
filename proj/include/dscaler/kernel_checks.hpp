#pragma once

#include "dscaler/kernel.hpp"
#include "dscaler/spectrum.hpp"

#include <string>

namespace dscaler {

/// Location of the worst (or first failing) observation of a check.
struct Witness {
  Index k = -1;  // eigen-index, when relevant
  double t1 = 0.0, s1 = 0.0, t2 = 0.0, s2 = 0.0;
};

/// Result of an empirical class-membership check.
///
/// `max_ratio` is the largest observed value of (observed / allowed); the check
/// passes iff max_ratio <= 1.  For the kernel Lipschitz check `max_observed` is
/// the raw max |dK|/dist^alpha, to be compared against the declared B.
struct CheckReport {
  std::string condition;
  bool passed = true;
  double max_ratio = 0.0;
  double max_observed = 0.0;
  Witness witness;
  std::string message;
};

/// Kernel Lipschitz condition on a uniform grid of `grid` points per axis (grid >= 16).
/// Brute force over all pairs of grid points in [0,T0]^2.
CheckReport check_lipschitz_kernel(const KernelSpec& spec, const ClassAParams& params, Index grid);

/// Eigenvalue envelope for every available k > K0.  The witness records the first
/// violating index.
CheckReport check_eigenvalue_envelope(const Spectrum& spectrum, const ClassAParams& params,
                                      Index k_limit = -1);

/// Eigenfunction Lipschitz conditions for k = 0..k_max on a uniform grid of `grid` points.
CheckReport check_eigenfunction_lipschitz(const KernelSpec& spec, const ClassAParams& params, Index k_max,
                                          Index grid);

}  // namespace dscaler
