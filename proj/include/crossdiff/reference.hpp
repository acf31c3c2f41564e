#pragma once

#include <Eigen/Dense>

#include "crossdiff/grid.hpp"
#include "crossdiff/state.hpp"
#include "crossdiff/system.hpp"

namespace crossdiff {

struct OracleConfig {
  double tau_ref = 0.0;     // explicit step; must satisfy the stability bound
  int spectral_modes = 0;   // 0 = all modes
};

// Forward-Euler reference integrator.  Aborts (throws) on negative values or
// non-finite entries instead of clipping: a failure here signals a violated
// stability bound, not data to be repaired.
SpeciesState explicit_reference(const CrossDiffusionSystem& sys, const Grid& g,
                                const SpeciesState& U0, double T, double tau_ref);

SpeciesState explicit_reference(const CrossDiffusionSystem& sys, const Grid& g,
                                const SpeciesState& U0, double T,
                                const OracleConfig& cfg);

// h^2 / (2 * dim * max_diffusion_estimate) with the diffusion estimate
// sampled as the max row sum of |DA| over [umin, umax]^I, times a safety
// factor.
double suggest_stable_tau(const CrossDiffusionSystem& sys, const Grid& g,
                          double umax, double safety = 0.5);

// Spatially homogeneous implicit step u = s + tau * R(u), solved per species
// by bracketed monotone root finding (closed quadratic form for the single
// species logistic with s_11 = 1).
Eigen::VectorXd homogeneous_step_oracle(const CrossDiffusionSystem& sys,
                                        const Eigen::VectorXd& s, double tau);

// positive root of tau*u^2 + (1 - tau*rho)*u - s = 0
double logistic_implicit_root(double rho, double s, double tau);

struct Psd2x2 {
  bool psd = false;
  Eigen::Vector2d eigenvalues = Eigen::Vector2d::Zero();
};

// symmetrize, closed-form eigenvalues, psd iff both >= -1e-12
Psd2x2 psd_2x2(const Eigen::Matrix2d& m);

// Discrete Neumann eigenpairs of the 1D stencil:
//   lambda_m = (2/h^2)(1 - cos(pi m / n)),  v_m(i) = cos(pi m (i+1/2)/n).
double neumann_eigenvalue_1d(const Grid& g, int m);
Field neumann_eigenvector_1d(const Grid& g, int m);

// Exact solution of the semi-discrete heat flow du/dt = d * Lap u.
// `modes` truncates the expansion (0 = all).
Field heat_semidiscrete_exact(const Grid& g, double d, const Field& u0, double t,
                              int modes = 0);

// Exact k-step solution of the implicit scheme (1 + tau d lambda)^{-k} per mode.
Field heat_implicit_spectral(const Grid& g, double d, const Field& u0,
                             double tau, int k, int modes = 0);

}  // namespace crossdiff
