#pragma once

#include <functional>
#include <string>

#include "crossdiff/grid.hpp"
#include "crossdiff/inversion.hpp"
#include "crossdiff/state.hpp"
#include "crossdiff/system.hpp"

namespace crossdiff {

struct SchemeConfig {
  double tau = 1e-3;
  int n_steps = 100;
  double mbar_floor = 0.0;     // 0 means formula-driven
  double fp_tol = 1e-10;       // tolerance on the sweep increment
  int fp_max = 500;
  bool newton_fallback = true;
  double linear_tol = 1e-12;   // accepted residual of the shifted solve
  int linear_max = 0;          // 0 = automatic
  InversionConfig inversion;

  std::vector<std::string> violations(const CrossDiffusionSystem& sys) const;
  void validate(const CrossDiffusionSystem& sys) const;
};

enum class SolverPath { FixedPoint, Newton };

struct StepReport {
  int iterations = 0;
  double final_residual = 0.0;
  double mbar_used = 0.0;
  double min_value = 0.0;
  SolverPath solver_path = SolverPath::FixedPoint;
};

// shift making S + mbar*A(U) - U + tau*R(U) componentwise nonnegative:
// max(mbar_floor, (2 + tau*max_i ||r_i(U)||_inf) / alpha)
double mbar(const CrossDiffusionSystem& sys, const SpeciesState& U, double tau,
            double floor = 0.0);

// (M*Id - tau*Lap)^{-1} F with the Neumann stencil; output is nonnegative for
// nonnegative F (discrete maximum principle).  Throws when the solve misses
// linear_tol.
Field theta_solve(const Grid& g, const Field& F, double M, double tau,
                  double linear_tol = 1e-12);

// inf-norm of U - tau*Lap[A(U)] - S - tau*R(U)
double scheme_residual(const CrossDiffusionSystem& sys, const Grid& g,
                       const SpeciesState& U, const SpeciesState& S, double tau);

// One implicit step: solves U - tau*Lap[A(U)] = S + tau*R(U) by the
// shift/solve/invert fixed-point sweep with a damped-Newton fallback on the
// transformed variable W = A(U).
std::pair<SpeciesState, StepReport> step(const CrossDiffusionSystem& sys,
                                         const Grid& g, const SpeciesState& S,
                                         const SchemeConfig& cfg);

using StepCallback = std::function<void(int k, double t, const SpeciesState&,
                                        const StepReport&)>;

// Advances n_steps from strictly positive U0, invoking the callback for
// k = 0 (initial state) through k = n_steps.  Returns the final state.
SpeciesState run(const CrossDiffusionSystem& sys, const Grid& g,
                 const SpeciesState& U0, const SchemeConfig& cfg,
                 const StepCallback& on_step = nullptr);

}  // namespace crossdiff
