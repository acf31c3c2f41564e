#pragma once

#include <Eigen/Dense>

#include "crossdiff/state.hpp"
#include "crossdiff/system.hpp"

namespace crossdiff {

struct InversionConfig {
  double abs_tol = 1e-12;  // absolute residual tolerance
  int max_bisect = 200;
  int max_newton = 50;
};

// A^{-1} on the positive cone for two species.  The inner equation
// u (d_1 + v^{g2}) = f is solved in closed form; the outer map
// v -> v (d_2 + u_f(v)^{g1}) is continuous and strictly increasing and is
// bracketed on [0, g/d_2] then solved by safeguarded Newton/bisection.
Eigen::Vector2d invert_two_species(const CrossDiffusionSystem& sys,
                                   const Eigen::Vector2d& target,
                                   const InversionConfig& cfg = {},
                                   const Eigen::Vector2d* guess = nullptr);

// Damped Newton on A(U) = target from U0_i = target_i / alpha with step
// halving to keep iterates strictly positive; falls back to componentwise
// bracketed sweeps when Newton stalls.  Zero target components reduce the
// problem to the corresponding boundary face.
Eigen::VectorXd invert_general(const CrossDiffusionSystem& sys,
                               const Eigen::VectorXd& target,
                               const InversionConfig& cfg = {});

// Cellwise A^{-1} of a vector of fields; `warm` (if given) provides the
// per-cell starting guesses.
SpeciesState invert_fields(const CrossDiffusionSystem& sys,
                           const std::vector<Field>& target,
                           const InversionConfig& cfg = {},
                           const SpeciesState* warm = nullptr);

}  // namespace crossdiff
