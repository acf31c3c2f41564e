#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "crossdiff/grid.hpp"
#include "crossdiff/state.hpp"

namespace crossdiff {

/// Power-law rates of the two-species competition model:
///   a_1(U) = d_1 + u_2^{gamma_2},  a_2(U) = d_2 + u_1^{gamma_1},
///   r_1(U) = rho_1 - u_1^{s_11} - u_2^{s_12},
///   r_2(U) = rho_2 - u_2^{s_22} - u_1^{s_21}.
/// The one-species reduction (species == 1) keeps a = d_1 and
/// r = rho_1 - u^{s_11}.
struct PowerLawParams {
  int species = 2;  // 1 or 2
  Eigen::Vector2d d{1.0, 1.0};
  Eigen::Vector2d gamma{0.5, 1.5};
  Eigen::Vector2d rho{1.0, 1.0};
  Eigen::Matrix2d s = Eigen::Matrix2d::Ones();  // s(i,j)

  std::vector<std::string> violations() const;
  bool valid() const { return violations().empty(); }

  // weaker subset under which the maps can be evaluated at all; lets a
  // system with d_i = 0 or rho_i = 0 be built so the hypothesis checker can
  // report the H2 failure instead of never seeing the system
  std::vector<std::string> evaluable_violations() const;

  // gamma_2 > 1, gamma_1 < 1/gamma_2, s_11 < 1, s_12 < gamma_2 + s_22/2,
  // s_21 < 2 (two species only)
  bool theorem_regime() const;
};

struct CrossDiffusionSystem {
  PowerLawParams params;
  bool reactions = true;

  CrossDiffusionSystem() = default;
  explicit CrossDiffusionSystem(PowerLawParams p, bool with_reactions = true);

  int species() const { return params.species; }
  // uniform lower bound on the a_i (H2)
  double alpha() const;
  // uniform upper bound on the r_i (H2)
  double rho_bar() const;

  Eigen::VectorXd rates_a(const Eigen::VectorXd& U) const;
  Eigen::VectorXd rates_r(const Eigen::VectorXd& U) const;
  Eigen::VectorXd eval_A(const Eigen::VectorXd& U) const;
  Eigen::VectorXd eval_R(const Eigen::VectorXd& U) const;
  // requires U > 0 componentwise (exponents gamma_i - 1 may be negative)
  Eigen::MatrixXd jacobian_A(const Eigen::VectorXd& U) const;
  Eigen::MatrixXd jacobian_R(const Eigen::VectorXd& U) const;

  std::vector<Field> rates_a_fields(const SpeciesState& state) const;
  std::vector<Field> rates_r_fields(const SpeciesState& state) const;
  std::vector<Field> eval_A_fields(const SpeciesState& state) const;
  std::vector<Field> eval_R_fields(const SpeciesState& state) const;
};

// Convex per-species entropy density and derivatives,
// phi(z) = gamma/(gamma-1) * (z^gamma/gamma - z + 1 - 1/gamma).
double entropy_phi(double gamma, double z);
double entropy_phi_prime(double gamma, double z);
double entropy_phi_second(double gamma, double z);

// integral of Phi(U) = phi_1(u_1) + phi_2(u_2); nonnegative.
double entropy_value(const CrossDiffusionSystem& sys, const Grid& g,
                     const SpeciesState& state);

Eigen::Matrix2d entropy_hessian(const CrossDiffusionSystem& sys,
                                const Eigen::Vector2d& X);

struct AdmissibilityReport {
  bool admissible = false;
  bool boundary = false;  // det L == 0 within tolerance
  double det_L = 0.0;
  Eigen::Vector2d L_eigenvalues = Eigen::Vector2d::Zero();
  bool has_witness = false;
  Eigen::Vector2d witness = Eigen::Vector2d::Zero();
  double witness_eigenvalue = 0.0;
  int samples = 0;
};

// Samples D^2(Phi) * D(A) over X log-uniform in [1e-3, 1e3]^2 and tests the
// symmetric part for nonnegative eigenvalues; also evaluates the reduced
// matrix L = [[g1, g1 g2], [g1 g2, g2]] with det = g1 g2 (1 - g1 g2).
AdmissibilityReport entropy_admissible(const CrossDiffusionSystem& sys,
                                       int sample_count = 10000,
                                       unsigned long long seed = 0);

struct HypothesesReport {
  bool h1 = false;  // continuity of a_i, r_i on the nonnegative cone
  bool h2 = false;  // a_i >= alpha > 0, r_i <= rho_bar
  bool h3 = false;  // A homeomorphism: monotone components, det DA > 0 sampled
  bool all() const { return h1 && h2 && h3; }
  std::string detail;
  bool has_h3_witness = false;
  Eigen::VectorXd h3_witness;
  double h3_witness_det = 0.0;
};

HypothesesReport check_hypotheses(const CrossDiffusionSystem& sys,
                                  int sample_count = 10000,
                                  unsigned long long seed = 0);

}  // namespace crossdiff
