#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "crossdiff/grid.hpp"
#include "crossdiff/state.hpp"
#include "crossdiff/stepper.hpp"
#include "crossdiff/system.hpp"

namespace crossdiff {

/// Per-step audited quantities.
struct LedgerRow {
  int k = 0;
  double t = 0.0;
  Eigen::VectorXd mass;           // integral of each u_i
  double entropy = 0.0;           // integral of Phi(U), two species only
  double diss_g1 = 0.0;           // edge energy of u_1^{g1/2}
  double diss_g2 = 0.0;           // edge energy of u_2^{g2/2}
  double diss_cross = 0.0;        // edge energy of u_1^{g1/2} u_2^{g2/2}
  Eigen::VectorXd reaction_sink;  // integral of rho_bar*u_i - R_i(U)
  double dual_mu = 0.0;           // integral of mu
  double dual_mu_u2 = 0.0;        // integral of mu * u^2, u = sum_i u_i
  double entropy_reaction = 0.0;  // integral of u_2^{g2} (u_1^{s21} + u_2^{s22})
  double convexity_rhs = 0.0;     // tau * integral of <grad Phi(U), Lap A(U) + R(U)>
  int fp_iters = 0;
  double residual = 0.0;
  double min_value = 0.0;
  // audit-internal extras (not serialized)
  double u2_gamma2 = 0.0;      // integral of u_2^{g2}
  double grad_phi_sup = 0.0;   // sup of |phi_1'| + |phi_2'| over cells
  double sup_u = 0.0;          // sup-norm of the state
};

class EstimateLedger {
 public:
  EstimateLedger(const CrossDiffusionSystem& sys, const Grid& g, double tau);

  void record(int k, double t, const SpeciesState& state, const StepReport& rep);

  const std::vector<LedgerRow>& rows() const { return rows_; }
  double duality_sum() const { return duality_sum_; }
  // recorded at k = 0 for the duality audit
  double u0_mean() const { return u0_mean_; }
  double u0_hminus1m() const { return u0_hminus1m_; }
  double gamma_total(int k) const;  // sum of the three dissipation components

 private:
  const CrossDiffusionSystem* sys_;
  const Grid* grid_;
  double tau_;
  std::vector<LedgerRow> rows_;
  double duality_sum_ = 0.0;
  double u0_mean_ = 0.0;
  double u0_hminus1m_ = 0.0;
};

struct AuditOptions {
  double convexity_tol = 1e-9;   // allowed per-step defect, times scale
  double epsilon_factor = 10.0;  // c in eps_h = c * h^2 * Gamma_k
  double entropy_K = 0.0;        // cumulative-bound constant; 0 skips the check
  double duality_rel_slack = 1e-9;
};

struct AuditResult {
  bool pass = false;
  bool applicable = true;
  double margin = 0.0;  // min over checks of (bound - value), in bound units
  int worst_step = -1;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string detail;
};

// Per-step mass bound against (1 - rho*tau)^{-k} * mass_0 with a residual-
// derived allowance, plus the cumulative 2^{2 rho tau N} bounds on mass and
// on the reaction sink.
AuditResult audit_mass(const EstimateLedger& ledger,
                       const CrossDiffusionSystem& sys, const Grid& g,
                       double tau, const AuditOptions& opts = {});

// Discrete duality bound
//   sum tau * int mu^k |u^k|^2
//     <= (1-rho*tau)^{-2N} (C^2 ||u0||_{H^-1_m}^2 + <u0>^2 sum tau * int mu^k)
// with C the discrete Poincare constant; also reports the unamplified
// right-hand side (rhs_core) whose equality case is constant data.
struct DualityAudit : AuditResult {
  double rhs_core = 0.0;
  double duality_functional = 0.0;
};
DualityAudit audit_duality(const EstimateLedger& ledger,
                           const CrossDiffusionSystem& sys, const Grid& g,
                           double tau, const AuditOptions& opts = {});

// Per-step convexity inequality (exact up to step residual), monotonicity of
// the entropy within eps_h = c h^2 Gamma_k when reactions are off, and the
// optional cumulative bound with frozen constant K.
AuditResult audit_entropy(const EstimateLedger& ledger,
                          const CrossDiffusionSystem& sys, const Grid& g,
                          double tau, bool reaction_on,
                          const AdmissibilityReport& adm,
                          const AuditOptions& opts = {});

/// Analytic space-time test function; evaluated at cell centers.  The value
/// callback must be defined for arbitrary points of the closed domain so the
/// zero-flux compatibility check can probe the boundary.
struct SpaceTimeTestFunction {
  std::function<double(double t, double x, double y)> value;
  std::function<double(double t, double x, double y)> dt;
  std::function<double(double t, double x, double y)> laplacian;
};

// Defect of the (very) weak formulation on [0, T] for the stored trajectory,
// one component per species; the terminal term int u^N psi(T) is included so
// test functions need not vanish at T.  Throws on test functions with
// nonzero boundary flux.
Eigen::VectorXd weak_residual(const std::vector<SpeciesState>& trajectory,
                              double tau, const Grid& g,
                              const CrossDiffusionSystem& sys,
                              const std::array<SpaceTimeTestFunction, 2>& psi);

}  // namespace crossdiff
