#include "crossdiff/estimates.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace crossdiff {

EstimateLedger::EstimateLedger(const CrossDiffusionSystem& sys, const Grid& g,
                               double tau)
    : sys_(&sys), grid_(&g), tau_(tau) {}

double EstimateLedger::gamma_total(int k) const {
  const LedgerRow& r = rows_.at(k);
  return r.diss_g1 + r.diss_g2 + r.diss_cross;
}

void EstimateLedger::record(int k, double t, const SpeciesState& state,
                            const StepReport& rep) {
  const CrossDiffusionSystem& sys = *sys_;
  const Grid& g = *grid_;
  LedgerRow row;
  row.k = k;
  row.t = t;
  row.fp_iters = rep.iterations;
  row.residual = rep.final_residual;
  row.min_value = rep.min_value;

  const int ns = sys.species();
  row.mass.resize(ns);
  for (int i = 0; i < ns; ++i) row.mass[i] = integrate(g, state.u[i]);

  const std::vector<Field> A = sys.eval_A_fields(state);
  const std::vector<Field> R = sys.eval_R_fields(state);

  row.reaction_sink.resize(ns);
  const double rho = sys.rho_bar();
  for (int i = 0; i < ns; ++i)
    row.reaction_sink[i] = integrate(g, rho * state.u[i] - R[i]);

  // dual pair u = sum_i u_i, mu = sum_i a_i u_i / u (alpha where u vanishes)
  Field usum = state.u[0];
  Field flux = A[0];
  for (int i = 1; i < ns; ++i) {
    usum += state.u[i];
    flux += A[i];
  }
  Field mu(usum.size());
  for (Eigen::Index c = 0; c < usum.size(); ++c)
    mu[c] = usum[c] > 0.0 ? flux[c] / usum[c] : sys.alpha();
  row.dual_mu = integrate(g, mu);
  row.dual_mu_u2 = integrate(g, mu * usum * usum);
  duality_sum_ += tau_ * integrate(g, usum * flux);

  if (k == 0) {
    u0_mean_ = mean(g, usum);
    u0_hminus1m_ = hminus1m_norm(g, usum);
  }

  if (ns == 2) {
    const double g1 = sys.params.gamma[0], g2 = sys.params.gamma[1];
    row.entropy = entropy_value(sys, g, state);
    const Field t1 = state.u[0].pow(0.5 * g1);
    const Field t2 = state.u[1].pow(0.5 * g2);
    row.diss_g1 = edge_sum(g, t1, t1);
    row.diss_g2 = edge_sum(g, t2, t2);
    const Field tc = t1 * t2;
    row.diss_cross = edge_sum(g, tc, tc);
    const Field u2g = state.u[1].pow(g2);
    row.u2_gamma2 = integrate(g, u2g);
    row.entropy_reaction = integrate(
        g, u2g * (state.u[0].pow(sys.params.s(1, 0)) +
                  state.u[1].pow(sys.params.s(1, 1))));

    Field phi1p(usum.size()), phi2p(usum.size());
    for (Eigen::Index c = 0; c < usum.size(); ++c) {
      phi1p[c] = entropy_phi_prime(g1, state.u[0][c]);
      phi2p[c] = entropy_phi_prime(g2, state.u[1][c]);
    }
    row.grad_phi_sup = phi1p.abs().maxCoeff() + phi2p.abs().maxCoeff();
    if (k > 0) {
      const Field rhs =
          phi1p * (neumann_laplacian(g, A[0]) + R[0]) +
          phi2p * (neumann_laplacian(g, A[1]) + R[1]);
      row.convexity_rhs = tau_ * integrate(g, rhs);
    }
  }
  row.sup_u = state.max_abs();
  rows_.push_back(std::move(row));
}

AuditResult audit_mass(const EstimateLedger& ledger,
                       const CrossDiffusionSystem& sys, const Grid& g,
                       double tau, const AuditOptions&) {
  AuditResult out;
  const auto& rows = ledger.rows();
  if (rows.empty()) {
    out.detail = "empty ledger";
    return out;
  }
  const int N = rows.back().k;
  const int ns = sys.species();
  const double grow = 1.0 / (1.0 - sys.rho_bar() * tau);
  const double vol = g.volume();
  const Eigen::VectorXd mass0 = rows.front().mass;

  out.pass = true;
  out.margin = std::numeric_limits<double>::infinity();
  double allowance = 0.0;  // residual-driven slack, exact bookkeeping
  double bound_factor = 1.0;
  for (size_t k = 1; k < rows.size(); ++k) {
    bound_factor *= grow;
    allowance = grow * (allowance + vol * rows[k].residual);
    for (int i = 0; i < ns; ++i) {
      const double bound = bound_factor * mass0[i] + allowance;
      const double rel =
          (bound - rows[k].mass[i]) / std::max(bound, 1e-300);
      if (rel < out.margin) {
        out.margin = rel;
        out.worst_step = rows[k].k;
      }
      if (rows[k].mass[i] > bound) out.pass = false;
    }
  }

  // cumulative forms with exponent 2*rho*tau*N
  const double cap = std::pow(2.0, 2.0 * sys.rho_bar() * tau * N);
  double sink_sum_slack = allowance * (1.0 + sys.rho_bar() * tau * N);
  for (int i = 0; i < ns; ++i) {
    double max_mass = 0.0, sink_sum = 0.0;
    for (size_t k = 0; k < rows.size(); ++k) {
      max_mass = std::max(max_mass, rows[k].mass[i]);
      if (k >= 1) sink_sum += tau * rows[k].reaction_sink[i];
    }
    if (max_mass > cap * mass0[i] + allowance) out.pass = false;
    if (sink_sum > cap * mass0[i] + sink_sum_slack) out.pass = false;
  }
  if (rows.size() == 1) out.margin = 0.0;  // vacuous

  std::ostringstream os;
  os << "per-step growth bound vs (1-rho*tau)^-k, N=" << N
     << ", min relative margin " << out.margin;
  out.detail = os.str();
  return out;
}

DualityAudit audit_duality(const EstimateLedger& ledger,
                           const CrossDiffusionSystem& sys, const Grid& g,
                           double tau, const AuditOptions& opts) {
  DualityAudit out;
  const auto& rows = ledger.rows();
  if (rows.empty()) {
    out.detail = "empty ledger";
    return out;
  }
  const int N = rows.back().k;
  double lhs = 0.0, mu_sum = 0.0;
  for (size_t k = 1; k < rows.size(); ++k) {
    lhs += tau * rows[k].dual_mu_u2;
    mu_sum += tau * rows[k].dual_mu;
  }
  const double C = poincare_constant(g);
  const double h1 = ledger.u0_hminus1m();
  const double mean0 = ledger.u0_mean();
  out.rhs_core = C * C * h1 * h1 + mean0 * mean0 * mu_sum;
  const double grow = 1.0 / (1.0 - sys.rho_bar() * tau);
  out.rhs = std::pow(grow, 2.0 * N) * out.rhs_core;
  out.lhs = lhs;
  out.duality_functional = ledger.duality_sum();
  out.pass = N == 0 || lhs <= out.rhs * (1.0 + opts.duality_rel_slack);
  out.margin = (out.rhs - lhs) / std::max(out.rhs, 1e-300);
  std::ostringstream os;
  os << "lhs " << lhs << " vs rhs " << out.rhs << " (core " << out.rhs_core
     << "), functional " << out.duality_functional;
  out.detail = os.str();
  return out;
}

AuditResult audit_entropy(const EstimateLedger& ledger,
                          const CrossDiffusionSystem& sys, const Grid& g,
                          double tau, bool reaction_on,
                          const AdmissibilityReport& adm,
                          const AuditOptions& opts) {
  AuditResult out;
  if (sys.species() != 2 || !adm.admissible) {
    out.applicable = false;
    out.pass = false;
    out.detail = "inadmissible system";
    return out;
  }
  const auto& rows = ledger.rows();
  if (rows.empty()) {
    out.detail = "empty ledger";
    return out;
  }
  double h2max = 0.0;
  for (int a = 0; a < g.dim(); ++a)
    h2max = std::max(h2max, g.spacing(a) * g.spacing(a));
  const double vol = g.volume();

  out.pass = true;
  out.margin = std::numeric_limits<double>::infinity();
  for (size_t k = 1; k < rows.size(); ++k) {
    const double delta = rows[k].entropy - rows[k - 1].entropy;
    const double scale =
        vol * (1.0 + rows[k].grad_phi_sup) * (1.0 + rows[k - 1].sup_u);
    const double defect = rows[k].convexity_rhs - delta;
    const double conv_bound = -opts.convexity_tol * scale;
    if (!(defect >= conv_bound)) {
      out.pass = false;
      out.worst_step = rows[k].k;
    }
    if (defect < out.margin) out.margin = defect;

    if (!reaction_on) {
      const double gamma_k = rows[k].diss_g1 + rows[k].diss_g2 + rows[k].diss_cross;
      const double eps_h = opts.epsilon_factor * h2max * gamma_k;
      if (!(delta <= eps_h + opts.convexity_tol * scale)) {
        out.pass = false;
        out.worst_step = rows[k].k;
      }
    }
  }

  // dissipation is a sum of squares; it must never be negative
  for (const LedgerRow& r : rows)
    if (r.diss_g1 < 0.0 || r.diss_g2 < 0.0 || r.diss_cross < 0.0) {
      out.pass = false;
      out.worst_step = r.k;
    }

  if (opts.entropy_K > 0.0) {
    double max_u2g = 0.0, reac_sum = 0.0, gamma_sum = 0.0;
    for (const LedgerRow& r : rows) {
      max_u2g = std::max(max_u2g, r.u2_gamma2);
      reac_sum += tau * r.entropy_reaction;
      gamma_sum += tau * (r.diss_g1 + r.diss_g2 + r.diss_cross);
    }
    const double lhs = max_u2g + reac_sum + gamma_sum;
    const double rhs =
        opts.entropy_K * (1.0 + rows.front().mass[0] + rows.front().u2_gamma2);
    out.lhs = lhs;
    out.rhs = rhs;
    if (lhs > rhs) out.pass = false;
  }

  std::ostringstream os;
  os << "convexity inequality min defect " << out.margin
     << (reaction_on ? "" : ", monotonicity within eps_h checked");
  out.detail = os.str();
  return out;
}

static Field sample_field(const Grid& g, double t,
                          const std::function<double(double, double, double)>& fn) {
  Field f(g.cells());
  for (int c = 0; c < g.cells(); ++c)
    f[c] = fn(t, g.center_x(c), g.center_y(c));
  return f;
}

static void check_zero_flux(const Grid& g, const SpaceTimeTestFunction& psi,
                            double T) {
  const double eps = 1e-7 * std::min(g.length(0), g.dim() == 2 ? g.length(1) : g.length(0));
  double scale = 1.0;
  auto probe = [&](double t, double x, double y, double nx, double ny) {
    const double d = (psi.value(t, x + eps * nx, y + eps * ny) -
                      psi.value(t, x - eps * nx, y - eps * ny)) /
                     (2.0 * eps);
    scale = std::max(scale, std::abs(psi.value(t, x, y)));
    if (std::abs(d) > 1e-6 * scale)
      throw std::invalid_argument(
          "weak_residual: test function has nonzero boundary flux");
  };
  for (double t : {0.0, 0.5 * T, T}) {
    if (g.dim() == 1) {
      probe(t, 0.0, 0.0, 1.0, 0.0);
      probe(t, g.length(0), 0.0, 1.0, 0.0);
    } else {
      for (int i = 0; i < 3; ++i) {
        const double fx = (i + 0.5) / 3.0;
        probe(t, 0.0, fx * g.length(1), 1.0, 0.0);
        probe(t, g.length(0), fx * g.length(1), 1.0, 0.0);
        probe(t, fx * g.length(0), 0.0, 0.0, 1.0);
        probe(t, fx * g.length(0), g.length(1), 0.0, 1.0);
      }
    }
  }
}

Eigen::VectorXd weak_residual(const std::vector<SpeciesState>& trajectory,
                              double tau, const Grid& g,
                              const CrossDiffusionSystem& sys,
                              const std::array<SpaceTimeTestFunction, 2>& psi) {
  if (trajectory.empty())
    throw std::invalid_argument("weak_residual: empty trajectory");
  const int ns = sys.species();
  if (ns > 2) throw std::invalid_argument("weak_residual: at most two species");
  const int N = static_cast<int>(trajectory.size()) - 1;
  const double T = N * tau;
  for (int i = 0; i < ns; ++i) check_zero_flux(g, psi[i], T);

  Eigen::VectorXd defect = Eigen::VectorXd::Zero(ns);
  for (int i = 0; i < ns; ++i) {
    defect[i] += integrate(g, trajectory[N].u[i] * sample_field(g, T, psi[i].value));
    defect[i] -= integrate(g, trajectory[0].u[i] * sample_field(g, 0.0, psi[i].value));
  }
  for (int k = 0; k <= N; ++k) {
    const double t = k * tau;
    const double w = (k == 0 || k == N) ? 0.5 : 1.0;  // trapezoid in time
    for (int i = 0; i < ns; ++i)
      defect[i] -= w * tau *
                   integrate(g, trajectory[k].u[i] * sample_field(g, t, psi[i].dt));
  }
  for (int k = 1; k <= N; ++k) {
    const double t = k * tau;
    const std::vector<Field> A = sys.eval_A_fields(trajectory[k]);
    const std::vector<Field> R = sys.eval_R_fields(trajectory[k]);
    for (int i = 0; i < ns; ++i) {
      defect[i] -= tau * integrate(g, sample_field(g, t, psi[i].laplacian) * A[i]);
      defect[i] -= tau * integrate(g, sample_field(g, t, psi[i].value) * R[i]);
    }
  }
  return defect;
}

}  // namespace crossdiff
