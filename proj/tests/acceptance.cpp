// Acceptance suite: runs every contract criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "crossdiff/estimates.hpp"
#include "crossdiff/reference.hpp"
#include "crossdiff/stepper.hpp"
#include "test_util.hpp"

using namespace crossdiff;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct ScenarioRun {
  EstimateLedger ledger;
  std::vector<SpeciesState> trajectory;
  std::vector<double> sup_prev;  // ||U^{k-1}||_inf per accepted step
  std::vector<StepReport> reports;
};

// the reacting bump scenario: 1D, n=64, tau=1e-3, N=200,
// gamma=(1/2, 3/2), d=(1,1), rho=(1,1), s=(1/2, 1, 1, 1)
ScenarioRun run_scenario(bool reactions, SchemeConfig cfg) {
  Grid g = Grid::line(64, 1.0);
  CrossDiffusionSystem sys = testutil::theorem_system(reactions);
  SpeciesState U0 = testutil::bump_state(g, reactions ? 0.2 : 0.5, 1.0);
  ScenarioRun out{EstimateLedger(sys, g, cfg.tau), {}, {}, {}};
  run(sys, g, U0, cfg,
      [&](int k, double t, const SpeciesState& st, const StepReport& rep) {
        out.ledger.record(k, t, st, rep);
        if (k > 0) {
          out.sup_prev.push_back(out.trajectory.back().max_abs());
          out.reports.push_back(rep);
        }
        out.trajectory.push_back(st);
      });
  return out;
}

SchemeConfig scenario_config() {
  SchemeConfig cfg;
  cfg.tau = 1e-3;
  cfg.n_steps = 200;
  return cfg;
}

Outcome criterion_inversion() {
  CrossDiffusionSystem sys = testutil::theorem_system();
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Eigen::Vector2d U(10.0 * (1.0 - u(rng)), 10.0 * (1.0 - u(rng)));  // (0, 10]
    Eigen::Vector2d back = invert_two_species(sys, sys.eval_A(U));
    const double err =
        (back - U).cwiseAbs().maxCoeff() / (1.0 + U.cwiseAbs().maxCoeff());
    worst = std::max(worst, err);
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max scaled error %.3e (limit 1e-10)", worst);
  return {worst <= 1e-10, buf};
}

Outcome criterion_residual(const ScenarioRun& run, const SchemeConfig& cfg) {
  double worst_ratio = 0.0;
  for (size_t k = 0; k < run.reports.size(); ++k) {
    const double bound = 10.0 * cfg.fp_tol * (1.0 + run.sup_prev[k]);
    worst_ratio = std::max(worst_ratio, run.reports[k].final_residual / bound);
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "worst residual/bound %.3f over %zu steps",
                worst_ratio, run.reports.size());
  return {worst_ratio <= 1.0, buf};
}

// residual-driven slack for the growth bound (exact bookkeeping of the
// accepted per-step defects)
double g_accumulated_slack(const ScenarioRun& run, size_t upto) {
  const double grow = 1.0 / (1.0 - 1e-3);
  double slack = 0.0;
  for (size_t k = 1; k <= upto && k < run.ledger.rows().size(); ++k)
    slack = grow * (slack + run.ledger.rows()[k].residual);
  return slack;
}

Outcome criterion_mass(const ScenarioRun& reacting, const ScenarioRun& frozen,
                       double tau) {
  const auto& rows = reacting.ledger.rows();
  const double grow = 1.0 / (1.0 - 1.0 * tau);  // rho_bar = 1
  int violations = 0;
  double factor = 1.0;
  for (size_t k = 1; k < rows.size(); ++k) {
    factor *= grow;
    for (int i = 0; i < 2; ++i)
      if (rows[k].mass[i] > factor * rows[0].mass[i] * (1.0 + 1e-12) +
                                g_accumulated_slack(reacting, k))
        ++violations;
  }
  double worst_rel = 0.0;
  const auto& rows0 = frozen.ledger.rows();
  for (size_t k = 1; k < rows0.size(); ++k)
    for (int i = 0; i < 2; ++i)
      worst_rel = std::max(worst_rel, std::abs(rows0[k].mass[i] / rows0[0].mass[i] - 1.0));
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d growth-bound violations; max conservation drift %.3e "
                "(limit 1e-8)",
                violations, worst_rel);
  return {violations == 0 && worst_rel <= 1e-8, buf};
}

Outcome criterion_duality(const ScenarioRun& reacting, double tau) {
  Grid g = Grid::line(64, 1.0);
  CrossDiffusionSystem sys = testutil::theorem_system();
  DualityAudit main = audit_duality(reacting.ledger, sys, g, tau);

  // degenerate equality case: constant data, reactions off
  CrossDiffusionSystem frozen = testutil::theorem_system(false);
  SchemeConfig cfg = scenario_config();
  EstimateLedger ledger(frozen, g, cfg.tau);
  run(frozen, g, SpeciesState::constant(g, Eigen::Vector2d(0.6, 0.9)), cfg,
      [&](int k, double t, const SpeciesState& st, const StepReport& rep) {
        ledger.record(k, t, st, rep);
      });
  DualityAudit eq = audit_duality(ledger, frozen, g, cfg.tau);
  const double eq_rel =
      std::abs(eq.lhs - eq.rhs_core) / std::max(eq.rhs_core, 1e-300);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "margin %.4f; equality-case relative gap %.3e (limit 1e-8)",
                main.margin, eq_rel);
  return {main.pass && main.margin > 0.0 && eq_rel <= 1e-8, buf};
}

Outcome criterion_entropy(double tau) {
  // reactions off, admissible exponents
  Grid g = Grid::line(64, 1.0);
  CrossDiffusionSystem sys = testutil::theorem_system(false);
  SchemeConfig cfg = scenario_config();
  ScenarioRun data = run_scenario(false, cfg);
  AdmissibilityReport adm = entropy_admissible(sys, 10000, 1);
  const auto& rows = data.ledger.rows();

  bool conv_ok = true, mono_ok = true, gamma_ok = true;
  double worst_defect = 0.0;
  const double h2 = g.spacing(0) * g.spacing(0);
  for (size_t k = 1; k < rows.size(); ++k) {
    const double delta = rows[k].entropy - rows[k - 1].entropy;
    const double scale =
        g.volume() * (1.0 + rows[k].grad_phi_sup) * (1.0 + rows[k - 1].sup_u);
    const double defect = rows[k].convexity_rhs - delta;
    if (defect < -1e-9 * scale) conv_ok = false;
    worst_defect = std::min(worst_defect, defect);
    const double gamma_k = rows[k].diss_g1 + rows[k].diss_g2 + rows[k].diss_cross;
    if (delta > 10.0 * h2 * gamma_k) mono_ok = false;
    if (rows[k].diss_g1 < 0.0 || rows[k].diss_g2 < 0.0 || rows[k].diss_cross < 0.0)
      gamma_ok = false;
  }

  // negative control is flagged before any run
  PowerLawParams bad = sys.params;
  bad.gamma << 2.0, 2.0;
  AdmissibilityReport flagged =
      entropy_admissible(CrossDiffusionSystem(bad, true), 10000, 1);
  const bool control_ok = !flagged.admissible && flagged.det_L < 0.0;

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "min convexity defect %.2e; monotone %s; Gamma>=0 %s; "
                "negative control det L = %.0f",
                worst_defect, mono_ok ? "yes" : "no", gamma_ok ? "yes" : "no",
                flagged.det_L);
  (void)tau;
  return {conv_ok && mono_ok && gamma_ok && adm.admissible && control_ok, buf};
}

Outcome criterion_oracle() {
  Grid g = Grid::line(32, 1.0);
  CrossDiffusionSystem sys = testutil::theorem_system();
  SpeciesState U0 = testutil::bump_state(g);
  const double T = 0.04;
  const double tau_ref =
      std::min(suggest_stable_tau(sys, g, 1.5) / 5.0, 5e-4 / 20.0);
  SpeciesState ref = explicit_reference(sys, g, U0, T, tau_ref);

  std::vector<double> taus{4e-3, 2e-3, 1e-3, 5e-4}, errs;
  for (double tau : taus) {
    SchemeConfig cfg;
    cfg.tau = tau;
    cfg.n_steps = static_cast<int>(std::lround(T / tau));
    errs.push_back(run(sys, g, U0, cfg).inf_distance(ref));
  }
  // least-squares slope of log err vs log tau
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(taus.size());
  for (int i = 0; i < n; ++i) {
    const double x = std::log(taus[i]), y = std::log(errs[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  // frozen linear-envelope constant for this scenario (measured e/tau ~ 3.1)
  const double C = 10.0;
  bool envelope = true;
  for (int i = 0; i < n; ++i)
    if (errs[i] > C * taus[i]) envelope = false;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "empirical order %.3f (window [0.8, 1.3]); errors %.2e..%.2e",
                slope, errs.front(), errs.back());
  return {slope >= 0.8 && slope <= 1.3 && envelope, buf};
}

Outcome criterion_weak() {
  CrossDiffusionSystem sys = testutil::theorem_system();
  const double T = 0.1;
  struct Level { int n; double tau; };
  std::vector<Level> levels{{32, 2e-3}, {45, 1e-3}, {64, 5e-4}};
  std::vector<double> defects;
  for (const Level& lv : levels) {
    Grid g = Grid::line(lv.n, 1.0);
    SpeciesState U0 = testutil::bump_state(g);
    SchemeConfig cfg;
    cfg.tau = lv.tau;
    cfg.n_steps = static_cast<int>(std::lround(T / lv.tau));
    std::vector<SpeciesState> traj;
    run(sys, g, U0, cfg,
        [&](int, double, const SpeciesState& st, const StepReport&) {
          traj.push_back(st);
        });
    const double L = g.length(0);
    SpaceTimeTestFunction psi{
        [L](double t, double x, double) {
          return std::exp(-t) * std::cos(M_PI * x / L);
        },
        [L](double t, double x, double) {
          return -std::exp(-t) * std::cos(M_PI * x / L);
        },
        [L](double t, double x, double) {
          const double k = M_PI / L;
          return -k * k * std::exp(-t) * std::cos(k * x);
        }};
    Eigen::VectorXd d = weak_residual(traj, cfg.tau, g, sys, {psi, psi});
    defects.push_back(d.cwiseAbs().maxCoeff());
  }
  const bool monotone = defects[0] > defects[1] && defects[1] > defects[2];
  char buf[160];
  std::snprintf(buf, sizeof(buf), "defects %.3e -> %.3e -> %.3e", defects[0],
                defects[1], defects[2]);
  return {monotone, buf};
}

Outcome criterion_positivity(const ScenarioRun& reacting) {
  double min_all = std::numeric_limits<double>::infinity();
  for (const LedgerRow& r : reacting.ledger.rows())
    min_all = std::min(min_all, r.min_value);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "min over cells/species/steps %.6e", min_all);
  return {min_all > 0.0, buf};
}

Outcome criterion_grid() {
  std::mt19937_64 rng(99);
  Grid g1 = Grid::line(48, 1.3);
  Grid g2 = Grid::rectangle(9, 7, 1.0, 0.8);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Grid& g = rep % 2 == 0 ? g1 : g2;
    Field f = testutil::random_field(g, rng, -1.0, 1.0);
    Field h = testutil::random_field(g, rng, -1.0, 1.0);
    const double lhs = edge_sum(g, f, h);
    const double rhs = -integrate(g, f * neumann_laplacian(g, h));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  bool poincare_ok = true;
  double worst_pc = 0.0;
  for (int n : {16, 64}) {
    Grid g = Grid::line(n, 1.0);
    const double h = g.spacing(0);
    const double lambda1 = 2.0 / (h * h) * (1.0 - std::cos(M_PI * h / g.length(0)));
    const double rel =
        std::abs(poincare_constant(g) - 1.0 / std::sqrt(lambda1)) *
        std::sqrt(lambda1);
    worst_pc = std::max(worst_pc, rel);
    if (rel > 1e-10) poincare_ok = false;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "SBP worst relative defect %.2e (limit 1e-12); Poincare "
                "defect %.2e (limit 1e-10)",
                worst, worst_pc);
  return {worst <= 1e-12 && poincare_ok, buf};
}

}  // namespace

int main() {
  int failures = 0;
  int index = 0;
  auto report = [&](const std::string& name, const Outcome& o, double seconds,
                    double limit_seconds) {
    ++index;
    const bool timed_out = limit_seconds > 0.0 && seconds > limit_seconds;
    const bool pass = o.pass && !timed_out;
    if (!pass) ++failures;
    std::printf("[%s] criterion %d: %s  (%s%s, %.2f s)\n",
                pass ? "PASS" : "FAIL", index, name.c_str(), o.detail.c_str(),
                timed_out ? ", TIME LIMIT EXCEEDED" : "", seconds);
  };
  auto timed = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::pair<Outcome, double>(
        o, std::chrono::duration<double>(t1 - t0).count());
  };

  {
    auto [o, s] = timed(criterion_inversion);
    report("inversion round trip", o, s, 1.0);
  }

  SchemeConfig cfg = scenario_config();
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioRun reacting = run_scenario(true, cfg);
  const double scenario_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    Outcome o = criterion_residual(reacting, cfg);
    report("scheme residual certificate", o, scenario_seconds, 30.0);
  }
  {
    SchemeConfig tight = scenario_config();
    tight.fp_tol = 1e-12;
    tight.linear_tol = 1e-13;
    auto [o, s] = timed([&] {
      ScenarioRun frozen = run_scenario(false, tight);
      return criterion_mass(reacting, frozen, cfg.tau);
    });
    report("mass bounds and conservation", o, s, 0.0);
  }
  {
    auto [o, s] = timed([&] { return criterion_duality(reacting, cfg.tau); });
    report("discrete duality inequality", o, s, 0.0);
  }
  {
    auto [o, s] = timed([&] { return criterion_entropy(cfg.tau); });
    report("entropy behavior", o, s, 0.0);
  }
  {
    auto [o, s] = timed(criterion_oracle);
    report("oracle equivalence order", o, s, 60.0);
  }
  {
    auto [o, s] = timed(criterion_weak);
    report("weak formulation refinement", o, s, 0.0);
  }
  {
    Outcome o = criterion_positivity(reacting);
    report("strict positivity", o, 0.0, 0.0);
  }
  {
    auto [o, s] = timed(criterion_grid);
    report("grid contracts", o, s, 0.0);
  }

  std::printf("ACCEPTANCE: %d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
