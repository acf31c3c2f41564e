#include "crossdiff/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "crossdiff/config.hpp"
#include "crossdiff/estimates.hpp"
#include "crossdiff/stepper.hpp"

namespace crossdiff {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_estimates_csv(const fs::path& path, const EstimateLedger& ledger) {
  std::ofstream out(path);
  out << "k,t,mass_1,mass_2,entropy,diss_g1,diss_g2,diss_cross,"
         "dual_mu_u2,dual_mu,entropy_reaction,fp_iters,residual,min_value\n";
  for (const LedgerRow& r : ledger.rows()) {
    out << r.k << ',' << fmt(r.t) << ',' << fmt(r.mass[0]) << ','
        << fmt(r.mass.size() > 1 ? r.mass[1] : 0.0) << ',' << fmt(r.entropy)
        << ',' << fmt(r.diss_g1) << ',' << fmt(r.diss_g2) << ','
        << fmt(r.diss_cross) << ',' << fmt(r.dual_mu_u2) << ','
        << fmt(r.dual_mu) << ',' << fmt(r.entropy_reaction) << ','
        << r.fp_iters << ',' << fmt(r.residual) << ',' << fmt(r.min_value)
        << '\n';
  }
}

std::string fields_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fields_%06d.csv", k);
  return buf;
}

void write_fields_csv(const fs::path& path, const Grid& g,
                      const SpeciesState& state, const RunConfig& cfg, int k,
                      double t) {
  std::ofstream out(path);
  out << "# dim=" << cfg.dim << " extents=";
  for (size_t i = 0; i < cfg.extents.size(); ++i)
    out << (i ? "x" : "") << cfg.extents[i];
  out << " lengths=";
  for (size_t i = 0; i < cfg.lengths.size(); ++i)
    out << (i ? "x" : "") << fmt(cfg.lengths[i]);
  out << " step=" << k << " time=" << fmt(t) << "\n";
  for (int i = 0; i < state.species(); ++i) out << (i ? "," : "") << "u_" << (i + 1);
  out << "\n";
  for (int c = 0; c < g.cells(); ++c) {
    for (int i = 0; i < state.species(); ++i)
      out << (i ? "," : "") << fmt(state.u[i][c]);
    out << "\n";
  }
}

ordered_json audit_json(const AuditResult& a) {
  ordered_json j;
  j["pass"] = a.pass;
  j["applicable"] = a.applicable;
  j["margin"] = a.margin;
  j["worst_step"] = a.worst_step;
  j["detail"] = a.detail;
  return j;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"structure-preserving cross-diffusion solver with estimate audits"};
  std::string config_path, out_override;
  int steps_override = -1;
  double tau_override = -1.0;
  bool no_audits = false;
  int stride_override = -1;
  long long seed_override = -1;
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--steps", steps_override, "override scheme n_steps");
  app.add_option("--tau", tau_override, "override scheme tau");
  app.add_flag("--no-audits", no_audits, "disable the estimate audits");
  app.add_option("--snapshot-stride", stride_override, "override snapshot stride");
  app.add_option("--seed", seed_override, "override sampling seed");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  std::string text;
  {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config file: " << config_path << "\n";
      return 1;
    }
    std::ostringstream os;
    os << in.rdbuf();
    text = os.str();
  }

  RunConfig cfg;
  try {
    cfg = parse_config(text);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (steps_override >= 0) cfg.scheme.n_steps = steps_override;
  if (tau_override > 0.0) cfg.scheme.tau = tau_override;
  if (no_audits) cfg.audits = false;
  if (stride_override >= 0) cfg.snapshot_stride = stride_override;
  if (seed_override >= 0) cfg.seed = static_cast<unsigned long long>(seed_override);
  // overrides can break the load-time rules; re-validate
  try {
    (void)parse_config(render_config(cfg));
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  fs::create_directories(cfg.out_dir);
  const fs::path out_dir(cfg.out_dir);

  ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["tool"] = "crossdiff";
  manifest["resolved_config"] = render_config(cfg);

  const auto t_start = std::chrono::steady_clock::now();
  int exit_code = 0;
  std::string error;

  Grid grid = make_grid(cfg);
  CrossDiffusionSystem sys = make_system(cfg);
  EstimateLedger ledger(sys, grid, cfg.scheme.tau);
  AdmissibilityReport adm;
  HypothesesReport hyp;
  std::vector<std::string> field_files;
  int completed = 0;
  long long total_iters = 0;
  int newton_steps = 0;
  double max_residual = 0.0;
  double min_value = std::numeric_limits<double>::infinity();

  try {
    SpeciesState U0 = make_initial_state(cfg, grid);
    if (cfg.audits) {
      adm = entropy_admissible(sys, 10000, cfg.seed);
      hyp = check_hypotheses(sys, 10000, cfg.seed);
    }
    const int stride = cfg.resolved_snapshot_stride();
    run(sys, grid, U0, cfg.scheme,
        [&](int k, double t, const SpeciesState& state, const StepReport& rep) {
          ledger.record(k, t, state, rep);
          completed = k;
          total_iters += rep.iterations;
          max_residual = std::max(max_residual, rep.final_residual);
          min_value = std::min(min_value, rep.min_value);
          if (rep.solver_path == SolverPath::Newton) ++newton_steps;
          if (k % stride == 0 || k == cfg.scheme.n_steps) {
            const std::string name = fields_name(k);
            write_fields_csv(out_dir / name, grid, state, cfg, k, t);
            field_files.push_back(name);
          }
        });
  } catch (const std::exception& e) {
    error = e.what();
    exit_code = 2;
  }

  write_estimates_csv(out_dir / "estimates.csv", ledger);

  ordered_json audits = ordered_json::object();
  if (cfg.audits && exit_code == 0 && !ledger.rows().empty()) {
    AuditOptions opts;
    opts.epsilon_factor = cfg.entropy_slack_c;
    opts.entropy_K = cfg.entropy_K;
    const AuditResult mass = audit_mass(ledger, sys, grid, cfg.scheme.tau, opts);
    const DualityAudit dual = audit_duality(ledger, sys, grid, cfg.scheme.tau, opts);
    const AuditResult ent = audit_entropy(ledger, sys, grid, cfg.scheme.tau,
                                          cfg.reactions, adm, opts);
    audits["admissibility"] = {{"admissible", adm.admissible},
                               {"boundary", adm.boundary},
                               {"det_L", adm.det_L},
                               {"samples", adm.samples}};
    audits["hypotheses"] = {{"h1", hyp.h1}, {"h2", hyp.h2}, {"h3", hyp.h3},
                            {"detail", hyp.detail}};
    audits["mass"] = audit_json(mass);
    ordered_json dj = audit_json(dual);
    dj["lhs"] = dual.lhs;
    dj["rhs"] = dual.rhs;
    dj["rhs_core"] = dual.rhs_core;
    dj["duality_functional"] = dual.duality_functional;
    audits["duality"] = dj;
    ordered_json ej = audit_json(ent);
    if (!ent.applicable) ej["detail"] = "inadmissible system";
    audits["entropy"] = ej;
    const bool entropy_ok = ent.applicable ? ent.pass : false;
    if (!mass.pass || !dual.pass || !entropy_ok) exit_code = 3;
  }
  manifest["audits"] = audits;

  const auto t_end = std::chrono::steady_clock::now();
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(t_end - t_start).count();
  manifest["steps"] = {{"requested", cfg.scheme.n_steps},
                       {"completed", completed},
                       {"total_fp_iterations", total_iters},
                       {"newton_steps", newton_steps},
                       {"max_residual", max_residual},
                       {"min_value", std::isfinite(min_value) ? min_value : 0.0}};
  manifest["outputs"] = {{"estimates", "estimates.csv"}, {"fields", field_files}};
  manifest["error"] = error.empty() ? ordered_json(nullptr) : ordered_json(error);
  manifest["exit_code"] = exit_code;

  {
    std::ofstream out(out_dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  if (!error.empty()) std::cerr << "error: " << error << "\n";
  return exit_code;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
  return run_cli(args);
}

}  // namespace crossdiff
