#include "crossdiff/stepper.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace crossdiff {

std::vector<std::string> SchemeConfig::violations(const CrossDiffusionSystem& sys) const {
  std::vector<std::string> v;
  if (!(tau > 0.0)) v.push_back("tau must be > 0");
  if (n_steps < 0) v.push_back("n_steps must be >= 0");
  if (!(sys.rho_bar() * tau < 0.5)) v.push_back("rho*tau < 1/2 is required");
  if (!(fp_tol > 0.0)) v.push_back("fp_tol must be > 0");
  if (fp_max < 1) v.push_back("fp_max must be >= 1");
  if (!(linear_tol > 0.0)) v.push_back("linear_tol must be > 0");
  if (!(mbar_floor >= 0.0)) v.push_back("mbar_floor must be >= 0");
  if (!(inversion.abs_tol > 0.0)) v.push_back("inversion abs_tol must be > 0");
  return v;
}

void SchemeConfig::validate(const CrossDiffusionSystem& sys) const {
  auto v = violations(sys);
  if (!v.empty()) {
    std::ostringstream os;
    os << "invalid scheme config:";
    for (const auto& m : v) os << " " << m << ";";
    throw std::invalid_argument(os.str());
  }
}

double mbar(const CrossDiffusionSystem& sys, const SpeciesState& U, double tau,
            double floor) {
  if (!(U.min_value() >= 0.0))
    throw std::invalid_argument("mbar: negative state");
  double rmax = 0.0;
  for (const Field& r : sys.rates_r_fields(U))
    rmax = std::max(rmax, r.abs().maxCoeff());
  return std::max(floor, (2.0 + tau * rmax) / sys.alpha());
}

Field theta_solve(const Grid& g, const Field& F, double M, double tau,
                  double linear_tol) {
  if (!(M > 0.0)) throw std::invalid_argument("theta_solve: M must be > 0");
  ShiftedHelmholtz helm(g, M, tau);
  Field W = helm.solve(F);
  const double scale = std::max(1e-300, F.abs().maxCoeff());
  if (helm.residual_inf(F, W) > linear_tol * scale)
    throw std::runtime_error("theta_solve: linear residual above tolerance");
  return W;
}

double scheme_residual(const CrossDiffusionSystem& sys, const Grid& g,
                       const SpeciesState& U, const SpeciesState& S, double tau) {
  const std::vector<Field> A = sys.eval_A_fields(U);
  const std::vector<Field> R = sys.eval_R_fields(U);
  double res = 0.0;
  for (int i = 0; i < sys.species(); ++i) {
    const Field defect =
        U.u[i] - tau * neumann_laplacian(g, A[i]) - S.u[i] - tau * R[i];
    res = std::max(res, defect.abs().maxCoeff());
  }
  return res;
}

namespace {

// Damped Newton on G(W) = A^{-1}(W) - tau*Lap(W) - S - tau*R(A^{-1}(W))
// in the transformed variable W = A(U); unknowns ordered cell-major.
struct NewtonResult {
  SpeciesState U;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

NewtonResult newton_fallback(const CrossDiffusionSystem& sys, const Grid& g,
                             const SpeciesState& S, const SchemeConfig& cfg,
                             const SpeciesState& start, double resid_bound) {
  const int ns = sys.species();
  const int cells = g.cells();
  const int dofs = ns * cells;
  const double tau = cfg.tau;
  const Eigen::SparseMatrix<double> lap = laplacian_matrix(g);
  constexpr double floor = 1e-30;

  std::vector<Field> W = sys.eval_A_fields(start);
  SpeciesState U = start;

  auto unpack = [&](const std::vector<Field>& Wf) {
    return invert_fields(sys, Wf, cfg.inversion, &U);
  };
  auto residual_fields = [&](const SpeciesState& Ucur,
                             const std::vector<Field>& Wf) {
    const std::vector<Field> R = sys.eval_R_fields(Ucur);
    std::vector<Field> G;
    for (int i = 0; i < ns; ++i)
      G.push_back(Ucur.u[i] - tau * neumann_laplacian(g, Wf[i]) - S.u[i] -
                  tau * R[i]);
    return G;
  };
  auto inf_norm = [](const std::vector<Field>& G) {
    double m = 0.0;
    for (const Field& f : G) m = std::max(m, f.abs().maxCoeff());
    return m;
  };

  std::vector<Field> G = residual_fields(U, W);
  double res = inf_norm(G);

  NewtonResult out;
  for (int it = 0; it < 50; ++it) {
    if (res <= resid_bound) {
      out.U = U;
      out.iterations = it;
      out.residual = res;
      out.converged = true;
      return out;
    }
    // Jacobian: blk[(I - tau*DR) * DA^{-1}] per cell minus tau*Lap per species
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(dofs) * (ns + 5));
    for (int c = 0; c < cells; ++c) {
      Eigen::VectorXd Uc = U.cell(c).cwiseMax(floor);
      const Eigen::MatrixXd P = sys.jacobian_A(Uc).inverse();
      const Eigen::MatrixXd B =
          (Eigen::MatrixXd::Identity(ns, ns) - tau * sys.jacobian_R(Uc)) * P;
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j)
          trip.emplace_back(c * ns + i, c * ns + j, B(i, j));
    }
    for (int k = 0; k < lap.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator itL(lap, k); itL; ++itL)
        for (int i = 0; i < ns; ++i)
          trip.emplace_back(itL.row() * ns + i, itL.col() * ns + i,
                            -tau * itL.value());
    Eigen::SparseMatrix<double> J(dofs, dofs);
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("newton fallback: Jacobian factorization failed");

    Eigen::VectorXd rhs(dofs);
    for (int c = 0; c < cells; ++c)
      for (int i = 0; i < ns; ++i) rhs[c * ns + i] = -G[i][c];
    const Eigen::VectorXd delta = lu.solve(rhs);

    bool accepted = false;
    double s = 1.0;
    for (int h = 0; h < 40; ++h, s *= 0.5) {
      std::vector<Field> Wtry = W;
      bool nonneg = true;
      for (int c = 0; c < cells && nonneg; ++c)
        for (int i = 0; i < ns; ++i) {
          const double w = W[i][c] + s * delta[c * ns + i];
          if (w < 0.0) { nonneg = false; break; }
          Wtry[i][c] = w;
        }
      if (!nonneg) continue;
      SpeciesState Utry = unpack(Wtry);
      std::vector<Field> Gtry = residual_fields(Utry, Wtry);
      const double rtry = inf_norm(Gtry);
      if (rtry < res) {
        W = std::move(Wtry);
        U = std::move(Utry);
        G = std::move(Gtry);
        res = rtry;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stagnated
  }
  out.U = U;
  out.iterations = 50;
  out.residual = res;
  out.converged = res <= resid_bound;
  return out;
}

}  // namespace

std::pair<SpeciesState, StepReport> step(const CrossDiffusionSystem& sys,
                                         const Grid& g, const SpeciesState& S,
                                         const SchemeConfig& cfg) {
  cfg.validate(sys);
  if (S.species() != sys.species())
    throw std::invalid_argument("step: species count mismatch");
  if (!S.all_finite() || !(S.min_value() >= 0.0))
    throw std::invalid_argument("step: source state must be finite and >= 0");

  const double tau = cfg.tau;
  const double M = mbar(sys, S, tau, cfg.mbar_floor);
  const ShiftedHelmholtz helm(g, M, tau);
  const double scale = 1.0 + S.max_abs();
  const double resid_bound = 10.0 * cfg.fp_tol * scale;

  SpeciesState U = S;
  SpeciesState best = S;
  double best_res = scheme_residual(sys, g, U, S, tau);
  std::deque<double> deltas;
  int sweeps = 0;
  bool stalled = false;

  for (; sweeps < cfg.fp_max; ++sweeps) {
    const std::vector<Field> A = sys.eval_A_fields(U);
    const std::vector<Field> R = sys.eval_R_fields(U);
    std::vector<Field> W(sys.species());
    for (int i = 0; i < sys.species(); ++i) {
      Field F = S.u[i] + M * A[i] - U.u[i] + tau * R[i];
      W[i] = helm.solve(F);
      const double fscale = std::max(1e-300, F.abs().maxCoeff());
      if (helm.residual_inf(F, W[i]) > cfg.linear_tol * fscale)
        throw std::runtime_error("step: linear residual above tolerance");
      // the exact solution is nonnegative; tolerate only roundoff-level dips
      const double wmin = W[i].minCoeff();
      if (wmin < -10.0 * cfg.linear_tol * fscale - 1e-14 * fscale)
        throw std::runtime_error("step: maximum principle violated in solve");
      if (wmin < 0.0) W[i] = W[i].max(0.0);
    }
    SpeciesState Unext = invert_fields(sys, W, cfg.inversion, &U);
    const double delta = Unext.inf_distance(U);
    U = std::move(Unext);

    const double res = scheme_residual(sys, g, U, S, tau);
    if (res < best_res) { best_res = res; best = U; }
    if (res <= resid_bound && delta <= cfg.fp_tol) {
      StepReport rep;
      rep.iterations = sweeps + 1;
      rep.final_residual = res;
      rep.mbar_used = M;
      rep.min_value = U.min_value();
      rep.solver_path = SolverPath::FixedPoint;
      return {U, rep};
    }
    deltas.push_back(delta);
    if (deltas.size() > 25) {
      const double old = deltas.front();
      deltas.pop_front();
      if (delta >= 0.999 * old) { stalled = true; ++sweeps; break; }
    }
  }

  if (cfg.newton_fallback) {
    NewtonResult nr = newton_fallback(sys, g, S, cfg, best, resid_bound);
    if (nr.converged) {
      StepReport rep;
      rep.iterations = sweeps + nr.iterations;
      rep.final_residual = nr.residual;
      rep.mbar_used = M;
      rep.min_value = nr.U.min_value();
      rep.solver_path = SolverPath::Newton;
      return {nr.U, rep};
    }
    if (nr.residual < best_res) { best_res = nr.residual; best = nr.U; }
  }

  std::ostringstream os;
  os << "step: no convergence within caps ("
     << (stalled ? "fixed point stalled" : "sweep cap reached")
     << ", best residual " << best_res << ", bound " << resid_bound << ")";
  throw std::runtime_error(os.str());
}

SpeciesState run(const CrossDiffusionSystem& sys, const Grid& g,
                 const SpeciesState& U0, const SchemeConfig& cfg,
                 const StepCallback& on_step) {
  cfg.validate(sys);
  if (U0.species() != sys.species())
    throw std::invalid_argument("run: species count mismatch");
  for (const Field& f : U0.u)
    if (f.size() != g.cells())
      throw std::invalid_argument("run: initial state does not match grid");
  if (!(U0.min_value() > 0.0))
    throw std::invalid_argument("run: initial state must be strictly positive");

  if (on_step) {
    StepReport rep;
    rep.min_value = U0.min_value();
    on_step(0, 0.0, U0, rep);
  }
  SpeciesState U = U0;
  for (int k = 1; k <= cfg.n_steps; ++k) {
    try {
      auto [next, rep] = step(sys, g, U, cfg);
      U = std::move(next);
      if (on_step) on_step(k, k * cfg.tau, U, rep);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "run: step " << k << " failed: " << e.what();
      throw std::runtime_error(os.str());
    }
  }
  return U;
}

}  // namespace crossdiff
