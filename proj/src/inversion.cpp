#include "crossdiff/inversion.hpp"

#include <cmath>
#include <stdexcept>

namespace crossdiff {

namespace {

struct OuterMap {
  double f, g, d1, d2, g1, g2;

  double inner(double v) const { return f / (d1 + std::pow(v, g2)); }

  double residual(double v) const {
    return v * (d2 + std::pow(inner(v), g1)) - g;
  }

  double derivative(double v) const {
    const double den = d1 + std::pow(v, g2);
    const double u = f / den;
    const double du = -f * g2 * std::pow(v, g2 - 1.0) / (den * den);
    return d2 + std::pow(u, g1) + v * g1 * std::pow(u, g1 - 1.0) * du;
  }
};

}  // namespace

Eigen::Vector2d invert_two_species(const CrossDiffusionSystem& sys,
                                   const Eigen::Vector2d& target,
                                   const InversionConfig& cfg,
                                   const Eigen::Vector2d* guess) {
  if (sys.species() != 2)
    throw std::invalid_argument("invert_two_species: system is not two-species");
  const double f = target[0], g = target[1];
  if (!(f >= 0.0) || !(g >= 0.0))
    throw std::invalid_argument("invert_two_species: negative target");
  const double d1 = sys.params.d[0], d2 = sys.params.d[1];
  const double g1 = sys.params.gamma[0], g2 = sys.params.gamma[1];

  if (g == 0.0) return {f / d1, 0.0};
  if (f == 0.0) return {0.0, g / d2};  // boundary face: a_2(0, v) = d_2

  OuterMap m{f, g, d1, d2, g1, g2};
  double lo = 0.0, hi = g / d2;
  double rlo = -g;
  double rhi = m.residual(hi);
  if (rhi < 0.0) {
    if (rhi < -cfg.abs_tol)
      throw std::logic_error("invert_two_species: bracket bound violated");
    return {m.inner(hi), hi};
  }

  double v = hi;
  if (guess) {
    const double w = (*guess)[1];
    if (w > lo && w < hi) v = w;
  }
  double r = m.residual(v);
  int newton_used = 0, bisect_used = 0;
  while (std::abs(r) > cfg.abs_tol) {
    // keep a valid sign-changing bracket at all times
    if (r > 0.0) { hi = v; rhi = r; } else { lo = v; rlo = r; }
    if (!(rlo <= 0.0 && rhi >= 0.0))
      throw std::logic_error("invert_two_species: outer map lost monotone bracket");

    double next = std::numeric_limits<double>::quiet_NaN();
    if (newton_used < cfg.max_newton) {
      const double dr = m.derivative(v);
      if (std::isfinite(dr) && dr > 0.0) next = v - r / dr;
      ++newton_used;
    }
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);
      ++bisect_used;
      if (bisect_used > cfg.max_bisect)
        throw std::runtime_error("invert_two_species: iteration caps exhausted");
    }
    if (next == v) {
      // bracket collapsed to machine precision without meeting abs_tol
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
        throw std::runtime_error("invert_two_species: tolerance unreachable");
      next = 0.5 * (lo + hi);
    }
    v = next;
    r = m.residual(v);
  }
  return {m.inner(v), v};
}

static double scalar_rate_solve(const CrossDiffusionSystem& sys,
                                Eigen::VectorXd U, int i, double target,
                                const InversionConfig& cfg) {
  // solve a_i(U with u_i = t) * t = target for t on [0, target/alpha]
  double lo = 0.0, hi = target / sys.alpha();
  auto eval = [&](double t) {
    U[i] = t;
    return sys.rates_a(U)[i] * t - target;
  };
  if (eval(hi) < 0.0) throw std::logic_error("scalar_rate_solve: bad bracket");
  for (int it = 0; it < cfg.max_bisect + 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = eval(mid);
    if (std::abs(r) <= 0.1 * cfg.abs_tol || hi - lo <= std::numeric_limits<double>::epsilon() * hi)
      return mid;
    (r < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd invert_general(const CrossDiffusionSystem& sys,
                               const Eigen::VectorXd& target,
                               const InversionConfig& cfg) {
  const int n = sys.species();
  if (target.size() != n)
    throw std::invalid_argument("invert_general: target size mismatch");
  for (int i = 0; i < n; ++i)
    if (!(target[i] >= 0.0))
      throw std::invalid_argument("invert_general: negative target");

  std::vector<int> active;
  for (int i = 0; i < n; ++i)
    if (target[i] > 0.0) active.push_back(i);

  Eigen::VectorXd U = Eigen::VectorXd::Zero(n);
  for (int i : active) U[i] = target[i] / sys.alpha();
  if (active.empty()) return U;

  constexpr double floor = 1e-30;
  auto residual = [&](const Eigen::VectorXd& W) {
    return (sys.eval_A(W) - target).cwiseAbs().maxCoeff();
  };

  double res = residual(U);
  bool stalled = false;
  for (int it = 0; it < cfg.max_newton && res > cfg.abs_tol; ++it) {
    Eigen::VectorXd Ujac = U.cwiseMax(floor);
    const Eigen::MatrixXd J = sys.jacobian_A(Ujac);
    const int m = static_cast<int>(active.size());
    Eigen::MatrixXd Ja(m, m);
    Eigen::VectorXd ra(m);
    const Eigen::VectorXd full_res = sys.eval_A(U) - target;
    for (int a = 0; a < m; ++a) {
      ra[a] = full_res[active[a]];
      for (int b = 0; b < m; ++b) Ja(a, b) = J(active[a], active[b]);
    }
    const Eigen::VectorXd delta = Ja.fullPivLu().solve(-ra);
    double s = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h, s *= 0.5) {
      Eigen::VectorXd Unew = U;
      bool positive = true;
      for (int a = 0; a < m; ++a) {
        Unew[active[a]] = U[active[a]] + s * delta[a];
        if (!(Unew[active[a]] > 0.0)) { positive = false; break; }
      }
      if (!positive) continue;
      const double rnew = residual(Unew);
      if (rnew < res) {
        U = Unew;
        res = rnew;
        accepted = true;
        break;
      }
    }
    if (!accepted) { stalled = true; break; }
  }

  if (res > cfg.abs_tol) {
    // Gauss-Seidel sweeps over the scalar monotone equations
    for (int sweep = 0; sweep < cfg.max_bisect && res > cfg.abs_tol; ++sweep) {
      for (int i : active) U[i] = scalar_rate_solve(sys, U, i, target[i], cfg);
      res = residual(U);
    }
    if (res > cfg.abs_tol) {
      (void)stalled;
      throw std::runtime_error("invert_general: did not converge within caps");
    }
  }
  return U;
}

SpeciesState invert_fields(const CrossDiffusionSystem& sys,
                           const std::vector<Field>& target,
                           const InversionConfig& cfg,
                           const SpeciesState* warm) {
  const int n = sys.species();
  if (static_cast<int>(target.size()) != n)
    throw std::invalid_argument("invert_fields: species count mismatch");
  const Eigen::Index cells = target[0].size();
  SpeciesState out;
  for (int i = 0; i < n; ++i) out.u.push_back(Field::Zero(cells));

  if (n == 1) {
    out.u[0] = target[0] / sys.params.d[0];
    return out;
  }
  for (Eigen::Index c = 0; c < cells; ++c) {
    Eigen::Vector2d t(target[0][c], target[1][c]);
    Eigen::Vector2d g;
    const Eigen::Vector2d* gp = nullptr;
    if (warm) {
      g = Eigen::Vector2d(warm->u[0][c], warm->u[1][c]);
      gp = &g;
    }
    const Eigen::Vector2d u = invert_two_species(sys, t, cfg, gp);
    out.u[0][c] = u[0];
    out.u[1][c] = u[1];
  }
  return out;
}

}  // namespace crossdiff
