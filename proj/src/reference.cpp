#include "crossdiff/reference.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace crossdiff {

SpeciesState explicit_reference(const CrossDiffusionSystem& sys, const Grid& g,
                                const SpeciesState& U0, double T, double tau_ref) {
  if (!(tau_ref > 0.0))
    throw std::invalid_argument("explicit_reference: tau_ref must be > 0");
  if (!(U0.min_value() >= 0.0))
    throw std::invalid_argument("explicit_reference: negative initial data");
  const int n_steps = std::max(1, static_cast<int>(std::llround(T / tau_ref)));
  const double tau = T / n_steps;  // hit T exactly
  SpeciesState U = U0;
  for (int k = 0; k < n_steps; ++k) {
    const std::vector<Field> A = sys.eval_A_fields(U);
    const std::vector<Field> R = sys.eval_R_fields(U);
    for (int i = 0; i < sys.species(); ++i)
      U.u[i] += tau * (neumann_laplacian(g, A[i]) + R[i]);
    if (!U.all_finite() || U.min_value() < 0.0)
      throw std::runtime_error(
          "explicit_reference: stability violated (negative or non-finite value)");
  }
  return U;
}

SpeciesState explicit_reference(const CrossDiffusionSystem& sys, const Grid& g,
                                const SpeciesState& U0, double T,
                                const OracleConfig& cfg) {
  return explicit_reference(sys, g, U0, T, cfg.tau_ref);
}

double suggest_stable_tau(const CrossDiffusionSystem& sys, const Grid& g,
                          double umax, double safety) {
  const int probes = 50;
  double est = sys.alpha();
  if (sys.species() == 1) {
    est = sys.params.d[0];
  } else {
    for (int a = 0; a <= probes; ++a)
      for (int b = 0; b <= probes; ++b) {
        Eigen::Vector2d U(umax * (a + 0.5) / (probes + 0.5),
                          umax * (b + 0.5) / (probes + 0.5));
        const Eigen::MatrixXd J = sys.jacobian_A(U);
        est = std::max(est, J.cwiseAbs().rowwise().sum().maxCoeff());
      }
  }
  double h2 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a)
    h2 = std::min(h2, g.spacing(a) * g.spacing(a));
  return safety * h2 / (2.0 * g.dim() * est);
}

double logistic_implicit_root(double rho, double s, double tau) {
  if (tau == 0.0) return s;
  const double b = 1.0 - tau * rho;
  return (-b + std::sqrt(b * b + 4.0 * tau * s)) / (2.0 * tau);
}

static double scalar_implicit_solve(double rho, double sexp, double other,
                                    double s, double tau) {
  // root of F(u) = u (1 - tau (rho - u^sexp - other)) - s, strictly increasing
  auto F = [&](double u) {
    return u * (1.0 - tau * (rho - std::pow(u, sexp) - other)) - s;
  };
  double lo = 0.0;
  double hi = s / (1.0 - tau * rho) + 1e-30;
  while (F(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(F(mid)) <= 1e-14 * (1.0 + s) ||
        hi - lo <= std::numeric_limits<double>::epsilon() * hi)
      return mid;
    (F(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd homogeneous_step_oracle(const CrossDiffusionSystem& sys,
                                        const Eigen::VectorXd& s, double tau) {
  if (!(sys.rho_bar() * tau < 0.5))
    throw std::invalid_argument("homogeneous_step_oracle: rho*tau < 1/2 required");
  if (!sys.reactions) return s;
  if (sys.species() == 1) {
    if (sys.params.s(0, 0) == 1.0)
      return Eigen::VectorXd::Constant(1, logistic_implicit_root(sys.params.rho[0], s[0], tau));
    Eigen::VectorXd u(1);
    u[0] = scalar_implicit_solve(sys.params.rho[0], sys.params.s(0, 0), 0.0, s[0], tau);
    return u;
  }
  Eigen::VectorXd u = s;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd prev = u;
    u[0] = scalar_implicit_solve(sys.params.rho[0], sys.params.s(0, 0),
                                 std::pow(u[1], sys.params.s(0, 1)), s[0], tau);
    u[1] = scalar_implicit_solve(sys.params.rho[1], sys.params.s(1, 1),
                                 std::pow(u[0], sys.params.s(1, 0)), s[1], tau);
    if ((u - prev).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + u.cwiseAbs().maxCoeff()))
      return u;
  }
  throw std::runtime_error("homogeneous_step_oracle: no convergence");
}

Psd2x2 psd_2x2(const Eigen::Matrix2d& m) {
  const Eigen::Matrix2d s = 0.5 * (m + m.transpose());
  const double tr = s.trace(), det = s.determinant();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  Psd2x2 out;
  out.eigenvalues << tr / 2.0 - disc, tr / 2.0 + disc;
  out.psd = out.eigenvalues[0] >= -1e-12;
  return out;
}

static void require_1d(const Grid& g, const char* what) {
  if (g.dim() != 1)
    throw std::invalid_argument(std::string(what) + ": 1D grids only");
}

double neumann_eigenvalue_1d(const Grid& g, int m) {
  require_1d(g, "neumann_eigenvalue_1d");
  const double h = g.spacing(0);
  return 2.0 / (h * h) * (1.0 - std::cos(M_PI * m / g.extent(0)));
}

Field neumann_eigenvector_1d(const Grid& g, int m) {
  require_1d(g, "neumann_eigenvector_1d");
  const int n = g.extent(0);
  Field v(n);
  for (int i = 0; i < n; ++i) v[i] = std::cos(M_PI * m * (i + 0.5) / n);
  return v;
}

// expand u0 in the (orthogonal) cosine modes and damp each coefficient
static Field spectral_apply(const Grid& g, const Field& u0,
                            const std::function<double(double lambda)>& damp,
                            int modes) {
  require_1d(g, "spectral_apply");
  const int n = g.extent(0);
  const int count = modes > 0 ? std::min(modes, n) : n;
  Field out = Field::Zero(n);
  for (int m = 0; m < count; ++m) {
    const Field v = neumann_eigenvector_1d(g, m);
    const double norm2 = m == 0 ? n : n / 2.0;
    const double coeff = (u0 * v).sum() / norm2;
    out += coeff * damp(neumann_eigenvalue_1d(g, m)) * v;
  }
  return out;
}

Field heat_semidiscrete_exact(const Grid& g, double d, const Field& u0, double t,
                              int modes) {
  return spectral_apply(
      g, u0, [&](double lam) { return std::exp(-d * lam * t); }, modes);
}

Field heat_implicit_spectral(const Grid& g, double d, const Field& u0,
                             double tau, int k, int modes) {
  return spectral_apply(
      g, u0, [&](double lam) { return std::pow(1.0 + tau * d * lam, -k); },
      modes);
}

}  // namespace crossdiff
