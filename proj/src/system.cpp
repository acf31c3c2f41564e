#include "crossdiff/system.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace crossdiff {

std::vector<std::string> PowerLawParams::violations() const {
  std::vector<std::string> v;
  if (species != 1 && species != 2) v.push_back("species must be 1 or 2");
  const int n = species == 1 ? 1 : 2;
  for (int i = 0; i < n; ++i) {
    if (!(d[i] > 0.0)) v.push_back("d must be > 0");
    if (!(rho[i] > 0.0)) v.push_back("rho must be > 0");
  }
  if (species == 2) {
    for (int i = 0; i < 2; ++i) {
      if (!(gamma[i] > 0.0)) v.push_back("gamma must be > 0");
      if (gamma[i] == 1.0) v.push_back("gamma = 1 is excluded (entropy degenerates)");
      for (int j = 0; j < 2; ++j)
        if (!(s(i, j) > 0.0)) v.push_back("s exponents must be > 0");
    }
  } else {
    if (!(s(0, 0) > 0.0)) v.push_back("s exponents must be > 0");
  }
  return v;
}

std::vector<std::string> PowerLawParams::evaluable_violations() const {
  std::vector<std::string> v;
  if (species != 1 && species != 2) v.push_back("species must be 1 or 2");
  const int n = species == 1 ? 1 : 2;
  for (int i = 0; i < n; ++i) {
    if (!(d[i] >= 0.0)) v.push_back("d must be >= 0");
    if (!(rho[i] >= 0.0)) v.push_back("rho must be >= 0");
  }
  if (species == 2) {
    for (int i = 0; i < 2; ++i) {
      if (!(gamma[i] > 0.0)) v.push_back("gamma must be > 0");
      if (gamma[i] == 1.0) v.push_back("gamma = 1 is excluded (entropy degenerates)");
      for (int j = 0; j < 2; ++j)
        if (!(s(i, j) > 0.0)) v.push_back("s exponents must be > 0");
    }
  } else {
    if (!(s(0, 0) > 0.0)) v.push_back("s exponents must be > 0");
  }
  return v;
}

bool PowerLawParams::theorem_regime() const {
  if (species != 2) return false;
  return gamma[1] > 1.0 && gamma[0] > 0.0 && gamma[0] < 1.0 / gamma[1] &&
         s(0, 0) < 1.0 && s(0, 1) < gamma[1] + s(1, 1) / 2.0 && s(1, 0) < 2.0;
}

CrossDiffusionSystem::CrossDiffusionSystem(PowerLawParams p, bool with_reactions)
    : params(p), reactions(with_reactions) {
  auto v = params.evaluable_violations();
  if (!v.empty()) {
    std::ostringstream os;
    os << "invalid system parameters:";
    for (const auto& m : v) os << " " << m << ";";
    throw std::invalid_argument(os.str());
  }
}

double CrossDiffusionSystem::alpha() const {
  return params.species == 1 ? params.d[0] : params.d.minCoeff();
}

double CrossDiffusionSystem::rho_bar() const {
  return params.species == 1 ? params.rho[0] : params.rho.maxCoeff();
}

static void check_nonneg(const Eigen::VectorXd& U, const char* what) {
  for (int i = 0; i < U.size(); ++i)
    if (!(U[i] >= 0.0))
      throw std::invalid_argument(std::string(what) + ": negative input component");
}

Eigen::VectorXd CrossDiffusionSystem::rates_a(const Eigen::VectorXd& U) const {
  check_nonneg(U, "rates_a");
  Eigen::VectorXd a(params.species);
  if (params.species == 1) {
    a[0] = params.d[0];
  } else {
    a[0] = params.d[0] + std::pow(U[1], params.gamma[1]);
    a[1] = params.d[1] + std::pow(U[0], params.gamma[0]);
  }
  return a;
}

Eigen::VectorXd CrossDiffusionSystem::rates_r(const Eigen::VectorXd& U) const {
  check_nonneg(U, "rates_r");
  Eigen::VectorXd r = Eigen::VectorXd::Zero(params.species);
  if (!reactions) return r;
  if (params.species == 1) {
    r[0] = params.rho[0] - std::pow(U[0], params.s(0, 0));
  } else {
    r[0] = params.rho[0] - std::pow(U[0], params.s(0, 0)) - std::pow(U[1], params.s(0, 1));
    r[1] = params.rho[1] - std::pow(U[1], params.s(1, 1)) - std::pow(U[0], params.s(1, 0));
  }
  return r;
}

Eigen::VectorXd CrossDiffusionSystem::eval_A(const Eigen::VectorXd& U) const {
  return rates_a(U).cwiseProduct(U);
}

Eigen::VectorXd CrossDiffusionSystem::eval_R(const Eigen::VectorXd& U) const {
  return rates_r(U).cwiseProduct(U);
}

Eigen::MatrixXd CrossDiffusionSystem::jacobian_A(const Eigen::VectorXd& U) const {
  for (int i = 0; i < U.size(); ++i)
    if (!(U[i] > 0.0))
      throw std::invalid_argument("jacobian_A: nonpositive component");
  Eigen::MatrixXd J(params.species, params.species);
  if (params.species == 1) {
    J(0, 0) = params.d[0];
    return J;
  }
  const double g1 = params.gamma[0], g2 = params.gamma[1];
  J(0, 0) = params.d[0] + std::pow(U[1], g2);
  J(0, 1) = g2 * U[0] * std::pow(U[1], g2 - 1.0);
  J(1, 0) = g1 * U[1] * std::pow(U[0], g1 - 1.0);
  J(1, 1) = params.d[1] + std::pow(U[0], g1);
  return J;
}

Eigen::MatrixXd CrossDiffusionSystem::jacobian_R(const Eigen::VectorXd& U) const {
  for (int i = 0; i < U.size(); ++i)
    if (!(U[i] > 0.0))
      throw std::invalid_argument("jacobian_R: nonpositive component");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(params.species, params.species);
  if (!reactions) return J;
  if (params.species == 1) {
    const double s11 = params.s(0, 0);
    J(0, 0) = params.rho[0] - (1.0 + s11) * std::pow(U[0], s11);
    return J;
  }
  const double s11 = params.s(0, 0), s12 = params.s(0, 1);
  const double s21 = params.s(1, 0), s22 = params.s(1, 1);
  J(0, 0) = params.rho[0] - (1.0 + s11) * std::pow(U[0], s11) - std::pow(U[1], s12);
  J(0, 1) = -s12 * U[0] * std::pow(U[1], s12 - 1.0);
  J(1, 0) = -s21 * U[1] * std::pow(U[0], s21 - 1.0);
  J(1, 1) = params.rho[1] - (1.0 + s22) * std::pow(U[1], s22) - std::pow(U[0], s21);
  return J;
}

static void check_state(const CrossDiffusionSystem& sys, const SpeciesState& st,
                        const char* what) {
  if (st.species() != sys.species())
    throw std::invalid_argument(std::string(what) + ": species count mismatch");
  if (!(st.min_value() >= 0.0))
    throw std::invalid_argument(std::string(what) + ": negative input component");
}

std::vector<Field> CrossDiffusionSystem::rates_a_fields(const SpeciesState& st) const {
  check_state(*this, st, "rates_a_fields");
  std::vector<Field> a;
  if (params.species == 1) {
    a.push_back(Field::Constant(st.u[0].size(), params.d[0]));
  } else {
    a.push_back(params.d[0] + st.u[1].pow(params.gamma[1]));
    a.push_back(params.d[1] + st.u[0].pow(params.gamma[0]));
  }
  return a;
}

std::vector<Field> CrossDiffusionSystem::rates_r_fields(const SpeciesState& st) const {
  check_state(*this, st, "rates_r_fields");
  std::vector<Field> r;
  if (!reactions) {
    for (int i = 0; i < params.species; ++i)
      r.push_back(Field::Zero(st.u[0].size()));
    return r;
  }
  if (params.species == 1) {
    r.push_back(params.rho[0] - st.u[0].pow(params.s(0, 0)));
  } else {
    r.push_back(params.rho[0] - st.u[0].pow(params.s(0, 0)) - st.u[1].pow(params.s(0, 1)));
    r.push_back(params.rho[1] - st.u[1].pow(params.s(1, 1)) - st.u[0].pow(params.s(1, 0)));
  }
  return r;
}

std::vector<Field> CrossDiffusionSystem::eval_A_fields(const SpeciesState& st) const {
  std::vector<Field> a = rates_a_fields(st);
  for (int i = 0; i < params.species; ++i) a[i] *= st.u[i];
  return a;
}

std::vector<Field> CrossDiffusionSystem::eval_R_fields(const SpeciesState& st) const {
  std::vector<Field> r = rates_r_fields(st);
  for (int i = 0; i < params.species; ++i) r[i] *= st.u[i];
  return r;
}

double entropy_phi(double gamma, double z) {
  if (!(z >= 0.0)) throw std::invalid_argument("entropy_phi: z must be >= 0");
  const double c = gamma / (gamma - 1.0);
  return c * (std::pow(z, gamma) / gamma - z + 1.0 - 1.0 / gamma);
}

double entropy_phi_prime(double gamma, double z) {
  const double c = gamma / (gamma - 1.0);
  return c * (std::pow(z, gamma - 1.0) - 1.0);
}

double entropy_phi_second(double gamma, double z) {
  return gamma * std::pow(z, gamma - 2.0);
}

double entropy_value(const CrossDiffusionSystem& sys, const Grid& g,
                     const SpeciesState& state) {
  if (sys.species() != 2)
    throw std::invalid_argument("entropy_value: defined for two species");
  check_state(sys, state, "entropy_value");
  const double g1 = sys.params.gamma[0], g2 = sys.params.gamma[1];
  Field phi(state.u[0].size());
  for (int c = 0; c < phi.size(); ++c)
    phi[c] = entropy_phi(g1, state.u[0][c]) + entropy_phi(g2, state.u[1][c]);
  return integrate(g, phi);
}

Eigen::Matrix2d entropy_hessian(const CrossDiffusionSystem& sys,
                                const Eigen::Vector2d& X) {
  Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
  H(0, 0) = entropy_phi_second(sys.params.gamma[0], X[0]);
  H(1, 1) = entropy_phi_second(sys.params.gamma[1], X[1]);
  return H;
}

// smallest eigenvalue of the symmetric part of a 2x2 matrix
static double min_sym_eigenvalue(const Eigen::Matrix2d& M) {
  const Eigen::Matrix2d S = 0.5 * (M + M.transpose());
  const double tr = S.trace(), det = S.determinant();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return tr / 2.0 - disc;
}

AdmissibilityReport entropy_admissible(const CrossDiffusionSystem& sys,
                                       int sample_count,
                                       unsigned long long seed) {
  if (sys.species() != 2)
    throw std::invalid_argument("entropy_admissible: defined for two species");
  if (sample_count < 1)
    throw std::invalid_argument("entropy_admissible: sample_count must be >= 1");
  AdmissibilityReport rep;
  const double g1 = sys.params.gamma[0], g2 = sys.params.gamma[1];
  Eigen::Matrix2d L;
  L << g1, g1 * g2, g1 * g2, g2;
  rep.det_L = g1 * g2 * (1.0 - g1 * g2);
  {
    const double tr = L.trace();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - L.determinant()));
    rep.L_eigenvalues << tr / 2.0 - disc, tr / 2.0 + disc;
  }
  const double det_tol = 1e-12 * std::max(1.0, g1 * g2);
  rep.boundary = std::abs(rep.det_L) <= det_tol;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log10u(-3.0, 3.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < sample_count; ++k) {
    Eigen::Vector2d X(std::pow(10.0, log10u(rng)), std::pow(10.0, log10u(rng)));
    const Eigen::Matrix2d K = entropy_hessian(sys, X) * sys.jacobian_A(X);
    const double lam = min_sym_eigenvalue(K);
    // scale-free tolerance: compare against the matrix magnitude
    const double scale = K.cwiseAbs().maxCoeff();
    if (lam < -1e-10 * std::max(1.0, scale) && lam < worst) {
      worst = lam;
      rep.has_witness = true;
      rep.witness = X;
      rep.witness_eigenvalue = lam;
    }
  }
  rep.samples = sample_count;
  rep.admissible = !rep.has_witness && rep.det_L >= -det_tol;
  return rep;
}

HypothesesReport check_hypotheses(const CrossDiffusionSystem& sys,
                                  int sample_count,
                                  unsigned long long seed) {
  HypothesesReport rep;
  std::ostringstream detail;

  // H1: power laws with positive exponents are continuous on the closed cone.
  rep.h1 = sys.params.evaluable_violations().empty();
  detail << "H1 " << (rep.h1 ? "pass" : "fail (invalid exponents)") << "; ";

  rep.h2 = sys.alpha() > 0.0 && sys.rho_bar() > 0.0;
  detail << "H2 " << (rep.h2 ? "pass" : "fail") << " (alpha=" << sys.alpha()
         << ", rho_bar=" << sys.rho_bar() << "); ";

  // H3: strictly increasing components need d_i > 0; det DA > 0 sampled.
  bool monotone = sys.alpha() > 0.0;
  bool det_positive = true;
  if (sys.species() == 2) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log10u(-3.0, 3.0);
    for (int k = 0; k < sample_count; ++k) {
      Eigen::Vector2d X(std::pow(10.0, log10u(rng)), std::pow(10.0, log10u(rng)));
      const double det = sys.jacobian_A(X).determinant();
      if (!(det > 0.0)) {
        det_positive = false;
        if (!rep.has_h3_witness) {
          rep.has_h3_witness = true;
          rep.h3_witness = X;
          rep.h3_witness_det = det;
        }
      }
    }
  }
  rep.h3 = monotone && det_positive;
  detail << "H3 " << (rep.h3 ? "pass" : "fail");
  if (rep.has_h3_witness)
    detail << " (det DA = " << rep.h3_witness_det << " at sampled point)";
  rep.detail = detail.str();
  return rep;
}

}  // namespace crossdiff
