#include <doctest.h>

#include <random>

#include "crossdiff/reference.hpp"
#include "crossdiff/system.hpp"
#include "test_util.hpp"

using namespace crossdiff;
using testutil::theorem_system;

TEST_SUITE_BEGIN("system");

TEST_CASE("parameter validation") {
  PowerLawParams p;
  CHECK(p.violations().empty());
  p.gamma[0] = 1.0;
  CHECK(!p.violations().empty());
  p.gamma[0] = 0.5;
  p.d[0] = 0.0;
  CHECK(!p.violations().empty());           // full strictness: d > 0
  CHECK(p.evaluable_violations().empty());  // but the maps stay evaluable
}

TEST_CASE("theorem regime flag") {
  CHECK(theorem_system().params.theorem_regime());
  PowerLawParams p = theorem_system().params;
  p.gamma << 2.0, 2.0;
  CHECK(!p.theorem_regime());
  p = theorem_system().params;
  p.s(0, 0) = 1.5;  // s11 >= 1
  CHECK(!p.theorem_regime());
}

TEST_CASE("eval_A at reference points") {
  CrossDiffusionSystem sys = theorem_system();
  CHECK(sys.eval_A(Eigen::Vector2d(0, 0)).isZero());
  Eigen::Vector2d ones = sys.eval_A(Eigen::Vector2d(1, 1));
  CHECK(ones[0] == doctest::Approx(sys.params.d[0] + 1.0));
  CHECK(ones[1] == doctest::Approx(sys.params.d[1] + 1.0));

  PowerLawParams p;
  p.gamma << 0.5, 2.0;
  CrossDiffusionSystem halfsq(p);
  Eigen::Vector2d v = halfsq.eval_A(Eigen::Vector2d(2, 4));
  CHECK(v[0] == doctest::Approx(2.0 * (1.0 + 16.0)));  // 34
  CHECK(v[1] == doctest::Approx(4.0 * (1.0 + std::sqrt(2.0))));

  CHECK_THROWS_AS(sys.eval_A(Eigen::Vector2d(-1, 1)), std::invalid_argument);
}

TEST_CASE("eval_R at reference points") {
  PowerLawParams p;
  p.rho << 2.0, 1.0;
  p.s << 1.0, 1.0, 1.0, 1.0;
  CrossDiffusionSystem sys(p);
  CHECK(sys.eval_R(Eigen::Vector2d(0.0, 3.0))[0] == 0.0);
  CHECK(sys.eval_R(Eigen::Vector2d(2.0, 0.0))[0] ==
        doctest::Approx(0.0));  // logistic equilibrium

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  CrossDiffusionSystem th = theorem_system();
  for (int k = 0; k < 200; ++k) {
    Eigen::Vector2d U(u(rng), u(rng));
    Eigen::Vector2d R = th.eval_R(U);
    for (int i = 0; i < 2; ++i) CHECK(R[i] <= th.rho_bar() * U[i] + 1e-14);
  }
}

TEST_CASE("jacobian_A closed form and determinant sign") {
  PowerLawParams p = theorem_system().params;
  p.d << 0.0, 0.0;  // evaluable; H2 would fail and that is the point
  CrossDiffusionSystem sys(p);
  Eigen::Matrix2d J = sys.jacobian_A(Eigen::Vector2d(1, 1));
  CHECK(J(0, 0) == doctest::Approx(1.0));
  CHECK(J(0, 1) == doctest::Approx(p.gamma[1]));
  CHECK(J(1, 0) == doctest::Approx(p.gamma[0]));
  CHECK(J(1, 1) == doctest::Approx(1.0));
  CHECK(J.determinant() == doctest::Approx(1.0 - p.gamma[0] * p.gamma[1]));

  // det > 0 on sampled positive states when g1*g2 < 1
  CrossDiffusionSystem th = theorem_system();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> lg(-3.0, 3.0);
  for (int k = 0; k < 500; ++k) {
    Eigen::Vector2d U(std::pow(10.0, lg(rng)), std::pow(10.0, lg(rng)));
    CHECK(th.jacobian_A(U).determinant() > 0.0);
  }
  CHECK_THROWS_AS(th.jacobian_A(Eigen::Vector2d(0, 1)), std::invalid_argument);
}

TEST_CASE("jacobian_A matches central finite differences") {
  CrossDiffusionSystem sys = theorem_system();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int k = 0; k < 100; ++k) {
    Eigen::Vector2d U(u(rng), u(rng));
    Eigen::Matrix2d J = sys.jacobian_A(U);
    for (int j = 0; j < 2; ++j) {
      const double eps = 1e-6 * std::max(1.0, U[j]);
      Eigen::Vector2d Up = U, Um = U;
      Up[j] += eps;
      Um[j] -= eps;
      Eigen::Vector2d col = (sys.eval_A(Up) - sys.eval_A(Um)) / (2.0 * eps);
      for (int i = 0; i < 2; ++i)
        CHECK(std::abs(J(i, j) - col[i]) <=
              1e-6 * std::max(1.0, std::abs(J(i, j))));
    }
  }
}

TEST_CASE("entropy density values") {
  const double g1 = 0.5, g2 = 1.5;
  CHECK(entropy_phi(g1, 1.0) == doctest::Approx(0.0));
  CHECK(entropy_phi(g2, 1.0) == doctest::Approx(0.0));
  CHECK(entropy_phi(g1, 0.0) == doctest::Approx(1.0));
  CHECK(entropy_phi(g2, 0.0) == doctest::Approx(1.0));
  CHECK(entropy_phi_prime(g1, 1.0) == doctest::Approx(0.0));
  CHECK(entropy_phi_prime(g2, 1.0) == doctest::Approx(0.0));

  CrossDiffusionSystem sys = theorem_system();
  Grid grid = Grid::line(8, 2.0);
  CHECK(entropy_value(sys, grid,
                      SpeciesState::constant(grid, Eigen::Vector2d(1, 1))) ==
        doctest::Approx(0.0));
  CHECK(entropy_value(sys, grid,
                      SpeciesState::constant(grid, Eigen::Vector2d(0, 0))) ==
        doctest::Approx(2.0 * grid.volume()));
}

TEST_CASE("entropy convexity") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1e-3, 10.0);
  for (double gamma : {0.5, 1.5, 3.0}) {
    for (int k = 0; k < 300; ++k) {
      const double z = u(rng), y = u(rng);
      // the inequality the discrete entropy argument rests on
      CHECK(entropy_phi_prime(gamma, z) * (z - y) >=
            entropy_phi(gamma, z) - entropy_phi(gamma, y) - 1e-12);
      // midpoint convexity
      CHECK(entropy_phi(gamma, 0.5 * (z + y)) <=
            0.5 * (entropy_phi(gamma, z) + entropy_phi(gamma, y)) + 1e-12);
      CHECK(entropy_phi(gamma, z) >= -1e-15);
    }
  }
}

TEST_CASE("admissibility in and out of the regime") {
  AdmissibilityReport ok = entropy_admissible(theorem_system(), 2000, 7);
  CHECK(ok.admissible);
  CHECK(!ok.boundary);
  CHECK(ok.det_L == doctest::Approx(0.75 * (1.0 - 0.75)));

  PowerLawParams p = theorem_system().params;
  p.gamma << 2.0, 2.0;
  AdmissibilityReport bad = entropy_admissible(CrossDiffusionSystem(p), 2000, 7);
  CHECK(!bad.admissible);
  CHECK(bad.det_L == doctest::Approx(4.0 * (1.0 - 4.0)));
  CHECK(bad.has_witness);
  // the witness really is a refutation of positive semidefiniteness
  CrossDiffusionSystem sys(p);
  Eigen::Matrix2d K = entropy_hessian(sys, bad.witness) * sys.jacobian_A(bad.witness);
  CHECK(!psd_2x2(K).psd);

  p.gamma << 0.5, 2.0;  // product exactly 1
  AdmissibilityReport edge = entropy_admissible(CrossDiffusionSystem(p), 2000, 7);
  CHECK(edge.boundary);
  CHECK(edge.det_L == doctest::Approx(0.0));
}

TEST_CASE("admissibility agrees with the closed-form 2x2 oracle on samples") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lg(-3.0, 3.0);
  for (const double g2 : {1.5, 1.9}) {
    PowerLawParams p = theorem_system().params;
    p.gamma << 0.5, g2;
    CrossDiffusionSystem sys(p);
    for (int k = 0; k < 100; ++k) {
      Eigen::Vector2d X(std::pow(10.0, lg(rng)), std::pow(10.0, lg(rng)));
      Eigen::Matrix2d K = entropy_hessian(sys, X) * sys.jacobian_A(X);
      if (p.gamma[0] * p.gamma[1] < 1.0) CHECK(psd_2x2(K).psd);
    }
  }
}

TEST_CASE("hypothesis checks") {
  HypothesesReport ok = check_hypotheses(theorem_system(), 2000, 5);
  CHECK(ok.all());

  PowerLawParams p = theorem_system().params;
  p.d[0] = 0.0;
  HypothesesReport h2fail = check_hypotheses(CrossDiffusionSystem(p), 200, 5);
  CHECK(!h2fail.h2);

  p = theorem_system().params;
  p.gamma << 1.5, 1.5;  // product > 1: determinant goes negative at large states
  HypothesesReport h3fail = check_hypotheses(CrossDiffusionSystem(p), 2000, 5);
  CHECK(!h3fail.h3);
  CHECK(h3fail.has_h3_witness);
  CHECK(h3fail.h3_witness_det <= 0.0);
}

TEST_CASE("H2 bounds as implemented") {
  CrossDiffusionSystem sys = theorem_system();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (int k = 0; k < 200; ++k) {
    Eigen::Vector2d U(u(rng), u(rng));
    Eigen::Vector2d A = sys.eval_A(U);
    for (int i = 0; i < 2; ++i)
      CHECK(A[i] >= sys.params.d.minCoeff() * U[i] - 1e-14);
  }
}

TEST_SUITE_END();
