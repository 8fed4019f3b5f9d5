#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "risuav/convex.hpp"
#include "risuav/rng.hpp"

using namespace risuav;
using namespace risuav::convex;

namespace {

constexpr double kLn2 = 0.6931471805599453;

ConvexProgram box_program(int n, double lo, double hi) {
  ConvexProgram p;
  p.resize(n);
  p.lower.setConstant(lo);
  p.upper.setConstant(hi);
  return p;
}

// Central finite differences of a ConvexExpr.
Eigen::VectorXd fd_gradient(const ConvexExpr& e, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (e.value(a) - e.value(b)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("minimize x^2 above a floor") {
  ConvexProgram p = box_program(1, 1.0, kInf);
  p.objective.atoms.emplace_back(1.0, make_power(LinExpr{}.add(0, 1.0), 2.0));
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("single-user rate vs power tradeoff has the closed-form optimum") {
  // minimize x - log2(1 + x): optimum at x = 1/ln2 - 1.
  ConvexProgram p = box_program(1, 0.0, kInf);
  p.objective.affine.add(0, 1.0);
  p.objective.atoms.emplace_back(1.0 / kLn2, make_neg_log(LinExpr{1.0}.add(0, 1.0)));
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  const double xstar = 1.0 / kLn2 - 1.0;
  CHECK(r.x(0) == doctest::Approx(xstar).epsilon(1e-5));
  CHECK(r.objective == doctest::Approx(xstar - std::log2(1.0 + xstar)).epsilon(1e-7));
}

TEST_CASE("exp atoms give the symmetric minimum") {
  ConvexProgram p = box_program(1, -kInf, kInf);
  p.objective.atoms.emplace_back(1.0, make_exp(LinExpr{}.add(0, 1.0)));
  p.objective.atoms.emplace_back(1.0, make_exp(LinExpr{}.add(0, -1.0)));
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("inverse plus identity balances at one") {
  ConvexProgram p = box_program(1, 1e-6, kInf);
  p.objective.affine.add(0, 1.0);
  p.objective.atoms.emplace_back(1.0, make_inverse(LinExpr{}.add(0, 1.0)));
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("quadratic over linear with a pinned numerator") {
  // minimize x^2/y + y subject to x = 1: optimum y = 1, value 2.
  ConvexProgram p = box_program(2, 1e-6, kInf);
  p.objective.affine.add(1, 1.0);
  p.objective.atoms.emplace_back(
      1.0, make_quad_over_lin({LinExpr{}.add(0, 1.0)}, LinExpr{}.add(1, 1.0)));
  p.equalities.push_back(LinExpr{-1.0}.add(0, 1.0));
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("squared norm pulls to the target point") {
  ConvexProgram p = box_program(2, -kInf, kInf);
  p.objective.atoms.emplace_back(
      1.0, make_squared_norm({LinExpr{-3.0}.add(0, 1.0), LinExpr{4.0}.add(1, 1.0)}));
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(r.x(1) == doctest::Approx(-4.0).epsilon(1e-6));
}

TEST_CASE("norm power models the cubic speed cost") {
  // minimize ||(x, y)||^3 + (x - 2)^2 + (y - 2)^2 has its optimum strictly
  // inside the quadrant; check stationarity by finite differences.
  ConvexProgram p = box_program(2, -kInf, kInf);
  p.objective.atoms.emplace_back(
      1.0, make_norm_power({LinExpr{}.add(0, 1.0), LinExpr{}.add(1, 1.0)}, 3.0));
  p.objective.atoms.emplace_back(
      1.0, make_squared_norm({LinExpr{-2.0}.add(0, 1.0), LinExpr{-2.0}.add(1, 1.0)}));
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  const Eigen::VectorXd g = fd_gradient(p.objective, r.x, 1e-6);
  CHECK(g.norm() <= 1e-4);
  // Symmetry of the problem forces x = y.
  CHECK(r.x(0) == doctest::Approx(r.x(1)).epsilon(1e-6));
}

TEST_CASE("log posynomial balances against a linear pull") {
  // minimize ln(1 + 1/x) + x/2: stationarity gives x^2 + x = 2, so x = 1.
  ConvexProgram p = box_program(1, 1e-8, kInf);
  p.objective.affine.add(0, 0.5);
  p.objective.atoms.emplace_back(1.0, make_log_posynomial(1.0, {{1.0, {{0, 1.0}}}}));
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.objective == doctest::Approx(std::log(2.0) + 0.5).epsilon(1e-7));
}

TEST_CASE("equality constraints project the unconstrained optimum") {
  // minimize x^2 + y^2 subject to x + y = 2.
  ConvexProgram p = box_program(2, -kInf, kInf);
  p.objective.atoms.emplace_back(1.0, make_power(LinExpr{}.add(0, 1.0), 2.0));
  p.objective.atoms.emplace_back(1.0, make_power(LinExpr{}.add(1, 1.0), 2.0));
  p.equalities.push_back(LinExpr{-2.0}.add(0, 1.0).add(1, 1.0));
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("inequality expressions bind where the objective pushes") {
  // minimize -x - y subject to x^2 + y^2 <= 2 (by box [0, 10]).
  ConvexProgram p = box_program(2, 0.0, 10.0);
  p.objective.affine.add(0, -1.0).add(1, -1.0);
  ConvexExpr ball;
  ball.affine.constant = -2.0;
  ball.atoms.emplace_back(1.0, make_squared_norm({LinExpr{}.add(0, 1.0), LinExpr{}.add(1, 1.0)}));
  p.inequalities.push_back(ball);
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.kkt_residual <= 1e-5);
}

TEST_CASE("validation rejects malformed programs") {
  ConvexProgram p = box_program(2, 0.0, 1.0);
  p.lower(0) = 2.0;  // crossed bounds
  CHECK_FALSE(p.validate().empty());
  CHECK_THROWS_AS(solve(p), std::invalid_argument);

  ConvexProgram q = box_program(1, 0.0, 1.0);
  q.objective.atoms.emplace_back(-1.0, make_power(LinExpr{}.add(0, 1.0), 2.0));
  CHECK_FALSE(q.validate().empty());  // negative weight breaks convexity
}

TEST_CASE("atom gradients and Hessians match finite differences") {
  struct Case {
    const char* name;
    AtomPtr atom;
    Eigen::VectorXd point;
  };
  std::vector<Case> cases;
  {
    Eigen::VectorXd x(2);
    x << 0.7, 1.3;
    cases.push_back({"exp", make_exp(LinExpr{0.2}.add(0, 0.5).add(1, -0.3)), x});
    cases.push_back({"neg_log", make_neg_log(LinExpr{0.5}.add(0, 1.0).add(1, 0.25)), x});
    cases.push_back({"power", make_power(LinExpr{0.1}.add(0, 1.0), 2.5), x});
    cases.push_back({"inverse", make_inverse(LinExpr{0.2}.add(1, 1.0)), x});
    cases.push_back(
        {"squared_norm",
         make_squared_norm({LinExpr{-0.5}.add(0, 1.0), LinExpr{0.3}.add(1, 2.0)}), x});
    cases.push_back(
        {"norm_power",
         make_norm_power({LinExpr{0.4}.add(0, 1.0), LinExpr{-0.2}.add(1, 1.0)}, 3.0), x});
    cases.push_back({"quad_over_lin",
                     make_quad_over_lin({LinExpr{}.add(0, 1.0), LinExpr{0.1}.add(1, 0.5)},
                                        LinExpr{0.3}.add(1, 1.0)),
                     x});
    cases.push_back(
        {"log_posynomial",
         make_log_posynomial(0.5, {{1.2, {{0, 1.5}}}, {0.7, {{0, 0.5}, {1, 2.0}}}}), x});
  }

  for (const auto& c : cases) {
    CAPTURE(c.name);
    REQUIRE(c.atom->in_domain(c.point));
    const double h = 1e-6;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2);
    c.atom->add_gradient(c.point, 1.0, g);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(2, 2);
    c.atom->add_hessian(c.point, 1.0, hess);

    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXd a = c.point, b = c.point;
      a(i) += h;
      b(i) -= h;
      const double fd = (c.atom->value(a) - c.atom->value(b)) / (2.0 * h);
      CHECK(g(i) == doctest::Approx(fd).epsilon(1e-5));
      Eigen::VectorXd ga = Eigen::VectorXd::Zero(2), gb = Eigen::VectorXd::Zero(2);
      c.atom->add_gradient(a, 1.0, ga);
      c.atom->add_gradient(b, 1.0, gb);
      for (int j = 0; j < 2; ++j)
        CHECK(hess(j, i) == doctest::Approx((ga(j) - gb(j)) / (2.0 * h)).epsilon(1e-4));
    }
  }
}

TEST_CASE("atoms report domain violations") {
  CHECK_FALSE(make_neg_log(LinExpr{}.add(0, 1.0))->in_domain(Eigen::VectorXd::Constant(1, -1.0)));
  CHECK_FALSE(make_inverse(LinExpr{}.add(0, 1.0))->in_domain(Eigen::VectorXd::Zero(1)));
  CHECK(make_neg_log(LinExpr{}.add(0, 1.0))->value(Eigen::VectorXd::Constant(1, -1.0)) ==
        kInf);
}

TEST_CASE("unit-diagonal PSD block, off-diagonal reward") {
  // maximize Re tr(G X) with G = [[0, 1], [1, 0]]: X = ones, value 2.
  PsdBlock b;
  b.dim = 2;
  b.linear = Eigen::MatrixXcd::Zero(2, 2);
  b.linear(0, 1) = 1.0;
  b.linear(1, 0) = 1.0;
  const SolveReport r = solve_psd(b, {});
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(std::abs(r.theta(0, 0)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(r.theta(1, 1)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::real(r.theta(0, 1)) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("PSD block with a log term stays inside the cone") {
  // maximize ln(1 + Re tr(A X)) with A PSD: best X aligns with A's top space.
  PsdBlock b;
  b.dim = 3;
  Eigen::VectorXcd v(3);
  v << 1.0, std::complex<double>(0.0, 1.0), -1.0;
  b.log_weights = {1.0};
  b.log_offsets = {1.0};
  b.log_mats = {v * v.adjoint()};
  b.linear = Eigen::MatrixXcd::Zero(3, 3);
  const SolveReport r = solve_psd(b, {});
  REQUIRE(r.status == SolveStatus::optimal);
  // Rank-one alignment achieves tr = |sum of unit phases matched to v|^2 = 9.
  CHECK(r.objective == doctest::Approx(std::log(10.0)).epsilon(1e-4));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r.theta);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
  for (int i = 0; i < 3; ++i)
    CHECK(std::real(r.theta(i, i)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("KKT residual is small exactly at the reported optimum") {
  ConvexProgram p = box_program(1, 1.0, kInf);
  p.objective.atoms.emplace_back(1.0, make_power(LinExpr{}.add(0, 1.0), 2.0));
  const SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(kkt_residual(p, r.x) <= 1e-5);
  Eigen::VectorXd off = r.x;
  off(0) = 2.0;
  CHECK(kkt_residual(p, off) > 1e-3);
}

TEST_CASE("warm starts are accepted and converge") {
  ConvexProgram p = box_program(2, -kInf, kInf);
  p.objective.atoms.emplace_back(
      1.0, make_squared_norm({LinExpr{-3.0}.add(0, 1.0), LinExpr{4.0}.add(1, 1.0)}));
  Eigen::VectorXd w(2);
  w << 2.9, -3.9;
  SolveOptions opts;
  opts.warm_x = &w;
  const SolveReport r = solve(p, opts);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-6));
}
