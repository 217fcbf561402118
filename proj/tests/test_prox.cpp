#include "oracles.hpp"

#include "pdpap/error.hpp"
#include "pdpap/prox.hpp"

#include <doctest.h>

#include <numbers>

using namespace pdpap;
using doctest::Approx;

TEST_SUITE("prox") {

TEST_CASE("box and shrink cases") {
  CHECK(prox_F_scalar(0.05, 1.0, RegConfig{0.0, 0.1, 0.0}) == 0.1);
  CHECK(prox_F_scalar(4.0, 0.025, RegConfig{1e-5, 0.1, 0.0}) == Approx(4.0 / (1.0 + 2.5e-7)));
  CHECK(prox_F_scalar(20.0, 3.0, RegConfig{0.0, 0.1, 0.0}) == Approx(10.0));
}

TEST_CASE("prox_F agrees with a brute-force minimizer") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> v(-2.0, 14.0), tau(0.01, 2.0), alpha(0.0, 1.0),
      lambda(0.05, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const RegConfig cfg{alpha(rng), lambda(rng), 0.0};
    const double vv = v(rng), tt = tau(rng);
    CHECK(std::abs(prox_F_scalar(vv, tt, cfg) -
                   oracle::brute_force_prox(vv, tt, cfg.alpha, cfg.lambda)) < 1e-5);
  }
}

TEST_CASE("prox_F is feasible and nonexpansive on fields") {
  std::mt19937_64 rng(8);
  const RegConfig cfg{0.3, 0.2, 0.0};
  for (int trial = 0; trial < 50; ++trial) {
    const auto v1 = ControlParam::field(oracle::random_vector(20, rng, -5.0, 15.0), 7.0 * trial - 100.0);
    const auto v2 = ControlParam::field(oracle::random_vector(20, rng, -5.0, 15.0), 0.3 * trial);
    const auto p1 = prox_F(v1, 0.7, cfg);
    const auto p2 = prox_F(v2, 0.7, cfg);
    CHECK((p1 - p2).norm() <= (v1 - v2).norm() + 1e-15);
    CHECK(p1.a->minCoeff() >= cfg.lower());
    CHECK(p1.a->maxCoeff() <= cfg.upper());
    CHECK(p1.c >= cfg.lower());
    CHECK(p1.c <= cfg.upper());
  }
}

TEST_CASE("regularization parameters are validated") {
  CHECK_THROWS_AS((RegConfig{0.0, 1.0, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((RegConfig{0.0, 0.0, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((RegConfig{-1.0, 0.1, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((RegConfig{0.0, 0.1, -1.0}.validate()), ConfigError);
  CHECK_NOTHROW((RegConfig{0.0, 0.1, 0.0}.validate()));
}

TEST_CASE("dual projection onto the pointwise ball") {
  const GridSpec g(4);
  const double gamma = 0.01;
  const RegConfig cfg{0.0, 0.1, gamma};
  EdgeField e = EdgeField::zeros(g);
  // node (1,1): both edges exist
  e.dx[g.horizontal_edge(1, 1)] = 2.0 * gamma * 0.6;
  e.dy[g.vertical_edge(1, 1)] = 2.0 * gamma * 0.8;
  // node (2,2): exactly on the sphere
  e.dx[g.horizontal_edge(2, 2)] = 3.0 * gamma / 5.0;
  e.dy[g.vertical_edge(2, 2)] = 4.0 * gamma / 5.0;
  // node (0,2): inside
  e.dx[g.horizontal_edge(0, 2)] = 0.1 * gamma;
  const auto p = prox_Gstar(g, DualVar{e}, 1.0, cfg).y;
  CHECK(p.dx[g.horizontal_edge(1, 1)] == Approx(gamma * 0.6));
  CHECK(p.dy[g.vertical_edge(1, 1)] == Approx(gamma * 0.8));
  CHECK(p.dx[g.horizontal_edge(2, 2)] == e.dx[g.horizontal_edge(2, 2)]);
  CHECK(p.dy[g.vertical_edge(2, 2)] == e.dy[g.vertical_edge(2, 2)]);
  CHECK(p.dx[g.horizontal_edge(0, 2)] == e.dx[g.horizontal_edge(0, 2)]);
  // independent of sigma
  const auto q = prox_Gstar(g, DualVar{e}, 123.0, cfg).y;
  CHECK(q.dx == p.dx);
  CHECK(q.dy == p.dy);
  // gamma = 0: empty dual passes through
  CHECK(prox_Gstar(g, DualVar{}, 1.0, RegConfig{}).empty());
}

TEST_CASE("dual projection bounds and idempotence on random data") {
  std::mt19937_64 rng(31);
  for (int n : {3, 6, 15}) {
    const GridSpec g(n);
    const RegConfig cfg{0.0, 0.1, 0.05};
    for (int trial = 0; trial < 10; ++trial) {
      DualVar y{EdgeField{oracle::random_vector(g.horizontal_edge_count(), rng),
                          oracle::random_vector(g.vertical_edge_count(), rng)}};
      const auto p = prox_Gstar(g, y, 1.0, cfg);
      CHECK(pointwise_norms(g, p.y).maxCoeff() <= cfg.gamma + 1e-12);
      const auto pp = prox_Gstar(g, p, 1.0, cfg);
      CHECK((pp.y.dx - p.y.dx).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((pp.y.dy - p.y.dy).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("coupling operator matches the dense difference matrix") {
  std::mt19937_64 rng(44);
  const GridSpec g(5);
  const CouplingOperator K(g, PdeFamily::DiffusionReaction, RegConfig{0.0, 0.1, 0.01});
  REQUIRE(K.active());
  const oracle::Dense D = oracle::dense_difference(g);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = ControlParam::field(oracle::random_vector(25, rng), 3.0);
    const auto Kx = K.apply(x);
    const Vector expected = D * *x.a;
    CHECK((expected.head(Kx.y.dx.size()) - Kx.y.dx).norm() < 1e-14);
    CHECK((expected.tail(Kx.y.dy.size()) - Kx.y.dy).norm() < 1e-14);

    DualVar y{EdgeField{oracle::random_vector(g.horizontal_edge_count(), rng),
                        oracle::random_vector(g.vertical_edge_count(), rng)}};
    const auto Kty = K.adjoint(y);
    CHECK(Kty.c == 0.0);
    const double lhs = Kx.y.dot(y.y);
    const double rhs = x.dot(Kty);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
  const auto flat = K.apply(ControlParam::field(Vector::Constant(25, 2.5), 1.0));
  CHECK(flat.y.dx.cwiseAbs().maxCoeff() == 0.0);
  CHECK(flat.y.dy.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inactive coupling") {
  const GridSpec g(5);
  const CouplingOperator K(g, PdeFamily::ScalarReaction, RegConfig{1e-5, 0.1, 0.0});
  CHECK_FALSE(K.active());
  CHECK(K.apply(ControlParam::scalar(4.0)).empty());
  CHECK(K.zero_dual().empty());
  CHECK(K.g_value(ControlParam::scalar(4.0)) == 0.0);
  CHECK(estimate_K_norm(K) == 0.0);
  const auto adj = K.adjoint(DualVar{});
  CHECK(adj.c == 0.0);
  CHECK_THROWS_AS(CouplingOperator(g, PdeFamily::ScalarReaction, RegConfig{0.0, 0.1, 0.01}),
                  ConfigError);
}

TEST_CASE("total variation value") {
  const GridSpec g(3);
  const CouplingOperator K(g, PdeFamily::DiffusionReaction, RegConfig{0.0, 0.1, 0.5});
  GridFunction a = GridFunction::Zero(9);
  a[g.node(0, 0)] = 3.0; // forward differences see the jump only at the corner
  const double expected = 0.5 * std::hypot(3.0, 3.0);
  CHECK(K.g_value(ControlParam::field(a, 1.0)) == Approx(expected));
}

TEST_CASE("operator norm of the difference gradient") {
  const double k51 = estimate_K_norm(GridSpec(51));
  CHECK(k51 * k51 >= 7.9);
  CHECK(k51 * k51 <= 8.0);
  for (int n : {3, 4, 6}) {
    Eigen::JacobiSVD<oracle::Dense> svd(oracle::dense_difference(GridSpec(n)));
    const double exact = svd.singularValues().maxCoeff();
    CHECK(estimate_K_norm(GridSpec(n)) == Approx(exact).epsilon(1e-6));
  }
  // separable spectrum: largest eigenvalue of each 1-D difference Laplacian is 4 sin^2(pi (N-1) / (2N))
  const int n = 51;
  const double axis = 4.0 * std::pow(std::sin(std::numbers::pi * (n - 1) / (2.0 * n)), 2);
  CHECK(k51 * k51 == Approx(2.0 * axis).epsilon(1e-6));
}

}
