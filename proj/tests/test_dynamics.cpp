#include "hawk/dynamics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace hawk;
using namespace hawk::dynamics;
using Catch::Approx;

TEST_CASE("torus_orbit: cat map fixed point stays put") {
  auto map = TorusMap::cat();
  auto start = make_torus_point<double>({0.0, 0.0});
  auto orbit = torus_orbit(map, start, 20);
  for (const auto& p : orbit) {
    CHECK(p.coords[0] == 0.0);
    CHECK(p.coords[1] == 0.0);
  }
}

TEST_CASE("torus_orbit: (1/2,1/2) runs the exact rational 3-cycle") {
  // oracle: exact rational iteration
  //   (1/2,1/2) -> (3/2,1) = (1/2,0) -> (1,1/2) = (0,1/2) -> (1/2,1/2)
  auto map = TorusMap::cat();
  auto start = make_torus_point<Rational>({Rational(1, 2), Rational(1, 2)});
  auto orbit = torus_orbit(map, start, 9);
  std::vector<std::vector<Rational>> cycle = {
      {Rational(1, 2), Rational(1, 2)},
      {Rational(1, 2), Rational(0)},
      {Rational(0), Rational(1, 2)},
  };
  for (int n = 0; n <= 9; ++n) {
    CHECK(orbit[n].coords[0] == cycle[n % 3][0]);
    CHECK(orbit[n].coords[1] == cycle[n % 3][1]);
  }
}

TEST_CASE("torus_orbit: error bar growth tracks the operator norm") {
  auto map = TorusMap::cat();
  const double norm = opnorm(map.as_double());
  auto start = make_torus_point<double>({0.25, 0.125}, 1e-14);
  auto orbit = torus_orbit(map, start, 10);
  for (int n = 1; n <= 10; ++n) {
    const double ratio = orbit[n].error_bar / orbit[n - 1].error_bar;
    CHECK(ratio >= norm / 2.0);
    CHECK(ratio <= norm * 2.0);
  }
}

TEST_CASE("torus_orbit: exhausted precision raises") {
  auto map = TorusMap::cat();
  auto start = make_torus_point<double>({0.3, 0.4}, 1e-6);
  CHECK_THROWS_AS(torus_orbit(map, start, 40), PrecisionExhausted);
}

TEST_CASE("torus_orbit: 2x precision agrees within base error bars") {
  auto map = TorusMap::cat();
  const double rho = (3.0 + std::sqrt(5.0)) / 2.0;
  const int n_max = 60;
  // budget rule: bits >= n_max log2(rho) + 64
  REQUIRE(n_max * std::log2(rho) + 64.0 < 256.0);

  auto s256 = make_torus_point<BigFloat256>(
      {BigFloat256(1) / 3, BigFloat256(1) / 7},
      std::numeric_limits<BigFloat256>::epsilon());
  auto s512 = make_torus_point<BigFloat512>(
      {BigFloat512(1) / 3, BigFloat512(1) / 7},
      std::numeric_limits<BigFloat512>::epsilon());
  auto o256 = torus_orbit(map, s256, n_max, std::numeric_limits<BigFloat256>::epsilon());
  auto o512 = torus_orbit(map, s512, n_max, std::numeric_limits<BigFloat512>::epsilon());
  for (int n = 0; n <= n_max; n += 10) {
    for (int i = 0; i < 2; ++i) {
      const BigFloat256 a = o256[n].coords[i];
      const BigFloat256 b = BigFloat256(o512[n].coords[i]);
      BigFloat256 diff = a - b;
      if (diff < 0) diff = -diff;
      if (diff > BigFloat256(0.5)) diff = 1 - diff;
      CHECK(diff <= o256[n].error_bar + BigFloat256(1e-60));
    }
  }
}

TEST_CASE("preimage_points: n=0 keeps the point iff it lies in the ball") {
  auto map = TorusMap::cat();
  RationalVector z{Rational(1, 2), Rational(1, 2)};
  ChartBall near{z, Rational(1, 10)};
  auto sols = preimage_points(map, z, 0, near);
  REQUIRE(sols.size() == 1);
  CHECK(sols[0][0] == Rational(1, 2));

  RationalVector far{Rational(0), Rational(0)};
  ChartBall miss{far, Rational(1, 10)};
  CHECK(preimage_points(map, z, 0, miss).empty());
}

TEST_CASE("preimage_points: cat map n=1 solutions are exact and in the ball") {
  auto map = TorusMap::cat();
  RationalVector z{Rational(1, 2), Rational(1, 2)};
  RationalVector origin{Rational(0), Rational(0)};
  ChartBall ball{origin, Rational(3, 5)};
  auto sols = preimage_points(map, z, 1, ball);
  CHECK(!sols.empty());

  for (const auto& y : sols) {
    Rational a = 2 * y[0] + 1 * y[1] - Rational(1, 2);
    Rational b = 1 * y[0] + 1 * y[1] - Rational(1, 2);
    CHECK(denominator(a) == 1);
    CHECK(denominator(b) == 1);
    CHECK(y[0] * y[0] + y[1] * y[1] <= Rational(9, 25));
  }

  // enumeration self-check: count stays near ball volume for |det| = 1
  const double vol = M_PI * 0.36;
  CHECK(static_cast<double>(sols.size()) <= 4.0 * vol + 4.0);
}

TEST_CASE("preimage_points: soundness/completeness against a shift scan") {
  auto map = TorusMap::cat();
  RationalVector z{Rational(1, 3), Rational(2, 3)};
  RationalVector center{Rational(1, 4), Rational(-1, 5)};
  ChartBall ball{center, Rational(4, 5)};
  auto sols = preimage_points(map, z, 3, ball);
  // completeness: a brute scan over integer shifts in a generous box finds
  // no solution absent from the list
  const BigIntMatrix m3 = bigint_power(map.as_bigint(), 3);
  const RationalMatrix inv = rational_inverse(m3);
  int found = 0;
  for (int a = -30; a <= 30; ++a)
    for (int b = -30; b <= 30; ++b) {
      RationalVector target{z[0] + a, z[1] + b};
      RationalVector y = inv.apply(target);
      Rational d2 = (y[0] - center[0]) * (y[0] - center[0]) +
                    (y[1] - center[1]) * (y[1] - center[1]);
      if (d2 <= ball.radius * ball.radius) {
        ++found;
        bool in_list = false;
        for (const auto& s : sols) in_list |= (s[0] == y[0] && s[1] == y[1]);
        CHECK(in_list);
      }
    }
  CHECK(static_cast<std::size_t>(found) == sols.size());
}

TEST_CASE("shortest_vector: Z^2 has length 1") {
  auto sv = shortest_vector(MatrixXd::Identity(2, 2));
  CHECK(sv.length == Approx(1.0));
}

TEST_CASE("shortest_vector: golden-ratio skew basis against brute force") {
  const double theta = (1.0 + std::sqrt(5.0)) / 2.0;
  MatrixXd b(2, 2);
  b << 1, 0, theta - 1.0, 1;  // det 1
  auto sv = shortest_vector(b);
  double brute = std::numeric_limits<double>::infinity();
  for (int i = -50; i <= 50; ++i)
    for (int j = -50; j <= 50; ++j) {
      if (i == 0 && j == 0) continue;
      brute = std::min(brute, (b * Eigen::Vector2d(i, j)).norm());
    }
  CHECK(sv.length == Approx(brute).epsilon(1e-12));
}

TEST_CASE("shortest_vector: random det-1 bases match brute force (n = 2, 3)") {
  CounterRng rng(31);
  for (int n : {2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      MatrixXd g(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
      g /= std::pow(std::abs(g.determinant()), 1.0 / n);
      auto sv = shortest_vector(g);
      double brute = std::numeric_limits<double>::infinity();
      Eigen::VectorXi m(n);
      std::function<void(int)> rec = [&](int i) {
        if (i == n) {
          if (m.isZero()) return;
          brute = std::min(brute, (g * m.cast<double>()).norm());
          return;
        }
        for (int v = -50; v <= 50; ++v) {
          m(i) = v;
          rec(i + 1);
        }
      };
      rec(0);
      CHECK(sv.length == Approx(brute).epsilon(1e-10));
    }
  }
}

TEST_CASE("shortest_vector: Minkowski bound along the diagonal flow") {
  // det-1 planar lattices keep lambda_1^2 <= 2/sqrt(3); the diagonal flow
  // preserves the determinant
  MatrixXd b(2, 2);
  b << 1, 0.4, 0, 1;
  for (double t : {-1.5, -0.5, 0.0, 0.7, 2.0}) {
    MatrixXd gt = MatrixXd::Zero(2, 2);
    gt(0, 0) = std::exp(t);
    gt(1, 1) = std::exp(-t);
    auto sv = shortest_vector(gt * b);
    CHECK(sv.length <= std::sqrt(2.0 / std::sqrt(3.0)) + 1e-12);
  }
}

TEST_CASE("dist_flow_orbit_to_zero: calculus oracle at p=q=1") {
  VectorXd v(2);
  v << 1, 1;
  auto d = dist_flow_orbit_to_zero(v, 1, 1);
  CHECK(d.inf == Approx(std::sqrt(2.0)));
  CHECK(d.argmin_t == Approx(0.0).margin(1e-14));
  CHECK(d.inf <= 2.0 + 1e-12);  // the 2 ||u||^{p/n} ||w||^{q/n} bound
}

TEST_CASE("dist_flow_orbit_to_zero: v in U is flagged at infinity") {
  VectorXd v(2);
  v << 1, 0;
  auto d = dist_flow_orbit_to_zero(v, 1, 1);
  CHECK(d.inf == 0.0);
  CHECK(d.at_infinity);
  CHECK(d.infinity_sign == -1);
}

TEST_CASE("property: flow distance obeys the product bound") {
  CounterRng rng(17);
  for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 2}}) {
    const int n = p + q;
    for (int k = 0; k < 2000; ++k) {
      VectorXd v = rng.normal_vector(n) * rng.uniform(0.1, 3.0);
      if (v.head(p).norm() == 0.0 || v.tail(q).norm() == 0.0) continue;
      auto d = dist_flow_orbit_to_zero(v, p, q);
      const double bound = 2.0 * std::pow(v.head(p).norm(), double(p) / n) *
                           std::pow(v.tail(q).norm(), double(q) / n);
      CHECK(d.inf <= bound + 1e-12);
    }
  }
}

TEST_CASE("property: flow distance is orbit invariant") {
  CounterRng rng(19);
  for (int k = 0; k < 50; ++k) {
    VectorXd v = rng.normal_vector(3);
    if (std::abs(v(0)) < 0.05 || v.tail(2).norm() < 0.05) continue;
    auto base = dist_flow_orbit_to_zero(v, 1, 2);
    for (double s : {-1.0, 0.5, 2.0}) {
      VectorXd gv(3);
      gv << std::exp(s) * v(0), std::exp(-s / 2.0) * v(1), std::exp(-s / 2.0) * v(2);
      auto moved = dist_flow_orbit_to_zero(gv, 1, 2);
      CHECK(moved.inf == Approx(base.inf).margin(1e-10));
    }
  }
}

TEST_CASE("verify_affine_iteration: h = 0 is the identity check") {
  auto map = TorusMap::cat();
  std::vector<double> zero{0.0, 0.0}, x{0.3, 0.7};
  CHECK(verify_affine_iteration<double>(map, zero, zero, x, 10, 1e-12));
}

TEST_CASE("verify_affine_iteration: exact rational equality") {
  auto map = TorusMap::cat();
  std::vector<Rational> g{Rational(0), Rational(0)};
  std::vector<Rational> h{Rational(1, 3), Rational(1, 5)};
  std::vector<Rational> x{Rational(2, 7), Rational(3, 11)};
  CHECK(verify_affine_iteration<Rational>(map, g, h, x, 12, Rational(0)));
}

TEST_CASE("verify_affine_iteration: shifted map at high precision") {
  auto map = TorusMap::cat();
  using S = BigFloat128;
  std::vector<S> g{S(1) / 3, S(0)};
  std::vector<S> h{S(1) / 9, S(2) / 9};
  std::vector<S> x{S(1) / 13, S(5) / 13};
  CHECK(verify_affine_iteration<S>(map, g, h, x, 5, S(1e-20)));
}
