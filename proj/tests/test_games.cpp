#include "hawk/games.hpp"

#include "hawk/spectral.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace hawk;
using namespace hawk::games;
using Catch::Approx;

namespace {

using BallD = Ball<double>;
using NbhdD = HyperplaneNbhd<double>;

Vec<double> vec2(double x, double y) {
  Vec<double> v(2);
  v << x, y;
  return v;
}

Transcript<double> opening(const GameVariant& variant, double r0 = 1.0) {
  Transcript<double> t;
  t.variant = variant;
  t.bob_balls.push_back({vec2(0, 0), r0});
  return t;
}

NbhdD slab(double nx, double ny, double offset, double halfwidth) {
  NbhdD n;
  n.normal = vec2(nx, ny);
  n.normal.normalize();
  n.offset = offset;
  n.halfwidth = halfwidth;
  return n;
}

}  // namespace

TEST_CASE("beta0: known value in dimension one, policy above") {
  CHECK(beta0(1) == Approx(0.2));
  CHECK(beta0(2) == Approx(0.2));
  CHECK(beta0(2, 0.1) == Approx(0.1));
}

TEST_CASE("referee: absolute halfwidth cap") {
  auto t = opening(GameVariant::absolute(0.2));
  AliceMove<double> move;
  move.nbhds.push_back(slab(1, 0, 0.0, 0.25));
  auto v = referee_validate_alice(t, move);
  CHECK(!v.accepted());
  CHECK(v.rule == RuleId::halfwidth);
}

TEST_CASE("referee: percentage accepts Bob missing half of four") {
  auto t = opening(GameVariant::percentage(0.15, beta0(2)));
  AliceMove<double> move;
  // two slabs through the left half, two through the right half
  move.nbhds.push_back(slab(1, 0, -0.4, 0.1));
  move.nbhds.push_back(slab(1, 0, -0.5, 0.1));
  move.nbhds.push_back(slab(1, 0, 0.45, 0.1));
  move.nbhds.push_back(slab(1, 0, 0.55, 0.1));
  REQUIRE(referee_validate_alice(t, move).accepted());
  t.alice_moves.push_back(move);
  // Bob sits on the right: disjoint from exactly the two left slabs
  BallD next{vec2(-0.8, 0.0), 0.18};
  auto v = referee_validate_bob(t, next);
  CHECK(v.accepted());
  // Bob clearing only one of four gets rejected
  BallD bad{vec2(0.52, 0.0), 0.15};  // overlaps the offset-0.45/0.55 pair
  t.alice_moves.back().nbhds[1] = slab(1, 0, 0.6, 0.1);  // third right slab
  auto v2 = referee_validate_bob(t, bad);
  CHECK(!v2.accepted());
  CHECK(v2.rule == RuleId::percentage_count);
}

TEST_CASE("referee: boundary-tangent ball is legal") {
  auto t = opening(GameVariant::absolute(0.2));
  AliceMove<double> move;
  move.nbhds.push_back(slab(0, 1, 0.9, 0.05));
  t.alice_moves.push_back(move);
  // radius exactly beta*r, internally tangent to B_i
  BallD next{vec2(0.8, 0.0), 0.2};
  CHECK(referee_validate_bob(t, next).accepted());
}

TEST_CASE("referee: schmidt radius equality is enforced") {
  auto t = opening(GameVariant::schmidt(0.4, 0.3));
  AliceMove<double> move;
  move.ball = BallD{vec2(0.1, 0.0), 0.4};
  CHECK(referee_validate_alice(t, move).accepted());
  move.ball->radius = 0.5;
  auto v = referee_validate_alice(t, move);
  CHECK(!v.accepted());
  CHECK(v.rule == RuleId::radius_ratio);
}

TEST_CASE("play: legal strategies run to depth with nested balls") {
  auto variant = GameVariant::absolute(0.2);
  auto alice = random_alice_strategy<double>(variant, 5);
  AdversaryConfig<double> cfg;
  cfg.opening = {vec2(0, 0), 1.0};
  auto bob = random_adversary<double>(variant, cfg, 6);
  auto result = play<double>(variant, alice, bob, 40);
  REQUIRE(result.completed);
  const auto& t = result.transcript;
  REQUIRE(t.bob_balls.size() == 41);
  const double tol = 1e-12 * t.r0();
  for (std::size_t i = 1; i < t.bob_balls.size(); ++i) {
    const auto& in = t.bob_balls[i];
    const auto& out = t.bob_balls[i - 1];
    CHECK((in.center - out.center).norm() + in.radius <= out.radius + tol);
  }
  CHECK(t.limit_radius() <= std::pow(0.9, 40) + 1e-15);
  // replay is idempotent
  CHECK(referee_replay(t).accepted());
}

TEST_CASE("play: illegal Alice halfwidth aborts with attribution") {
  auto variant = GameVariant::absolute(0.2);
  int round = 0;
  AliceStrategy<double> alice = [&round](const Transcript<double>& t) {
    AliceMove<double> m;
    double w = (round++ == 3) ? 0.5 * t.current_ball().radius
                              : 0.1 * t.current_ball().radius;
    m.nbhds.push_back(slab(1, 0, t.current_ball().center(0), w));
    return m;
  };
  AdversaryConfig<double> cfg;
  cfg.opening = {vec2(0, 0), 1.0};
  auto bob = random_adversary<double>(variant, cfg, 7);
  auto result = play<double>(variant, alice, bob, 10);
  CHECK(!result.completed);
  CHECK(result.offender == "alice");
  CHECK(result.violation.rule == RuleId::halfwidth);
  CHECK(result.transcript.rounds() == 3);
}

TEST_CASE("property: referee soundness under single-rule mutations") {
  // build one legal percentage transcript, then break exactly one rule at a
  // time and expect the matching identifier
  auto variant = GameVariant::percentage(0.15, beta0(2));
  auto alice = random_alice_strategy<double>(variant, 23);
  AdversaryConfig<double> cfg;
  cfg.opening = {vec2(0.3, -0.2), 1.0};
  auto bob = random_adversary<double>(variant, cfg, 29);
  auto result = play<double>(variant, alice, bob, 8);
  REQUIRE(result.completed);
  const auto& t = result.transcript;
  REQUIRE(referee_replay(t).accepted());

  SECTION("containment break") {
    auto broken = t;
    broken.bob_balls[4].center(0) += 3.0;  // escapes the parent ball
    CHECK(referee_replay(broken).rule == RuleId::containment);
  }
  SECTION("radius ratio break") {
    auto broken = t;
    broken.bob_balls[4].radius = 0.01 * broken.bob_balls[3].radius;
    CHECK(referee_replay(broken).rule == RuleId::radius_ratio);
  }
  SECTION("halfwidth break") {
    auto broken = t;
    broken.alice_moves[2].nbhds[0].halfwidth = 0.5 * broken.bob_balls[2].radius;
    CHECK(referee_replay(broken).rule == RuleId::halfwidth);
  }
  SECTION("percentage count break") {
    auto broken = t;
    // move every neighborhood of round 4 onto Bob's next center
    for (auto& n : broken.alice_moves[4].nbhds)
      n.offset = n.normal.dot(broken.bob_balls[5].center);
    CHECK(referee_replay(broken).rule == RuleId::percentage_count);
  }
}

TEST_CASE("adversaries: hundreds of random rounds with zero violations") {
  for (auto kind : {AdversaryKind::random, AdversaryKind::target_seeking,
                    AdversaryKind::overlap_maximizing}) {
    auto variant = GameVariant::percentage(0.18, beta0(2));
    auto alice = random_alice_strategy<double>(variant, 101);
    AdversaryConfig<double> cfg;
    cfg.opening = {vec2(0, 0), 1.0};
    auto bob = adversary_suite<double>(kind, variant, cfg, 103);
    auto result = play<double>(variant, alice, bob, 25);
    CHECK(result.completed);
  }
}

TEST_CASE("adversaries: forced placement into the uncovered complement") {
  // one neighborhood covering the center at beta <= 1/5: a legal ball exists
  // and the adversary finds it
  auto variant = GameVariant::percentage(0.2, 0.21);
  auto t = opening(variant);
  AliceMove<double> move;
  move.nbhds.push_back(slab(1, 0, 0.0, 0.2));  // covers the middle
  t.alice_moves.push_back(move);
  CounterRng rng(5);
  auto ball = games::detail::find_legal_ball<double>(t, 0.2, rng, std::nullopt);
  REQUIRE(ball.has_value());
  CHECK(referee_validate_bob(t, *ball).accepted());
}

TEST_CASE("adversaries: shrink_cap = beta forces geometric decay") {
  auto variant = GameVariant::absolute(0.25);
  auto alice = random_alice_strategy<double>(variant, 11);
  AdversaryConfig<double> cfg;
  cfg.opening = {vec2(0, 0), 1.0};
  cfg.shrink_cap = variant.beta;
  auto bob = random_adversary<double>(variant, cfg, 13);
  auto result = play<double>(variant, alice, bob, 20);
  REQUIRE(result.completed);
  const auto& t = result.transcript;
  for (std::size_t i = 1; i < t.bob_balls.size(); ++i)
    CHECK(t.bob_balls[i].radius == Approx(0.25 * t.bob_balls[i - 1].radius).epsilon(1e-9));
  CHECK(t.limit_radius() < 1e-11);
}

TEST_CASE("schedule: direct-scan oracle for ell") {
  // oracle: scan ell = 1..10 for rho=2, C=1.5, beta=0.1
  CHECK(schedule_ell(2.0, 1.5, 0.1) == 4);
  CHECK_THROWS_AS(schedule_ell(1.0 + 1e-12, 1e9, 0.99), NoEll);
}

TEST_CASE("schedule: cat-map windows partition the range") {
  MatrixXd cat(2, 2);
  cat << 2, 1, 1, 1;
  auto spec = spectral::analyze(cat);
  auto prof = spectral::growth_profile(cat, spec, 80);
  std::vector<double> log_norms{0.0};
  for (const auto& s : prof.samples) log_norms.push_back(s.log_norm);
  const double c = prof.fitted_c * 1.1;
  auto sched = make_schedule(log_norms, spec.rho, c, 0.15);
  CHECK(sched.ell >= 1);
  CHECK(sched.eps == Approx(std::pow(0.15, sched.ell + 1)));
  // partition: every n in exactly one window, windows contiguous in n
  std::vector<int> seen(log_norms.size(), 0);
  for (const auto& w : sched.windows)
    for (int n : w) ++seen[n];
  for (int count : seen) CHECK(count == 1);
  for (const auto& w : sched.windows) {
    CHECK(static_cast<double>(w.size()) < std::pow(2.0, sched.ell));
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] == w[i - 1] + 1);
  }
}

TEST_CASE("lift: beta tilde follows the square rule") {
  LiftedStrategy<double> lifted;
  lifted.beta = 0.3;
  CHECK(lifted.beta_tilde() == Approx(0.015));
}

TEST_CASE("lift: projection R^2 -> R^1 with per-round certificates") {
  // inner Alice blocks through the inner ball center
  AliceStrategy<double> inner = [](const Transcript<double>& t) {
    AliceMove<double> m;
    HyperplaneNbhd<double> n;
    const auto& b = t.current_ball();
    Vec<double> dir(2);
    dir << std::sqrt(0.2), std::sqrt(0.8);  // ||P_W u|| > 1/sqrt(2) branch
    n.normal = dir;
    n.offset = n.normal.dot(b.center);
    n.halfwidth = t.variant.beta * b.radius;
    m.nbhds.push_back(n);
    return m;
  };

  const double beta = 0.3;
  Eigen::MatrixXd embed(2, 1);
  embed << 0, 1;  // W = y-axis, P_W(x,y) = y
  int ok_runs = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::shared_ptr<LiftState<double>> state;
    auto outer_alice = lift_strategy<double>(embed, beta, 100.0, inner, &state);
    auto variant = GameVariant::absolute(beta);
    AdversaryConfig<double> cfg;
    Vec<double> c0(1);
    c0 << 0.2;
    cfg.opening = {c0, 1.0};
    auto bob = random_adversary<double>(variant, cfg, 1000 + seed);
    auto result = play<double>(variant, outer_alice, bob, 30);
    REQUIRE(result.completed);
    ++ok_runs;

    // every certificate holds
    for (const auto& cert : state->certificates) {
      CHECK(cert.compatible);
      CHECK(cert.contained);
      CHECK(cert.disjoint);
      CHECK(cert.ratio_ok);
    }
    CHECK(!state->inner_balls.empty());

    // outer limit within final radius of the projection of the inner limit
    const auto& t = result.transcript;
    Vec<double> inner_limit = state->inner_balls.back().center;
    Vec<double> projected(1);
    projected(0) = embed.col(0).dot(inner_limit);
    const double final_inner_radius = state->inner_balls.back().radius;
    CHECK((t.limit_estimate() - projected).norm() <=
          final_inner_radius + t.limit_radius() + 1e-12);
  }
  CHECK(ok_runs == 20);
}

TEST_CASE("lift: orthogonal normal takes the arbitrary branch") {
  // inner normal perpendicular to W: ||P_W u|| = 0 <= 1/sqrt(2)
  AliceStrategy<double> inner = [](const Transcript<double>& t) {
    AliceMove<double> m;
    HyperplaneNbhd<double> n;
    Vec<double> dir(2);
    dir << 1, 0;  // x-axis normal, W is the y-axis
    n.normal = dir;
    n.offset = t.current_ball().center(0);
    n.halfwidth = t.variant.beta * t.current_ball().radius;
    m.nbhds.push_back(n);
    return m;
  };
  Eigen::MatrixXd embed(2, 1);
  embed << 0, 1;
  std::shared_ptr<LiftState<double>> state;
  auto outer_alice = lift_strategy<double>(embed, 0.3, 100.0, inner, &state);
  auto variant = GameVariant::absolute(0.3);
  AdversaryConfig<double> cfg;
  Vec<double> c0(1);
  c0 << 0.0;
  cfg.opening = {c0, 1.0};
  auto bob = random_adversary<double>(variant, cfg, 77);
  auto result = play<double>(variant, outer_alice, bob, 25);
  REQUIRE(result.completed);
  for (const auto& cert : state->certificates) {
    CHECK(!cert.case_split_high);
    CHECK(cert.compatible);
    CHECK(cert.contained);
    CHECK(cert.disjoint);
  }
}
