#pragma once

// Referee-validated engines for Schmidt's (alpha,beta)-game, the hyperplane
// absolute game, and the hyperplane percentage game, plus Bob adversaries and
// the strategy-lifting combinator for orthogonal projections.
//
// Geometry is templated on the real scalar: double suffices for shallow
// games, while deep torus runs instantiate a quad float so that slab
// distances stay resolvable when radii drop far below 1e-16.

#include "hawk/core.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hawk::games {

using Quad = boost::multiprecision::cpp_bin_float_quad;

template <class Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <class Real>
struct Ball {
  Vec<Real> center;
  Real radius{0};
};

// the closed slab { x : |<normal, x> - offset| < halfwidth } around an
// affine hyperplane
template <class Real>
struct HyperplaneNbhd {
  Vec<Real> normal;  // unit
  Real offset{0};
  Real halfwidth{0};

  Real signed_dist(const Vec<Real>& x) const { return normal.dot(x) - offset; }
  Real dist(const Vec<Real>& x) const {
    using std::abs;
    Real s = signed_dist(x);
    return s < 0 ? Real(-s) : s;
  }
};

struct GameVariant {
  enum class Kind { schmidt, absolute, percentage };
  Kind kind = Kind::absolute;
  double alpha = 0.0;  // Schmidt only
  double beta = 0.0;

  static GameVariant schmidt(double alpha, double beta) {
    if (!(alpha > 0 && alpha < 1 && beta > 0 && beta < 1))
      throw std::invalid_argument("schmidt: alpha, beta in (0,1) required");
    return {Kind::schmidt, alpha, beta};
  }
  static GameVariant absolute(double beta) {
    if (!(beta > 0 && beta < 1.0 / 3.0))
      throw std::invalid_argument("absolute: beta in (0,1/3) required");
    return {Kind::absolute, 0.0, beta};
  }
  static GameVariant percentage(double beta, double beta0_bound) {
    if (!(beta > 0 && beta < beta0_bound))
      throw std::invalid_argument("percentage: beta in (0, beta0(dim)) required");
    return {Kind::percentage, 0.0, beta};
  }
};

// The percentage game stays playable for Bob below beta0(dim). The value is
// known for dimension 1; higher dimensions fall back to a conservative
// configurable constant.
inline double beta0(int dim, std::optional<double> override_value = std::nullopt) {
  if (dim < 1) throw std::invalid_argument("beta0: dim >= 1");
  if (dim == 1) return 1.0 / 5.0;
  return override_value.value_or(1.0 / 5.0);
}

enum class RuleId {
  ok,
  containment,        // proposed ball not inside the required region
  radius_ratio,       // radius violates the variant's ratio rule
  halfwidth,          // Alice neighborhood too wide
  percentage_count,   // Bob ball disjoint from fewer than half the offers
  disjointness,       // Bob ball meets the absolute-game neighborhood
  structure,          // malformed move for the variant
};

inline const char* rule_name(RuleId id) {
  switch (id) {
    case RuleId::ok: return "ok";
    case RuleId::containment: return "containment";
    case RuleId::radius_ratio: return "radius_ratio";
    case RuleId::halfwidth: return "halfwidth";
    case RuleId::percentage_count: return "percentage_count";
    case RuleId::disjointness: return "disjointness";
    case RuleId::structure: return "structure";
  }
  return "unknown";
}

struct Verdict {
  RuleId rule = RuleId::ok;
  std::string detail;
  bool accepted() const { return rule == RuleId::ok; }
};

// Alice's move: one ball (Schmidt) or a finite family of hyperplane
// neighborhoods (absolute: exactly one; percentage: any finite count).
template <class Real>
struct AliceMove {
  std::optional<Ball<Real>> ball;
  std::vector<HyperplaneNbhd<Real>> nbhds;
};

template <class Real>
struct Transcript {
  GameVariant variant;
  std::vector<Ball<Real>> bob_balls;       // B_0, B_1, ...
  std::vector<AliceMove<Real>> alice_moves;  // move i answers B_i

  int rounds() const { return static_cast<int>(alice_moves.size()); }
  const Ball<Real>& current_ball() const { return bob_balls.back(); }
  Real r0() const { return bob_balls.front().radius; }
  Vec<Real> limit_estimate() const { return bob_balls.back().center; }
  Real limit_radius() const { return bob_balls.back().radius; }
};

namespace detail {

template <class Real>
bool ball_inside(const Ball<Real>& inner, const Ball<Real>& outer, Real tol) {
  return (inner.center - outer.center).norm() + inner.radius <= outer.radius + tol;
}

template <class Real>
bool ball_disjoint(const Ball<Real>& b, const HyperplaneNbhd<Real>& n, Real tol) {
  return n.dist(b.center) >= n.halfwidth + b.radius - tol;
}

}  // namespace detail

template <class Real>
Real referee_tol(const Transcript<Real>& t) {
  return t.bob_balls.empty() ? Real(0) : Real(1e-12) * t.r0();
}

// Rule check for Alice's i-th move against B_i.
template <class Real>
Verdict referee_validate_alice(const Transcript<Real>& t, const AliceMove<Real>& move) {
  const Real tol = referee_tol(t);
  const Ball<Real>& b = t.current_ball();
  const Real beta = Real(t.variant.beta);
  switch (t.variant.kind) {
    case GameVariant::Kind::schmidt: {
      if (!move.ball || !move.nbhds.empty())
        return {RuleId::structure, "schmidt: Alice must offer exactly one ball"};
      const Real want = Real(t.variant.alpha) * b.radius;
      using std::abs;
      if (abs(move.ball->radius - want) > tol)
        return {RuleId::radius_ratio, "schmidt: Alice radius must equal alpha*r"};
      if (!detail::ball_inside(*move.ball, b, tol))
        return {RuleId::containment, "schmidt: Alice ball must lie inside Bob's"};
      return {};
    }
    case GameVariant::Kind::absolute: {
      if (move.ball || move.nbhds.size() != 1)
        return {RuleId::structure, "absolute: Alice must offer exactly one neighborhood"};
      if (move.nbhds[0].halfwidth > beta * b.radius + tol)
        return {RuleId::halfwidth, "absolute: halfwidth exceeds beta*r"};
      return {};
    }
    case GameVariant::Kind::percentage: {
      if (move.ball) return {RuleId::structure, "percentage: Alice offers neighborhoods"};
      for (const auto& n : move.nbhds)
        if (n.halfwidth > beta * b.radius + tol)
          return {RuleId::halfwidth, "percentage: halfwidth exceeds beta*r"};
      return {};
    }
  }
  return {RuleId::structure, "unknown variant"};
}

// Rule check for Bob's ball B_{i+1} against B_i and Alice's i-th move.
template <class Real>
Verdict referee_validate_bob(const Transcript<Real>& t, const Ball<Real>& next) {
  const Real tol = referee_tol(t);
  const Ball<Real>& b = t.current_ball();
  const AliceMove<Real>& alice = t.alice_moves.back();
  const Real beta = Real(t.variant.beta);
  switch (t.variant.kind) {
    case GameVariant::Kind::schmidt: {
      const Real want = beta * alice.ball->radius;
      using std::abs;
      if (abs(next.radius - want) > tol)
        return {RuleId::radius_ratio, "schmidt: Bob radius must equal beta*r'"};
      if (!detail::ball_inside(next, *alice.ball, tol))
        return {RuleId::containment, "schmidt: Bob ball must lie inside Alice's"};
      return {};
    }
    case GameVariant::Kind::absolute: {
      if (next.radius < beta * b.radius - tol)
        return {RuleId::radius_ratio, "absolute: Bob radius below beta*r"};
      if (!detail::ball_inside(next, b, tol))
        return {RuleId::containment, "absolute: Bob ball must stay inside"};
      if (!detail::ball_disjoint(next, alice.nbhds[0], tol))
        return {RuleId::disjointness, "absolute: Bob ball meets the neighborhood"};
      return {};
    }
    case GameVariant::Kind::percentage: {
      if (next.radius < beta * b.radius - tol)
        return {RuleId::radius_ratio, "percentage: Bob radius below beta*r"};
      if (!detail::ball_inside(next, b, tol))
        return {RuleId::containment, "percentage: Bob ball must stay inside"};
      const int total = static_cast<int>(alice.nbhds.size());
      int cleared = 0;
      for (const auto& n : alice.nbhds)
        if (detail::ball_disjoint(next, n, tol)) ++cleared;
      if (cleared < (total + 1) / 2)
        return {RuleId::percentage_count, "percentage: fewer than half avoided"};
      return {};
    }
  }
  return {RuleId::structure, "unknown variant"};
}

// Replays a complete transcript through the referee.
template <class Real>
Verdict referee_replay(const Transcript<Real>& t) {
  Transcript<Real> partial;
  partial.variant = t.variant;
  if (t.bob_balls.empty()) return {RuleId::structure, "no opening ball"};
  partial.bob_balls.push_back(t.bob_balls[0]);
  for (int i = 0; i < t.rounds(); ++i) {
    Verdict v = referee_validate_alice(partial, t.alice_moves[i]);
    if (!v.accepted()) return v;
    partial.alice_moves.push_back(t.alice_moves[i]);
    if (i + 1 < static_cast<int>(t.bob_balls.size())) {
      v = referee_validate_bob(partial, t.bob_balls[i + 1]);
      if (!v.accepted()) return v;
      partial.bob_balls.push_back(t.bob_balls[i + 1]);
    }
  }
  return {};
}

template <class Real>
using AliceStrategy = std::function<AliceMove<Real>(const Transcript<Real>&)>;

// called with the transcript so far; an empty transcript requests B_0
template <class Real>
using BobStrategy = std::function<Ball<Real>(const Transcript<Real>&)>;

template <class Real>
struct PlayResult {
  Transcript<Real> transcript;
  bool completed = false;
  Verdict violation;
  std::string offender;  // "alice" or "bob" when aborted
};

template <class Real>
PlayResult<Real> play(const GameVariant& variant, AliceStrategy<Real> alice,
                      BobStrategy<Real> bob, int depth) {
  PlayResult<Real> out;
  out.transcript.variant = variant;
  Transcript<Real>& t = out.transcript;
  t.bob_balls.push_back(bob(t));
  if (!(t.bob_balls[0].radius > Real(0))) {
    out.violation = {RuleId::structure, "opening ball must have positive radius"};
    out.offender = "bob";
    return out;
  }
  for (int i = 0; i < depth; ++i) {
    AliceMove<Real> move = alice(t);
    Verdict v = referee_validate_alice(t, move);
    if (!v.accepted()) {
      out.violation = v;
      out.offender = "alice";
      return out;
    }
    t.alice_moves.push_back(std::move(move));
    Ball<Real> next = bob(t);
    v = referee_validate_bob(t, next);
    if (!v.accepted()) {
      out.violation = v;
      out.offender = "bob";
      return out;
    }
    t.bob_balls.push_back(std::move(next));
  }
  out.completed = true;
  return out;
}

// ---------------------------------------------------------------------------
// Stage schedule: the smallest ell with rho^{2^ell - 1} beta^ell >= C^2 and
// C beta^ell <= 1, plus the norm windows N_k that partition the iterate range.

struct Schedule {
  int ell = 0;
  double eps = 0.0;  // beta^{ell+1}
  // windows[k] lists the n with beta^{-ell(k-1)} <= ||T^n|| < beta^{-ell k};
  // k = 0 is usually empty for expanding maps
  std::vector<std::vector<int>> windows;
};

inline int schedule_ell(double rho, double c, double beta) {
  if (!(rho > 1.0 && c > 1.0 && beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("schedule: rho > 1, C > 1, beta in (0,1) required");
  const double log_rho = std::log(rho), log_beta = std::log(beta), log_c = std::log(c);
  for (int ell = 1; ell <= 64; ++ell) {
    const double pow2 = std::pow(2.0, ell) - 1.0;
    const bool growth_ok = pow2 * log_rho + ell * log_beta >= 2.0 * log_c;
    const bool cap_ok = log_c + ell * log_beta <= 0.0;
    if (growth_ok && cap_ok) return ell;
  }
  throw NoEll("schedule: no ell <= 64 satisfies the stage inequalities");
}

// log_norms[n] = log ||T^n|| for n = 0..n_max
inline Schedule make_schedule(const std::vector<double>& log_norms, double rho, double c,
                              double beta) {
  Schedule out;
  out.ell = schedule_ell(rho, c, beta);
  out.eps = std::pow(beta, out.ell + 1);
  const double stride = out.ell * std::log(1.0 / beta);
  for (int n = 0; n < static_cast<int>(log_norms.size()); ++n) {
    const int k = static_cast<int>(std::floor(log_norms[n] / stride)) + 1;
    if (k < 0) throw NumericError("make_schedule: window index below zero");
    if (k >= static_cast<int>(out.windows.size())) out.windows.resize(k + 1);
    out.windows[k].push_back(n);
  }
  // every window must stay below 2^ell entries
  for (const auto& w : out.windows)
    if (static_cast<double>(w.size()) >= std::pow(2.0, out.ell))
      throw NumericError("make_schedule: window size reached 2^ell");
  return out;
}

// ---------------------------------------------------------------------------
// Bob adversaries. All randomness flows through CounterRng; each strategy is
// stateful per game instance and must not be shared across games.

enum class AdversaryKind { random, target_seeking, overlap_maximizing };

template <class Real>
struct AdversaryConfig {
  Ball<Real> opening;
  double shrink_cap = 0.9;
  // optional steer oracle for target_seeking: maps the current ball to a
  // point worth approaching (e.g. a shallow preimage of the target set)
  std::function<std::optional<Vec<Real>>(const Ball<Real>&)> steer;
};

namespace detail {

// Region Bob must place the next ball in: Alice's ball for Schmidt, the
// current Bob ball otherwise.
template <class Real>
const Ball<Real>& placement_region(const Transcript<Real>& t) {
  if (t.variant.kind == GameVariant::Kind::schmidt && !t.alice_moves.empty() &&
      t.alice_moves.back().ball)
    return *t.alice_moves.back().ball;
  return t.current_ball();
}

// Radius the variant demands (exact for Schmidt, minimum otherwise).
template <class Real>
Real forced_radius(const Transcript<Real>& t, double ratio) {
  if (t.variant.kind == GameVariant::Kind::schmidt)
    return Real(t.variant.beta) * t.alice_moves.back().ball->radius;
  return Real(std::max(ratio, t.variant.beta)) * t.current_ball().radius;
}

// Searches for a legal Bob ball of the given radius: random placements first,
// then a line search along each offending neighborhood's normal.
template <class Real>
std::optional<Ball<Real>> find_legal_ball(const Transcript<Real>& t, const Real& radius,
                                          CounterRng& rng,
                                          const std::optional<Vec<Real>>& preferred,
                                          int tries = 400) {
  const Ball<Real>& b = placement_region(t);
  const int d = static_cast<int>(b.center.size());
  const Real room = b.radius - radius;
  if (room < Real(0)) return std::nullopt;
  auto candidate_ok = [&](const Ball<Real>& c) {
    return referee_validate_bob(t, c).accepted();
  };
  // preferred placement: clamp toward the preferred point
  if (preferred) {
    Vec<Real> delta = *preferred - b.center;
    const Real len = delta.norm();
    Ball<Real> c{b.center, radius};
    if (len > Real(0)) {
      const Real step = len < room ? len : room;
      c.center = b.center + delta * (step / len);
    }
    if (candidate_ok(c)) return c;
  }
  for (int k = 0; k < tries; ++k) {
    VectorXd dir_d = rng.unit_vector(d);
    const Real mag = room * Real(std::pow(rng.next_double(), 1.0 / d));
    Vec<Real> center = b.center;
    for (int i = 0; i < d; ++i) center(i) += Real(dir_d(i)) * mag;
    Ball<Real> c{center, radius};
    if (candidate_ok(c)) return c;
  }
  // structured fallback: push away from each neighborhood along its normal
  if (!t.alice_moves.empty()) {
    for (const auto& n : t.alice_moves.back().nbhds) {
      for (double s : {1.0, -1.0}) {
        Vec<Real> center = b.center + n.normal * (Real(s) * room);
        Ball<Real> c{center, radius};
        if (candidate_ok(c)) return c;
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

// random: uniform legal ball, radius ratio drawn from [beta, shrink_cap]
template <class Real>
BobStrategy<Real> random_adversary(const GameVariant& variant,
                                   AdversaryConfig<Real> config, std::uint64_t seed) {
  auto rng = std::make_shared<CounterRng>(seed, 7);
  return [variant, config, rng](const Transcript<Real>& t) -> Ball<Real> {
    if (t.bob_balls.empty()) return config.opening;
    const double lo = variant.beta;
    const double ratio = rng->uniform(lo, std::max(lo, config.shrink_cap));
    const Real radius = detail::forced_radius(t, ratio);
    auto ball = detail::find_legal_ball<Real>(t, radius, *rng, std::nullopt);
    if (!ball) {
      // retreat to the minimum radius, which maximizes the legal region
      ball = detail::find_legal_ball<Real>(t, detail::forced_radius(t, lo), *rng,
                                           std::nullopt);
    }
    if (!ball) throw Resign("random adversary found no legal ball");
    return *ball;
  };
}

// target_seeking: steers the center toward the steer oracle's point
template <class Real>
BobStrategy<Real> target_seeking_adversary(const GameVariant& variant,
                                           AdversaryConfig<Real> config,
                                           std::uint64_t seed) {
  auto rng = std::make_shared<CounterRng>(seed, 11);
  return [variant, config, rng](const Transcript<Real>& t) -> Ball<Real> {
    if (t.bob_balls.empty()) return config.opening;
    const double lo = variant.beta;
    const double ratio = rng->uniform(lo, std::max(lo, config.shrink_cap));
    const Real radius = detail::forced_radius(t, ratio);
    std::optional<Vec<Real>> goal;
    if (config.steer) goal = config.steer(t.current_ball());
    auto ball = detail::find_legal_ball<Real>(t, radius, *rng, goal);
    if (!ball)
      ball = detail::find_legal_ball<Real>(t, detail::forced_radius(t, lo), *rng, goal);
    if (!ball) throw Resign("target-seeking adversary found no legal ball");
    return *ball;
  };
}

// overlap_maximizing: evaluates a candidate lattice of legal balls and keeps
// the one closest to Alice's most recent neighborhoods
template <class Real>
BobStrategy<Real> overlap_maximizing_adversary(const GameVariant& variant,
                                               AdversaryConfig<Real> config,
                                               std::uint64_t seed) {
  auto rng = std::make_shared<CounterRng>(seed, 13);
  return [variant, config, rng](const Transcript<Real>& t) -> Ball<Real> {
    if (t.bob_balls.empty()) return config.opening;
    const Ball<Real>& b = detail::placement_region(t);
    const int d = static_cast<int>(b.center.size());
    const auto& nbhds = t.alice_moves.back().nbhds;
    auto gap = [&](const Ball<Real>& c) {
      Real best = Real(1e30);
      for (const auto& n : nbhds) {
        Real g = n.dist(c.center) - n.halfwidth - c.radius;
        if (g < best) best = g;
      }
      return best;
    };
    std::optional<Ball<Real>> chosen;
    Real chosen_gap = Real(1e30);
    for (double ratio : {0.5, 0.7}) {
      const Real radius = detail::forced_radius(t, ratio);
      const Real room = b.radius - radius;
      if (room < Real(0)) continue;
      for (int k = 0; k < 48; ++k) {
        VectorXd dir_d = rng->unit_vector(d);
        const double frac = (k % 4) / 3.0;
        Vec<Real> center = b.center;
        for (int i = 0; i < d; ++i) center(i) += Real(dir_d(i)) * room * Real(frac);
        Ball<Real> c{center, radius};
        if (!referee_validate_bob(t, c).accepted()) continue;
        const Real g = nbhds.empty() ? Real(0) : gap(c);
        if (!chosen || g < chosen_gap) {
          chosen = c;
          chosen_gap = g;
        }
      }
    }
    if (!chosen) {
      auto fallback =
          detail::find_legal_ball<Real>(t, detail::forced_radius(t, variant.beta), *rng,
                                        std::nullopt);
      if (!fallback) throw Resign("overlap adversary found no legal ball");
      return *fallback;
    }
    return *chosen;
  };
}

template <class Real>
BobStrategy<Real> adversary_suite(AdversaryKind kind, const GameVariant& variant,
                                  AdversaryConfig<Real> config, std::uint64_t seed) {
  switch (kind) {
    case AdversaryKind::random: return random_adversary(variant, config, seed);
    case AdversaryKind::target_seeking:
      return target_seeking_adversary(variant, config, seed);
    case AdversaryKind::overlap_maximizing:
      return overlap_maximizing_adversary(variant, config, seed);
  }
  throw std::invalid_argument("unknown adversary kind");
}

// Random legal Alice: exercises every variant's move shape. Used for
// randomized referee validation and replay tests.
template <class Real>
AliceStrategy<Real> random_alice_strategy(const GameVariant& variant, std::uint64_t seed) {
  auto rng = std::make_shared<CounterRng>(seed, 23);
  return [variant, rng](const Transcript<Real>& t) -> AliceMove<Real> {
    const Ball<Real>& b = t.current_ball();
    const int d = static_cast<int>(b.center.size());
    AliceMove<Real> move;
    switch (variant.kind) {
      case GameVariant::Kind::schmidt: {
        Ball<Real> a;
        a.radius = Real(variant.alpha) * b.radius;
        const Real room = b.radius - a.radius;
        VectorXd dir = rng->unit_vector(d);
        const Real mag = room * Real(rng->next_double());
        a.center = b.center;
        for (int i = 0; i < d; ++i) a.center(i) += Real(dir(i)) * mag;
        move.ball = a;
        return move;
      }
      case GameVariant::Kind::absolute:
      case GameVariant::Kind::percentage: {
        const int count = variant.kind == GameVariant::Kind::absolute
                              ? 1
                              : 1 + static_cast<int>(rng->next_u64() % 4);
        for (int j = 0; j < count; ++j) {
          HyperplaneNbhd<Real> n;
          VectorXd dir = rng->unit_vector(d);
          n.normal = Vec<Real>::Zero(d);
          for (int i = 0; i < d; ++i) n.normal(i) = Real(dir(i));
          // hyperplane passing within the ball
          n.offset = n.normal.dot(b.center) +
                     Real(rng->uniform(-0.8, 0.8)) * b.radius;
          n.halfwidth = Real(rng->uniform(0.2, 1.0) * variant.beta) * b.radius;
          move.nbhds.push_back(n);
        }
        return move;
      }
    }
    return move;
  };
}

// ---------------------------------------------------------------------------
// Strategy lifting across an orthogonal projection V -> W.
//
// Plays a beta-absolute game on W by consulting an inner beta^2/6-absolute
// strategy on V: qualifying Bob balls are lifted to compatible balls (center
// lifted, radius doubled), and the inner hyperplane maps down through the
// two-case rule keyed on ||P_W u||.

template <class Real>
struct LiftCertificate {
  int outer_index = 0;       // i_k
  Ball<Real> inner_ball;     // tilde B_k
  HyperplaneNbhd<Real> inner_nbhd;
  bool case_split_high = false;  // ||P_W u|| > 1/sqrt(2)
  bool compatible = false;       // center projects, radius doubled
  bool contained = false;        // inside previous inner ball
  bool disjoint = false;         // clear of the previous inner neighborhood
  bool ratio_ok = false;         // inner Bob ratio >= beta tilde
};

template <class Real>
struct LiftState {
  std::vector<LiftCertificate<Real>> certificates;
  std::vector<Ball<Real>> inner_balls;
  std::vector<HyperplaneNbhd<Real>> inner_nbhds;
  Transcript<Real> inner_transcript;
  int last_outer_index = -1;
  bool started = false;
};

// embed: W-coordinates -> V-coordinates (orthonormal columns), so
// P_W(v) = embed^T v.
template <class Real>
struct LiftedStrategy {
  Eigen::MatrixXd embed;
  double beta;
  double domain_radius;  // inner balls must fit inside this ball around 0 in V
  AliceStrategy<Real> inner_alice;
  std::shared_ptr<LiftState<Real>> state = std::make_shared<LiftState<Real>>();

  double beta_tilde() const { return beta * beta / 6.0; }

  Vec<Real> lift_point(const Vec<Real>& w) const {
    const int dv = static_cast<int>(embed.rows());
    Vec<Real> v = Vec<Real>::Zero(dv);
    for (int i = 0; i < dv; ++i)
      for (int j = 0; j < embed.cols(); ++j) v(i) += Real(embed(i, j)) * w(j);
    return v;
  }

  Vec<Real> project_point(const Vec<Real>& v) const {
    const int dw = static_cast<int>(embed.cols());
    Vec<Real> w = Vec<Real>::Zero(dw);
    for (int j = 0; j < dw; ++j)
      for (int i = 0; i < embed.rows(); ++i) w(j) += Real(embed(i, j)) * v(i);
    return w;
  }

  AliceMove<Real> operator()(const Transcript<Real>& t) {
    const Ball<Real>& outer = t.current_ball();
    const int i = t.rounds();
    LiftState<Real>& s = *state;
    const Real b = Real(beta);
    const Real bt = Real(beta_tilde());

    auto dummy_move = [&]() {
      // a legal far-away neighborhood: blocks nothing
      HyperplaneNbhd<Real> n;
      n.normal = Vec<Real>::Zero(outer.center.size());
      n.normal(0) = Real(1);
      n.offset = n.normal.dot(outer.center) + Real(4) * outer.radius;
      n.halfwidth = b * outer.radius;
      AliceMove<Real> move;
      move.nbhds.push_back(n);
      return move;
    };

    // the next inner round opens once the outer radius falls to beta r_{i_k}/6
    const bool qualifies =
        !s.started ||
        outer.radius <= b * (s.inner_balls.back().radius / Real(2)) / Real(6);
    if (s.started && !qualifies) return dummy_move();
    if (!s.started) {
      // require the compatible ball to fit in the declared domain of V
      Ball<Real> inner{lift_point(outer.center), outer.radius * Real(2)};
      if (inner.center.norm() + inner.radius > Real(domain_radius))
        throw IncompatibleGeometry("lift: compatible ball exits the inner domain");
      s.inner_transcript.variant = GameVariant::absolute(beta_tilde());
      s.inner_transcript.bob_balls.push_back(inner);
      s.inner_balls.push_back(inner);
      s.started = true;
    } else {
      // Bob's brother: compatible ball inside tilde B_k minus the blocked slab
      const Ball<Real>& prev_inner = s.inner_balls.back();
      const HyperplaneNbhd<Real>& prev_nbhd = s.inner_nbhds.back();
      const Ball<Real>& prev_outer = t.bob_balls[s.last_outer_index];
      Ball<Real> inner;
      inner.radius = outer.radius * Real(2);
      const Vec<Real> rel = outer.center - prev_outer.center;  // in W coords
      Vec<Real> lifted_rel = lift_point(rel);
      const Vec<Real> u = prev_nbhd.normal;
      Vec<Real> pw_u = lift_point(project_point(u));
      const Real pw_norm = pw_u.norm();
      if (pw_norm * pw_norm <= Real(0.5)) {
        // case (1): displace along the out-of-W component of the normal
        Vec<Real> out_comp = u - pw_u;
        Vec<Real> dir = out_comp / out_comp.norm();
        Vec<Real> v_plus = prev_inner.center + lifted_rel + dir * prev_outer.radius;
        Vec<Real> v_minus = prev_inner.center + lifted_rel - dir * prev_outer.radius;
        inner.center = prev_nbhd.dist(v_plus) >= prev_nbhd.dist(v_minus) ? v_plus : v_minus;
      } else {
        // case (2): lift in place, keeping the previous orthogonal offset
        inner.center = prev_inner.center + lifted_rel;
      }
      // certificate for this round
      LiftCertificate<Real> cert;
      cert.outer_index = i;
      cert.inner_ball = inner;
      cert.inner_nbhd = prev_nbhd;
      cert.case_split_high = pw_norm * pw_norm > Real(0.5);
      cert.compatible =
          (project_point(inner.center) - outer.center).norm() <=
              Real(1e-12) * t.r0() &&
          inner.radius == outer.radius * Real(2);
      cert.contained = detail::ball_inside(inner, prev_inner, Real(1e-12) * t.r0());
      HyperplaneNbhd<Real> blocked = prev_nbhd;
      blocked.halfwidth = bt * prev_inner.radius;  // = 2 beta~ r
      cert.disjoint = detail::ball_disjoint(inner, blocked, Real(1e-12) * t.r0());
      cert.ratio_ok = inner.radius >= bt * prev_inner.radius - Real(1e-12) * t.r0();
      s.certificates.push_back(cert);

      s.inner_transcript.bob_balls.push_back(inner);
      s.inner_balls.push_back(inner);
    }
    s.last_outer_index = i;

    // sister move on the inner game
    AliceMove<Real> inner_move = inner_alice(s.inner_transcript);
    s.inner_transcript.alice_moves.push_back(inner_move);
    const HyperplaneNbhd<Real>& ln = inner_move.nbhds.at(0);
    s.inner_nbhds.push_back(ln);

    // map the inner hyperplane down by the two-case rule
    AliceMove<Real> move;
    HyperplaneNbhd<Real> out_n;
    Vec<Real> pw_u_w = project_point(ln.normal);
    const Real pw_norm = pw_u_w.norm();
    if (pw_norm * pw_norm <= Real(0.5)) {
      move = dummy_move();  // arbitrary hyperplane branch
      move.nbhds[0].halfwidth = b * outer.radius;
      return move;
    }
    out_n.normal = pw_u_w / pw_norm;
    out_n.offset = ln.offset / pw_norm;
    out_n.halfwidth = b * outer.radius;
    move.nbhds.push_back(out_n);
    return move;
  }
};

// Builds the {qualifying-index} predicate used by the combinator: the next
// inner round starts when the outer radius falls to beta r_{i_k} / 6.
template <class Real>
AliceStrategy<Real> lift_strategy(Eigen::MatrixXd embed, double beta,
                                  double domain_radius, AliceStrategy<Real> inner,
                                  std::shared_ptr<LiftState<Real>>* state_out = nullptr) {
  LiftedStrategy<Real> lifted{std::move(embed), beta, domain_radius, std::move(inner)};
  if (state_out) *state_out = lifted.state;
  return lifted;
}

}  // namespace hawk::games
