#pragma once

// The explicit winning strategy for torus avoidance games: stage-partitioned
// hyperplane-percentage offers built from exact preimage anchors and the
// adjoint hyperplane construction, plus finite-depth verification of the
// resulting transcripts.

#include "hawk/avoidance.hpp"
#include "hawk/core.hpp"
#include "hawk/dynamics.hpp"
#include "hawk/games.hpp"
#include "hawk/spectral.hpp"

#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace hawk::torus {

using dynamics::ChartBall;
using dynamics::Rational;
using dynamics::RationalVector;
using dynamics::TorusMap;
using games::AliceMove;
using games::AliceStrategy;
using games::HyperplaneNbhd;
using games::Schedule;
using games::Transcript;
using games::Vec;

struct TorusTarget {
  TorusMap map;
  std::vector<RationalVector> targets;  // the avoided points Z
  double beta = 0.15;
  Schedule schedule;
  double rho = 0.0;
  int s = 1;
  double growth_c = 1.0;  // fitted growth constant, inflated for safety
  double c_emp = 1.0;     // empirical hyperplane-inequality constant
  double r0_budget = 0.0;
  spectral::SpectralData spec;

  double eps() const { return schedule.eps; }
  int ell() const { return schedule.ell; }
};

// minimal torus separation within Z (distinct points and lattice branches)
inline double target_separation(const std::vector<RationalVector>& targets) {
  double sep = 1.0;  // distinct branches of one point differ by >= 1
  for (std::size_t a = 0; a < targets.size(); ++a)
    for (std::size_t b = a + 1; b < targets.size(); ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < targets[a].size(); ++i) {
        double w = std::abs(static_cast<double>(Rational(targets[a][i] - targets[b][i])));
        w = w - std::floor(w);
        if (w > 0.5) w = 1.0 - w;
        acc += w * w;
      }
      sep = std::min(sep, std::sqrt(acc));
    }
  return sep;
}

// Assembles the target data: spectral analysis, fitted growth constant,
// stage schedule to the requested depth, empirical inequality constant, and
// the initial-radius budget from the target separation.
inline TorusTarget make_torus_target(const TorusMap& map,
                                     std::vector<RationalVector> targets, double beta,
                                     int depth) {
  TorusTarget out;
  out.map = map;
  out.targets = std::move(targets);
  out.beta = beta;
  if (boost::multiprecision::abs(map.det_exact()) != 1)
    throw std::invalid_argument("make_torus_target: |det| = 1 required");

  const MatrixXd md = map.as_double();
  out.spec = spectral::analyze(md);
  out.rho = out.spec.rho;
  out.s = out.spec.s;
  if (out.rho <= 1.0)
    throw std::invalid_argument("make_torus_target: expanding map required");

  auto prof = spectral::growth_profile(md, out.spec, 60);
  out.growth_c = prof.fitted_c * 1.1;

  const int ell = games::schedule_ell(out.rho, out.growth_c, beta);
  // norms far enough out that every stage reachable at this depth has its
  // window fully tabulated
  const double stride = ell * std::log(1.0 / beta);
  const int k_cap = depth + 2;
  const int n_horizon = static_cast<int>(std::ceil(k_cap * stride / std::log(out.rho))) + 4;
  auto prof_full = spectral::growth_profile(md, out.spec, n_horizon);
  std::vector<double> log_norms{0.0};
  for (const auto& s : prof_full.samples) log_norms.push_back(s.log_norm);
  out.schedule = games::make_schedule(log_norms, out.rho, out.growth_c, beta);

  auto u = avoidance::Subspace::full(map.dim());
  auto w = avoidance::Subspace::zero(map.dim());
  out.c_emp = avoidance::empirical_constant(md, out.spec, u, w, 1, 12, 300, CounterRng(2));

  out.r0_budget = target_separation(out.targets) / 16.0;
  return out;
}

// exact conversion Rational -> Real (Real is a binary float type)
template <class Real>
Real rational_to_real(const Rational& q) {
  return Real(numerator(q).convert_to<Real>() / denominator(q).convert_to<Real>());
}

template <class Real>
struct StageOffer {
  int n = 0;
  HyperplaneNbhd<Real> nbhd;
  RationalVector anchor;
};

template <class Real>
struct AliceTorusState {
  int max_stage = -1;
  std::map<int, std::vector<StageOffer<Real>>> stage_offers;
  std::vector<int> stage_opening_index;  // stage_opening_index[k] = i_k (-1 unseen)
  spectral::NormalizedPowers powers;
  int powers_n = -1;
};

// Stage index of a ball radius: the k with beta^{ell(k+1)} r0 < r <= beta^{ell k} r0.
template <class Real>
int stage_of_radius(const Real& radius, const Real& r0, double beta, int ell) {
  int k = 0;
  Real threshold = r0;
  const Real factor = [&] {
    Real f(1);
    for (int j = 0; j < ell; ++j) f *= Real(beta);
    return f;
  }();
  while (radius <= threshold * factor && k < 100000) {
    threshold *= factor;
    ++k;
  }
  return k;
}

// Stage-opening indices recomputed from a transcript's radii alone.
template <class Real>
std::vector<int> stage_openings(const Transcript<Real>& t, int ell, double beta) {
  std::vector<int> openings;
  const Real r0 = t.r0();
  int max_stage = -1;
  for (std::size_t i = 0; i < t.bob_balls.size(); ++i) {
    const int k = stage_of_radius(t.bob_balls[i].radius, r0, beta, ell);
    while (static_cast<int>(openings.size()) <= k) openings.push_back(-1);
    if (k > max_stage) {
      openings[k] = static_cast<int>(i);
      max_stage = k;
    }
  }
  return openings;
}

namespace detail {

inline dynamics::BigInt round_rational(const Rational& q) {
  return numerator(dynamics::floor_scalar(Rational(q + Rational(1, 2))));
}

struct Anchor {
  RationalVector point;      // exact preimage of a target under map^n
  Rational image_dist2;      // squared distance of M^n(center) to its branch
};

// The preimage anchor nearest the ball center: round M^n c - z to the
// nearest integer branch and pull it back exactly. Among several targets the
// one with the smallest image residue wins; at most one can be relevant when
// the ball image has diameter below the target separation.
template <class Real>
Anchor anchor_for(const TorusTarget& target, int n, const games::Ball<Real>& ball,
                  const dynamics::BigIntMatrix& mn,
                  const dynamics::RationalMatrix& mn_inv) {
  const int d = target.map.dim();
  RationalVector center(d);
  for (int i = 0; i < d; ++i)
    center[i] = dynamics::to_rational(static_cast<double>(ball.center(i)));
  RationalVector image(d);
  for (int i = 0; i < d; ++i) {
    Rational acc = 0;
    for (int j = 0; j < d; ++j) acc += Rational(mn(i, j)) * center[j];
    image[i] = acc;
  }
  std::optional<Anchor> best;
  for (const auto& z : target.targets) {
    RationalVector shifted(d);
    Rational dist2 = 0;
    for (int i = 0; i < d; ++i) {
      const Rational residue = image[i] - z[i];
      const dynamics::BigInt branch = round_rational(residue);
      shifted[i] = z[i] + Rational(branch);
      const Rational off = residue - Rational(branch);
      dist2 += off * off;
    }
    if (!best || dist2 < best->image_dist2) {
      Anchor a;
      a.point = mn_inv.apply(shifted);
      a.image_dist2 = dist2;
      best = a;
    }
  }
  return *best;
}

}  // namespace detail

// Alice's strategy: at each stage-opening ball B_{i_k}, offer one slab per
// iterate n in the stage's norm window, anchored at the nearest exact
// preimage of a target point; afterwards re-offer whichever stage slabs
// still meet the current ball. Iterates with no preimage anchor near the
// ball are vacuously safe and produce no offer.
template <class Real>
AliceStrategy<Real> alice_torus_strategy(
    const TorusTarget& target,
    std::shared_ptr<AliceTorusState<Real>>* state_out = nullptr) {
  auto state = std::make_shared<AliceTorusState<Real>>();
  if (state_out) *state_out = state;
  const MatrixXd md = target.map.as_double();

  return [target, state, md](const Transcript<Real>& t) -> AliceMove<Real> {
    AliceTorusState<Real>& s = *state;
    const games::Ball<Real>& ball = t.current_ball();
    const Real r0 = t.r0();
    const int i = t.rounds();
    const int ell = target.ell();
    const double eps = target.eps();
    const Real tol = games::referee_tol(t);

    const int k = stage_of_radius(ball.radius, r0, target.beta, ell);

    AliceMove<Real> move;
    if (k > s.max_stage) {
      // stage opening: build the window's offers
      s.max_stage = k;
      while (static_cast<int>(s.stage_opening_index.size()) <= k)
        s.stage_opening_index.push_back(-1);
      s.stage_opening_index[k] = i;
      std::vector<StageOffer<Real>> offers;
      if (k < static_cast<int>(target.schedule.windows.size())) {
        for (int n : target.schedule.windows[k]) {
          auto mn = dynamics::bigint_power(target.map.as_bigint(), n);
          auto mn_inv = dynamics::rational_inverse(mn);
          auto anchor = detail::anchor_for(target, n, ball, mn, mn_inv);
          if (s.powers_n < n) {
            s.powers = spectral::NormalizedPowers::compute(md, n + 8);
            s.powers_n = n + 8;
          }
          auto plane = avoidance::construct_normal(
              md, target.spec, avoidance::Subspace::full(target.map.dim()),
              avoidance::Subspace::zero(target.map.dim()), n, &s.powers);
          StageOffer<Real> offer;
          offer.n = n;
          offer.anchor = anchor.point;
          offer.nbhd.normal = Vec<Real>::Zero(plane.normal.size());
          for (int j = 0; j < plane.normal.size(); ++j)
            offer.nbhd.normal(j) = Real(plane.normal(j));
          // the offset needs the anchor at full precision, not via double
          Real off(0);
          for (int j = 0; j < plane.normal.size(); ++j)
            off += offer.nbhd.normal(j) * rational_to_real<Real>(anchor.point[j]);
          offer.nbhd.offset = off;
          offer.nbhd.halfwidth = Real(eps) * ball.radius;
          // a slab missing the ball is vacuously cleared: every point of the
          // nested balls already keeps the full halfwidth clearance
          if (!games::detail::ball_disjoint(ball, offer.nbhd, tol))
            offers.push_back(offer);
        }
      }
      s.stage_offers[k] = offers;
      for (const auto& o : offers) move.nbhds.push_back(o.nbhd);
      return move;
    }

    // within the stage: re-offer exactly the slabs that meet B_i
    auto it = s.stage_offers.find(k);
    if (it != s.stage_offers.end()) {
      for (const auto& o : it->second) {
        if (!games::detail::ball_disjoint(ball, o.nbhd, tol))
          move.nbhds.push_back(o.nbhd);
      }
    }
    return move;
  };
}

// steer oracle for the target-seeking adversary: the shallowest preimage
// anchor near the ball
template <class Real>
std::function<std::optional<Vec<Real>>(const games::Ball<Real>&)> preimage_steer(
    const TorusTarget& target, int n_cap = 24) {
  return [target, n_cap](const games::Ball<Real>& ball) -> std::optional<Vec<Real>> {
    std::optional<Vec<Real>> best;
    Real best_dist(0);
    for (int n = 0; n <= n_cap; ++n) {
      auto mn = dynamics::bigint_power(target.map.as_bigint(), n);
      auto mn_inv = dynamics::rational_inverse(mn);
      auto anchor = detail::anchor_for(target, n, ball, mn, mn_inv);
      Vec<Real> v(static_cast<int>(anchor.point.size()));
      for (int i = 0; i < v.size(); ++i) v(i) = rational_to_real<Real>(anchor.point[i]);
      const Real dist = (v - ball.center).norm();
      if (!best || dist < best_dist) {
        best = v;
        best_dist = dist;
      }
    }
    return best;
  };
}

// ---------------------------------------------------------------------------
// Transcript verification

struct StageClearingReport {
  bool ok = true;
  int failed_stage = -1;
  int failed_n = -1;
  int stages_checked = 0;
};

// In a completed transcript, the ball B_{i_k + ell} must be disjoint from
// every neighborhood offered at i_k. Checkable from the transcript alone.
template <class Real>
StageClearingReport check_stage_clearing(const Transcript<Real>& t,
                                         const TorusTarget& target) {
  StageClearingReport report;
  const int ell = target.ell();
  auto openings = stage_openings(t, ell, target.beta);
  const Real tol = games::referee_tol(t);
  for (int k = 0; k < static_cast<int>(openings.size()); ++k) {
    const int ik = openings[k];
    if (ik < 0) continue;
    const int check_at = ik + ell;
    if (check_at >= static_cast<int>(t.bob_balls.size())) continue;
    if (ik >= t.rounds()) continue;
    ++report.stages_checked;
    const auto& offers = t.alice_moves[ik].nbhds;
    for (std::size_t j = 0; j < offers.size(); ++j) {
      if (!games::detail::ball_disjoint(t.bob_balls[check_at], offers[j], tol)) {
        report.ok = false;
        report.failed_stage = k;
        report.failed_n = static_cast<int>(j);
        return report;
      }
    }
  }
  return report;
}

struct AvoidanceReport {
  bool ok = true;
  double min_distance = std::numeric_limits<double>::infinity();
  int min_distance_n = -1;
  int bits_used = 0;
  std::vector<int> covered_stages;
  std::vector<int> checked_n;
};

namespace detail {

template <class BF, class Real>
AvoidanceReport verify_with(const Transcript<Real>& t, const TorusTarget& target,
                            const std::vector<int>& ns, double delta, int bits) {
  AvoidanceReport report;
  report.bits_used = bits;
  if (ns.empty()) return report;
  const int n_deep = *std::max_element(ns.begin(), ns.end());

  // the limit estimate is the final center, an exact binary-float point
  std::vector<BF> start(t.current_ball().center.size());
  for (std::size_t i = 0; i < start.size(); ++i)
    start[i] = BF(t.bob_balls.back().center(static_cast<int>(i)));
  auto point = dynamics::make_torus_point<BF>(start, BF(0));
  auto orbit = dynamics::torus_orbit<BF>(target.map, point, n_deep,
                                         std::numeric_limits<BF>::epsilon());

  for (int n : ns) {
    // the arithmetic error bar propagated to step n must stay below delta/2
    if (orbit[n].error_bar >= BF(delta) / 2)
      throw PrecisionExhausted("verify_avoidance: propagated error bar exceeds delta/2");
    for (const auto& z : target.targets) {
      std::vector<BF> zf(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) zf[i] = rational_to_real<BF>(z[i]);
      const double dist =
          static_cast<double>(dynamics::torus_distance(orbit[n].coords, zf));
      if (dist < report.min_distance) {
        report.min_distance = dist;
        report.min_distance_n = n;
      }
      if (dist < delta) report.ok = false;
    }
    report.checked_n.push_back(n);
  }
  return report;
}

}  // namespace detail

// True iff the orbit of the limit estimate stays delta-far from every target
// for each n in a covered stage window, computed at precision
// >= max(min_bits, n log2(rho) + 64).
template <class Real>
AvoidanceReport verify_avoidance(const Transcript<Real>& t, const TorusTarget& target,
                                 int n_max, double delta, int min_bits = 256) {
  auto openings = stage_openings(t, target.ell(), target.beta);
  std::vector<int> covered, ns;
  for (int k = 0; k < static_cast<int>(openings.size()); ++k) {
    if (openings[k] < 0) continue;
    if (openings[k] + target.ell() >= static_cast<int>(t.bob_balls.size())) continue;
    covered.push_back(k);
    if (k < static_cast<int>(target.schedule.windows.size()))
      for (int n : target.schedule.windows[k])
        if (n <= n_max) ns.push_back(n);
  }

  int n_deep = 0;
  for (int n : ns) n_deep = std::max(n_deep, n);
  const int need = static_cast<int>(std::ceil(n_deep * std::log2(target.rho))) + 64;
  const int bits = std::max(min_bits, need);

  AvoidanceReport report;
  if (bits <= 128)
    report = detail::verify_with<dynamics::BigFloat128>(t, target, ns, delta, 128);
  else if (bits <= 256)
    report = detail::verify_with<dynamics::BigFloat256>(t, target, ns, delta, 256);
  else if (bits <= 512)
    report = detail::verify_with<dynamics::BigFloat512>(t, target, ns, delta, 512);
  else if (bits <= 1024)
    report = detail::verify_with<dynamics::BigFloat1024>(t, target, ns, delta, 1024);
  else if (bits <= 2048)
    report = detail::verify_with<dynamics::BigFloat2048>(t, target, ns, delta, 2048);
  else
    throw PrecisionExhausted("verify_avoidance: precision budget above 2048 bits");
  report.covered_stages = covered;
  return report;
}

}  // namespace hawk::torus
