#pragma once

// Hyperplanes in a subspace: given a transformation T, a subspace U and a
// target tangent subspace W, construct the hyperplane L_{W,n} in U whose
// neighborhood absorbs T^{-n} of a W-neighborhood, and measure the constant
// in dist(T^n u, W) >= c ||T^n|| dist(u, L_{W,n}) empirically.

#include "hawk/core.hpp"
#include "hawk/spectral.hpp"

#include <optional>
#include <vector>

namespace hawk::avoidance {

using spectral::NormalizedPowers;
using spectral::SpectralData;

// Orthonormal column basis of a subspace of R^d. An empty basis is the zero
// subspace.
struct Subspace {
  MatrixXd basis;

  static Subspace zero(int ambient_dim) { return Subspace{MatrixXd(ambient_dim, 0)}; }

  static Subspace full(int ambient_dim) {
    return Subspace{MatrixXd::Identity(ambient_dim, ambient_dim)};
  }

  static Subspace span_of(const MatrixXd& columns, double tol = 1e-12) {
    if (columns.cols() == 0) return Subspace{MatrixXd(columns.rows(), 0)};
    Eigen::JacobiSVD<MatrixXd> svd(columns, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > tol * std::max(sv(0), 1.0)) ++rank;
    return Subspace{svd.matrixU().leftCols(rank)};
  }

  int dim() const { return static_cast<int>(basis.cols()); }
  int ambient_dim() const { return static_cast<int>(basis.rows()); }

  bool orthonormal(double tol = 1e-9) const {
    if (dim() == 0) return true;
    return (basis.transpose() * basis - MatrixXd::Identity(dim(), dim()))
               .cwiseAbs()
               .maxCoeff() < tol;
  }

  MatrixXd projector() const {
    if (dim() == 0) return MatrixXd::Zero(ambient_dim(), ambient_dim());
    return basis * basis.transpose();
  }

  MatrixXd orthogonal_projector() const {
    return MatrixXd::Identity(ambient_dim(), ambient_dim()) - projector();
  }

  double dist(const VectorXd& v) const { return (v - basis * (basis.transpose() * v)).norm(); }

  bool contains(const VectorXd& v, double tol = 1e-9) const {
    return dist(v) <= tol * std::max(1.0, v.norm());
  }
};

inline int intersection_dim(const Subspace& a, const Subspace& b, double tol = 1e-9) {
  if (a.dim() == 0 || b.dim() == 0) return 0;
  MatrixXd joint(a.ambient_dim(), a.dim() + b.dim());
  joint << a.basis, b.basis;
  Eigen::JacobiSVD<MatrixXd> svd(joint);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * std::max(sv(0), 1.0)) ++rank;
  return a.dim() + b.dim() - rank;
}

// true iff the column space of m lies inside sub
inline bool column_space_inside(const MatrixXd& m, const Subspace& sub, double tol = 1e-9) {
  if (m.cols() == 0) return true;
  const MatrixXd residual = m - sub.basis * (sub.basis.transpose() * m);
  return residual.cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

struct AvoidanceHyperplane {
  VectorXd normal;   // unit vector in U; L = normal^perp intersected with U
  int n = 0;         // iterate index
  VectorXd witness;  // chosen unit vector in W^perp
  double c_emp = 0;  // empirically measured inequality constant
};

struct ConditionReport {
  struct PerTarget {
    bool condition_i = false;        // dim(W ^ Im p(T)) < dim(p(T)U)
    bool condition_ii = false;       // unique maximal cluster and p(T)U not in W
    bool non_containment = false;    // T^n U not in W for all n <= n_max
    int first_containment_n = -1;    // witness n when non_containment fails
  };
  std::vector<PerTarget> targets;
  bool any_condition_all() const {
    for (const auto& t : targets)
      if (!((t.condition_i || t.condition_ii) && t.non_containment)) return false;
    return true;
  }
};

// Pure report of the two spectral conditions plus iterate non-containment.
inline ConditionReport check_conditions(const MatrixXd& t, const SpectralData& spec,
                                        const Subspace& u,
                                        const std::vector<Subspace>& w_family,
                                        int n_max) {
  if (u.dim() == 0) throw std::invalid_argument("check_conditions: U must be nonzero");
  ConditionReport report;
  auto mex = spectral::max_expanding(t, spec);
  const Subspace im_pt = Subspace{mex.image_basis};
  const Subspace ptu = Subspace::span_of(mex.p_poly(t) * u.basis);
  const auto powers = NormalizedPowers::compute(t, n_max);

  for (const auto& w : w_family) {
    ConditionReport::PerTarget entry;
    entry.condition_i = intersection_dim(w, im_pt) < ptu.dim();
    entry.condition_ii =
        (spec.max_cluster_count == 1) && !column_space_inside(ptu.basis, w);
    entry.non_containment = true;
    for (int n = 0; n <= n_max; ++n) {
      if (column_space_inside(powers.p[n] * u.basis, w)) {
        entry.non_containment = false;
        entry.first_containment_n = n;
        break;
      }
    }
    report.targets.push_back(entry);
  }
  return report;
}

// Hyperplane from the adjoint construction: the witness maximizes
// ||P_U (T*)^n v|| over unit v in W^perp, computed as the top right-singular
// vector of P_U (T*)^n P_{W^perp}; the normal is the normalized image.
inline AvoidanceHyperplane construct_normal(const MatrixXd& t, const SpectralData& spec,
                                            const Subspace& u, const Subspace& w, int n,
                                            const NormalizedPowers* powers = nullptr,
                                            double tol = 1e-12) {
  (void)spec;
  const int d = static_cast<int>(t.rows());
  std::optional<NormalizedPowers> own;
  if (!powers) {
    own = NormalizedPowers::compute(t, n);
    powers = &*own;
  }
  const MatrixXd adj_n = powers->p[n].transpose();  // (T*)^n up to scale
  const MatrixXd p_u = u.projector();
  MatrixXd p_wperp = MatrixXd::Identity(d, d) - w.projector();
  const MatrixXd op = p_u * adj_n * p_wperp;
  Eigen::JacobiSVD<MatrixXd> svd(op, Eigen::ComputeFullU | Eigen::ComputeFullV);
  AvoidanceHyperplane out;
  out.n = n;
  out.witness = svd.matrixV().col(0);
  const VectorXd image = p_u * (adj_n * out.witness);
  // ||T^n|| cancels in the scaled power representation: ||p[n]|| = 1
  if (image.norm() <= tol * opnorm(powers->p[n]))
    throw DegenerateImage("construct_normal: projected adjoint image below tolerance");
  out.normal = image.normalized();
  return out;
}

// c_emp = min over n and unit samples u in U of
//   dist(T^n u, W) / (||T^n|| dist(u, L_{W,n})),
// skipping samples within `margin` of the hyperplane.
inline double empirical_constant(const MatrixXd& t, const SpectralData& spec,
                                 const Subspace& u, const Subspace& w, int n_lo, int n_hi,
                                 int sample_count, CounterRng rng,
                                 double margin = 1e-6) {
  const auto powers = NormalizedPowers::compute(t, n_hi);
  double c = std::numeric_limits<double>::infinity();
  for (int n = n_lo; n <= n_hi; ++n) {
    auto plane = construct_normal(t, spec, u, w, n, &powers);
    const MatrixXd& pn = powers.p[n];
    const double pn_norm = opnorm(pn);
    for (int k = 0; k < sample_count; ++k) {
      // unit sample inside U
      VectorXd coeff = rng.unit_vector(u.dim());
      VectorXd sample = u.basis * coeff;
      const double dist_plane = std::abs(plane.normal.dot(sample));
      if (dist_plane < margin) continue;
      const double dist_target = w.dim() == 0
                                     ? (pn * sample).norm()
                                     : (pn * sample - w.basis * (w.basis.transpose() * (pn * sample))).norm();
      c = std::min(c, dist_target / (pn_norm * dist_plane));
    }
  }
  return c;
}

// Affine slab in U certified to contain T^{-n}(W_affine^{(width)}) in U: the
// set { u : |<normal, u - anchor>| < width / (c ||T^n||) }.
struct Slab {
  VectorXd normal;
  VectorXd anchor;
  double halfwidth = 0.0;

  double offset() const { return normal.dot(anchor); }
  double dist(const VectorXd& v) const { return std::abs(normal.dot(v - anchor)); }
  bool contains(const VectorXd& v) const { return dist(v) < halfwidth; }
};

inline Slab preimage_slab(const MatrixXd& t, const SpectralData& spec, const Subspace& u,
                          const Subspace& w_direction, int n, double width, double c_emp,
                          const std::optional<VectorXd>& anchor,
                          const NormalizedPowers* powers = nullptr) {
  if (!anchor.has_value())
    throw NoAnchor("preimage_slab: caller must supply a point of T^{-n}(W_affine) in U");
  std::optional<NormalizedPowers> own;
  if (!powers) {
    own = NormalizedPowers::compute(t, n);
    powers = &*own;
  }
  auto plane = construct_normal(t, spec, u, w_direction, n, powers);
  const double log_tn = powers->log_norm(n);
  Slab slab;
  slab.normal = plane.normal;
  slab.anchor = *anchor;
  // width / (c ||T^n||) in log domain
  slab.halfwidth = width <= 0.0 ? 0.0 : std::exp(std::log(width) - std::log(c_emp) - log_tn);
  return slab;
}

}  // namespace hawk::avoidance
