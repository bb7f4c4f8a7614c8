#pragma once

// Matrix-group infrastructure: exp/log, adjoint action, brackets,
// horospherical subalgebras of sl_n, and sampling probes for the local
// multiplication estimates used by the game strategy.

#include "hawk/avoidance.hpp"
#include "hawk/core.hpp"
#include "hawk/spectral.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <vector>

namespace hawk::matrixlie {

using avoidance::Subspace;

inline MatrixXd bracket(const MatrixXd& a, const MatrixXd& b) { return a * b - b * a; }

inline double frobenius_inner(const MatrixXd& a, const MatrixXd& b) {
  return (a.cwiseProduct(b)).sum();
}

// Scaling-and-squaring exponential (Pade, via Eigen).
inline MatrixXd mexp(const MatrixXd& x) {
  require_finite(x, "mexp input");
  return x.exp();
}

// Inverse scaling-and-squaring logarithm; requires the spectrum of g to stay
// off the closed negative real axis.
inline MatrixXd mlog(const MatrixXd& g) {
  require_finite(g, "mlog input");
  Eigen::EigenSolver<MatrixXd> es(g);
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const auto lambda = es.eigenvalues()(i);
    if (lambda.real() <= 0.0 && std::abs(lambda.imag()) <= 1e-12 * (1.0 + std::abs(lambda.real())))
      throw LogDomain("mlog: eigenvalue on the closed negative real axis");
  }
  return g.log();
}

// A matrix Lie algebra presented by an orthonormal basis under the Frobenius
// inner product. Coordinates are taken against that basis.
struct MatrixAlgebra {
  int n = 0;  // matrices are n x n
  std::vector<MatrixXd> basis;

  int dim() const { return static_cast<int>(basis.size()); }

  static MatrixAlgebra sl(int n) {
    MatrixAlgebra a;
    a.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) {
          MatrixXd e = MatrixXd::Zero(n, n);
          e(i, j) = 1.0;
          a.basis.push_back(e);
        }
    // traceless diagonal part, Gram-Schmidt orthonormalized
    std::vector<MatrixXd> diag;
    for (int i = 0; i + 1 < n; ++i) {
      MatrixXd h = MatrixXd::Zero(n, n);
      h(i, i) = 1.0;
      h(i + 1, i + 1) = -1.0;
      for (const auto& prev : diag) h -= frobenius_inner(h, prev) * prev;
      h /= h.norm();
      diag.push_back(h);
    }
    for (auto& h : diag) a.basis.push_back(std::move(h));
    return a;
  }

  // traceless diagonal matrices only: an abelian subalgebra of sl_n
  static MatrixAlgebra diagonal_traceless(int n) {
    MatrixAlgebra full = sl(n);
    MatrixAlgebra a;
    a.n = n;
    for (auto& b : full.basis)
      if (b.isDiagonal(1e-14)) a.basis.push_back(b);
    return a;
  }

  VectorXd coords(const MatrixXd& m) const {
    VectorXd v(dim());
    for (int i = 0; i < dim(); ++i) v(i) = frobenius_inner(basis[i], m);
    return v;
  }

  MatrixXd element(const VectorXd& v) const {
    MatrixXd m = MatrixXd::Zero(n, n);
    for (int i = 0; i < dim(); ++i) m += v(i) * basis[i];
    return m;
  }

  // Ad(g): x -> g x g^{-1} as a dim x dim matrix in coordinates
  MatrixXd adjoint_of(const MatrixXd& g) const {
    const MatrixXd ginv = g.inverse();
    MatrixXd out(dim(), dim());
    for (int j = 0; j < dim(); ++j) out.col(j) = coords(g * basis[j] * ginv);
    return out;
  }

  // ad(v): x -> [v, x] in coordinates
  MatrixXd ad_of(const MatrixXd& v) const {
    MatrixXd out(dim(), dim());
    for (int j = 0; j < dim(); ++j) out.col(j) = coords(bracket(v, basis[j]));
    return out;
  }
};

// One-parameter subgroup g_t = exp(t v).
struct OneParamFlow {
  MatrixXd generator;

  MatrixXd at(double t) const { return mexp(t * generator); }

  // the diagonal flow e^{t/p} on the first p coordinates, e^{-t/q} on the
  // remaining q
  static OneParamFlow diagonal_pq(int p, int q) {
    const int n = p + q;
    MatrixXd v = MatrixXd::Zero(n, n);
    for (int i = 0; i < p; ++i) v(i, i) = 1.0 / p;
    for (int i = p; i < n; ++i) v(i, i) = -1.0 / q;
    return OneParamFlow{v};
  }
};

struct HorosphericalBasis {
  MatrixXd coords;              // orthonormal columns in algebra coordinates
  std::vector<MatrixXd> mats;   // the same vectors as matrices
  bool trivial = false;
};

// Expanding (|lambda| > 1) or maximally expanding subalgebra of Ad g_{+-1}.
inline HorosphericalBasis horospherical(const MatrixAlgebra& algebra,
                                        const OneParamFlow& flow, int sign,
                                        bool maximal, double tol = 1e-9) {
  const MatrixXd g1 = flow.at(sign >= 0 ? 1.0 : -1.0);
  const MatrixXd ad = algebra.adjoint_of(g1);
  auto spec = spectral::analyze(ad, tol);
  HorosphericalBasis out;
  if (spec.rho <= 1.0 + spec.tol) {
    out.trivial = true;
    out.coords = MatrixXd(algebra.dim(), 0);
    return out;
  }
  if (maximal) {
    auto mex = spectral::max_expanding(ad, spec);
    out.coords = mex.image_basis;
  } else {
    // annihilate the non-expanding part: the expanding generalized
    // eigenspace sum is the column space of q(Ad) with
    // q = prod_{|lambda| <= 1} (x - lambda)^{s(lambda)}
    std::vector<std::pair<std::complex<double>, int>> roots;
    for (const auto& c : spec.clusters)
      if (std::abs(c.lambda) <= 1.0 + spec.tol) roots.push_back({c.lambda, c.index});
    if (roots.empty()) {
      out.coords = MatrixXd::Identity(algebra.dim(), algebra.dim());
    } else {
      Polynomial q = real_polynomial_from_roots(roots, 1e3 * spec.tol);
      out.coords = Subspace::span_of(q(ad), 1e-9).basis;
    }
  }
  for (int i = 0; i < out.coords.cols(); ++i)
    out.mats.push_back(algebra.element(out.coords.col(i)));
  return out;
}

struct EstimateProbe {
  double eps = 1.0;
  int sample_count = 10000;
  double tau = 1e-3;
  std::uint64_t seed = 0;
};

struct LieEstimateReport {
  // max ||x+y+z|| / min{||x||,||y||,||z||,||x+y||,||y+z||,||z+x||} with
  // z = -log(exp x exp y)
  double triple_ratio = 0.0;
  // max ||log(exp x exp y)|| / ||x+y||
  double pair_ratio = 0.0;
  // max ||log(exp x exp y exp z) - y|| / (||x|| + ||z||)
  double sandwich_ratio = 0.0;
  double max_ty_norm = 0.0;     // max ||T_y|| over sampled y
  double max_ty_residual = 0.0; // max ||log(exp x exp y) - y - T_y x|| / ||x||
};

// Monte Carlo probe of the local multiplication estimates on a matrix
// algebra: all samples live in the tau-ball.
inline LieEstimateReport probe_lie_estimates(const MatrixAlgebra& algebra,
                                             const EstimateProbe& probe) {
  CounterRng rng(probe.seed, 101);
  LieEstimateReport out;
  const int d = algebra.dim();
  auto sample = [&]() {
    VectorXd v = rng.unit_vector(d) * (probe.tau * std::pow(rng.next_double(), 1.0 / d));
    return algebra.element(v);
  };

  for (int k = 0; k < probe.sample_count; ++k) {
    const MatrixXd x = sample();
    const MatrixXd y = sample();
    const MatrixXd z = -mlog(mexp(x) * mexp(y));
    const double num = (x + y + z).norm();
    const double den = std::min({x.norm(), y.norm(), z.norm(), (x + y).norm(),
                                 (y + z).norm(), (z + x).norm()});
    if (den > 1e-300) out.triple_ratio = std::max(out.triple_ratio, num / den);

    const double pair_den = (x + y).norm();
    if (pair_den > 1e-300)
      out.pair_ratio = std::max(out.pair_ratio, mlog(mexp(x) * mexp(y)).norm() / pair_den);

    const MatrixXd z2 = sample();
    const double sand_den = x.norm() + z2.norm();
    if (sand_den > 1e-300)
      out.sandwich_ratio = std::max(
          out.sandwich_ratio,
          (mlog(mexp(x) * mexp(y) * mexp(z2)) - y).norm() / sand_den);
  }

  // T_y = id + dPhi/dx(0, y) by central differences, then the residual of
  // the linearization log(exp x exp y) = y + T_y x + O(eps ||x||)
  const double h = probe.tau * 1e-3;
  const int ty_samples = std::max(1, probe.sample_count / 100);
  for (int k = 0; k < ty_samples; ++k) {
    const MatrixXd y = sample();
    MatrixXd ty(d, d);
    for (int j = 0; j < d; ++j) {
      const MatrixXd ej = algebra.basis[j];
      const MatrixXd plus = mlog(mexp(h * ej) * mexp(y)) - h * ej - y;
      const MatrixXd minus = mlog(mexp(-h * ej) * mexp(y)) + h * ej - y;
      ty.col(j) = algebra.coords((plus - minus) / (2.0 * h));
    }
    ty += MatrixXd::Identity(d, d);
    out.max_ty_norm = std::max(out.max_ty_norm, opnorm(ty));
    for (int t = 0; t < 20; ++t) {
      const MatrixXd x = sample();
      const VectorXd xc = algebra.coords(x);
      const MatrixXd lin = y + algebra.element(ty * xc);
      const double residual = (mlog(mexp(x) * mexp(y)) - lin).norm() / x.norm();
      out.max_ty_residual = std::max(out.max_ty_residual, residual);
    }
  }
  return out;
}

struct TransversalityReport {
  bool dim_condition = false;     // dim(T_zZ ^ orbit_tangent) < h_max_dim
  bool non_containment = false;   // h_orbit_tangent not inside T_zZ
};

// Rank tests for the two tangency conditions; tangent spaces arrive as
// orthonormal bases in a common ambient space.
inline TransversalityReport transversality_check(const Subspace& orbit_tangent,
                                                 int h_max_dim,
                                                 const Subspace& h_orbit_tangent,
                                                 const Subspace& z_tangent,
                                                 double tol = 1e-9) {
  TransversalityReport out;
  out.dim_condition =
      avoidance::intersection_dim(z_tangent, orbit_tangent, tol) < h_max_dim;
  out.non_containment =
      !avoidance::column_space_inside(h_orbit_tangent.basis, z_tangent, tol);
  if (h_orbit_tangent.dim() == 0) out.non_containment = false;
  return out;
}

}  // namespace hawk::matrixlie
