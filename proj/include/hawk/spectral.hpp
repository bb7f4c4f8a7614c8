#pragma once

// Spectral analysis of a real linear map: eigenvalue clusters with their
// indices, the minimal polynomial, the interpolation polynomial p whose image
// Im p(T) carries the fastest-expanding directions, and iterate-growth
// diagnostics.

#include "hawk/core.hpp"
#include "hawk/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <optional>
#include <vector>

namespace hawk::spectral {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;

struct Cluster {
  Complex lambda;       // cluster representative
  int multiplicity;     // algebraic multiplicity
  int index;            // multiplicity of (x - lambda) in the minimal polynomial
  int max_block_count;  // number of Jordan blocks of maximal size `index`
  bool maximal;         // |lambda| = rho and index = s
};

struct SpectralData {
  std::vector<Cluster> clusters;
  double rho = 0.0;           // spectral radius
  int s = 1;                  // max index among modulus-rho clusters
  Polynomial min_poly;
  int max_cluster_count = 0;  // #{lambda : |lambda| = rho, s(lambda) = s}
  double tol = kDefaultTol;   // the scaled tolerance actually used
};

struct MaxExpansionData {
  Polynomial p_poly;
  MatrixXd image_basis;   // orthonormal columns spanning Im p(T)
  MatrixXd kernel_basis;  // orthonormal columns spanning ker p(T)
  bool trivial = false;   // set when rho <= 1
};

namespace detail {

inline int svd_rank(const MatrixXcd& m, double tol) {
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cut = tol * std::max(sv(0), 1.0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

}  // namespace detail

// Eigen-decomposition followed by modulus-tolerance clustering; the index of
// each cluster comes from rank stabilization of (T - lambda I)^k.
inline SpectralData analyze(const MatrixXd& t, double tol = kDefaultTol) {
  require_finite(t, "analyze input");
  if (t.rows() != t.cols() || t.rows() == 0)
    throw std::invalid_argument("analyze: square matrix required");
  if (tol <= 0) throw std::invalid_argument("analyze: tol must be positive");
  const int d = static_cast<int>(t.rows());

  Eigen::EigenSolver<MatrixXd> es(t);
  if (es.info() != Eigen::Success) throw NumericError("analyze: eigensolver failed");
  std::vector<Complex> eigs(es.eigenvalues().data(), es.eigenvalues().data() + d);

  const double scale = std::max(1.0, opnorm(t));
  const double ctol = tol * scale;

  // cluster by union-find with edge radius ctol
  std::vector<int> parent(d);
  for (int i = 0; i < d; ++i) parent[i] = i;
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (std::abs(eigs[i] - eigs[j]) <= ctol) parent[find(i)] = find(j);

  std::vector<Cluster> clusters;
  std::vector<int> roots;
  for (int i = 0; i < d; ++i)
    if (find(i) == i) roots.push_back(i);
  for (int r : roots) {
    Complex sum = 0.0;
    int count = 0;
    for (int i = 0; i < d; ++i)
      if (find(i) == r) {
        sum += eigs[i];
        ++count;
      }
    Complex rep = sum / static_cast<double>(count);
    if (std::abs(rep.imag()) <= ctol) rep = Complex(rep.real(), 0.0);
    clusters.push_back({rep, count, 0, 0, false});
  }

  // index s(lambda): smallest k with rank((T-lambda I)^k) stabilized; also
  // record the count of maximal Jordan blocks from the final rank drop
  const MatrixXcd tc = t.cast<Complex>();
  const MatrixXcd id = MatrixXcd::Identity(d, d);
  for (auto& c : clusters) {
    MatrixXcd shifted = tc - c.lambda * id;
    MatrixXcd power = shifted;
    int prev_rank = detail::svd_rank(power, tol);
    int rank_before = d;
    int k = 1;
    while (k <= c.multiplicity) {
      MatrixXcd next = power * shifted;
      const int next_rank = detail::svd_rank(next, tol);
      if (next_rank == prev_rank) break;
      rank_before = prev_rank;
      prev_rank = next_rank;
      power = next;
      ++k;
    }
    c.index = k;
    // #blocks of size exactly k = rank((T-l)^{k-1}) - rank((T-l)^k)
    const int rank_km1 = (k == 1) ? d : rank_before;
    c.max_block_count = rank_km1 - prev_rank;
    if (c.index < 1 || c.index > c.multiplicity)
      throw NumericError("analyze: index computation out of range");
  }

  // neighboring clusters with inconsistent rank data signal a bad tolerance
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (std::size_t j = i + 1; j < clusters.size(); ++j)
      if (std::abs(clusters[i].lambda - clusters[j].lambda) <= 2.0 * ctol &&
          clusters[i].index != clusters[j].index)
        throw ClusterAmbiguity("analyze: clusters within tolerance disagree on index");

  SpectralData out;
  out.tol = ctol;
  double rho = 0.0;
  for (const auto& c : clusters) rho = std::max(rho, std::abs(c.lambda));
  out.rho = rho;
  int s = 1;
  for (const auto& c : clusters)
    if (std::abs(std::abs(c.lambda) - rho) <= ctol) s = std::max(s, c.index);
  out.s = s;
  for (auto& c : clusters)
    c.maximal = (std::abs(std::abs(c.lambda) - rho) <= ctol) && (c.index == s);
  out.max_cluster_count =
      static_cast<int>(std::count_if(clusters.begin(), clusters.end(),
                                     [](const Cluster& c) { return c.maximal; }));

  std::vector<std::pair<Complex, int>> min_poly_roots;
  for (const auto& c : clusters) min_poly_roots.push_back({c.lambda, c.index});
  out.min_poly = real_polynomial_from_roots(min_poly_roots, 1e3 * ctol);
  out.clusters = std::move(clusters);
  return out;
}

// The unique real polynomial p with deg p < deg p0 such that
//   p == (x-lambda)^{s-1}  mod (x-lambda)^{s(lambda)}  at maximal clusters,
//   p == 0                 mod (x-lambda)^{s(lambda)}  elsewhere,
// obtained from the confluent (Hermite) interpolation system.
inline Polynomial p_polynomial(const SpectralData& spec) {
  int m = 0;
  for (const auto& c : spec.clusters) m += c.index;
  MatrixXcd a = MatrixXcd::Zero(m, m);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(m);
  int row = 0;
  const int s = spec.s;
  for (const auto& c : spec.clusters) {
    for (int j = 0; j < c.index; ++j, ++row) {
      // j-th derivative of x^i at lambda: i!/(i-j)! lambda^{i-j}
      for (int i = j; i < m; ++i) {
        double fall = 1.0;
        for (int q = 0; q < j; ++q) fall *= static_cast<double>(i - q);
        a(row, i) = fall * std::pow(c.lambda, i - j);
      }
      if (c.maximal) {
        // derivatives of (x-lambda)^{s-1} at lambda: zero except j = s-1
        if (j == s - 1) {
          double fact = 1.0;
          for (int q = 2; q <= s - 1; ++q) fact *= static_cast<double>(q);
          b(row) = fact;
        }
      }
    }
  }
  Eigen::FullPivLU<MatrixXcd> lu(a);
  lu.setThreshold(1e-10);
  if (lu.rank() < m)
    throw SingularSystem("p_polynomial: interpolation system numerically singular");
  Eigen::VectorXcd x = lu.solve(b);
  std::vector<double> coeffs(m);
  const double itol = 1e3 * spec.tol;
  for (int i = 0; i < m; ++i) {
    if (std::abs(x(i).imag()) > itol * (1.0 + std::abs(x(i).real())))
      throw SingularSystem("p_polynomial: imaginary residue above tolerance");
    coeffs[i] = x(i).real();
  }
  return Polynomial(std::move(coeffs));
}

// Orthonormal bases of Im p(T) and ker p(T). Spectral radius <= 1 yields the
// trivial flag and an empty image.
inline MaxExpansionData max_expanding(const MatrixXd& t, const SpectralData& spec) {
  MaxExpansionData out;
  const int d = static_cast<int>(t.rows());
  if (spec.rho <= 1.0 + spec.tol) {
    out.trivial = true;
    out.image_basis = MatrixXd(d, 0);
    out.kernel_basis = MatrixXd::Identity(d, d);
    return out;
  }
  out.p_poly = p_polynomial(spec);
  const MatrixXd pt = out.p_poly(t);
  Eigen::JacobiSVD<MatrixXd> svd(pt, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = std::max(sv(0), 1e-300);
  int expected_rank = 0;
  for (const auto& c : spec.clusters)
    if (c.maximal) expected_rank += c.max_block_count;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > spec.tol * smax) ++rank;
  if (rank != expected_rank) {
    // singular values straddling the threshold mean the cut is unreliable
    throw RankAmbiguity("max_expanding: p(T) rank " + std::to_string(rank) +
                        " does not match spectral count " + std::to_string(expected_rank));
  }
  out.image_basis = svd.matrixU().leftCols(rank);
  out.kernel_basis = svd.matrixV().rightCols(d - rank);
  return out;
}

struct GrowthSample {
  int n;
  double log_norm;  // log ||T^n||
  double ratio;     // ||T^n|| / (n^{s-1} rho^n)
};

struct GrowthProfile {
  std::vector<GrowthSample> samples;
  double fitted_c = 1.0;  // max over n of max(ratio, 1/ratio)
};

// Log-domain norm growth via renormalized products: P_{n+1} = (P_n T)/s_n.
inline GrowthProfile growth_profile(const MatrixXd& t, const SpectralData& spec,
                                    int n_max) {
  if (n_max < 1) throw std::invalid_argument("growth_profile: n_max >= 1 required");
  if (spec.rho <= 0.0) throw std::invalid_argument("growth_profile: nilpotent map");
  GrowthProfile out;
  const double log_rho = std::log(spec.rho);
  MatrixXd p = t;
  double log_scale = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double norm = opnorm(p);
    if (!std::isfinite(norm) || norm == 0.0)
      throw OverflowError("growth_profile: renormalized norm degenerate");
    const double log_norm = log_scale + std::log(norm);
    const double log_pred = (spec.s - 1) * std::log(static_cast<double>(n)) + n * log_rho;
    const double log_ratio = log_norm - log_pred;
    if (!std::isfinite(log_ratio)) throw OverflowError("growth_profile: log-domain overflow");
    out.samples.push_back({n, log_norm, std::exp(log_ratio)});
    out.fitted_c = std::max(out.fitted_c, std::exp(std::abs(log_ratio)));
    p /= norm;
    log_scale += std::log(norm);
    p = p * t;
  }
  return out;
}

// Normalized power table: P_n = T^n / exp(L_n) with ||P_n|| = 1, plus L_n.
// Scale-free ratios of the form ||T^n v|| / ||T^n|| read off P_n directly.
struct NormalizedPowers {
  std::vector<MatrixXd> p;      // p[n] ~ T^n, spectrally normalized
  std::vector<double> log_scale;

  static NormalizedPowers compute(const MatrixXd& t, int n_max) {
    NormalizedPowers out;
    const int d = static_cast<int>(t.rows());
    out.p.push_back(MatrixXd::Identity(d, d));
    out.log_scale.push_back(0.0);
    MatrixXd cur = MatrixXd::Identity(d, d);
    double ls = 0.0;
    for (int n = 1; n <= n_max; ++n) {
      cur = cur * t;
      const double norm = opnorm(cur);
      if (!std::isfinite(norm) || norm == 0.0)
        throw OverflowError("normalized powers: degenerate norm");
      cur /= norm;
      ls += std::log(norm);
      out.p.push_back(cur);
      out.log_scale.push_back(ls);
    }
    return out;
  }

  double log_norm(int n) const { return log_scale[n] + std::log(opnorm(p[n])); }
};

struct ConvergenceReport {
  double inf_ratio = 0.0;      // min ||T^n v|| / ||T^n||
  double sup_deviation = 0.0;  // max ||<T^n>v - <T^{n-s+1}p(T)>v||
};

// Sphere-normalized comparison of T^n against T^{n-s+1} p(T) on unit samples
// kept away from ker p(T).
inline ConvergenceReport check_convergence(const MatrixXd& t, const SpectralData& spec,
                                           const std::vector<VectorXd>& samples, int n,
                                           double margin = 0.1) {
  if (n < spec.s) throw std::invalid_argument("check_convergence: n < s");
  MaxExpansionData mex = max_expanding(t, spec);
  if (mex.trivial) throw std::invalid_argument("check_convergence: rho <= 1");
  const MatrixXd& k = mex.kernel_basis;
  const MatrixXd pt = mex.p_poly(t);

  const auto powers = NormalizedPowers::compute(t, n);
  const MatrixXd& pn = powers.p[n];
  const MatrixXd pn_shift = powers.p[n - spec.s + 1];
  const double pn_norm = opnorm(pn);

  ConvergenceReport out;
  out.inf_ratio = std::numeric_limits<double>::infinity();
  for (const auto& v : samples) {
    const double dist_to_kernel = (v - k * (k.transpose() * v)).norm();
    if (dist_to_kernel < margin)
      throw KernelProximity("check_convergence: sample within margin of ker p(T)");
    const VectorXd tv = pn * v;
    out.inf_ratio = std::min(out.inf_ratio, tv.norm() / pn_norm);
    const VectorXd w = pn_shift * (pt * v);
    if (tv.norm() == 0.0 || w.norm() == 0.0)
      throw KernelProximity("check_convergence: normalized image vanished");
    out.sup_deviation =
        std::max(out.sup_deviation, (tv.normalized() - w.normalized()).norm());
  }
  return out;
}

}  // namespace hawk::spectral
