#pragma once

// Torus endomorphisms at arbitrary precision, exact rational preimage
// enumeration, shortest lattice vectors by exhaustive enumeration, and
// distances from diagonal-flow orbits to zero.
//
// Exact integer/rational matrices are hand-rolled: Eigen's expression
// templates do not instantiate cleanly with the cpp_int backends.

#include "hawk/core.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace hawk::dynamics {

namespace mp = boost::multiprecision;

template <unsigned Bits>
using BigFloat = mp::number<mp::cpp_bin_float<Bits, mp::digit_base_2>>;

using BigFloat128 = BigFloat<128>;
using BigFloat256 = BigFloat<256>;
using BigFloat512 = BigFloat<512>;
using BigFloat1024 = BigFloat<1024>;
using BigFloat2048 = BigFloat<2048>;

using BigInt = mp::cpp_int;
using Rational = mp::cpp_rational;

inline Rational to_rational(double x) { return Rational(x); }

template <unsigned Bits>
Rational to_rational(const BigFloat<Bits>& x) {
  return Rational(x);
}

template <class Scalar>
Scalar floor_scalar(const Scalar& x) {
  using std::floor;
  return floor(x);
}

inline Rational floor_scalar(const Rational& x) {
  BigInt q = numerator(x) / denominator(x);
  if (x < 0 && q * denominator(x) != numerator(x)) --q;
  return Rational(q);
}

template <class Scalar>
Scalar mod1(const Scalar& x) {
  Scalar r = x - floor_scalar(x);
  if (r >= 1) r -= 1;  // guards rounding at the boundary
  if (r < 0) r += 1;
  return r;
}

// ---------------------------------------------------------------------------
// Minimal exact-scalar matrix type (row-major, square or rectangular).

template <class T>
struct TinyMatrix {
  int rows = 0, cols = 0;
  std::vector<T> data;

  TinyMatrix() = default;
  TinyMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, T(0)) {}

  T& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  const T& operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }

  static TinyMatrix identity(int n) {
    TinyMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  TinyMatrix operator*(const TinyMatrix& o) const {
    TinyMatrix out(rows, o.cols);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k) {
        const T& a = (*this)(i, k);
        if (a == T(0)) continue;
        for (int j = 0; j < o.cols; ++j) out(i, j) += a * o(k, j);
      }
    return out;
  }

  std::vector<T> apply(const std::vector<T>& v) const {
    std::vector<T> out(rows, T(0));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
  }
};

using BigIntMatrix = TinyMatrix<BigInt>;
using RationalMatrix = TinyMatrix<Rational>;
using RationalVector = std::vector<Rational>;

inline BigIntMatrix bigint_power(const BigIntMatrix& m, int n) {
  BigIntMatrix acc = BigIntMatrix::identity(m.rows);
  BigIntMatrix base = m;
  int e = n;
  while (e > 0) {
    if (e & 1) acc = acc * base;
    base = base * base;
    e >>= 1;
  }
  return acc;
}

inline BigInt bigint_det(BigIntMatrix a) {
  const int n = a.rows;
  BigInt prev = 1;
  int sign = 1;
  for (int k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      int swap_row = -1;
      for (int i = k + 1; i < n; ++i)
        if (a(i, k) != 0) {
          swap_row = i;
          break;
        }
      if (swap_row < 0) return 0;
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(swap_row, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    prev = a(k, k);
  }
  BigInt det = a(n - 1, n - 1);
  return sign > 0 ? det : -det;
}

// exact inverse via Gauss-Jordan over the rationals
inline RationalMatrix rational_inverse(const BigIntMatrix& m) {
  const int n = m.rows;
  RationalMatrix a(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = Rational(m(i, j));
    a(i, n + i) = 1;
  }
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int i = col; i < n; ++i)
      if (a(i, col) != 0) {
        pivot = i;
        break;
      }
    if (pivot < 0) throw SingularSystem("rational_inverse: singular matrix");
    if (pivot != col)
      for (int j = 0; j < 2 * n; ++j) std::swap(a(col, j), a(pivot, j));
    const Rational inv = Rational(1) / a(col, col);
    for (int j = 0; j < 2 * n; ++j) a(col, j) *= inv;
    for (int i = 0; i < n; ++i) {
      if (i == col || a(i, col) == 0) continue;
      const Rational f = a(i, col);
      for (int j = 0; j < 2 * n; ++j) a(i, j) -= f * a(col, j);
    }
  }
  RationalMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = a(i, n + j);
  return out;
}

// ---------------------------------------------------------------------------

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Integer-matrix endomorphism of the d-torus.
struct TorusMap {
  IntMatrix m;

  int dim() const { return static_cast<int>(m.rows()); }

  MatrixXd as_double() const { return m.cast<double>(); }

  BigIntMatrix as_bigint() const {
    BigIntMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) out(i, j) = BigInt(m(i, j));
    return out;
  }

  BigInt det_exact() const { return bigint_det(as_bigint()); }

  static TorusMap cat() {
    IntMatrix m(2, 2);
    m << 2, 1, 1, 1;
    return TorusMap{m};
  }
};

// ---------------------------------------------------------------------------
// Torus points and orbits

template <class Scalar>
struct TorusPoint {
  std::vector<Scalar> coords;  // reduced mod 1
  Scalar error_bar = Scalar(0);

  int dim() const { return static_cast<int>(coords.size()); }
};

template <class Scalar>
TorusPoint<Scalar> make_torus_point(const std::vector<Scalar>& coords,
                                    Scalar error_bar = Scalar(0)) {
  TorusPoint<Scalar> p;
  p.coords.reserve(coords.size());
  for (const auto& c : coords) p.coords.push_back(mod1(c));
  p.error_bar = error_bar;
  return p;
}

// torus distance: min over integer shifts of the Euclidean distance
template <class Scalar>
Scalar torus_distance(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  using std::sqrt;
  Scalar acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Scalar w = mod1(Scalar(a[i] - b[i]));
    if (w > Scalar(0.5)) w = Scalar(1) - w;
    acc += w * w;
  }
  return sqrt(acc);
}

// Iterates x -> Mx mod 1 with error bars multiplied by ||M|| per step.
// PrecisionExhausted fires when the propagated bar reaches 2^-32.
template <class Scalar>
std::vector<TorusPoint<Scalar>> torus_orbit(const TorusMap& map,
                                            const TorusPoint<Scalar>& start, int n_max,
                                            Scalar unit_roundoff = Scalar(0)) {
  const int d = map.dim();
  const double norm = opnorm(map.as_double());
  std::vector<TorusPoint<Scalar>> orbit;
  orbit.reserve(n_max + 1);
  orbit.push_back(start);
  TorusPoint<Scalar> cur = start;
  const Scalar bar_limit = Scalar(1) / Scalar(std::uint64_t(1) << 32);
  for (int n = 1; n <= n_max; ++n) {
    std::vector<Scalar> next(d, Scalar(0));
    for (int i = 0; i < d; ++i) {
      Scalar acc = 0;
      for (int j = 0; j < d; ++j) acc += Scalar(map.m(i, j)) * cur.coords[j];
      next[i] = mod1(acc);
    }
    cur.coords = std::move(next);
    cur.error_bar = cur.error_bar * Scalar(norm) + unit_roundoff;
    if (cur.error_bar >= bar_limit)
      throw PrecisionExhausted("torus_orbit: error bar exceeded 2^-32 at n=" +
                               std::to_string(n));
    orbit.push_back(cur);
  }
  return orbit;
}

// ---------------------------------------------------------------------------
// Preimages: all chart points y with M^n y == z (mod Z^d) inside a ball.
// Exact rational arithmetic throughout.

struct ChartBall {
  RationalVector center;
  Rational radius;
};

inline std::vector<RationalVector> preimage_points(const TorusMap& map,
                                                   const RationalVector& z, int n,
                                                   const ChartBall& ball,
                                                   std::size_t candidate_cap = 1000000) {
  const int d = map.dim();
  const BigIntMatrix mn = bigint_power(map.as_bigint(), n);
  const RationalMatrix mn_inv = rational_inverse(mn);

  // bounding box of M^n(ball) - z, inflated by 1
  std::vector<BigInt> lo(d), hi(d);
  std::size_t count = 1;
  for (int i = 0; i < d; ++i) {
    Rational c = -z[i];
    Rational r = 0;
    for (int j = 0; j < d; ++j) {
      c += Rational(mn(i, j)) * ball.center[j];
      Rational a = Rational(mn(i, j));
      if (a < 0) a = -a;
      r += a * ball.radius;
    }
    lo[i] = numerator(floor_scalar(Rational(c - r - 1)));
    hi[i] = numerator(floor_scalar(Rational(c + r + 1))) + 1;
    BigInt width = hi[i] - lo[i] + 1;
    if (width > BigInt(candidate_cap))
      throw EnumerationBlowup("preimage_points: candidate box exceeds cap");
    count *= width.convert_to<std::size_t>();
    if (count > candidate_cap)
      throw EnumerationBlowup("preimage_points: candidate box exceeds cap");
  }

  std::vector<RationalVector> found;
  std::vector<BigInt> m(d);
  const Rational r2 = ball.radius * ball.radius;
  std::function<void(int)> recurse = [&](int i) {
    if (i == d) {
      RationalVector target(d);
      for (int k = 0; k < d; ++k) target[k] = z[k] + Rational(m[k]);
      RationalVector y = mn_inv.apply(target);
      Rational dist2 = 0;
      for (int k = 0; k < d; ++k) {
        Rational diff = y[k] - ball.center[k];
        dist2 += diff * diff;
      }
      if (dist2 <= r2) found.push_back(y);
      return;
    }
    for (BigInt v = lo[i]; v <= hi[i]; ++v) {
      m[i] = v;
      recurse(i + 1);
    }
  };
  recurse(0);
  return found;
}

// ---------------------------------------------------------------------------
// Shortest nonzero lattice vector by exact enumeration (n <= 4).

struct ShortestVector {
  double length = 0.0;
  VectorXd vector;
  Eigen::VectorXi coeffs;
};

inline ShortestVector shortest_vector(MatrixXd basis, std::size_t enumeration_bound = 2000000) {
  const int n = static_cast<int>(basis.cols());
  if (n > 4) throw std::invalid_argument("shortest_vector: exact regime is n <= 4");

  // pairwise size reduction to tame the enumeration box
  Eigen::MatrixXi unimodular = Eigen::MatrixXi::Identity(n, n);
  for (int sweep = 0; sweep < 64; ++sweep) {
    bool changed = false;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (i == j) continue;
        const double mu = basis.col(j).dot(basis.col(i)) / basis.col(i).squaredNorm();
        const long r = std::lround(mu);
        if (r != 0) {
          basis.col(j) -= static_cast<double>(r) * basis.col(i);
          unimodular.col(j) -= static_cast<int>(r) * unimodular.col(i);
          changed = true;
        }
      }
    if (!changed) break;
  }

  ShortestVector out;
  int shortest_col = 0;
  for (int i = 1; i < n; ++i)
    if (basis.col(i).norm() < basis.col(shortest_col).norm()) shortest_col = i;
  double best = basis.col(shortest_col).norm();
  out.vector = basis.col(shortest_col);
  out.coeffs = Eigen::VectorXi::Unit(n, shortest_col);

  // Cauchy bound: coefficients of any vector of length <= best obey
  // |m_i| <= ||row_i(B^-1)|| best
  const MatrixXd inv = basis.inverse();
  std::vector<int> box(n);
  std::size_t count = 1;
  for (int i = 0; i < n; ++i) {
    box[i] = static_cast<int>(std::floor(inv.row(i).norm() * best)) + 1;
    count *= static_cast<std::size_t>(2 * box[i] + 1);
    if (count > enumeration_bound)
      throw EnumerationBlowup("shortest_vector: enumeration box exceeds bound");
  }

  Eigen::VectorXi m = Eigen::VectorXi::Zero(n);
  std::function<void(int)> recurse = [&](int i) {
    if (i == n) {
      if (m.isZero()) return;
      VectorXd v = basis * m.cast<double>();
      const double len = v.norm();
      if (len < best) {
        best = len;
        out.vector = v;
        out.coeffs = m;
      }
      return;
    }
    for (int v = -box[i]; v <= box[i]; ++v) {
      m(i) = v;
      recurse(i + 1);
    }
  };
  recurse(0);
  out.length = best;
  out.coeffs = unimodular * out.coeffs;
  return out;
}

// ---------------------------------------------------------------------------
// Distance from a diagonal-flow orbit to zero.

enum class FlowNorm { euclidean, sup };

struct FlowDistance {
  double inf = 0.0;
  double argmin_t = 0.0;
  bool at_infinity = false;  // infimum approached as t -> +-inf (v in U or W)
  int infinity_sign = 0;
};

// inf over t of ||g_t v|| with g_t = e^{t/p} on the first p coordinates and
// e^{-t/q} on the rest; closed-form balanced point for both supported norms.
inline FlowDistance dist_flow_orbit_to_zero(const VectorXd& v, int p, int q,
                                            FlowNorm norm = FlowNorm::euclidean) {
  if (v.size() != p + q) throw std::invalid_argument("dist_flow_orbit_to_zero: bad split");
  if (v.norm() == 0.0) throw std::invalid_argument("dist_flow_orbit_to_zero: v = 0");
  const VectorXd u = v.head(p);
  const VectorXd w = v.tail(q);
  FlowDistance out;
  if (u.norm() == 0.0 || w.norm() == 0.0) {
    out.inf = 0.0;
    out.at_infinity = true;
    out.infinity_sign = (u.norm() == 0.0) ? +1 : -1;  // w-only shrinks as t -> +inf
    return out;
  }
  if (norm == FlowNorm::euclidean) {
    const double a2 = u.squaredNorm(), b2 = w.squaredNorm();
    const double t = std::log((static_cast<double>(p) * b2) / (static_cast<double>(q) * a2)) /
                     (2.0 / p + 2.0 / q);
    out.argmin_t = t;
    out.inf = std::sqrt(std::exp(2.0 * t / p) * a2 + std::exp(-2.0 * t / q) * b2);
  } else {
    const double a = u.cwiseAbs().maxCoeff(), b = w.cwiseAbs().maxCoeff();
    const double t = std::log(b / a) / (1.0 / p + 1.0 / q);
    out.argmin_t = t;
    out.inf = std::exp(t / p) * a;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Affine iteration identity f^n(x + h) == M^n h + f^n(x) (mod 1) for the
// affine torus map f(x) = shift + Mx.

template <class Scalar>
bool verify_affine_iteration(const TorusMap& map, const std::vector<Scalar>& shift,
                             const std::vector<Scalar>& h, const std::vector<Scalar>& x,
                             int n_max, const Scalar& tol) {
  const int d = map.dim();
  auto apply_f = [&](const std::vector<Scalar>& pt) {
    std::vector<Scalar> out(d, Scalar(0));
    for (int i = 0; i < d; ++i) {
      Scalar acc = shift[i];
      for (int j = 0; j < d; ++j) acc += Scalar(map.m(i, j)) * pt[j];
      out[i] = mod1(acc);
    }
    return out;
  };
  std::vector<Scalar> fx = x, fxh(d);
  for (int i = 0; i < d; ++i) fxh[i] = mod1(Scalar(x[i] + h[i]));
  std::vector<Scalar> mh = h;  // M^n h, not reduced
  for (int n = 1; n <= n_max; ++n) {
    fx = apply_f(fx);
    fxh = apply_f(fxh);
    std::vector<Scalar> next(d, Scalar(0));
    for (int i = 0; i < d; ++i) {
      Scalar acc = 0;
      for (int j = 0; j < d; ++j) acc += Scalar(map.m(i, j)) * mh[j];
      next[i] = acc;
    }
    mh = std::move(next);
    for (int i = 0; i < d; ++i) {
      Scalar predicted = mod1(Scalar(mh[i] + fx[i]));
      Scalar diff = mod1(Scalar(fxh[i] - predicted));
      if (diff > Scalar(0.5)) diff = Scalar(1) - diff;
      if (diff > tol) return false;
    }
  }
  return true;
}

}  // namespace hawk::dynamics
