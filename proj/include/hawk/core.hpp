#pragma once

// Shared basics: error taxonomy, default tolerances, deterministic RNG,
// and scalar helpers used across the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hawk {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// All numerical failures derive from NumericError so callers can map them to
// a single exit path. Each concrete type names the condition it signals.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonFinite : NumericError {
  explicit NonFinite(const std::string& m = "non-finite input") : NumericError(m) {}
};
struct ClusterAmbiguity : NumericError {
  explicit ClusterAmbiguity(const std::string& m) : NumericError(m) {}
};
struct SingularSystem : NumericError {
  explicit SingularSystem(const std::string& m) : NumericError(m) {}
};
struct RankAmbiguity : NumericError {
  explicit RankAmbiguity(const std::string& m) : NumericError(m) {}
};
struct OverflowError : NumericError {
  explicit OverflowError(const std::string& m) : NumericError(m) {}
};
struct KernelProximity : NumericError {
  explicit KernelProximity(const std::string& m) : NumericError(m) {}
};
struct DegenerateImage : NumericError {
  explicit DegenerateImage(const std::string& m) : NumericError(m) {}
};
struct NoAnchor : NumericError {
  explicit NoAnchor(const std::string& m) : NumericError(m) {}
};
struct NoEll : NumericError {
  explicit NoEll(const std::string& m) : NumericError(m) {}
};
struct PrecisionExhausted : NumericError {
  explicit PrecisionExhausted(const std::string& m) : NumericError(m) {}
};
struct EnumerationBlowup : NumericError {
  explicit EnumerationBlowup(const std::string& m) : NumericError(m) {}
};
struct LogDomain : NumericError {
  explicit LogDomain(const std::string& m) : NumericError(m) {}
};
struct IncompatibleGeometry : NumericError {
  explicit IncompatibleGeometry(const std::string& m) : NumericError(m) {}
};
struct Resign : NumericError {
  explicit Resign(const std::string& m) : NumericError(m) {}
};

// Default eigenvalue-clustering / rank tolerance at 64-bit working precision.
inline constexpr double kDefaultTol = 1e-9;

inline void require_finite(const MatrixXd& m, const char* what = "matrix") {
  if (!m.allFinite()) throw NonFinite(std::string(what) + " has NaN/Inf entries");
}

// ---------------------------------------------------------------------------
// Counter-based RNG. Every random draw in the library flows from a 64-bit
// seed through (stream, counter) pairs, so parallel trials stay reproducible
// and independent of evaluation order.

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() { return mix(seed_, stream_, counter_++); }

  // uniform in [0,1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // standard normal via Box-Muller
  double normal() {
    double u1 = next_double(), u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  VectorXd normal_vector(int d) {
    VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = normal();
    return v;
  }

  VectorXd unit_vector(int d) {
    VectorXd v = normal_vector(d);
    double n = v.norm();
    while (n < 1e-12) {
      v = normal_vector(d);
      n = v.norm();
    }
    return v / n;
  }

  CounterRng fork(std::uint64_t substream) const {
    return CounterRng(seed_, mix(stream_, substream, 0x9e3779b97f4a7c15ULL));
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1) + 0x632be59bd9b4e019ULL * (c + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

// Operator 2-norm of a dense matrix.
inline double opnorm(const MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

}  // namespace hawk
