#pragma once

// Dense real polynomials, constant term first. Small degrees only (the
// library never needs degree beyond the matrix dimension).

#include "hawk/core.hpp"

#include <complex>
#include <vector>

namespace hawk {

class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
    trim();
  }

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  std::complex<double> operator()(std::complex<double> x) const {
    std::complex<double> acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  // Horner evaluation on a square matrix.
  MatrixXd operator()(const MatrixXd& m) const {
    const int d = static_cast<int>(m.rows());
    MatrixXd acc = MatrixXd::Zero(d, d);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
      acc = acc * m + *it * MatrixXd::Identity(d, d);
    return acc;
  }

  Polynomial derivative() const {
    if (degree() == 0) return Polynomial();
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
  }

  // Remainder of this modulo (x - root)^power, complex root allowed.
  // Returned as complex coefficients of degree < power.
  std::vector<std::complex<double>> remainder_mod_power(std::complex<double> root,
                                                        int power) const {
    std::vector<std::complex<double>> cur(coeffs_.begin(), coeffs_.end());
    std::vector<std::complex<double>> rem;
    rem.reserve(power);
    // repeated synthetic division by (x - root); the remainders are the
    // Taylor coefficients of the polynomial about the root
    for (int k = 0; k < power; ++k) {
      if (cur.empty()) {
        rem.push_back(0.0);
        continue;
      }
      std::complex<double> carry = 0.0;
      for (int i = static_cast<int>(cur.size()) - 1; i >= 0; --i) {
        carry = cur[i] + carry * root;
        cur[i] = carry;
      }
      rem.push_back(cur[0]);
      cur.erase(cur.begin());
    }
    return rem;  // p(x) = sum rem[k] (x-root)^k  mod (x-root)^power
  }

 private:
  void trim() {
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  }

  std::vector<double> coeffs_;
};

// Expand prod (x - root_i)^mult_i given conjugation-closed complex roots;
// asserts the imaginary residue stays below tol.
inline Polynomial real_polynomial_from_roots(
    const std::vector<std::pair<std::complex<double>, int>>& roots, double tol) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& [root, mult] : roots) {
    for (int k = 0; k < mult; ++k) {
      c.push_back(0.0);
      for (int i = static_cast<int>(c.size()) - 1; i >= 1; --i)
        c[i] = c[i - 1] - root * c[i];
      c[0] = -root * c[0];
    }
  }
  std::vector<double> re(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::abs(c[i].imag()) > tol * (1.0 + std::abs(c[i].real())))
      throw NumericError("polynomial expansion: imaginary residue above tolerance");
    re[i] = c[i].real();
  }
  return Polynomial(std::move(re));
}

}  // namespace hawk
