#pragma once

// Multivariate polynomials in dense monomial form with exact derivatives.
//
// Dense ordering: monomials grouped by total degree 0, 1, ..., d; within a
// degree, lexicographically by exponent tuple with the first variable's
// exponent descending. For two variables and degree 2 that is
//   1, x1, x2, x1^2, x1 x2, x2^2.

#include <sconvex/core.hpp>

#include <algorithm>
#include <functional>
#include <utility>

namespace sconvex {

inline constexpr int kMaxPolynomialDegree = 8;

inline std::vector<std::vector<int>> monomial_exponents(int dim, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(static_cast<std::size_t>(dim), 0);
  // Fill exponent tuples of total degree `left` starting at variable `var`.
  std::function<void(int, int)> rec = [&](int var, int left) {
    if (var == dim - 1) {
      e[static_cast<std::size_t>(var)] = left;
      out.push_back(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[static_cast<std::size_t>(var)] = k;
      rec(var + 1, left - k);
    }
  };
  for (int total = 0; total <= degree; ++total) rec(0, total);
  return out;
}

inline std::size_t dense_coefficient_count(int dim, int degree) {
  return monomial_exponents(dim, degree).size();
}

class Polynomial {
 public:
  Polynomial() = default;

  Polynomial(int dim, int degree, std::vector<double> coefficients)
      : dim_(dim), degree_(degree), coeffs_(std::move(coefficients)) {
    if (dim < 1) throw std::invalid_argument("polynomial dimension must be positive");
    if (degree < 0 || degree > kMaxPolynomialDegree) {
      throw std::invalid_argument("polynomial degree must be in [0, 8]");
    }
    exps_ = monomial_exponents(dim, degree);
    if (coeffs_.size() != exps_.size()) {
      throw std::invalid_argument("expected " + std::to_string(exps_.size()) +
                                  " dense coefficients for dim " + std::to_string(dim) +
                                  ", degree " + std::to_string(degree) + ", got " +
                                  std::to_string(coeffs_.size()));
    }
  }

  // Builds the dense coefficient list from (exponents, coefficient) terms.
  static Polynomial from_terms(int dim, int degree,
                               const std::vector<std::pair<std::vector<int>, double>>& terms) {
    const auto exps = monomial_exponents(dim, degree);
    std::vector<double> coeffs(exps.size(), 0.0);
    for (const auto& [e, c] : terms) {
      const auto it = std::find(exps.begin(), exps.end(), e);
      if (it == exps.end()) throw std::invalid_argument("monomial outside dim/degree");
      coeffs[static_cast<std::size_t>(it - exps.begin())] += c;
    }
    return Polynomial(dim, degree, std::move(coeffs));
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  double value(const Vec& x) const {
    double s = 0.0;
    for (std::size_t m = 0; m < exps_.size(); ++m) {
      if (coeffs_[m] != 0.0) s += coeffs_[m] * monomial(x, exps_[m], -1, -1);
    }
    return s;
  }

  Vec gradient(const Vec& x) const {
    Vec g = Vec::Zero(dim_);
    for (std::size_t m = 0; m < exps_.size(); ++m) {
      if (coeffs_[m] == 0.0) continue;
      for (int i = 0; i < dim_; ++i) g[i] += coeffs_[m] * monomial(x, exps_[m], i, -1);
    }
    return g;
  }

  Mat hessian(const Vec& x) const {
    Mat h = Mat::Zero(dim_, dim_);
    for (std::size_t m = 0; m < exps_.size(); ++m) {
      if (coeffs_[m] == 0.0) continue;
      for (int i = 0; i < dim_; ++i) {
        for (int j = i; j < dim_; ++j) {
          const double v = coeffs_[m] * monomial(x, exps_[m], i, j);
          h(i, j) += v;
          if (j != i) h(j, i) += v;
        }
      }
    }
    return h;
  }

  double hessian_quadform(const Vec& x, const Vec& h) const { return h.dot(hessian(x) * h); }

 private:
  // Monomial with exponents e, differentiated once in variable i and once in
  // variable j (pass -1 to skip).
  static double monomial(const Vec& x, const std::vector<int>& e, int i, int j) {
    double prod = 1.0;
    for (std::size_t k = 0; k < e.size(); ++k) {
      int p = e[k];
      double factor = 1.0;
      const int ki = static_cast<int>(k);
      if (ki == i) {
        factor *= p;
        --p;
      }
      if (ki == j) {
        factor *= p;
        --p;
      }
      if (factor == 0.0) return 0.0;
      prod *= factor * (p > 0 ? std::pow(x[static_cast<Eigen::Index>(k)], p) : 1.0);
    }
    return prod;
  }

  int dim_ = 0;
  int degree_ = 0;
  std::vector<double> coeffs_;
  std::vector<std::vector<int>> exps_;
};

}  // namespace sconvex
