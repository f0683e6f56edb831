#pragma once

// Small dense linear algebra helpers: symmetric-part spectra, kernel bases,
// rank tests and a tableau simplex for the tiny feasibility LPs that the
// certificates need.

#include <sconvex/core.hpp>

#include <algorithm>
#include <optional>
#include <utility>

namespace sconvex {

struct SpectrumRange {
  double min;
  double max;
};

// Extreme eigenvalues of the symmetric part (A + A^T)/2.
inline SpectrumRange symmetric_part_extremes(const Mat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix not square");
  if (a.rows() == 1) return {a(0, 0), a(0, 0)};
  if (a.rows() == 2) {
    const double p = a(0, 0);
    const double q = a(1, 1);
    const double b = 0.5 * (a(0, 1) + a(1, 0));
    const double mean = 0.5 * (p + q);
    const double rad = std::hypot(0.5 * (p - q), b);
    return {mean - rad, mean + rad};
  }
  const Mat sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

inline double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

// Orthonormal basis (as columns) of the orthogonal complement of `g`,
// from a Householder QR of g viewed as an n x 1 matrix.
inline Mat kernel_basis(const Vec& g) {
  const Eigen::Index n = g.size();
  if (g.norm() == 0.0) return Mat::Identity(n, n);
  Eigen::HouseholderQR<Mat> qr{Mat(g)};
  const Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - 1);
}

// Orthonormal basis of {h : r_j . h = 0 for every row r_j}.
inline Mat null_space(const Mat& rows, double rel_tol = 1e-10) {
  const Eigen::Index n = rows.cols();
  if (rows.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(rows, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > rel_tol * std::max(top, 1.0)) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

// True when the vectors, each scaled to unit length, have smallest singular
// value above `threshold`.
inline bool linearly_independent(const std::vector<Vec>& vs, double threshold) {
  if (vs.empty()) return true;
  const Eigen::Index n = vs.front().size();
  if (static_cast<Eigen::Index>(vs.size()) > n) return false;
  Mat m(n, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) {
    const double nrm = vs[j].norm();
    if (nrm == 0.0) return false;
    m.col(static_cast<Eigen::Index>(j)) = vs[j] / nrm;
  }
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().minCoeff() > threshold;
}

inline double condition_number(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& sv = svd.singularValues();
  const double lo = sv(sv.size() - 1);
  return lo == 0.0 ? kInf : sv(0) / lo;
}

// ---------------------------------------------------------------------------
// Linear programming: maximize c.x subject to A x <= b, x >= 0, with b >= 0
// (the origin is feasible, so no phase one is needed). Dense tableau with
// Bland's rule; intended for problems with a handful of variables.
// ---------------------------------------------------------------------------

struct LpResult {
  enum class Status { kOptimal, kUnbounded };
  Status status = Status::kOptimal;
  Vec x;
  double value = 0.0;
};

inline LpResult maximize_origin_feasible(const Vec& c, const Mat& a, const Vec& b,
                                         int max_pivots = 10000) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m || c.size() != n) throw std::invalid_argument("LP shape mismatch");
  if ((b.array() < 0.0).any()) throw std::invalid_argument("LP needs b >= 0");

  // Tableau rows 0..m-1 are constraints, row m is the objective (reduced costs).
  Mat t = Mat::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = b;
  t.row(m).head(n) = -c.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  constexpr double eps = 1e-12;
  for (int pivots = 0; pivots < max_pivots; ++pivots) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best = kInf;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) > eps) {
        const double ratio = t(i, n + m) / t(i, enter);
        if (ratio < best - eps ||
            (std::abs(ratio - best) <= eps && leave >= 0 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) {
      LpResult r;
      r.status = LpResult::Status::kUnbounded;
      r.value = kInf;
      r.x = Vec::Zero(n);
      return r;
    }
    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  LpResult r;
  r.x = Vec::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index var = basis[static_cast<std::size_t>(i)];
    if (var < n) r.x[var] = t(i, n + m);
  }
  r.value = c.dot(r.x);
  return r;
}

// Solves  max t  s.t.  a_j . p <= -t  for every row a_j,  |p|_inf <= 1,  t >= 0.
// Returns (t, p). With no rows the problem is unbounded; we report t = +inf.
inline std::pair<double, Vec> interior_direction_lp(const std::vector<Vec>& rows,
                                                    int dim) {
  if (rows.empty()) return {kInf, Vec::Zero(dim)};
  // Variables: p_plus (dim), p_minus (dim), t.  p = p_plus - p_minus.
  const Eigen::Index nv = 2 * dim + 1;
  const Eigen::Index nc = static_cast<Eigen::Index>(rows.size()) + 2 * dim;
  Mat a = Mat::Zero(nc, nv);
  Vec b = Vec::Zero(nc);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    a.block(r, 0, 1, dim) = rows[j].transpose();
    a.block(r, dim, 1, dim) = -rows[j].transpose();
    a(r, 2 * dim) = 1.0;
  }
  for (int k = 0; k < 2 * dim; ++k) {
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size()) + k;
    a(r, k) = 1.0;
    b[r] = 1.0;
  }
  Vec c = Vec::Zero(nv);
  c[2 * dim] = 1.0;
  const LpResult res = maximize_origin_feasible(c, a, b);
  if (res.status == LpResult::Status::kUnbounded) return {kInf, Vec::Zero(dim)};
  const Vec p = res.x.head(dim) - res.x.segment(dim, dim);
  return {res.x[2 * dim], p};
}

}  // namespace sconvex
