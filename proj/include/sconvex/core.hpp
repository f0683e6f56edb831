#pragma once

// Shared vocabulary for the sconvex library: dense vector aliases, boxes,
// the error hierarchy and a reproducible random source.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace sconvex {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SCONVEX_DEFINE_ERROR(Name)          \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

SCONVEX_DEFINE_ERROR(EmptySampleError);
SCONVEX_DEFINE_ERROR(NotInSetError);
SCONVEX_DEFINE_ERROR(DomainError);
SCONVEX_DEFINE_ERROR(NotPositiveDefiniteError);
SCONVEX_DEFINE_ERROR(UnsupportedError);
SCONVEX_DEFINE_ERROR(BoundarySamplingError);
SCONVEX_DEFINE_ERROR(SingularVariationalError);
SCONVEX_DEFINE_ERROR(InfeasibleRadiusError);
SCONVEX_DEFINE_ERROR(ConfigError);

class DomainExitError : public Error {
 public:
  DomainExitError(double exit_time, const std::string& what)
      : Error(what), exit_time_(exit_time) {}
  double exit_time() const { return exit_time_; }

 private:
  double exit_time_;
};

#undef SCONVEX_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Axis-aligned box
// ---------------------------------------------------------------------------

struct Box {
  Vec lower;
  Vec upper;

  Box() = default;
  Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) {
      throw std::invalid_argument("Box: bound dimensions differ");
    }
    for (Eigen::Index k = 0; k < lower.size(); ++k) {
      if (!(lower[k] <= upper[k])) {
        throw std::invalid_argument("Box: lower bound exceeds upper bound");
      }
    }
  }

  static Box cube(int dim, double half_width) {
    return Box(Vec::Constant(dim, -half_width), Vec::Constant(dim, half_width));
  }

  int dim() const { return static_cast<int>(lower.size()); }
  Vec center() const { return 0.5 * (lower + upper); }
  Vec extent() const { return upper - lower; }
  double diagonal() const { return extent().norm(); }
  double volume() const { return extent().prod(); }

  bool contains(const Vec& x, double tol = 0.0) const {
    for (Eigen::Index k = 0; k < lower.size(); ++k) {
      if (x[k] < lower[k] - tol || x[k] > upper[k] + tol) return false;
    }
    return true;
  }

  Vec clamp(const Vec& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

  // Largest t >= 0 with x + t*u inside the box; x must be inside.
  double exit_distance(const Vec& x, const Vec& u) const {
    double t = kInf;
    for (Eigen::Index k = 0; k < lower.size(); ++k) {
      if (u[k] > 0.0) {
        t = std::min(t, (upper[k] - x[k]) / u[k]);
      } else if (u[k] < 0.0) {
        t = std::min(t, (lower[k] - x[k]) / u[k]);
      }
    }
    return std::max(t, 0.0);
  }

  Box inflated(double relative, double absolute = 0.0) const {
    const Vec pad = relative * extent() + Vec::Constant(dim(), absolute);
    return Box(lower - pad, upper + pad);
  }
};

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic sub-seed for work item `index` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (index + 1));
  return splitmix64(s);
}

// xoshiro256** with splitmix64 seeding. Bit-identical on every platform,
// which std::uniform_real_distribution does not guarantee.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec uniform_in(const Box& box) {
    Vec x(box.dim());
    for (int k = 0; k < box.dim(); ++k) x[k] = uniform(box.lower[k], box.upper[k]);
    return x;
  }

  Vec unit_vector(int dim) {
    Vec v(dim);
    double n = 0.0;
    while (n < 1e-12) {
      for (int k = 0; k < dim; ++k) v[k] = normal();
      n = v.norm();
    }
    return v / n;
  }

  // Uniform in the closed ball B(center, radius).
  Vec in_ball(const Vec& center, double radius) {
    const int dim = static_cast<int>(center.size());
    const double rho = radius * std::pow(uniform(), 1.0 / dim);
    return center + rho * unit_vector(dim);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

// ---------------------------------------------------------------------------
// Direction sets
// ---------------------------------------------------------------------------

// `count` unit directions: uniform angles in 2D (rotated by `offset`),
// a spherical Fibonacci lattice in 3D, seeded Gaussian directions otherwise.
inline std::vector<Vec> unit_directions(int dim, std::size_t count,
                                        double offset = 0.0,
                                        std::uint64_t seed = 7) {
  std::vector<Vec> dirs;
  dirs.reserve(count);
  if (dim == 1) {
    for (std::size_t k = 0; k < count; ++k) {
      dirs.push_back(Vec::Constant(1, k % 2 == 0 ? 1.0 : -1.0));
    }
  } else if (dim == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      const double a = offset + 2.0 * std::numbers::pi * static_cast<double>(k) /
                                    static_cast<double>(count);
      Vec v(2);
      v << std::cos(a), std::sin(a);
      dirs.push_back(v);
    }
  } else if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
      const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) /
                                 static_cast<double>(count);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = offset + golden * static_cast<double>(k);
      Vec v(3);
      v << rho * std::cos(phi), rho * std::sin(phi), z;
      dirs.push_back(v);
    }
  } else {
    Rng rng(seed);
    for (std::size_t k = 0; k < count; ++k) dirs.push_back(rng.unit_vector(dim));
  }
  return dirs;
}

}  // namespace sconvex
