#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfldp {

using Vector = std::vector<double>;
using ConstSpan = std::span<const double>;
using MutableSpan = std::span<double>;

/// Rejected input: bad dimensions, states outside E, violated preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method failed to reach its tolerance. Carries the last residual.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

// Compact number for error messages.
inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// Value in [0, +inf] with an explicit infinity flag. Arithmetic saturates.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr explicit ExtendedReal(double v) : value_(v) {}

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  /// Finite value; throws on infinity so that sentinels never leak into sums.
  double value() const {
    if (infinite_) throw std::logic_error("ExtendedReal: value() of +inf");
    return value_;
  }
  /// IEEE view (inf for infinite), for printing and comparisons.
  double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return ExtendedReal(a.value_ + b.value_);
  }
  ExtendedReal& operator+=(ExtendedReal other) { return *this = *this + other; }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

enum class Domain { cube, simplex };

inline const char* to_string(Domain d) { return d == Domain::cube ? "cube" : "simplex"; }

inline double max_abs_diff(ConstSpan a, ConstSpan b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double dot(ConstSpan a, ConstSpan b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double sup_norm(ConstSpan a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// Membership test for E_1 = [-1,1]^d or the probability simplex.
inline bool in_domain(Domain dom, ConstSpan x, double tol = 1e-9) {
  if (dom == Domain::cube) {
    for (double v : x)
      if (!std::isfinite(v) || v < -1.0 - tol || v > 1.0 + tol) return false;
    return true;
  }
  double s = 0.0;
  for (double v : x) {
    if (!std::isfinite(v) || v < -tol) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= std::max(tol, 1e-12);
}

/// Magnetisation vector in [-1,1]^d.
class CubePoint {
 public:
  static CubePoint from(Vector x) {
    require(!x.empty(), "CubePoint: empty coordinate vector");
    require(in_domain(Domain::cube, x, 0.0), "CubePoint: coordinate outside [-1,1]");
    return CubePoint(std::move(x));
  }
  const Vector& coords() const { return x_; }
  std::size_t dim() const { return x_.size(); }

 private:
  explicit CubePoint(Vector x) : x_(std::move(x)) {}
  Vector x_;
};

/// Probability vector on {1,...,d}.
class SimplexPoint {
 public:
  static SimplexPoint from(Vector mu) {
    require(!mu.empty(), "SimplexPoint: empty coordinate vector");
    require(in_domain(Domain::simplex, mu, 0.0),
            "SimplexPoint: entries must be >= 0 and sum to 1 within 1e-12");
    return SimplexPoint(std::move(mu));
  }
  const Vector& coords() const { return mu_; }
  std::size_t dim() const { return mu_.size(); }

 private:
  explicit SimplexPoint(Vector mu) : mu_(std::move(mu)) {}
  Vector mu_;
};

/// Closest point of E. Cube: clip. Simplex: clamp negatives, renormalise.
inline Vector project_to_domain(Domain dom, ConstSpan x) {
  Vector y(x.begin(), x.end());
  if (dom == Domain::cube) {
    for (double& v : y) v = std::clamp(v, -1.0, 1.0);
    return y;
  }
  double s = 0.0;
  for (double& v : y) {
    v = std::max(v, 0.0);
    s += v;
  }
  if (s <= 0.0) {
    for (double& v : y) v = 1.0 / static_cast<double>(y.size());
  } else {
    for (double& v : y) v /= s;
  }
  return y;
}

}  // namespace mfldp
