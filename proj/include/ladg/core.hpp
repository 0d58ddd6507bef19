#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ladg {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Symmetric 2x2 matrix, stored as (a11, a12, a22).
struct Mat2 {
  double a11 = 1.0, a12 = 0.0, a22 = 1.0;

  static Mat2 identity() { return {1.0, 0.0, 1.0}; }
  static Mat2 scalar(double eps) { return {eps, 0.0, eps}; }

  Vec2 apply(const Vec2& v) const {
    return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y};
  }

  // Eigenvalues of a symmetric 2x2 matrix.
  double eig_min() const {
    double tr = a11 + a22;
    double det = a11 * a22 - a12 * a12;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return tr / 2.0 - disc;
  }
  double eig_max() const {
    double tr = a11 + a22;
    double det = a11 * a22 - a12 * a12;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return tr / 2.0 + disc;
  }

  /// Symmetric square root (needs positive definiteness).
  Mat2 sqrt_spd() const { return powered(0.5); }
  /// Inverse of the symmetric square root.
  Mat2 inv_sqrt_spd() const { return powered(-0.5); }

private:
  Mat2 powered(double p) const {
    // Spectral decomposition; off-diagonal zero is the common fast path.
    if (std::abs(a12) < 1e-300) {
      return {std::pow(a11, p), 0.0, std::pow(a22, p)};
    }
    double l1 = eig_min(), l2 = eig_max();
    // Eigenvector for l2: (a12, l2 - a11), normalized.
    double vx = a12, vy = l2 - a11;
    double nrm = std::hypot(vx, vy);
    vx /= nrm; vy /= nrm;
    double f1 = std::pow(l1, p), f2 = std::pow(l2, p);
    // f1*I + (f2-f1) * v v^T  with v the l2-eigenvector.
    return {f1 + (f2 - f1) * vx * vx, (f2 - f1) * vx * vy,
            f1 + (f2 - f1) * vy * vy};
  }
};

struct LadgError : std::runtime_error {
  explicit LadgError(const std::string& msg) : std::runtime_error(msg) {}
};

#define LADG_REQUIRE(cond, msg)                                   \
  do {                                                            \
    if (!(cond)) throw ::ladg::LadgError(msg);                    \
  } while (0)

}  // namespace ladg
