#ifndef BVY_POINT_HPP
#define BVY_POINT_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bvy {

/// Maximum supported ambient dimension.
inline constexpr int kMaxDim = 3;

/// A point (or vector) of R^n with n <= 3. Unused trailing components are zero.
using Point = std::array<double, kMaxDim>;

/// Raised when an input violates a documented precondition.
class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver its post-condition
/// (non-finite evaluations, root bracket failures, missing convergence).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw contract_error(what);
}

inline void check_dim(int n) {
  if (n < 1 || n > kMaxDim)
    throw contract_error("unsupported dimension " + std::to_string(n) +
                         " (expected 1, 2 or 3)");
}

inline double dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }

inline Point operator+(const Point& a, const Point& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Point operator-(const Point& a, const Point& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Point operator*(double s, const Point& a) {
  return {s * a[0], s * a[1], s * a[2]};
}

/// Volume of the Euclidean ball of radius r in R^n.
inline double ball_volume(int n, double r) {
  switch (n) {
    case 1: return 2.0 * r;
    case 2: return M_PI * r * r;
    case 3: return 4.0 / 3.0 * M_PI * r * r * r;
    default: check_dim(n); return 0.0;
  }
}

}  // namespace bvy

#endif  // BVY_POINT_HPP
