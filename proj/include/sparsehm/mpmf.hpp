#pragma once

// Multivariate power mean function (MPMF):
//
//   Gamma(x, y) = ( (1/N) * sum_n x_n^y )^(1/y)
//
// with the limit cases min(x) at y = -inf, the geometric mean at y = 0 and
// max(x) at y = +inf. Every sparsity measure and health index in this
// library is a ratio (or product of ratios) of these means.

#include <limits>
#include <span>
#include <vector>

namespace sparsehm::mpmf {

/// Exponent of a power mean. Finite reals, zero and both infinities are
/// all valid and select the corresponding case of the definition.
class Exponent {
 public:
  constexpr Exponent(double value) : value_(value) {}  // NOLINT: implicit by design of call sites

  static constexpr Exponent min() { return Exponent(-std::numeric_limits<double>::infinity()); }
  static constexpr Exponent max() { return Exponent(std::numeric_limits<double>::infinity()); }
  static constexpr Exponent geometric() { return Exponent(0.0); }

  constexpr double value() const { return value_; }
  constexpr bool is_zero() const { return value_ == 0.0; }
  constexpr bool is_pos_inf() const { return value_ == std::numeric_limits<double>::infinity(); }
  constexpr bool is_neg_inf() const { return value_ == -std::numeric_limits<double>::infinity(); }

 private:
  double value_;
};

/// Owning vector whose elements are all finite and strictly positive.
class PositiveVector {
 public:
  /// Throws DomainError when empty or when any element is <= 0 or not finite.
  explicit PositiveVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Above this |y| the log-domain path is used.
inline constexpr double kLogPathExponent = 8.0;
/// Above this max/min ratio the log-domain path is used.
inline constexpr double kLogPathDynamicRange = 1e6;
/// Below this |y| (y != 0) the log-domain path is used; the direct formula
/// loses about eps/|y| relative accuracy near zero.
inline constexpr double kSmallExponent = 0.125;

/// Gamma(x, y). Throws DomainError for an empty vector, a non-positive or
/// non-finite element, or a NaN exponent.
double power_mean(std::span<const double> x, Exponent y);
double power_mean(const PositiveVector& x, Exponent y);

/// Gamma(exp(log_x), y) evaluated entirely in the log domain. Never
/// overflows for finite inputs.
double log_power_mean(std::span<const double> log_x, Exponent y);

/// Gamma(v, 1) for an arbitrary real vector. At exponent one the MPMF is the
/// arithmetic mean and is well defined without a positivity requirement;
/// this is the form used for Gamma(ln X, 1) and the entropy-style vectors.
double unit_power_mean(std::span<const double> v);

/// exp(Gamma(ln x, 1)), i.e. the geometric mean Gamma(x, 0).
double geometric_mean(std::span<const double> x);

}  // namespace sparsehm::mpmf
