#include "sparsehm/mpmf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsehm/errors.hpp"

namespace sparsehm::mpmf {
namespace {

void require_positive(std::span<const double> x) {
  if (x.empty()) throw DomainError("power mean of an empty vector");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(x[i])) {
      throw DomainError("power mean requires finite positive elements; element " +
                        std::to_string(i) + " is " + std::to_string(x[i]));
    }
  }
}

bool all_equal(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

// Sum with Neumaier compensation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double mean_of_logs(std::span<const double> log_x) {
  CompensatedSum s;
  for (double v : log_x) s.add(v);
  return s.value() / static_cast<double>(log_x.size());
}

// log Gamma(exp(l), y) for finite nonzero y. The shift c makes every
// y * (l - c) <= 0 so no exponential overflows; expm1/log1p keep full
// relative accuracy when y is small.
double log_mean_general(std::span<const double> l, double y) {
  const auto [lo, hi] = std::minmax_element(l.begin(), l.end());
  const double c = y > 0 ? *hi : *lo;
  const double n = static_cast<double>(l.size());
  CompensatedSum direct;
  CompensatedSum shifted;
  for (double v : l) {
    const double t = y * (v - c);
    direct.add(std::exp(t));
    shifted.add(std::expm1(t));
  }
  const double mean = direct.value() / n;
  // Near 1 the log loses precision; use log1p of the expm1 sum there.
  const double log_mean = mean > 0.5 ? std::log1p(shifted.value() / n) : std::log(mean);
  return c + log_mean / y;
}

}  // namespace

PositiveVector::PositiveVector(std::vector<double> values) : values_(std::move(values)) {
  require_positive(values_);
}

double power_mean(std::span<const double> x, Exponent y) {
  if (std::isnan(y.value())) throw DomainError("power mean exponent is NaN");
  require_positive(x);
  if (all_equal(x)) return x.front();
  if (y.is_neg_inf()) return *std::min_element(x.begin(), x.end());
  if (y.is_pos_inf()) return *std::max_element(x.begin(), x.end());
  if (y.is_zero()) return geometric_mean(x);

  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double e = y.value();
  const double ae = std::abs(e);
  if (ae > kLogPathExponent || ae < kSmallExponent || *hi / *lo > kLogPathDynamicRange) {
    std::vector<double> l(x.size());
    std::transform(x.begin(), x.end(), l.begin(), [](double v) { return std::log(v); });
    return std::exp(log_mean_general(l, e));
  }

  CompensatedSum s;
  if (e == 1.0) {
    for (double v : x) s.add(v);
    return s.value() / static_cast<double>(x.size());
  }
  if (e == 2.0) {
    for (double v : x) s.add(v * v);
    return std::sqrt(s.value() / static_cast<double>(x.size()));
  }
  for (double v : x) s.add(std::pow(v, e));
  return std::pow(s.value() / static_cast<double>(x.size()), 1.0 / e);
}

double power_mean(const PositiveVector& x, Exponent y) { return power_mean(x.values(), y); }

double log_power_mean(std::span<const double> log_x, Exponent y) {
  if (log_x.empty()) throw DomainError("power mean of an empty vector");
  if (std::isnan(y.value())) throw DomainError("power mean exponent is NaN");
  for (double v : log_x) {
    if (!std::isfinite(v)) throw DomainError("log power mean requires finite logarithms");
  }
  if (all_equal(log_x)) return std::exp(log_x.front());
  if (y.is_neg_inf()) return std::exp(*std::min_element(log_x.begin(), log_x.end()));
  if (y.is_pos_inf()) return std::exp(*std::max_element(log_x.begin(), log_x.end()));
  if (y.is_zero()) return std::exp(mean_of_logs(log_x));
  return std::exp(log_mean_general(log_x, y.value()));
}

double unit_power_mean(std::span<const double> v) {
  if (v.empty()) throw DomainError("power mean of an empty vector");
  if (all_equal(v)) return v.front();
  CompensatedSum s;
  for (double e : v) s.add(e);
  return s.value() / static_cast<double>(v.size());
}

double geometric_mean(std::span<const double> x) {
  require_positive(x);
  if (all_equal(x)) return x.front();
  CompensatedSum s;
  for (double v : x) s.add(std::log(v));
  return std::exp(s.value() / static_cast<double>(x.size()));
}

}  // namespace sparsehm::mpmf
