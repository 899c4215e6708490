#include "sparsehm/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsehm/errors.hpp"
#include "sparsehm/mpmf.hpp"

namespace sparsehm::sparsity {
namespace {

using mpmf::power_mean;
using mpmf::unit_power_mean;

void require_nonnegative(std::span<const double> x) {
  if (x.empty()) throw DomainError("sparsity measure of an empty vector");
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("sparsity measure requires finite nonnegative elements");
    }
  }
}

void check_lp_lq(PqParams pq) {
  if (!(pq.p > 0.0) || !(pq.q >= 0.0) || !(pq.p > pq.q) || !std::isfinite(pq.p)) {
    throw ParameterError("Lp/Lq norm index requires p > q >= 0 and p > 0");
  }
}

void check_pq_mean(PqParams pq) {
  if (!(pq.p > 0.0 && pq.p <= 1.0) || !(pq.q > 1.0) || !std::isfinite(pq.q)) {
    throw ParameterError("pq-mean requires 0 < p <= 1 and q > 1");
  }
}

double plain_sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

double norm_offset(PqParams pq) { return factorial_root(pq.p) / factorial_root(pq.q); }

}  // namespace

EnvelopeVector::EnvelopeVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw DomainError("envelope vector needs at least two samples");
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("envelope vector elements must be finite and strictly positive");
    }
  }
}

MeasureResult make_result(double direct, double mpmf) {
  const double den = std::max(std::abs(direct), kGapDenominatorFloor);
  return {direct, mpmf, std::abs(direct - mpmf) / den};
}

double factorial_root(double p) {
  if (p == 0.0) return std::exp(-kEulerGamma);
  return std::pow(std::tgamma(p + 1.0), 1.0 / p);
}

// ---------------------------------------------------------------------------
// Direct definitions.

double spectral_kurtosis_value(std::span<const double> x) {
  require_nonnegative(x);
  const double n = static_cast<double>(x.size());
  double s1 = 0.0;
  double s2 = 0.0;
  for (double v : x) {
    s1 += v;
    s2 += v * v;
  }
  if (s1 == 0.0) throw DegenerateError("spectral kurtosis of an all-zero vector");
  const double m1 = s1 / n;
  return (s2 / n) / (m1 * m1);
}

double lp_lq_norm_index_value(std::span<const double> x, PqParams pq) {
  check_lp_lq(pq);
  require_nonnegative(x);
  const double n = static_cast<double>(x.size());
  const double scale = *std::max_element(x.begin(), x.end());
  if (scale == 0.0) throw DegenerateError("Lp/Lq norm index of an all-zero vector");
  double sp = 0.0;
  for (double v : x) sp += std::pow(v / scale, pq.p);
  const double norm_p = std::pow(sp, 1.0 / pq.p);
  if (pq.q == 0.0) {
    double sl = 0.0;
    for (double v : x) {
      if (v == 0.0) throw DomainError("Lp/L0 index needs strictly positive elements");
      sl += std::log(v / scale);
    }
    const double geometric = std::exp(sl / n);
    return std::pow(n, -1.0 / pq.p) * norm_p / geometric - norm_offset(pq);
  }
  double sq = 0.0;
  for (double v : x) sq += std::pow(v / scale, pq.q);
  const double norm_q = std::pow(sq, 1.0 / pq.q);
  return std::pow(n, 1.0 / pq.q - 1.0 / pq.p) * norm_p / norm_q - norm_offset(pq);
}

double pq_mean_value(std::span<const double> x, PqParams pq) {
  check_pq_mean(pq);
  require_nonnegative(x);
  const double n = static_cast<double>(x.size());
  const double scale = *std::max_element(x.begin(), x.end());
  if (scale == 0.0) throw DegenerateError("pq-mean of an all-zero vector");
  double sp = 0.0;
  double sq = 0.0;
  for (double v : x) {
    sp += std::pow(v / scale, pq.p);
    sq += std::pow(v / scale, pq.q);
  }
  return -std::pow(sp / n, 1.0 / pq.p) * std::pow(sq / n, -1.0 / pq.q);
}

double smoothness_index_value(std::span<const double> x) {
  require_nonnegative(x);
  const double n = static_cast<double>(x.size());
  const double arithmetic = plain_sum(x) / n;
  if (arithmetic == 0.0) throw DegenerateError("smoothness index of an all-zero vector");
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) return 1.0;
  double sl = 0.0;
  for (double v : x) {
    if (v == 0.0) return 0.0;
    sl += std::log(v);
  }
  return std::exp(sl / n) / arithmetic;
}

double spectral_negative_entropy_value(std::span<const double> x) {
  require_nonnegative(x);
  const double n = static_cast<double>(x.size());
  const double mean = plain_sum(x) / n;
  if (mean == 0.0) throw DegenerateError("negative entropy of an all-zero vector");
  double s = 0.0;
  for (double v : x) {
    if (v == 0.0) continue;
    const double r = v / mean;
    s += r * std::log(r);
  }
  return s / n;
}

double gini_index_value(std::span<const double> x) {
  require_nonnegative(x);
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double l1 = plain_sum(sorted);
  if (l1 == 0.0) throw DegenerateError("Gini index of an all-zero vector");
  const double n = static_cast<double>(sorted.size());
  double s = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double rank = static_cast<double>(k + 1);
    s += (sorted[k] / l1) * ((n - rank + 0.5) / n);
  }
  return 1.0 - 2.0 * s;
}

// ---------------------------------------------------------------------------
// Dual-route measures.

MeasureResult spectral_kurtosis(const EnvelopeVector& x) {
  const auto v = x.values();
  const double ratio = power_mean(v, 2.0) / power_mean(v, 1.0);
  return make_result(spectral_kurtosis_value(v), ratio * ratio);
}

MeasureResult lp_lq_norm_index(const EnvelopeVector& x, PqParams pq) {
  check_lp_lq(pq);
  const auto v = x.values();
  double den = 0.0;
  if (pq.q == 0.0) {
    std::vector<double> logs(v.size());
    std::transform(v.begin(), v.end(), logs.begin(), [](double e) { return std::log(e); });
    den = std::exp(unit_power_mean(logs));
  } else {
    den = power_mean(v, pq.q);
  }
  const double via_mpmf = power_mean(v, pq.p) / den - norm_offset(pq);
  return make_result(lp_lq_norm_index_value(v, pq), via_mpmf);
}

MeasureResult pq_mean(const EnvelopeVector& x, PqParams pq) {
  check_pq_mean(pq);
  const auto v = x.values();
  return make_result(pq_mean_value(v, pq), -power_mean(v, pq.p) / power_mean(v, pq.q));
}

MeasureResult smoothness_index(const EnvelopeVector& x) {
  const auto v = x.values();
  std::vector<double> logs(v.size());
  std::transform(v.begin(), v.end(), logs.begin(), [](double e) { return std::log(e); });
  const double via_mpmf = std::exp(unit_power_mean(logs)) / power_mean(v, 1.0);
  return make_result(smoothness_index_value(v), via_mpmf);
}

MeasureResult spectral_negative_entropy(const EnvelopeVector& x) {
  const auto v = x.values();
  const double mean = power_mean(v, 1.0);
  std::vector<double> terms(v.size());
  std::transform(v.begin(), v.end(), terms.begin(), [&](double e) {
    const double r = e / mean;
    return r * std::log(r);
  });
  // The printed form divides by Gamma(1, 1), the mean of the one-element
  // vector [1], which is exactly 1.
  const double one[] = {1.0};
  const double unit = power_mean(one, 1.0);
  return make_result(spectral_negative_entropy_value(v), unit_power_mean(terms) / unit);
}

double sne_via_si_identity(const EnvelopeVector& x) {
  const auto v = x.values();
  if (std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); })) {
    throw DegenerateError("SNE/SI identity is singular for an all-equal vector (ln SI = 0)");
  }
  const double mean = power_mean(v, 1.0);
  const double log_mean = std::log(mean);
  std::vector<double> logs(v.size());
  std::vector<double> weighted(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    logs[i] = std::log(v[i]);
    weighted[i] = v[i] * (logs[i] - log_mean);
  }
  const double mean_log = unit_power_mean(logs);
  const double log_si_parts = mean_log - log_mean;
  const double log_si = std::log(smoothness_index(x).mpmf_value);
  if (log_si_parts == 0.0 || log_si == 0.0) {
    throw DegenerateError("SNE/SI identity is singular: ln SI evaluates to 0");
  }
  return unit_power_mean(weighted) / (mean * log_si_parts) * log_si;
}

MeasureResult gini_index(const EnvelopeVector& x) {
  const auto v = x.values();
  std::vector<double> ordered(v.begin(), v.end());
  std::sort(ordered.begin(), ordered.end());
  const double n = static_cast<double>(ordered.size());
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    const double rank = static_cast<double>(k + 1);
    ordered[k] *= 2.0 * (n - rank + 0.5) / n;
  }
  const double via_mpmf = 1.0 - power_mean(ordered, 1.0) / power_mean(v, 1.0);
  return make_result(gini_index_value(v), via_mpmf);
}

}  // namespace sparsehm::sparsity
