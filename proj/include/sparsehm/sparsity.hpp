#pragma once

// Classical sparsity measures, each computed along two independently coded
// routes: the textbook definition ("direct") and the ratio-of-power-means
// form ("mpmf"). Both values are returned so callers can cross-check.

#include <span>
#include <vector>

namespace sparsehm::sparsity {

/// Squared-envelope samples: finite, strictly positive, at least two.
class EnvelopeVector {
 public:
  explicit EnvelopeVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

struct MeasureResult {
  double direct_value = 0.0;
  double mpmf_value = 0.0;
  double relative_gap = 0.0;
};

inline constexpr double kGapDenominatorFloor = 1e-300;
inline constexpr double kEulerGamma = 0.57721566490153286060651209;

MeasureResult make_result(double direct, double mpmf);

struct PqParams {
  double p = 2.0;
  double q = 1.0;
};

/// (p!)^(1/p) with p! = Gamma(p + 1). At p = 0 returns the limit e^{-gamma}.
double factorial_root(double p);

MeasureResult spectral_kurtosis(const EnvelopeVector& x);

/// Lp/Lq norm index minus its Gaussian offset. Requires p > q >= 0.
MeasureResult lp_lq_norm_index(const EnvelopeVector& x, PqParams params);

/// pq-mean (negated ratio). Requires 0 < p <= 1 and q > 1.
MeasureResult pq_mean(const EnvelopeVector& x, PqParams params);

MeasureResult smoothness_index(const EnvelopeVector& x);

MeasureResult spectral_negative_entropy(const EnvelopeVector& x);

/// SNE evaluated through its identity with ln(SI). Throws DegenerateError
/// on all-equal input, where ln(SI) = 0 makes the identity singular.
double sne_via_si_identity(const EnvelopeVector& x);

/// Gini index with ascending order statistics.
MeasureResult gini_index(const EnvelopeVector& x);

// Single-valued evaluations on nonnegative vectors (zeros allowed). These
// use the direct definitions and fall back to the analytic zero limits:
// SI is 0 when any element is 0, and 0 * ln 0 is taken as 0 in SNE. They
// back the attribute laboratory and the kurtogram, which both feed vectors
// outside the strictly positive domain.
double spectral_kurtosis_value(std::span<const double> x);
double lp_lq_norm_index_value(std::span<const double> x, PqParams params);
double pq_mean_value(std::span<const double> x, PqParams params);
double smoothness_index_value(std::span<const double> x);
double spectral_negative_entropy_value(std::span<const double> x);
double gini_index_value(std::span<const double> x);

}  // namespace sparsehm::sparsity
