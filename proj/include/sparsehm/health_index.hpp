#pragma once

// Health indexes built from ratios of power means.
//
//   PHI = lambda * sum_m p_m Gamma(x, a_m) / sum_n q_n Gamma(x, b_n) + c
//   MHI = lambda * prod_m p_m Gamma(x, a_m) / prod_n q_n Gamma(x, b_n) + c
//   GHI = sum of PHI and MHI terms
//
// HI1..HI4 are fixed members of this family, bounded in [0, 1).

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparsehm/sigprep.hpp"

namespace sparsehm::health_index {

inline constexpr double kDefaultTau = 0.065;

enum class Transform {
  kIdentity,    // Gamma(x, exponent)
  kLogThenExp,  // exp(Gamma(ln x, 1)); exponent must be 0
};

struct MpmfTerm {
  double weight = 1.0;
  double exponent = 1.0;
  Transform transform = Transform::kIdentity;
};

enum class IndexKind { kPhi, kMhi };

struct IndexSpec {
  IndexKind kind = IndexKind::kPhi;
  std::vector<MpmfTerm> numerator;
  std::vector<MpmfTerm> denominator;
  double lambda = 1.0;
  double offset_c = 0.0;
  double slip_tau = kDefaultTau;
  bool normalize = true;

  /// Throws ParameterError when a weight group is empty or does not sum to
  /// one, all denominator weights are zero, a LogThenExp term has a nonzero
  /// exponent, or tau is zero while some exponent is <= 0.
  void validate() const;
};

/// se / mean(se) + tau when normalize, else se + tau. Throws
/// DegenerateError when mean(se) is zero and DomainError on negative input.
std::vector<double> prepare_vector(const std::vector<double>& se, double tau, bool normalize);

double eval_phi(const IndexSpec& spec, const std::vector<double>& se);
double eval_mhi(const IndexSpec& spec, const std::vector<double>& se);
/// Sum of the constituent evaluations; 0 for an empty list.
double eval_ghi(const std::vector<IndexSpec>& specs, const std::vector<double>& se);
/// Dispatches on spec.kind.
double eval_spec(const IndexSpec& spec, const std::vector<double>& se);

enum class Hi2Variant {
  kAsPrinted,        // numerator Gamma(X,-2) + Gamma(X,-2)
  kSecondTermMinus1  // numerator Gamma(X,-2) + Gamma(X,-1)
};

struct HiOptions {
  double tau = kDefaultTau;
  bool normalize = true;
  Hi2Variant hi2 = Hi2Variant::kAsPrinted;
};

/// HI1..HI4 written out directly from their closed forms.
double eval_hi(int which, const std::vector<double>& se, const HiOptions& options = {});

/// The same index expressed as a PHI/MHI spec.
IndexSpec hi_spec(int which, const HiOptions& options = {});

struct HiSeries {
  std::string index_name;
  std::vector<long> file_index;
  std::vector<double> value;            // NaN where the file failed
  std::vector<std::string> gap_reason;  // empty where the value is valid

  bool is_gap(std::size_t i) const { return !gap_reason[i].empty(); }
  std::size_t size() const { return value.size(); }
};

/// One evaluation per file. A file that cannot be evaluated becomes a gap
/// and does not abort the series.
struct SeriesInput {
  long file_index = 0;
  std::optional<sigprep::Signal> signal;  // empty when the file was unreadable
  std::string error;                      // reason when signal is empty
};

using EnvelopeIndex = std::function<double(const std::vector<double>&)>;

HiSeries hi_series(const std::vector<SeriesInput>& files, const sigprep::Band& band,
                   const EnvelopeIndex& index, const std::string& index_name, int jobs = 1);

HiSeries hi_series(const std::vector<SeriesInput>& files, const sigprep::Band& band, int which,
                   const HiOptions& options = {}, int jobs = 1);

/// Plain-text configuration form:
///   kind = phi | mhi
///   numerator = w:exp, w:exp, ...        (exp may be "geo" for LogThenExp)
///   denominator = w:exp, ...
///   lambda = 1
///   offset = 0
///   tau = 0.065
///   normalize = true
IndexSpec spec_from_config(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> spec_to_config(const IndexSpec& spec);

}  // namespace sparsehm::health_index
