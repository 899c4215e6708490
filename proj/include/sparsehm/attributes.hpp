#pragma once

// Randomized laboratory for the six sparse attributes (Robin Hood, scaling,
// rising tide, cloning, Bill Gates, babies) plus nonnegativity. Every
// failed check carries a counterexample that recheck() re-evaluates.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sparsehm::attributes {

enum class Attribute {
  kNonnegativity,
  kRobinHood,   // D1
  kScaling,     // D2
  kRisingTide,  // D3
  kCloning,     // D4
  kBillGates,   // P1
  kBabies,      // P2
};

inline constexpr Attribute kAllAttributes[] = {
    Attribute::kNonnegativity, Attribute::kRobinHood, Attribute::kScaling, Attribute::kRisingTide,
    Attribute::kCloning,       Attribute::kBillGates, Attribute::kBabies,
};

std::string attribute_label(Attribute a);  // "Nonnegativity", "D1", ..., "P2"

enum class Orientation { kHigherIsSparser, kLowerIsSparser };

/// kLiteral compares raw values exactly as the attribute inequalities are
/// written (a larger value means sparser). kOrientationAdjusted flips the
/// direction for LowerIsSparser measures.
enum class InequalityMode { kLiteral, kOrientationAdjusted };

using MeasureFn = std::function<double(std::span<const double>)>;

struct MeasureUnderTest {
  std::string name;
  MeasureFn fn;  // must accept exact zeros when zero_limit_defined
  Orientation orientation = Orientation::kHigherIsSparser;
  bool zero_limit_defined = true;
};

MeasureUnderTest smoothness_index_measure();     // "SI", LowerIsSparser
MeasureUnderTest negative_entropy_measure();     // "SNE"
MeasureUnderTest spectral_kurtosis_measure();    // "SK"
MeasureUnderTest gini_index_measure();           // "GI"
MeasureUnderTest lp_lq_measure();                // "LPLQ", p=2 q=1
MeasureUnderTest pq_mean_measure();              // "PQ", p=1 q=2

/// Looks up one of the names above (case-insensitive). Throws ParameterError.
MeasureUnderTest measure_by_name(const std::string& name);

struct Counterexample {
  std::vector<double> x;
  std::map<std::string, double> params;  // i, j, alpha, copies as applicable
  double lhs = 0.0;
  double rhs = 0.0;
};

enum class Outcome { kHolds, kFails, kInconclusive };

struct AttributeVerdict {
  Attribute attribute = Attribute::kNonnegativity;
  Outcome outcome = Outcome::kHolds;
  std::optional<Counterexample> counterexample;  // present iff kFails
  std::size_t trials = 0;                        // trials run before stopping
  std::string note;

  bool holds() const { return outcome == Outcome::kHolds; }
};

struct LabOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 42;
  InequalityMode mode = InequalityMode::kLiteral;
  double strict_tolerance = 1e-12;   // a strict inequality fails past this relative margin
  double scaling_tolerance = 1e-9;
  double cloning_tolerance = 1e-10;
  std::vector<std::size_t> clone_copies = {2, 3, 5};
};

/// Sampling: N uniform over {4, 16, 64}; elements log-uniform on [1e-3, 1e3].
/// Trial t uses the sub-seed mix_seed(seed, t); the first violating trial
/// stops the check.
std::vector<double> sample_vector(std::uint64_t trial_seed);

AttributeVerdict check_nonnegativity(const MeasureUnderTest& m, const LabOptions& o = {});
AttributeVerdict check_robin_hood(const MeasureUnderTest& m, const LabOptions& o = {});
AttributeVerdict check_scaling(const MeasureUnderTest& m, const LabOptions& o = {});
AttributeVerdict check_rising_tide(const MeasureUnderTest& m, const LabOptions& o = {});
AttributeVerdict check_cloning(const MeasureUnderTest& m, const LabOptions& o = {});

/// Beta and alpha grids are s * 10^k with s = sum(x): k = -3..9 for beta,
/// k = -3..6 for alpha. Holds iff for every sampled (x, i) some beta makes
/// S strictly increasing along the alpha grid.
AttributeVerdict check_bill_gates(const MeasureUnderTest& m, const LabOptions& o = {});

/// Appends an exact zero. Inconclusive when the measure has no zero limit.
AttributeVerdict check_babies(const MeasureUnderTest& m, const LabOptions& o = {});

AttributeVerdict check(Attribute a, const MeasureUnderTest& m, const LabOptions& o = {});

/// Re-evaluates a failed verdict's counterexample; true iff the violation
/// reproduces.
bool recheck(const MeasureUnderTest& m, const AttributeVerdict& v, const LabOptions& o = {});

struct TableRow {
  std::string measure;
  std::vector<AttributeVerdict> verdicts;  // in kAllAttributes order
};

struct AttributeTable {
  std::vector<TableRow> rows;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

AttributeTable attribute_table(const std::vector<MeasureUnderTest>& measures, const LabOptions& o = {},
                               int jobs = 1);

std::string render_text(const AttributeTable& t);
std::string render_csv(const AttributeTable& t);

}  // namespace sparsehm::attributes
