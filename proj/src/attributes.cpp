#include "sparsehm/attributes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sparsehm/errors.hpp"
#include "sparsehm/parallel.hpp"
#include "sparsehm/random.hpp"
#include "sparsehm/sparsity.hpp"

namespace sparsehm::attributes {
namespace {

constexpr std::size_t kSizes[] = {4, 16, 64};
constexpr int kBetaMinExp = -3;
constexpr int kBetaMaxExp = 9;
constexpr int kAlphaMinExp = -3;
constexpr int kAlphaMaxExp = 6;

std::vector<double> sample_into(Rng& rng) {
  const std::size_t n = kSizes[rng.below(std::size(kSizes))];
  std::vector<double> x(n);
  for (double& v : x) v = rng.log_uniform(-3.0, 3.0);
  return x;
}

double sign(const MeasureUnderTest& m, const LabOptions& o) {
  return o.mode == InequalityMode::kOrientationAdjusted &&
                 m.orientation == Orientation::kLowerIsSparser
             ? -1.0
             : 1.0;
}

// Expected: lhs < rhs (after orientation). A violation must clear the margin.
bool violates_less(double lhs, double rhs, double s, const LabOptions& o) {
  return s * lhs - s * rhs > o.strict_tolerance * std::max(1.0, std::abs(rhs));
}

bool violates_greater(double lhs, double rhs, double s, const LabOptions& o) {
  return violates_less(rhs, lhs, s, o);
}

bool violates_equal(double lhs, double rhs, double tol) {
  return !(std::abs(lhs - rhs) <= tol * std::max(1.0, std::abs(rhs)));
}

std::vector<double> robin_hood(std::vector<double> x, std::size_t i, std::size_t j, double alpha) {
  x[i] -= alpha;
  x[j] += alpha;
  return x;
}

std::vector<double> scaled(std::vector<double> x, double alpha) {
  for (double& v : x) v *= alpha;
  return x;
}

std::vector<double> shifted(std::vector<double> x, double alpha) {
  for (double& v : x) v += alpha;
  return x;
}

std::vector<double> cloned(const std::vector<double>& x, std::size_t copies) {
  std::vector<double> out;
  out.reserve(x.size() * copies);
  for (std::size_t c = 0; c < copies; ++c) out.insert(out.end(), x.begin(), x.end());
  return out;
}

std::vector<double> with_zero(std::vector<double> x) {
  x.push_back(0.0);
  return x;
}

std::vector<double> grid(double s, int lo, int hi) {
  std::vector<double> g;
  for (int k = lo; k <= hi; ++k) g.push_back(s * std::pow(10.0, k));
  return g;
}

struct BillGatesSearch {
  bool found = false;
  double lhs = 0.0;  // first non-increasing pair at the largest beta
  double rhs = 0.0;
};

BillGatesSearch bill_gates_search(const MeasureUnderTest& m, const std::vector<double>& x,
                                  std::size_t i, double s) {
  double total = 0.0;
  for (double v : x) total += v;
  const auto betas = grid(total, kBetaMinExp, kBetaMaxExp);
  auto alphas = grid(total, kAlphaMinExp, kAlphaMaxExp);
  alphas.insert(alphas.begin(), 0.0);
  BillGatesSearch r;
  for (double beta : betas) {
    auto y = x;
    y[i] = x[i] + beta;
    double prev = s * m.fn(y);
    bool increasing = true;
    for (std::size_t k = 1; k < alphas.size() && increasing; ++k) {
      y[i] = x[i] + beta + alphas[k];
      const double cur = s * m.fn(y);
      if (!(cur > prev)) {
        increasing = false;
        r.lhs = s * cur;
        r.rhs = s * prev;
      }
      prev = cur;
    }
    if (increasing) {
      r.found = true;
      return r;
    }
  }
  return r;
}

template <typename Trial>
AttributeVerdict run_trials(Attribute a, const LabOptions& o, Trial&& trial) {
  if (o.trials < 1) throw ParameterError("attribute check needs at least one trial");
  AttributeVerdict v;
  v.attribute = a;
  for (std::size_t t = 0; t < o.trials; ++t) {
    Rng rng(mix_seed(o.seed, t));
    v.trials = t + 1;
    if (auto cx = trial(rng)) {
      v.outcome = Outcome::kFails;
      v.counterexample = std::move(cx);
      return v;
    }
  }
  v.outcome = Outcome::kHolds;
  return v;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string outcome_label(Outcome o) {
  switch (o) {
    case Outcome::kHolds:
      return "holds";
    case Outcome::kFails:
      return "fails";
    case Outcome::kInconclusive:
      return "inconclusive";
  }
  return "";
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string attribute_label(Attribute a) {
  switch (a) {
    case Attribute::kNonnegativity:
      return "Nonnegativity";
    case Attribute::kRobinHood:
      return "D1";
    case Attribute::kScaling:
      return "D2";
    case Attribute::kRisingTide:
      return "D3";
    case Attribute::kCloning:
      return "D4";
    case Attribute::kBillGates:
      return "P1";
    case Attribute::kBabies:
      return "P2";
  }
  return "";
}

MeasureUnderTest smoothness_index_measure() {
  return {"SI", [](std::span<const double> x) { return sparsity::smoothness_index_value(x); },
          Orientation::kLowerIsSparser, true};
}

MeasureUnderTest negative_entropy_measure() {
  return {"SNE",
          [](std::span<const double> x) { return sparsity::spectral_negative_entropy_value(x); },
          Orientation::kHigherIsSparser, true};
}

MeasureUnderTest spectral_kurtosis_measure() {
  return {"SK", [](std::span<const double> x) { return sparsity::spectral_kurtosis_value(x); },
          Orientation::kHigherIsSparser, true};
}

MeasureUnderTest gini_index_measure() {
  return {"GI", [](std::span<const double> x) { return sparsity::gini_index_value(x); },
          Orientation::kHigherIsSparser, true};
}

MeasureUnderTest lp_lq_measure() {
  return {"LPLQ",
          [](std::span<const double> x) { return sparsity::lp_lq_norm_index_value(x, {2.0, 1.0}); },
          Orientation::kHigherIsSparser, true};
}

MeasureUnderTest pq_mean_measure() {
  return {"PQ", [](std::span<const double> x) { return sparsity::pq_mean_value(x, {1.0, 2.0}); },
          Orientation::kHigherIsSparser, true};
}

MeasureUnderTest measure_by_name(const std::string& name) {
  const std::string n = upper(name);
  if (n == "SI") return smoothness_index_measure();
  if (n == "SNE") return negative_entropy_measure();
  if (n == "SK") return spectral_kurtosis_measure();
  if (n == "GI") return gini_index_measure();
  if (n == "LPLQ") return lp_lq_measure();
  if (n == "PQ") return pq_mean_measure();
  throw ParameterError("unknown measure: " + name);
}

std::vector<double> sample_vector(std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  return sample_into(rng);
}

AttributeVerdict check_nonnegativity(const MeasureUnderTest& m, const LabOptions& o) {
  return run_trials(Attribute::kNonnegativity, o, [&](Rng& rng) -> std::optional<Counterexample> {
    auto x = sample_into(rng);
    const double s = m.fn(x);
    if (s >= -o.strict_tolerance) return std::nullopt;
    return Counterexample{std::move(x), {}, s, 0.0};
  });
}

AttributeVerdict check_robin_hood(const MeasureUnderTest& m, const LabOptions& o) {
  const double sg = sign(m, o);
  return run_trials(Attribute::kRobinHood, o, [&](Rng& rng) -> std::optional<Counterexample> {
    auto x = sample_into(rng);
    std::size_t i = rng.below(x.size());
    std::size_t j = rng.below(x.size() - 1);
    if (j >= i) ++j;
    if (x[i] < x[j]) std::swap(i, j);
    if (!(x[i] > x[j])) return std::nullopt;
    double alpha = 0.0;
    while (!(alpha > 0.0)) alpha = rng.uniform() * (x[i] - x[j]) / 2.0;
    const double before = m.fn(x);
    const double after = m.fn(robin_hood(x, i, j, alpha));
    if (!violates_less(after, before, sg, o)) return std::nullopt;
    return Counterexample{std::move(x),
                          {{"i", static_cast<double>(i)}, {"j", static_cast<double>(j)}, {"alpha", alpha}},
                          after,
                          before};
  });
}

AttributeVerdict check_scaling(const MeasureUnderTest& m, const LabOptions& o) {
  return run_trials(Attribute::kScaling, o, [&](Rng& rng) -> std::optional<Counterexample> {
    auto x = sample_into(rng);
    const double alpha = rng.log_uniform(-3.0, 3.0);
    const double before = m.fn(x);
    const double after = m.fn(scaled(x, alpha));
    if (!violates_equal(after, before, o.scaling_tolerance)) return std::nullopt;
    return Counterexample{std::move(x), {{"alpha", alpha}}, after, before};
  });
}

AttributeVerdict check_rising_tide(const MeasureUnderTest& m, const LabOptions& o) {
  const double sg = sign(m, o);
  return run_trials(Attribute::kRisingTide, o, [&](Rng& rng) -> std::optional<Counterexample> {
    auto x = sample_into(rng);
    const double alpha = rng.log_uniform(-3.0, 3.0);
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) return std::nullopt;
    const double before = m.fn(x);
    const double after = m.fn(shifted(x, alpha));
    if (!violates_less(after, before, sg, o)) return std::nullopt;
    return Counterexample{std::move(x), {{"alpha", alpha}}, after, before};
  });
}

AttributeVerdict check_cloning(const MeasureUnderTest& m, const LabOptions& o) {
  if (o.clone_copies.empty()) throw ParameterError("cloning check needs copy counts");
  return run_trials(Attribute::kCloning, o, [&](Rng& rng) -> std::optional<Counterexample> {
    auto x = sample_into(rng);
    const double before = m.fn(x);
    for (std::size_t copies : o.clone_copies) {
      const double after = m.fn(cloned(x, copies));
      if (violates_equal(after, before, o.cloning_tolerance)) {
        return Counterexample{std::move(x), {{"copies", static_cast<double>(copies)}}, after, before};
      }
    }
    return std::nullopt;
  });
}

AttributeVerdict check_bill_gates(const MeasureUnderTest& m, const LabOptions& o) {
  const double sg = sign(m, o);
  return run_trials(Attribute::kBillGates, o, [&](Rng& rng) -> std::optional<Counterexample> {
    auto x = sample_into(rng);
    const std::size_t i = rng.below(x.size());
    const auto r = bill_gates_search(m, x, i, sg);
    if (r.found) return std::nullopt;
    return Counterexample{std::move(x), {{"i", static_cast<double>(i)}}, r.lhs, r.rhs};
  });
}

AttributeVerdict check_babies(const MeasureUnderTest& m, const LabOptions& o) {
  if (!m.zero_limit_defined) {
    AttributeVerdict v;
    v.attribute = Attribute::kBabies;
    v.outcome = Outcome::kInconclusive;
    v.note = m.name + " has no defined value at zero";
    return v;
  }
  const double sg = sign(m, o);
  return run_trials(Attribute::kBabies, o, [&](Rng& rng) -> std::optional<Counterexample> {
    auto x = sample_into(rng);
    const double before = m.fn(x);
    const double after = m.fn(with_zero(x));
    if (!violates_greater(after, before, sg, o)) return std::nullopt;
    return Counterexample{std::move(x), {}, after, before};
  });
}

AttributeVerdict check(Attribute a, const MeasureUnderTest& m, const LabOptions& o) {
  switch (a) {
    case Attribute::kNonnegativity:
      return check_nonnegativity(m, o);
    case Attribute::kRobinHood:
      return check_robin_hood(m, o);
    case Attribute::kScaling:
      return check_scaling(m, o);
    case Attribute::kRisingTide:
      return check_rising_tide(m, o);
    case Attribute::kCloning:
      return check_cloning(m, o);
    case Attribute::kBillGates:
      return check_bill_gates(m, o);
    case Attribute::kBabies:
      return check_babies(m, o);
  }
  throw InvariantError("unknown attribute");
}

bool recheck(const MeasureUnderTest& m, const AttributeVerdict& v, const LabOptions& o) {
  if (v.outcome != Outcome::kFails || !v.counterexample) return false;
  const auto& c = *v.counterexample;
  const auto& x = c.x;
  const double sg = sign(m, o);
  auto param = [&](const char* key) {
    const auto it = c.params.find(key);
    if (it == c.params.end()) throw InvariantError(std::string("counterexample lacks ") + key);
    return it->second;
  };
  switch (v.attribute) {
    case Attribute::kNonnegativity:
      return m.fn(x) < -o.strict_tolerance;
    case Attribute::kRobinHood: {
      const auto i = static_cast<std::size_t>(param("i"));
      const auto j = static_cast<std::size_t>(param("j"));
      const double alpha = param("alpha");
      if (!(x[i] > x[j] && alpha > 0.0 && alpha < (x[i] - x[j]) / 2.0)) return false;
      return violates_less(m.fn(robin_hood(x, i, j, alpha)), m.fn(x), sg, o);
    }
    case Attribute::kScaling:
      return violates_equal(m.fn(scaled(x, param("alpha"))), m.fn(x), o.scaling_tolerance);
    case Attribute::kRisingTide:
      return violates_less(m.fn(shifted(x, param("alpha"))), m.fn(x), sg, o);
    case Attribute::kCloning:
      return violates_equal(m.fn(cloned(x, static_cast<std::size_t>(param("copies")))), m.fn(x),
                            o.cloning_tolerance);
    case Attribute::kBillGates:
      return !bill_gates_search(m, x, static_cast<std::size_t>(param("i")), sg).found;
    case Attribute::kBabies:
      return violates_greater(m.fn(with_zero(x)), m.fn(x), sg, o);
  }
  return false;
}

AttributeTable attribute_table(const std::vector<MeasureUnderTest>& measures, const LabOptions& o,
                               int jobs) {
  AttributeTable t;
  t.trials = o.trials;
  t.seed = o.seed;
  constexpr std::size_t kCols = std::size(kAllAttributes);
  t.rows.resize(measures.size());
  for (std::size_t r = 0; r < measures.size(); ++r) {
    t.rows[r].measure = measures[r].name;
    t.rows[r].verdicts.resize(kCols);
  }
  parallel_for(measures.size() * kCols, jobs, [&](std::size_t k) {
    const std::size_t r = k / kCols;
    const std::size_t c = k % kCols;
    t.rows[r].verdicts[c] = check(kAllAttributes[c], measures[r], o);
  });
  return t;
}

std::string render_text(const AttributeTable& t) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-8s", "Measure");
  out << buf;
  for (Attribute a : kAllAttributes) {
    std::snprintf(buf, sizeof buf, " %-13s", attribute_label(a).c_str());
    out << buf;
  }
  out << '\n';
  for (const auto& row : t.rows) {
    std::snprintf(buf, sizeof buf, "%-8s", row.measure.c_str());
    out << buf;
    for (const auto& v : row.verdicts) {
      const char* mark = v.outcome == Outcome::kHolds ? "✓" : v.outcome == Outcome::kFails ? "✗" : "?";
      out << ' ' << mark << std::string(12, ' ');
    }
    out << '\n';
  }
  out << "trials=" << t.trials << " seed=" << t.seed << '\n';
  return out.str();
}

std::string render_csv(const AttributeTable& t) {
  std::ostringstream out;
  out << "measure,attribute,outcome,trials,lhs,rhs,params,vector\n";
  for (const auto& row : t.rows) {
    for (const auto& v : row.verdicts) {
      out << row.measure << ',' << attribute_label(v.attribute) << ',' << outcome_label(v.outcome) << ','
          << v.trials << ',';
      if (v.counterexample) {
        const auto& c = *v.counterexample;
        out << fmt(c.lhs) << ',' << fmt(c.rhs) << ',';
        bool first = true;
        for (const auto& [k, p] : c.params) {
          out << (first ? "" : ";") << k << '=' << fmt(p);
          first = false;
        }
        out << ',';
        for (std::size_t i = 0; i < c.x.size(); ++i) out << (i ? ";" : "") << fmt(c.x[i]);
      } else {
        out << ",,,";
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace sparsehm::attributes
