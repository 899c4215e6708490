#include "sparsehm/health_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sparsehm/errors.hpp"
#include "sparsehm/mpmf.hpp"
#include "sparsehm/parallel.hpp"

namespace sparsehm::health_index {
namespace {

constexpr double kWeightTolerance = 1e-12;
constexpr double kDenominatorFloor = 1e-300;

double term_value(const MpmfTerm& t, const std::vector<double>& x) {
  if (t.transform == Transform::kLogThenExp) return mpmf::geometric_mean(x);
  return mpmf::power_mean(x, t.exponent);
}

void check_group(const std::vector<MpmfTerm>& terms, const char* name) {
  if (terms.empty()) throw ParameterError(std::string(name) + " has no terms");
  double sum = 0.0;
  for (const auto& t : terms) {
    if (!std::isfinite(t.weight) || std::isnan(t.exponent)) {
      throw ParameterError(std::string(name) + " term has a non-finite weight or NaN exponent");
    }
    if (t.transform == Transform::kLogThenExp && t.exponent != 0.0) {
      throw ParameterError("log-then-exp term must have exponent 0");
    }
    sum += t.weight;
  }
  if (std::abs(sum - 1.0) > kWeightTolerance) {
    throw ParameterError(std::string(name) + " weights must sum to 1");
  }
}

std::vector<double> prepared(const IndexSpec& spec, const std::vector<double>& se) {
  spec.validate();
  return prepare_vector(se, spec.slip_tau, spec.normalize);
}

double finish(const IndexSpec& spec, double num, double den) {
  if (!(std::abs(den) > kDenominatorFloor)) {
    throw DegenerateError("health index denominator vanished");
  }
  return spec.lambda * num / den + spec.offset_c;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (text.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("index spec: bad number for " + key + ": '" + text + "'");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<MpmfTerm> parse_terms(const std::string& key, const std::string& text) {
  std::vector<MpmfTerm> terms;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ParameterError("index spec: term '" + item + "' in " + key + " must be weight:exponent");
    }
    MpmfTerm t;
    t.weight = parse_double(key, trim(item.substr(0, colon)));
    const std::string e = trim(item.substr(colon + 1));
    if (e == "geo") {
      t.exponent = 0.0;
      t.transform = Transform::kLogThenExp;
    } else if (e == "inf" || e == "+inf") {
      t.exponent = std::numeric_limits<double>::infinity();
    } else if (e == "-inf") {
      t.exponent = -std::numeric_limits<double>::infinity();
    } else {
      t.exponent = parse_double(key, e);
    }
    terms.push_back(t);
  }
  return terms;
}

std::string format_terms(const std::vector<MpmfTerm>& terms) {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += ", ";
    out += format_double(t.weight) + ":";
    if (t.transform == Transform::kLogThenExp) {
      out += "geo";
    } else if (std::isinf(t.exponent)) {
      out += t.exponent > 0 ? "inf" : "-inf";
    } else {
      out += format_double(t.exponent);
    }
  }
  return out;
}

}  // namespace

void IndexSpec::validate() const {
  check_group(numerator, "numerator");
  check_group(denominator, "denominator");
  if (std::all_of(denominator.begin(), denominator.end(),
                  [](const MpmfTerm& t) { return t.weight == 0.0; })) {
    throw ParameterError("denominator terms are all zero-weight");
  }
  if (!(slip_tau >= 0.0) || !std::isfinite(slip_tau)) {
    throw ParameterError("slip coefficient tau must be finite and >= 0");
  }
  const auto nonpositive = [](const MpmfTerm& t) { return t.exponent <= 0.0; };
  const bool needs_tau = std::any_of(numerator.begin(), numerator.end(), nonpositive) ||
                         std::any_of(denominator.begin(), denominator.end(), nonpositive);
  if (needs_tau && slip_tau == 0.0) {
    throw ParameterError("tau must be > 0 when an exponent <= 0 is used");
  }
}

std::vector<double> prepare_vector(const std::vector<double>& se, double tau, bool normalize) {
  if (se.empty()) throw DegenerateError("empty squared envelope");
  double sum = 0.0;
  for (double v : se) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("squared envelope must be finite and nonnegative");
    }
    sum += v;
  }
  const double mean = sum / static_cast<double>(se.size());
  std::vector<double> out(se.size());
  if (normalize) {
    if (mean == 0.0) throw DegenerateError("squared envelope has zero mean");
    for (std::size_t i = 0; i < se.size(); ++i) out[i] = se[i] / mean + tau;
  } else {
    for (std::size_t i = 0; i < se.size(); ++i) out[i] = se[i] + tau;
  }
  return out;
}

double eval_phi(const IndexSpec& spec, const std::vector<double>& se) {
  const auto x = prepared(spec, se);
  double num = 0.0;
  double den = 0.0;
  for (const auto& t : spec.numerator) num += t.weight * term_value(t, x);
  for (const auto& t : spec.denominator) den += t.weight * term_value(t, x);
  return finish(spec, num, den);
}

double eval_mhi(const IndexSpec& spec, const std::vector<double>& se) {
  const auto x = prepared(spec, se);
  double num = 1.0;
  double den = 1.0;
  for (const auto& t : spec.numerator) num *= t.weight * term_value(t, x);
  for (const auto& t : spec.denominator) den *= t.weight * term_value(t, x);
  return finish(spec, num, den);
}

double eval_spec(const IndexSpec& spec, const std::vector<double>& se) {
  return spec.kind == IndexKind::kPhi ? eval_phi(spec, se) : eval_mhi(spec, se);
}

double eval_ghi(const std::vector<IndexSpec>& specs, const std::vector<double>& se) {
  double total = 0.0;
  for (const auto& s : specs) total += eval_spec(s, se);
  return total;
}

double eval_hi(int which, const std::vector<double>& se, const HiOptions& options) {
  if (which < 1 || which > 4) throw ParameterError("health index must be 1..4");
  if (!(options.tau > 0.0)) throw ParameterError("HI1..HI4 need tau > 0");
  const auto x = prepare_vector(se, options.tau, options.normalize);
  const double g_m2 = mpmf::power_mean(x, -2.0);
  const double g_m1 = mpmf::power_mean(x, -1.0);
  switch (which) {
    case 1:
      return 1.0 - (g_m2 + g_m1) / (g_m1 + mpmf::power_mean(x, 1.0));
    case 2: {
      const double second = options.hi2 == Hi2Variant::kAsPrinted ? g_m2 : g_m1;
      return 1.0 - (g_m2 + second) / (mpmf::geometric_mean(x) + g_m1);
    }
    case 3:
      return 1.0 - (g_m2 * g_m2) / (mpmf::geometric_mean(x) * g_m1);
    default:
      return 1.0 - (mpmf::geometric_mean(x) * g_m2) / (mpmf::power_mean(x, 1.0) * g_m1);
  }
}

IndexSpec hi_spec(int which, const HiOptions& options) {
  const MpmfTerm m2{0.5, -2.0, Transform::kIdentity};
  const MpmfTerm m1{0.5, -1.0, Transform::kIdentity};
  const MpmfTerm p1{0.5, 1.0, Transform::kIdentity};
  const MpmfTerm geo{0.5, 0.0, Transform::kLogThenExp};
  IndexSpec s;
  s.lambda = -1.0;
  s.offset_c = 1.0;
  s.slip_tau = options.tau;
  s.normalize = options.normalize;
  switch (which) {
    case 1:
      s.kind = IndexKind::kPhi;
      s.numerator = {m2, m1};
      s.denominator = {m1, p1};
      break;
    case 2:
      s.kind = IndexKind::kPhi;
      s.numerator = {m2, options.hi2 == Hi2Variant::kAsPrinted ? m2 : m1};
      s.denominator = {geo, m1};
      break;
    case 3:
      s.kind = IndexKind::kMhi;
      s.numerator = {m2, m2};
      s.denominator = {geo, m1};
      break;
    case 4:
      s.kind = IndexKind::kMhi;
      s.numerator = {geo, m2};
      s.denominator = {p1, m1};
      break;
    default:
      throw ParameterError("health index must be 1..4");
  }
  return s;
}

HiSeries hi_series(const std::vector<SeriesInput>& files, const sigprep::Band& band,
                   const EnvelopeIndex& index, const std::string& index_name, int jobs) {
  HiSeries out;
  out.index_name = index_name;
  out.file_index.resize(files.size());
  out.value.assign(files.size(), std::numeric_limits<double>::quiet_NaN());
  out.gap_reason.assign(files.size(), "");
  for (std::size_t i = 1; i < files.size(); ++i) {
    if (files[i].signal && files[0].signal &&
        files[i].signal->sample_rate != files[0].signal->sample_rate) {
      throw ParameterError("hi_series requires a uniform sample rate");
    }
  }
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    const auto& f = files[i];
    out.file_index[i] = f.file_index;
    if (!f.signal) {
      out.gap_reason[i] = f.error.empty() ? "unreadable file" : f.error;
      return;
    }
    try {
      out.value[i] = index(sigprep::squared_envelope(*f.signal, band));
    } catch (const Error& e) {
      out.gap_reason[i] = e.what();
    }
  });
  return out;
}

HiSeries hi_series(const std::vector<SeriesInput>& files, const sigprep::Band& band, int which,
                   const HiOptions& options, int jobs) {
  if (which < 1 || which > 4) throw ParameterError("health index must be 1..4");
  return hi_series(
      files, band, [&](const std::vector<double>& se) { return eval_hi(which, se, options); },
      "HI" + std::to_string(which), jobs);
}

IndexSpec spec_from_config(const std::map<std::string, std::string>& kv) {
  IndexSpec s;
  for (const auto& [key, raw] : kv) {
    const std::string value = trim(raw);
    if (key == "kind") {
      if (value == "phi") {
        s.kind = IndexKind::kPhi;
      } else if (value == "mhi") {
        s.kind = IndexKind::kMhi;
      } else {
        throw ParameterError("index spec: kind must be phi or mhi, got '" + value + "'");
      }
    } else if (key == "numerator") {
      s.numerator = parse_terms(key, value);
    } else if (key == "denominator") {
      s.denominator = parse_terms(key, value);
    } else if (key == "lambda") {
      s.lambda = parse_double(key, value);
    } else if (key == "offset") {
      s.offset_c = parse_double(key, value);
    } else if (key == "tau") {
      s.slip_tau = parse_double(key, value);
    } else if (key == "normalize") {
      if (value == "true") {
        s.normalize = true;
      } else if (value == "false") {
        s.normalize = false;
      } else {
        throw ParameterError("index spec: normalize must be true or false");
      }
    } else {
      throw ParameterError("index spec: unknown key '" + key + "'");
    }
  }
  s.validate();
  return s;
}

std::map<std::string, std::string> spec_to_config(const IndexSpec& spec) {
  return {
      {"kind", spec.kind == IndexKind::kPhi ? "phi" : "mhi"},
      {"numerator", format_terms(spec.numerator)},
      {"denominator", format_terms(spec.denominator)},
      {"lambda", format_double(spec.lambda)},
      {"offset", format_double(spec.offset_c)},
      {"tau", format_double(spec.slip_tau)},
      {"normalize", spec.normalize ? "true" : "false"},
  };
}

}  // namespace sparsehm::health_index
