#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "yrisk/error.hpp"
#include "yrisk/survey.hpp"
#include "yrisk/util.hpp"

namespace yrisk {

// Subgroups below this size are skipped: the normal approximation behind the
// one-proportion z-test is not trustworthy for tiny groups.
inline constexpr std::size_t kMinSubgroupSize = 30;

inline double baseline_proportion(std::span<const int> y) {
  if (y.empty()) throw DomainError("baseline_proportion: empty label vector");
  std::size_t pos = 0;
  for (int v : y) pos += static_cast<std::size_t>(v != 0);
  return static_cast<double>(pos) / static_cast<double>(y.size());
}

inline double baseline_proportion(const std::vector<std::optional<int>>& y) {
  std::size_t pos = 0, total = 0;
  for (const auto& v : y) {
    if (!v.has_value()) continue;
    ++total;
    pos += static_cast<std::size_t>(*v != 0);
  }
  if (total == 0) throw DomainError("baseline_proportion: no known labels");
  return static_cast<double>(pos) / static_cast<double>(total);
}

// z = (p_hat - p0) / sqrt(p0 (1 - p0) / n), with the baseline variance.
// Factored as diff * sqrt(n) / sqrt(p0 (1 - p0)) so that quadrupling n
// exactly doubles z in floating point as well.
inline double one_prop_ztest(double p_hat, double p0, std::size_t n) {
  if (n < 1) throw DomainError("one_prop_ztest: n must be >= 1");
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw DomainError("one_prop_ztest: p_hat outside [0,1]");
  if (!(p0 > 0.0 && p0 < 1.0)) throw DataError("one_prop_ztest: degenerate baseline proportion");
  return (p_hat - p0) * std::sqrt(static_cast<double>(n)) / std::sqrt(p0 * (1.0 - p0));
}

namespace detail {

// ln P(N(0,1) > x) for x >= 8 via the Mills-ratio asymptotic series,
// so extreme tails (|z| ~ 33 -> p ~ 1e-236) keep full relative accuracy.
inline double log_norm_sf_tail(double x) {
  const double inv_x2 = 1.0 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 40; ++k) {
    term *= -(2.0 * k - 1.0) * inv_x2;
    if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    sum += term;
  }
  return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(sum);
}

inline constexpr double kTailSwitch = 8.0;

}  // namespace detail

// Natural log of the two-sided p-value 2 (1 - Phi(|z|)).
inline double log_two_sided_p(double z) {
  if (!std::isfinite(z)) throw DomainError("two_sided_p: non-finite z");
  double x = std::fabs(z);
  if (x < detail::kTailSwitch) return std::log(std::erfc(x / std::numbers::sqrt2));
  return std::numbers::ln2 + detail::log_norm_sf_tail(x);
}

inline double two_sided_p(double z) {
  if (!std::isfinite(z)) throw DomainError("two_sided_p: non-finite z");
  double x = std::fabs(z);
  if (x < detail::kTailSwitch) return std::erfc(x / std::numbers::sqrt2);
  return std::exp(std::numbers::ln2 + detail::log_norm_sf_tail(x));
}

// log10 form used for reporting: stays finite far beyond double underflow.
inline double two_sided_log10_p(double z) { return log_two_sided_p(z) / std::numbers::ln10; }

// "3.157e-236"-style rendering; ordinary magnitudes print as plain decimals.
inline std::string format_p(double p, double log10_p) {
  if (log10_p >= -4.0) return fmt_double(p);
  double e = std::floor(log10_p);
  double m = std::pow(10.0, log10_p - e);
  if (m >= 9.9995) {
    m /= 10.0;
    e += 1.0;
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3fe%lld", m, static_cast<long long>(e));
  return std::string(buf);
}

// One question's association with the label: the z and p of its strongest
// response subgroup against the cohort baseline.
struct FeatureScore {
  std::string question;
  double z = 0.0;
  double p = 1.0;
  double log10_p = 0.0;
  std::size_t n_sub = 0;
  double p_hat = 0.0;
  double p0 = 0.0;
  double response_value = 0.0;

  bool passes(double alpha) const { return log10_p < std::log10(alpha); }
};

struct SelectionResult {
  std::vector<FeatureScore> scores;   // every scored question, |z| descending
  std::vector<std::string> selected;  // top-k ids in natural question order
  double alpha = 0.05;
  int k = 4;
};

// Scores one question: for every distinct response code, the depression
// proportion among respondents giving it is tested against the baseline;
// the subgroup with the largest |z| represents the question (ties go to the
// smaller response code). Rows with a missing answer or label are left out
// of that question's test.
inline FeatureScore score_feature(const SurveyTable& t, const std::vector<std::optional<int>>& y,
                                  std::string_view question, double p0,
                                  std::size_t min_subgroup = kMinSubgroupSize) {
  int col = t.require_column(question);
  if (y.size() != t.n_rows()) throw DomainError("score_feature: label vector length mismatch");

  struct Group {
    std::size_t n = 0;
    std::size_t pos = 0;
  };
  std::map<double, Group> groups;  // keyed ascending by response code
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const Cell& cell = t.cell(r, static_cast<std::size_t>(col));
    if (cell.missing()) continue;
    if (!cell.is_number())
      throw DataError("score_feature: " + std::string(question) + " holds non-numeric responses");
    if (!y[r].has_value()) continue;
    Group& g = groups[cell.number];
    ++g.n;
    g.pos += static_cast<std::size_t>(*y[r] != 0);
  }

  bool found = false;
  FeatureScore best;
  best.question = std::string(question);
  best.p0 = p0;
  for (const auto& [value, g] : groups) {
    if (g.n < min_subgroup) continue;
    double p_hat = static_cast<double>(g.pos) / static_cast<double>(g.n);
    double z = one_prop_ztest(p_hat, p0, g.n);
    if (!found || std::fabs(z) > std::fabs(best.z)) {
      found = true;
      best.z = z;
      best.n_sub = g.n;
      best.p_hat = p_hat;
      best.response_value = value;
    }
  }
  if (!found)
    throw DataError("score_feature: " + std::string(question) + ": every response subgroup below " +
                    std::to_string(min_subgroup) + " rows");
  best.log10_p = two_sided_log10_p(best.z);
  best.p = two_sided_p(best.z);
  return best;
}

// Scores every candidate question. The label question and the cohort-filter
// questions (q4, q5) are never candidates; questions without a large-enough
// subgroup are skipped.
inline std::vector<FeatureScore> score_features(const SurveyTable& t, const std::vector<std::optional<int>>& y,
                                                std::string_view label_q, double p0,
                                                std::size_t min_subgroup = kMinSubgroupSize) {
  std::vector<FeatureScore> scores;
  for (const auto& q : t.columns()) {
    if (q == label_q || q == kRaceQuestion || q == kEthnicityQuestion) continue;
    try {
      scores.push_back(score_feature(t, y, q, p0, min_subgroup));
    } catch (const DataError&) {
      continue;  // unscorable question (tiny subgroups or non-numeric codes)
    }
  }
  std::sort(scores.begin(), scores.end(),
            [](const FeatureScore& a, const FeatureScore& b) { return qid_less(a.question, b.question); });
  return scores;
}

// Keeps questions with p < alpha, ranks by |z| descending (ties by question
// id), takes the first k. `exclude` guards against the label question ever
// selecting itself.
inline SelectionResult select_top_k(const std::vector<FeatureScore>& scores, int k, double alpha,
                                    std::string_view exclude = {}) {
  if (scores.empty()) throw DomainError("select_top_k: no scores");
  if (k < 1) throw DomainError("select_top_k: k must be >= 1");

  SelectionResult out;
  out.alpha = alpha;
  out.k = k;
  out.scores = scores;
  auto rank_less = [](const FeatureScore& a, const FeatureScore& b) {
    double za = std::fabs(a.z), zb = std::fabs(b.z);
    if (za != zb) return za > zb;
    return qid_less(a.question, b.question);
  };
  std::sort(out.scores.begin(), out.scores.end(), rank_less);

  for (const auto& s : out.scores) {
    if (static_cast<int>(out.selected.size()) >= k) break;
    if (!s.passes(alpha)) continue;
    if (!exclude.empty() && s.question == exclude) continue;
    out.selected.push_back(s.question);
  }
  std::sort(out.selected.begin(), out.selected.end(),
            [](const std::string& a, const std::string& b) { return qid_less(a, b); });
  return out;
}

// Feature-report CSV: one row per scored question.
inline std::string selection_to_csv(const SelectionResult& r) {
  std::string out = "feature,z,p,passes_alpha\n";
  for (const auto& s : r.scores) {
    out += s.question;
    out += ',';
    out += fmt_double(s.z);
    out += ',';
    out += format_p(s.p, s.log10_p);
    out += ',';
    out += s.passes(r.alpha) ? "yes" : "no";
    out += '\n';
  }
  return out;
}

}  // namespace yrisk
