#pragma once

// Predictors built from an applicant submission and its predicate devices.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clearance/csv.hpp"
#include "clearance/error.hpp"
#include "clearance/score_model.hpp"

namespace clearance {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD.
inline Date parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw Error("bad date '" + std::string(s) + "'");
  const auto y = csv::parse_int(s.substr(0, 4));
  const auto m = csv::parse_int(s.substr(5, 2));
  const auto d = csv::parse_int(s.substr(8, 2));
  if (!y || !m || !d) throw Error("bad date '" + std::string(s) + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(*y)},
                                        std::chrono::month{static_cast<unsigned>(*m)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) throw Error("bad date '" + std::string(s) + "'");
  return Date{ymd};
}

inline int year_of(Date d) { return static_cast<int>(std::chrono::year_month_day{d}.year()); }

enum class DeviceClass { I, II };

struct RecallEvent {
  Date event_date;
  int recall_class = 2;  // 1 severe, 2 moderate, 3 mild
};

struct PredicateDevice {
  std::string device_id;
  int decision_year = 0;
  std::string medical_specialty;
  std::string product_code;
  std::vector<RecallEvent> recalls;
};

struct ApplicantSubmission {
  std::string device_id;
  Date submission_date;
  std::string medical_specialty;
  std::string product_code;
  std::string country_code;
  DeviceClass device_class = DeviceClass::II;
  bool implantable = false;
  bool life_sustaining = false;
  std::vector<PredicateDevice> predicates;
};

struct PredicateAges {
  double avg = 0.0;
  double median = 0.0;
  double newest = 0.0;
  double oldest = 0.0;
};

struct RecallCounts {
  std::size_t class1 = 0;
  std::size_t class2 = 0;
  std::size_t class3 = 0;
};

struct UnmatchedProportions {
  double specialties = 0.0;
  double product_codes = 0.0;
};

struct FeatureVector {
  std::string device_id;
  std::size_t num_predicates = 0;
  double prop_unmatched_specialties = 0.0;
  double prop_unmatched_product_codes = 0.0;
  double predicate_avg_age = 0.0;
  double predicate_median_age = 0.0;
  double predicate_newest_age = 0.0;
  double predicate_oldest_age = 0.0;
  std::size_t num_class1 = 0;
  std::size_t num_class2 = 0;
  std::size_t num_class3 = 0;
  double variance_of_recalls = 0.0;
  double weighted_recall_score = 0.0;
  // Pass-through categorical fields; one-hot expansion is left to consumers.
  std::string medical_specialty;
  std::string product_code;
  std::string country_code;
  DeviceClass device_class = DeviceClass::II;
  bool implantable = false;
  bool life_sustaining = false;
  // Recall events dated after the submission, dropped from every recall feature.
  std::size_t excluded_future_recalls = 0;

  bool operator==(const FeatureVector&) const = default;
};

inline constexpr double kRecallWindowYears = 10.0;
inline constexpr double kDaysPerYear = 365.25;

/// Linear decay from 1 at age 0 to 0 at ten years and beyond.
inline double recall_weight_years(double age_years) {
  if (age_years < 0.0) throw Error("recall event dated after the submission");
  if (age_years >= kRecallWindowYears) return 0.0;
  return (kRecallWindowYears - age_years) / kRecallWindowYears;
}

inline double recall_weight(Date submission_date, Date event_date) {
  const auto days = (submission_date - event_date).count();
  return recall_weight_years(static_cast<double>(days) / kDaysPerYear);
}

namespace detail {

inline bool counts(const ApplicantSubmission& sub, const RecallEvent& e) {
  return e.event_date <= sub.submission_date;
}

}  // namespace detail

/// Mean weight over all predicate recall events known at submission; 0 without events.
inline double weighted_recall_score(const ApplicantSubmission& sub) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : sub.predicates)
    for (const auto& e : p.recalls) {
      if (!detail::counts(sub, e)) continue;
      sum += recall_weight(sub.submission_date, e.event_date);
      ++n;
    }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// Sample variance (n - 1) of per-predicate recall counts; 0 for a single predicate.
inline double variance_of_recalls(const ApplicantSubmission& sub) {
  const std::size_t n = sub.predicates.size();
  if (n < 2) return 0.0;
  std::vector<double> c;
  c.reserve(n);
  for (const auto& p : sub.predicates)
    c.push_back(static_cast<double>(std::count_if(p.recalls.begin(), p.recalls.end(),
                                                  [&](const RecallEvent& e) { return detail::counts(sub, e); })));
  double mean = 0.0;
  for (double x : c) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : c) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(n - 1);
}

/// Ages in whole years between predicate decisions and the submission year.
inline PredicateAges predicate_ages(const ApplicantSubmission& sub) {
  if (sub.predicates.empty()) throw Error("submission '" + sub.device_id + "' has no predicates");
  const int sy = year_of(sub.submission_date);
  std::vector<double> ages;
  for (const auto& p : sub.predicates) ages.push_back(static_cast<double>(sy - p.decision_year));
  std::sort(ages.begin(), ages.end());
  PredicateAges out;
  double sum = 0.0;
  for (double a : ages) sum += a;
  out.avg = sum / static_cast<double>(ages.size());
  const std::size_t n = ages.size();
  out.median = n % 2 == 1 ? ages[n / 2] : 0.5 * (ages[n / 2 - 1] + ages[n / 2]);
  out.newest = ages.front();
  out.oldest = ages.back();
  return out;
}

/// Distinct predicate values differing from the applicant's, over the predicate count.
inline UnmatchedProportions unmatched_proportions(const ApplicantSubmission& sub) {
  if (sub.predicates.empty()) throw Error("submission '" + sub.device_id + "' has no predicates");
  std::set<std::string> spec, code;
  for (const auto& p : sub.predicates) {
    if (p.medical_specialty != sub.medical_specialty) spec.insert(p.medical_specialty);
    if (p.product_code != sub.product_code) code.insert(p.product_code);
  }
  const auto n = static_cast<double>(sub.predicates.size());
  return {static_cast<double>(spec.size()) / n, static_cast<double>(code.size()) / n};
}

inline RecallCounts recall_counts_by_class(const ApplicantSubmission& sub) {
  RecallCounts c;
  for (const auto& p : sub.predicates)
    for (const auto& e : p.recalls) {
      if (!detail::counts(sub, e)) continue;
      switch (e.recall_class) {
        case 1: ++c.class1; break;
        case 2: ++c.class2; break;
        case 3: ++c.class3; break;
        default: throw Error("recall class must be 1, 2 or 3");
      }
    }
  return c;
}

inline void validate(const ApplicantSubmission& sub) {
  const std::string who = "submission '" + sub.device_id + "': ";
  if (sub.device_id.empty()) throw Error("submission with empty device_id");
  if (sub.predicates.empty()) throw Error(who + "at least one predicate is required");
  const int sy = year_of(sub.submission_date);
  for (const auto& p : sub.predicates) {
    if (p.decision_year < 1976 || p.decision_year > sy)
      throw Error(who + "predicate '" + p.device_id + "' has implausible decision year " +
                  std::to_string(p.decision_year));
    for (const auto& e : p.recalls)
      if (e.recall_class < 1 || e.recall_class > 3)
        throw Error(who + "recall class must be 1, 2 or 3");
  }
}

inline FeatureVector build_features(const ApplicantSubmission& sub) {
  validate(sub);
  FeatureVector f;
  f.device_id = sub.device_id;
  f.num_predicates = sub.predicates.size();
  const auto um = unmatched_proportions(sub);
  f.prop_unmatched_specialties = um.specialties;
  f.prop_unmatched_product_codes = um.product_codes;
  const auto ages = predicate_ages(sub);
  f.predicate_avg_age = ages.avg;
  f.predicate_median_age = ages.median;
  f.predicate_newest_age = ages.newest;
  f.predicate_oldest_age = ages.oldest;
  const auto rc = recall_counts_by_class(sub);
  f.num_class1 = rc.class1;
  f.num_class2 = rc.class2;
  f.num_class3 = rc.class3;
  f.variance_of_recalls = variance_of_recalls(sub);
  f.weighted_recall_score = weighted_recall_score(sub);
  f.medical_specialty = sub.medical_specialty;
  f.product_code = sub.product_code;
  f.country_code = sub.country_code;
  f.device_class = sub.device_class;
  f.implantable = sub.implantable;
  f.life_sustaining = sub.life_sustaining;
  for (const auto& p : sub.predicates)
    for (const auto& e : p.recalls)
      if (!detail::counts(sub, e)) ++f.excluded_future_recalls;
  return f;
}

inline constexpr std::string_view kFeatureCsvHeader =
    "device_id,num_predicates,prop_unmatched_specialties,prop_unmatched_product_codes,"
    "predicate_avg_age,predicate_median_age,predicate_newest_age,predicate_oldest_age,"
    "num_class1_recalls,num_class2_recalls,num_class3_recalls,variance_of_recalls,"
    "weighted_recall_score,medical_specialty,product_code,country_code,device_class,"
    "implantable,life_sustaining,excluded_future_recalls";

inline void write_features_csv(std::ostream& out, std::span<const FeatureVector> rows) {
  out << kFeatureCsvHeader << '\n';
  for (const auto& f : rows) {
    out << csv::escape(f.device_id) << ',' << f.num_predicates << ','
        << format_double(f.prop_unmatched_specialties) << ','
        << format_double(f.prop_unmatched_product_codes) << ',' << format_double(f.predicate_avg_age)
        << ',' << format_double(f.predicate_median_age) << ','
        << format_double(f.predicate_newest_age) << ',' << format_double(f.predicate_oldest_age)
        << ',' << f.num_class1 << ',' << f.num_class2 << ',' << f.num_class3 << ','
        << format_double(f.variance_of_recalls) << ',' << format_double(f.weighted_recall_score)
        << ',' << csv::escape(f.medical_specialty) << ',' << csv::escape(f.product_code) << ','
        << csv::escape(f.country_code) << ',' << (f.device_class == DeviceClass::I ? "I" : "II")
        << ',' << (f.implantable ? 1 : 0) << ',' << (f.life_sustaining ? 1 : 0) << ','
        << f.excluded_future_recalls << '\n';
  }
}

}  // namespace clearance
