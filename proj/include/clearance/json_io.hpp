#pragma once

// JSON encodings for policies, metrics, savings, crosswalk rules and
// submission records. Objects use a fixed field order.

#include <istream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clearance/cost_model.hpp"
#include "clearance/error.hpp"
#include "clearance/feature_engineering.hpp"
#include "clearance/policy_evaluator.hpp"
#include "clearance/policy_optimizer.hpp"

namespace clearance {

using Json = nlohmann::ordered_json;

inline Json to_json(const ThresholdPolicy& p) {
  Json j;
  j["case"] = std::string(to_string(p.case_tag));
  if (p.feasible()) {
    j["l"] = p.low;
    j["h"] = p.high;
    j["objective_value"] = p.objective_value;
    j["workload_at_solution"] = p.workload_at_solution;
  }
  j["l_bound"] = p.l_bound;
  j["h_bound"] = p.h_bound;
  return j;
}

inline ThresholdPolicy policy_from_json(const Json& j) {
  try {
    ThresholdPolicy p;
    p.case_tag = case_tag_from_string(j.at("case").get<std::string>());
    if (!p.feasible()) throw Error("policy file holds an infeasible result");
    p.low = j.at("l").get<double>();
    p.high = j.at("h").get<double>();
    if (!(0.0 <= p.low && p.low <= p.high && p.high <= 1.0))
      throw Error("policy thresholds must satisfy 0 <= l <= h <= 1");
    if (j.contains("objective_value")) p.objective_value = j["objective_value"].get<double>();
    if (j.contains("workload_at_solution"))
      p.workload_at_solution = j["workload_at_solution"].get<double>();
    if (j.contains("l_bound")) p.l_bound = j["l_bound"].get<double>();
    if (j.contains("h_bound")) p.h_bound = j["h_bound"].get<double>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed policy JSON: ") + e.what());
  }
}

inline Json to_json(const PolicyMetrics& m) {
  Json j;
  j["n_total"] = m.n_total;
  j["n_unsafe"] = m.n_unsafe;
  j["n_safe"] = m.n_safe;
  j["reject_unsafe"] = m.reject_unsafe;
  j["accept_safe"] = m.accept_safe;
  j["accept_unsafe"] = m.accept_unsafe;
  j["reject_safe"] = m.reject_safe;
  j["defer_unsafe"] = m.defer_unsafe;
  j["defer_safe"] = m.defer_safe;
  j["workload"] = m.workload;
  j["workload_reduction"] = m.workload_reduction;
  j["current_recall_rate"] = m.current_recall_rate;
  j["policy_recall_rate"] = m.policy_recall_rate;
  j["relative_improvement_points"] = m.relative_improvement_points;
  j["pct_improvement"] = m.pct_improvement;
  j["final_accept_unsafe"] = m.final_accept_unsafe;
  j["final_reject_safe"] = m.final_reject_safe;
  j["committee_rejected_unsafe"] = m.committee_rejected_unsafe;
  return j;
}

inline Json to_json(const SavingsEstimate& s) {
  Json j;
  Json per = Json::object();
  for (const auto& [spec, v] : s.per_specialty)
    per[spec] = Json{{"units", v.units}, {"low", v.low}, {"high", v.high}, {"used_fallback", v.used_fallback}};
  j["per_specialty"] = per;
  j["total_low"] = s.total_low;
  j["total_high"] = s.total_high;
  return j;
}

// ---------------------------------------------------------------------------
// Crosswalk config: [{"specialty": ..., "code": ..., "keywords": [["a"], ["b", "c"]]}, ...]

inline Json crosswalk_to_json(const std::vector<CrosswalkRule>& rules) {
  Json arr = Json::array();
  for (const auto& r : rules) {
    Json groups = Json::array();
    for (const auto& g : r.keyword_groups) groups.push_back(g);
    arr.push_back(Json{{"specialty", r.specialty}, {"code", r.code}, {"keywords", groups}});
  }
  return arr;
}

inline std::vector<CrosswalkRule> crosswalk_from_json(const Json& j) {
  try {
    std::vector<CrosswalkRule> rules;
    for (const auto& r : j) {
      CrosswalkRule rule;
      rule.specialty = r.at("specialty").get<std::string>();
      rule.code = r.value("code", std::string{});
      for (const auto& g : r.at("keywords")) {
        std::vector<std::string> group;
        if (g.is_string())
          group.push_back(g.get<std::string>());
        else
          group = g.get<std::vector<std::string>>();
        for (auto& k : group) {
          k = normalize_text(k);
          if (k.empty()) throw Error("empty keyword in crosswalk rule '" + rule.specialty + "'");
        }
        rule.keyword_groups.push_back(std::move(group));
      }
      rules.push_back(std::move(rule));
    }
    return rules;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed crosswalk JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Submissions (JSON lines)

inline ApplicantSubmission submission_from_json(const Json& j) {
  try {
    ApplicantSubmission s;
    s.device_id = j.at("device_id").get<std::string>();
    s.submission_date = parse_date(j.at("submission_date").get<std::string>());
    s.medical_specialty = j.at("medical_specialty").get<std::string>();
    s.product_code = j.at("product_code").get<std::string>();
    s.country_code = j.at("country_code").get<std::string>();
    const auto cls = j.at("device_class").get<std::string>();
    if (cls == "I")
      s.device_class = DeviceClass::I;
    else if (cls == "II")
      s.device_class = DeviceClass::II;
    else
      throw Error("device_class must be I or II, got '" + cls + "'");
    s.implantable = j.at("implantable").get<bool>();
    s.life_sustaining = j.at("life_sustaining").get<bool>();
    for (const auto& pj : j.at("predicates")) {
      PredicateDevice p;
      p.device_id = pj.at("device_id").get<std::string>();
      p.decision_year = pj.at("decision_year").get<int>();
      p.medical_specialty = pj.at("medical_specialty").get<std::string>();
      p.product_code = pj.at("product_code").get<std::string>();
      if (pj.contains("recalls"))
        for (const auto& rj : pj["recalls"])
          p.recalls.push_back({parse_date(rj.at("event_date").get<std::string>()),
                               rj.at("recall_class").get<int>()});
      s.predicates.push_back(std::move(p));
    }
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed submission: ") + e.what());
  }
}

inline std::vector<ApplicantSubmission> read_submissions_jsonl(std::istream& in) {
  std::vector<ApplicantSubmission> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(submission_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace clearance
