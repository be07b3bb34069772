#pragma once

// Replacement-cost savings for recalls a policy would have avoided, priced by
// medical specialty from claims data. Claim descriptions are mapped to
// specialties with keyword rules; a rule group matches when every keyword in
// it occurs in the normalized description.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clearance/csv.hpp"
#include "clearance/error.hpp"

namespace clearance {

struct ClaimRecord {
  std::string hcpcs_code;
  std::string description;
  double avg_allowed_amount = 0.0;
  double total_supplier_claims = 0.0;
};

struct CrosswalkRule {
  std::string specialty;  // full name, e.g. "Clinical Chemistry"
  std::string code;       // two-letter review panel code, e.g. "CH"
  std::vector<std::vector<std::string>> keyword_groups;
};

struct AvoidedRecall {
  std::string device_id;
  std::string specialty;
  double units_recalled = 0.0;
};

struct SpecialtySavings {
  double units = 0.0;
  double low = 0.0;
  double high = 0.0;
  bool used_fallback = false;
};

struct SavingsEstimate {
  std::map<std::string, SpecialtySavings> per_specialty;
  double total_low = 0.0;
  double total_high = 0.0;
};

struct FallbackBounds {
  double low = 0.0;
  double high = 0.0;
};

/// Lowercases and collapses whitespace runs to single spaces (trimmed).
inline std::string normalize_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

/// Default rules, in table order.
inline const std::vector<CrosswalkRule>& default_crosswalk() {
  using G = std::vector<std::vector<std::string>>;
  static const std::vector<CrosswalkRule> rules{
      {"Anesthesiology", "AN",
       G{{"aerosol", "compressor"}, {"airway"}, {"breathing circuits"}, {"cough"}, {"face mask"},
         {"nasal cannula"}, {"nasal mask"}, {"nebulization"}, {"nebulizer"}, {"oropharyngeal"},
         {"oxygen"}, {"positive expiratory pressure"}, {"respiratory"}, {"tracheal suction"},
         {"ventilator"}}},
      {"Cardiovascular", "CV", G{{"defibrillator"}, {"pneumatic compression device"}}},
      {"Clinical Chemistry", "CH",
       G{{"calibrator solution"}, {"glucose monitor"}, {"glucose", "monitor"}}},
      {"Dental", "DE", G{{"osteogenesis"}}},
      {"Gastroenterology/Urology", "GU",
       G{{"bladder"}, {"cervical"}, {"drainage bag"}, {"indwelling catheter"},
         {"insertion tray", "catheter"}, {"leg strap"}, {"male", "catheter"}, {"ostomy"},
         {"parenteral"}, {"pelvic floor"}, {"stoma cap"}, {"urethral"}, {"urinary"}}},
      {"General & Plastic Surgery", "SU",
       G{{"adhesive"}, {"bandage"}, {"chest wall"}, {"collagen", "wound"}, {"compression", "wrap"},
         {"dressing"}, {"gauze"}, {"lancet"}, {"skin barrier"}, {"sterile water"}, {"tape"},
         {"tubing", "pump"}, {"ultraviolet", "therapy"}, {"wound"}}},
      {"General Hospital", "HO",
       G{{"ambulatory infusion pump"}, {"bath"}, {"bed"}, {"canister", "pump"}, {"chair"},
         {"compression stocking"}, {"compression", "garment"}, {"compressor", "for equipment"},
         {"drug infusion"}, {"footplate"}, {"footrests"}, {"heel loop"}, {"infusion pump"},
         {"insulin"}, {"irrigation"}, {"iv pole"}, {"lubricant"}, {"mattress"},
         {"transfer device"}, {"urinal", "jug-type"}}},
      {"Neurology", "NE", G{{"conductive garment"}, {"nerve stimulation"}}},
      {"Physical Medicine", "PM",
       G{{"armrest"}, {"cane"}, {"commode chair"}, {"crutches"}, {"electrical", "stimulator"},
         {"flexion"}, {"foot", "density insert"}, {"foot", "shoe molded"}, {"heat pad"},
         {"inlay", "shoe"}, {"knee", "exercise"}, {"leg", "compressor"},
         {"neuromuscular stimulator"}, {"patient lift"}, {"patient support system"},
         {"patient transfer"}, {"pneumatic", "compressor"}, {"rear wheel"},
         {"traction", "cervical"}, {"trapeze"}, {"vehicle"}, {"walker"}, {"wheelchair"}}},
  };
  return rules;
}

/// First rule (in order) with a fully matching keyword group; nullopt when unmatched.
inline std::optional<std::string> classify_hcpcs(std::string_view description,
                                                 std::span<const CrosswalkRule> rules) {
  const std::string text = normalize_text(description);
  for (const auto& rule : rules)
    for (const auto& group : rule.keyword_groups) {
      if (group.empty()) continue;
      const bool all = std::all_of(group.begin(), group.end(), [&](const std::string& k) {
        return text.find(normalize_text(k)) != std::string::npos;
      });
      if (all) return rule.specialty;
    }
  return std::nullopt;
}

/// Claim-weighted mean allowed amount per specialty; unmatched claims are dropped.
inline std::map<std::string, double> specialty_avg_allowed(std::span<const ClaimRecord> claims,
                                                           std::span<const CrosswalkRule> rules) {
  if (claims.empty()) throw Error("no claim records");
  std::map<std::string, std::pair<double, double>> acc;  // amount * claims, claims
  for (const auto& c : claims) {
    if (c.avg_allowed_amount < 0.0 || c.total_supplier_claims < 0.0)
      throw Error("claim '" + c.hcpcs_code + "' has a negative amount or claim count");
    const auto spec = classify_hcpcs(c.description, rules);
    if (!spec) continue;
    auto& [num, den] = acc[*spec];
    num += c.avg_allowed_amount * c.total_supplier_claims;
    den += c.total_supplier_claims;
  }
  std::map<std::string, double> out;
  for (const auto& [spec, nd] : acc)
    if (nd.second > 0.0) out[spec] = nd.first / nd.second;
  return out;
}

/// Fraction of distinct HCPCS codes whose description maps to some specialty.
inline double hcpcs_coverage(std::span<const ClaimRecord> claims, std::span<const CrosswalkRule> rules) {
  std::set<std::string> all, matched;
  for (const auto& c : claims) {
    all.insert(c.hcpcs_code);
    if (classify_hcpcs(c.description, rules)) matched.insert(c.hcpcs_code);
  }
  return all.empty() ? 0.0 : static_cast<double>(matched.size()) / static_cast<double>(all.size());
}

/// low = cheapest specialty mean; high = frequency-weighted mean over specialties
/// that have a mean (weights renormalized over those).
inline FallbackBounds fallback_bounds(const std::map<std::string, double>& specialty_means,
                                      const std::map<std::string, double>& specialty_frequencies) {
  if (specialty_means.empty()) throw Error("no specialty means to derive fallback prices from");
  FallbackBounds b;
  b.low = specialty_means.begin()->second;
  for (const auto& [_, m] : specialty_means) b.low = std::min(b.low, m);
  double num = 0.0, den = 0.0;
  for (const auto& [spec, m] : specialty_means) {
    const auto it = specialty_frequencies.find(spec);
    if (it == specialty_frequencies.end()) continue;
    if (it->second < 0.0) throw Error("negative specialty frequency for '" + spec + "'");
    num += it->second * m;
    den += it->second;
  }
  if (!(den > 0.0)) throw Error("specialty frequencies do not overlap any priced specialty");
  b.high = num / den;
  return b;
}

/// Units times the specialty mean where one exists, else the fallback bounds.
inline SavingsEstimate estimate_savings(std::span<const AvoidedRecall> avoided,
                                        const std::map<std::string, double>& specialty_means,
                                        FallbackBounds fallback) {
  if (fallback.low > fallback.high) throw Error("fallback low exceeds fallback high");
  SavingsEstimate est;
  for (const auto& a : avoided) {
    if (a.units_recalled < 0.0) throw Error("device '" + a.device_id + "' has negative units");
    auto& s = est.per_specialty[a.specialty];
    s.units += a.units_recalled;
    const auto it = specialty_means.find(a.specialty);
    if (it != specialty_means.end()) {
      s.low += a.units_recalled * it->second;
      s.high += a.units_recalled * it->second;
    } else {
      s.low += a.units_recalled * fallback.low;
      s.high += a.units_recalled * fallback.high;
      s.used_fallback = true;
    }
  }
  for (const auto& [_, s] : est.per_specialty) {
    est.total_low += s.low;
    est.total_high += s.high;
  }
  return est;
}

/// Scales a total observed on an evaluation set to a yearly figure.
inline double annualize_savings(double total, std::size_t evaluation_set_size,
                                double annual_submissions) {
  if (evaluation_set_size == 0) throw Error("evaluation set size must be positive");
  return total * annual_submissions / static_cast<double>(evaluation_set_size);
}

/// Maps a panel code (e.g. "GU") to its rule's specialty name; other strings pass through.
inline std::string resolve_specialty(std::string_view s, std::span<const CrosswalkRule> rules) {
  for (const auto& r : rules)
    if (r.code == s || r.specialty == s) return r.specialty;
  return std::string(s);
}

// ---------------------------------------------------------------------------
// CSV ingestion

inline std::vector<ClaimRecord> read_claims_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const auto c_code = t.require_column("hcpcs");
  const auto c_desc = t.require_column("description");
  const auto c_amt = t.require_column("avg_allowed");
  const auto c_n = t.require_column("total_claims");
  std::vector<ClaimRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = "line " + std::to_string(t.line_numbers[i]) + ": ";
    const auto amt = csv::parse_double(row[c_amt]);
    const auto n = csv::parse_double(row[c_n]);
    if (!amt || *amt < 0.0) throw Error(where + "avg_allowed must be a non-negative number");
    if (!n || *n < 0.0) throw Error(where + "total_claims must be a non-negative number");
    out.push_back({row[c_code], row[c_desc], *amt, *n});
  }
  return out;
}

inline std::vector<AvoidedRecall> read_avoided_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const auto c_id = t.require_column("device_id");
  const auto c_spec = t.require_column("specialty");
  const auto c_units = t.require_column("units");
  std::vector<AvoidedRecall> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto units = csv::parse_double(row[c_units]);
    if (!units || *units < 0.0)
      throw Error("line " + std::to_string(t.line_numbers[i]) + ": units must be a non-negative number");
    out.push_back({row[c_id], row[c_spec], *units});
  }
  return out;
}

}  // namespace clearance
