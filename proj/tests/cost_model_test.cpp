#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "clearance/cost_model.hpp"
#include "clearance/json_io.hpp"

namespace clearance {
namespace {

TEST(ClassifyHcpcs, TableExamples) {
  const auto& rules = default_crosswalk();
  EXPECT_EQ(classify_hcpcs("Ostomy pouch, drainable", rules), "Gastroenterology/Urology");
  EXPECT_EQ(classify_hcpcs("Home blood glucose monitor", rules), "Clinical Chemistry");
  EXPECT_EQ(classify_hcpcs("Glucose test strip for monitor", rules), "Clinical Chemistry");
  EXPECT_EQ(classify_hcpcs("Glucose test strip", rules), std::nullopt);
  EXPECT_EQ(classify_hcpcs("Walker, folding", rules), "Physical Medicine");
  EXPECT_EQ(classify_hcpcs("Hearing aid battery", rules), std::nullopt);
}

TEST(ClassifyHcpcs, CaseAndWhitespaceInsensitive) {
  const auto& rules = default_crosswalk();
  EXPECT_EQ(classify_hcpcs("OSTOMY   POUCH", rules), classify_hcpcs("ostomy pouch", rules));
  EXPECT_EQ(classify_hcpcs("Nasal\tCannula", rules), "Anesthesiology");
  EXPECT_EQ(normalize_text("  A  b\n C "), "a b c");
}

TEST(ClassifyHcpcs, FirstMatchingRuleWins) {
  // "pneumatic compression device" is CV; "pneumatic ... compressor" is PM.
  const auto& rules = default_crosswalk();
  EXPECT_EQ(classify_hcpcs("Pneumatic compression device, full leg", rules), "Cardiovascular");
  EXPECT_EQ(classify_hcpcs("Pneumatic compressor, segmental", rules), "Physical Medicine");
  // Substring matching: "wheelchair" contains General Hospital's "chair", listed before Physical Medicine.
  EXPECT_EQ(classify_hcpcs("Standard wheelchair", rules), "General Hospital");
}

TEST(SpecialtyAvgAllowed, ClaimWeightedMean) {
  const std::vector<ClaimRecord> claims{{"A1", "ostomy pouch", 10.0, 100.0},
                                        {"A2", "ostomy belt", 25.0, 100.0},
                                        {"Z9", "something unmapped", 1000.0, 5.0}};
  const auto m = specialty_avg_allowed(claims, default_crosswalk());
  ASSERT_EQ(m.size(), 1u);
  EXPECT_DOUBLE_EQ(m.at("Gastroenterology/Urology"), 17.5);
  EXPECT_DOUBLE_EQ(hcpcs_coverage(claims, default_crosswalk()), 2.0 / 3.0);
}

TEST(SpecialtyAvgAllowed, InvariantToClaimOrder) {
  std::vector<ClaimRecord> claims;
  std::mt19937_64 rng(4);
  const char* descs[] = {"ostomy pouch", "wheelchair cushion", "oxygen concentrator", "bandage roll", "bed rail"};
  for (int i = 0; i < 60; ++i)
    claims.push_back({"C" + std::to_string(i), descs[i % 5], static_cast<double>(rng() % 1000) / 8.0,
                      static_cast<double>(1 + rng() % 50)});
  const auto a = specialty_avg_allowed(claims, default_crosswalk());
  std::shuffle(claims.begin(), claims.end(), rng);
  const auto b = specialty_avg_allowed(claims, default_crosswalk());
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [k, v] : a) EXPECT_NEAR(b.at(k), v, 1e-9 * v);
}

TEST(FallbackBounds, MinAndFrequencyWeightedMean) {
  const std::map<std::string, double> means{{"A", 5.0}, {"B", 15.0}};
  const auto b = fallback_bounds(means, {{"A", 0.5}, {"B", 0.5}, {"C", 3.0}});
  EXPECT_EQ(b.low, 5.0);
  EXPECT_EQ(b.high, 10.0);
  EXPECT_THROW(fallback_bounds({}, {{"A", 1.0}}), Error);
  EXPECT_THROW(fallback_bounds(means, {{"C", 1.0}}), Error);
}

TEST(EstimateSavings, FallbackForUnpricedSpecialty) {
  const std::vector<AvoidedRecall> avoided{{"K1", "Radiology", 10.0}};
  const auto s = estimate_savings(avoided, {{"A", 5.0}}, {5.0, 10.0});
  EXPECT_EQ(s.total_low, 50.0);
  EXPECT_EQ(s.total_high, 100.0);
  EXPECT_TRUE(s.per_specialty.at("Radiology").used_fallback);
}

TEST(EstimateSavings, PricedSpecialtyIsExact) {
  const std::vector<AvoidedRecall> avoided{{"K1", "A", 4.0}, {"K2", "A", 6.0}, {"K3", "B", 1.0}};
  const auto s = estimate_savings(avoided, {{"A", 5.0}}, {1.0, 2.0});
  EXPECT_EQ(s.per_specialty.at("A").units, 10.0);
  EXPECT_EQ(s.per_specialty.at("A").low, 50.0);
  EXPECT_EQ(s.per_specialty.at("A").high, 50.0);
  EXPECT_EQ(s.total_low, 51.0);
  EXPECT_EQ(s.total_high, 52.0);
  EXPECT_LE(s.total_low, s.total_high);
}

TEST(AnnualizeSavings, ScalesByEvaluationSize) {
  EXPECT_NEAR(annualize_savings(5.5e9, 9572, 3000.0), 1.7e9, 0.05e9);
  EXPECT_DOUBLE_EQ(annualize_savings(100.0, 10, 20.0), 200.0);
  EXPECT_THROW(annualize_savings(1.0, 0, 1.0), Error);
}

TEST(ResolveSpecialty, PanelCodesMapToNames) {
  EXPECT_EQ(resolve_specialty("GU", default_crosswalk()), "Gastroenterology/Urology");
  EXPECT_EQ(resolve_specialty("Dental", default_crosswalk()), "Dental");
  EXPECT_EQ(resolve_specialty("XX", default_crosswalk()), "XX");
}

TEST(CostCsv, ReadsClaimsAndAvoided) {
  std::istringstream claims("hcpcs,description,avg_allowed,total_claims\nA4,\"Ostomy, pouch\",12.5,10\n");
  const auto c = read_claims_csv(claims);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].description, "Ostomy, pouch");
  std::istringstream bad("hcpcs,description,avg_allowed,total_claims\nA4,x,-1,10\n");
  EXPECT_THROW(read_claims_csv(bad), Error);
  std::istringstream av("device_id,specialty,units\nK1,GU,100\n");
  EXPECT_EQ(read_avoided_csv(av)[0].units_recalled, 100.0);
}

TEST(Crosswalk, ShippedJsonMatchesBuiltInRules) {
  std::ifstream in(CLEARANCE_DATA_DIR "/crosswalk.json");
  ASSERT_TRUE(in) << "missing data/crosswalk.json";
  const auto rules = crosswalk_from_json(Json::parse(in));
  const auto& builtin = default_crosswalk();
  ASSERT_EQ(rules.size(), builtin.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    EXPECT_EQ(rules[i].specialty, builtin[i].specialty);
    EXPECT_EQ(rules[i].code, builtin[i].code);
    EXPECT_EQ(rules[i].keyword_groups, builtin[i].keyword_groups);
  }
}

}  // namespace
}  // namespace clearance
