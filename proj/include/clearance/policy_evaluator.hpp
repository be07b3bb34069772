#pragma once

// Scores a threshold policy against labeled outcomes: conservative counting,
// committee-in-the-loop simulation, parameter sweeps, Pareto filtering and
// per-bucket summaries.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clearance/csv.hpp"
#include "clearance/error.hpp"
#include "clearance/parallel.hpp"
#include "clearance/policy_optimizer.hpp"
#include "clearance/score_model.hpp"

namespace clearance {

enum class Decision { Accept, Reject, Defer };

inline std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::Accept: return "accept";
    case Decision::Reject: return "reject";
    case Decision::Defer: return "defer";
  }
  return "?";
}

/// Accept at or below l, reject at or above h, defer strictly between.
/// With l == h a score on the threshold is rejected.
inline Decision classify(double score, const ThresholdPolicy& policy) {
  if (score >= policy.high) return Decision::Reject;
  if (score <= policy.low) return Decision::Accept;
  return Decision::Defer;
}

struct PolicyMetrics {
  std::size_t n_total = 0;
  std::size_t n_unsafe = 0;
  std::size_t n_safe = 0;

  // Policy decision rates within each label class.
  double reject_unsafe = 0.0;
  double accept_unsafe = 0.0;
  double defer_unsafe = 0.0;
  double accept_safe = 0.0;
  double reject_safe = 0.0;
  double defer_safe = 0.0;

  double workload = 0.0;  // deferred fraction of all devices
  double workload_reduction = 0.0;

  // Recall rates over all submissions. "Current" is the historical practice;
  // "policy" counts unsafe devices that end up on the market under the policy.
  double current_recall_rate = 0.0;
  double policy_recall_rate = 0.0;
  double relative_improvement_points = 0.0;
  double pct_improvement = 0.0;

  // Outcome after deferred devices are resolved (historically or by the committee).
  double final_accept_unsafe = 0.0;
  double final_reject_safe = 0.0;

  // Mean number of deferred unsafe devices caught by the committee per replication.
  double committee_rejected_unsafe = 0.0;
};

namespace detail {

struct Tally {
  std::size_t n = 0, n_unsafe = 0, n_safe = 0;
  std::size_t acc_u = 0, rej_u = 0, def_u = 0;
  std::size_t acc_s = 0, rej_s = 0, def_s = 0;
  std::size_t current_recalled = 0;  // unsafe and historically accepted
  std::size_t unsafe_accepted = 0;   // policy accept of an unsafe device
  std::size_t unsafe_deferred_retained = 0;  // deferred unsafe, historically accepted
  std::size_t safe_final_rejected = 0;
};

inline Tally tally(std::span<const LabeledScore> records, const ThresholdPolicy& policy) {
  Tally t;
  for (const auto& r : records) {
    const Decision d = classify(r.score, policy);
    const bool hist_accept = r.historical == HistoricalAction::Accept;
    ++t.n;
    if (r.label == 1) {
      ++t.n_unsafe;
      if (hist_accept) ++t.current_recalled;
      switch (d) {
        case Decision::Accept: ++t.acc_u; ++t.unsafe_accepted; break;
        case Decision::Reject: ++t.rej_u; break;
        case Decision::Defer:
          ++t.def_u;
          if (hist_accept) ++t.unsafe_deferred_retained;
          break;
      }
    } else {
      ++t.n_safe;
      switch (d) {
        case Decision::Accept: ++t.acc_s; break;
        case Decision::Reject: ++t.rej_s; ++t.safe_final_rejected; break;
        case Decision::Defer:
          ++t.def_s;
          if (!hist_accept) ++t.safe_final_rejected;
          break;
      }
    }
  }
  return t;
}

inline double ratio(double num, std::size_t den) {
  return den == 0 ? 0.0 : num / static_cast<double>(den);
}

/// `retained_unsafe` is the (possibly Monte-Carlo averaged) number of deferred
/// unsafe devices that stay on the market.
inline PolicyMetrics metrics_from(const Tally& t, double retained_unsafe, double caught) {
  PolicyMetrics m;
  m.n_total = t.n;
  m.n_unsafe = t.n_unsafe;
  m.n_safe = t.n_safe;
  m.reject_unsafe = ratio(static_cast<double>(t.rej_u), t.n_unsafe);
  m.accept_unsafe = ratio(static_cast<double>(t.acc_u), t.n_unsafe);
  m.defer_unsafe = ratio(static_cast<double>(t.def_u), t.n_unsafe);
  m.accept_safe = ratio(static_cast<double>(t.acc_s), t.n_safe);
  m.reject_safe = ratio(static_cast<double>(t.rej_s), t.n_safe);
  m.defer_safe = ratio(static_cast<double>(t.def_s), t.n_safe);
  m.workload = ratio(static_cast<double>(t.def_u + t.def_s), t.n);
  m.workload_reduction = 1.0 - m.workload;

  const double current = static_cast<double>(t.current_recalled);
  const double policy = static_cast<double>(t.unsafe_accepted) + retained_unsafe;
  m.current_recall_rate = ratio(current, t.n);
  m.policy_recall_rate = ratio(policy, t.n);
  m.relative_improvement_points = ratio(current - policy, t.n);
  m.pct_improvement = t.current_recalled == 0 ? 0.0 : (current - policy) / current;
  m.final_accept_unsafe = ratio(policy, t.n_unsafe);
  m.final_reject_safe = ratio(static_cast<double>(t.safe_final_rejected), t.n_safe);
  m.committee_rejected_unsafe = caught;
  return m;
}

}  // namespace detail

/// Deferred devices receive their historical decision (accept unless marked otherwise).
inline PolicyMetrics evaluate_conservative(std::span<const LabeledScore> test,
                                           const ThresholdPolicy& policy) {
  if (!policy.feasible()) throw Error("cannot evaluate an infeasible policy");
  if (test.empty()) throw Error("empty evaluation set");
  const auto t = detail::tally(test, policy);
  return detail::metrics_from(t, static_cast<double>(t.unsafe_deferred_retained), 0.0);
}

/// Partition overload: every device is treated as historically accepted.
inline PolicyMetrics evaluate_conservative(const ScorePartition& test, const ThresholdPolicy& policy) {
  Dataset records;
  records.reserve(test.n_total());
  for (double s : test.positives().values()) records.push_back({"", s, 1});
  for (double s : test.negatives().values()) records.push_back({"", s, 0});
  return evaluate_conservative(records, policy);
}

// ---------------------------------------------------------------------------
// Committee model

struct CommitteeModel {
  double k = 0.0;       // committee skill; 0 reproduces historical practice
  double l_hat = 0.0;   // the policy's low threshold
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Probability the committee misses an unsafe deferred device:
/// 2 * (1 - sigmoid(k * (score - l_hat))), clamped to [0, 1].
inline double committee_failure_prob(const CommitteeModel& model, double score) {
  if (!(model.k >= 0.0)) throw Error("committee skill k must be non-negative");
  if (score <= model.l_hat) return 1.0;
  const double z = model.k * (score - model.l_hat);
  // 2 * (1 - 1/(1+e^-z)) == 2 * e^-z / (1 + e^-z)
  const double e = std::exp(-z);
  const double v = 2.0 * e / (1.0 + e);
  return std::clamp(v, 0.0, 1.0);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based uniform in [0, 1) keyed on (seed, device, replication).
inline double counter_uniform(std::uint64_t seed, std::uint64_t device, std::uint64_t rep) {
  const std::uint64_t x = splitmix64(splitmix64(seed ^ splitmix64(device)) + rep);
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Monte-Carlo committee review of the deferred band. Safe deferred devices are
/// accepted; each unsafe deferred device is caught with probability 1 - L.
/// Devices historically rejected stay rejected.
inline PolicyMetrics simulate_committee(std::span<const LabeledScore> test,
                                        const ThresholdPolicy& policy, const CommitteeModel& model) {
  if (!policy.feasible()) throw Error("cannot simulate an infeasible policy");
  if (test.empty()) throw Error("empty evaluation set");
  if (model.replications == 0) throw Error("replications must be positive");
  const auto t = detail::tally(test, policy);

  struct Candidate {
    std::uint64_t index;
    double catch_prob;
  };
  std::vector<Candidate> pool;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& r = test[i];
    if (r.label != 1 || r.historical != HistoricalAction::Accept) continue;
    if (classify(r.score, policy) != Decision::Defer) continue;
    const double miss = committee_failure_prob(model, r.score);
    if (miss < 1.0) pool.push_back({i, 1.0 - miss});
  }

  std::vector<std::uint64_t> caught(model.replications, 0);
  if (!pool.empty()) {
    parallel_for(model.replications, model.threads, [&](std::size_t rep) {
      std::uint64_t c = 0;
      for (const auto& cand : pool)
        if (detail::counter_uniform(model.seed, cand.index, rep) < cand.catch_prob) ++c;
      caught[rep] = c;
    });
  }
  std::uint64_t total = 0;
  for (auto c : caught) total += c;
  const double mean_caught = static_cast<double>(total) / static_cast<double>(model.replications);
  const double retained = static_cast<double>(t.unsafe_deferred_retained) - mean_caught;
  return detail::metrics_from(t, retained, mean_caught);
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepGrid {
  std::vector<double> xi_ru{0.3, 0.5, 0.7};
  std::vector<double> xi_as{0.3, 0.5, 0.7};
  std::vector<double> rho{0.4, 0.6, 0.8};
};

struct SweepRow {
  double xi_ru = 0.0;
  double xi_as = 0.0;
  double rho = 0.0;
  ThresholdPolicy policy;
  std::optional<PolicyMetrics> metrics;  // empty when infeasible
};

using SweepResult = std::vector<SweepRow>;

/// Solves on `train` and evaluates conservatively on `test` for every level
/// combination, ordered xi_ru, then xi_as, then rho.
inline SweepResult sweep(const ScorePartition& train, std::span<const LabeledScore> test,
                         const SweepGrid& levels, double lambda, const SearchConfig& config) {
  SweepResult rows;
  for (double ru : levels.xi_ru)
    for (double as : levels.xi_as)
      for (double r : levels.rho) rows.push_back({ru, as, r, {}, std::nullopt});

  SearchConfig inner = config;
  inner.threads = 1;
  parallel_for(rows.size(), config.threads, [&](std::size_t i) {
    auto& row = rows[i];
    row.policy = solve(train, PolicyParams{lambda, row.xi_ru, row.xi_as, row.rho}, inner);
    if (row.policy.feasible()) row.metrics = evaluate_conservative(test, row.policy);
  });
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& rows) {
  out << "xi_ru,xi_as,rho,status,l,h,reject_unsafe,accept_safe,accept_unsafe,reject_safe,"
         "workload,relative_imp,pct_improvement\n";
  for (const auto& r : rows) {
    out << format_double(r.xi_ru) << ',' << format_double(r.xi_as) << ',' << format_double(r.rho)
        << ',';
    if (!r.metrics) {
      out << "infeasible,NA,NA,NA,NA,NA,NA,NA,NA,NA\n";
      continue;
    }
    const auto& m = *r.metrics;
    out << to_string(r.policy.case_tag) << ',' << format_double(r.policy.low) << ','
        << format_double(r.policy.high) << ',' << format_double(m.reject_unsafe) << ','
        << format_double(m.accept_safe) << ',' << format_double(m.accept_unsafe) << ','
        << format_double(m.reject_safe) << ',' << format_double(m.workload) << ','
        << format_double(m.relative_improvement_points) << ',' << format_double(m.pct_improvement)
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// Pareto frontiers

struct ParetoParams {
  double lambda = 0.0;
  double xi_ru = 0.0;
  double xi_as = 0.0;
  double rho = 0.0;
  double k = 0.0;
};

struct ParetoPoint {
  double reject_safe = 0.0;
  double accept_unsafe = 0.0;
  double pct_improvement = 0.0;
  ParetoParams params;
  std::string series;  // e.g. "two_threshold" or "ml_only"
};

enum class ParetoAxis { AcceptUnsafe, PctImprovement };

/// Keeps points with reject_safe < cap that no other kept point dominates.
/// Both axes minimize reject_safe; the second axis minimizes accept_unsafe or
/// maximizes pct_improvement. Output is sorted by reject_safe (stable).
inline std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points,
                                                double reject_safe_cap, ParetoAxis axis) {
  std::vector<ParetoPoint> kept;
  for (const auto& p : points)
    if (p.reject_safe < reject_safe_cap) kept.push_back(p);

  // Second-axis "cost": smaller is better.
  auto cost = [axis](const ParetoPoint& p) {
    return axis == ParetoAxis::AcceptUnsafe ? p.accept_unsafe : -p.pct_improvement;
  };
  std::vector<ParetoPoint> out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < kept.size() && !dominated; ++j) {
      if (i == j) continue;
      const auto& a = kept[j];
      const auto& b = kept[i];
      const bool weakly = a.reject_safe <= b.reject_safe && cost(a) <= cost(b);
      const bool strictly = a.reject_safe < b.reject_safe || cost(a) < cost(b);
      // Exact duplicates: keep the first occurrence only.
      dominated = weakly && (strictly || j < i);
    }
    if (!dominated) out.push_back(kept[i]);
  }
  std::stable_sort(out.begin(), out.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return a.reject_safe < b.reject_safe;
  });
  return out;
}

inline void write_pareto_csv(std::ostream& out, std::span<const ParetoPoint> points) {
  out << "series,lambda,xi_ru,xi_as,rho,k,reject_safe,accept_unsafe,pct_improvement\n";
  for (const auto& p : points)
    out << csv::escape(p.series) << ',' << format_double(p.params.lambda) << ','
        << format_double(p.params.xi_ru) << ',' << format_double(p.params.xi_as) << ','
        << format_double(p.params.rho) << ',' << format_double(p.params.k) << ','
        << format_double(p.reject_safe) << ',' << format_double(p.accept_unsafe) << ','
        << format_double(p.pct_improvement) << '\n';
}

// ---------------------------------------------------------------------------
// Decision-bucket summaries

/// Numeric feature columns keyed by device_id.
struct FeatureTable {
  std::vector<std::string> columns;
  std::unordered_map<std::string, std::vector<double>> rows;
};

/// Reads a CSV with a device_id column; keeps every column whose values all parse as numbers.
inline FeatureTable read_feature_table(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const std::size_t c_id = t.require_column("device_id");
  std::vector<std::size_t> numeric;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == c_id) continue;
    bool all = !t.rows.empty();
    for (const auto& row : t.rows)
      if (!csv::parse_double(row[c])) {
        all = false;
        break;
      }
    if (all) numeric.push_back(c);
  }
  FeatureTable ft;
  for (auto c : numeric) ft.columns.push_back(t.header[c]);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    std::vector<double> vals;
    for (auto c : numeric) vals.push_back(*csv::parse_double(t.rows[i][c]));
    if (!ft.rows.emplace(t.rows[i][c_id], std::move(vals)).second)
      throw Error("line " + std::to_string(t.line_numbers[i]) + ": duplicate device_id '" +
                  t.rows[i][c_id] + "'");
  }
  return ft;
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample SD; 0 for fewer than two values
};

struct Bucket {
  int label = 0;
  Decision decision = Decision::Accept;
  std::size_t count = 0;
  MeanSd risk;
  std::vector<MeanSd> features;  // aligned with FeatureTable::columns
};

struct BucketSummary {
  std::vector<std::string> feature_columns;
  std::vector<Bucket> buckets;  // unrecalled then recalled; accept, defer, reject
};

inline MeanSd mean_sd(std::span<const double> v) {
  MeanSd out;
  if (v.empty()) return out;
  double s = 0.0;
  for (double x : v) s += x;
  out.mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return out;
}

inline BucketSummary summarize_buckets(std::span<const LabeledScore> test, const FeatureTable& features,
                                       const ThresholdPolicy& policy) {
  if (!policy.feasible()) throw Error("cannot summarize an infeasible policy");
  std::vector<std::string> missing;
  for (const auto& r : test)
    if (!features.rows.contains(r.device_id)) missing.push_back(r.device_id);
  if (!missing.empty()) {
    std::string msg = "feature table is missing " + std::to_string(missing.size()) + " device(s):";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw Error(msg);
  }

  constexpr std::array<Decision, 3> order{Decision::Accept, Decision::Defer, Decision::Reject};
  const std::size_t nf = features.columns.size();
  BucketSummary out;
  out.feature_columns = features.columns;
  for (int label : {0, 1}) {
    for (Decision d : order) {
      std::vector<double> risk;
      std::vector<std::vector<double>> cols(nf);
      for (const auto& r : test) {
        if (r.label != label || classify(r.score, policy) != d) continue;
        risk.push_back(r.score);
        const auto& vals = features.rows.at(r.device_id);
        for (std::size_t c = 0; c < nf; ++c) cols[c].push_back(vals[c]);
      }
      Bucket b;
      b.label = label;
      b.decision = d;
      b.count = risk.size();
      b.risk = mean_sd(risk);
      for (const auto& c : cols) b.features.push_back(mean_sd(c));
      out.buckets.push_back(std::move(b));
    }
  }
  return out;
}

inline void write_buckets_csv(std::ostream& out, const BucketSummary& s) {
  out << "label,decision,count,risk_mean,risk_sd";
  for (const auto& c : s.feature_columns) out << ',' << csv::escape(c + "_mean") << ',' << csv::escape(c + "_sd");
  out << '\n';
  for (const auto& b : s.buckets) {
    out << (b.label == 1 ? "recalled" : "unrecalled") << ',' << to_string(b.decision) << ','
        << b.count << ',' << format_double(b.risk.mean) << ',' << format_double(b.risk.sd);
    for (const auto& f : b.features) out << ',' << format_double(f.mean) << ',' << format_double(f.sd);
    out << '\n';
  }
}

}  // namespace clearance
