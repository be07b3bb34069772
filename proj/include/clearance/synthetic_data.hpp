#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "clearance/error.hpp"
#include "clearance/score_model.hpp"

namespace clearance {

struct BetaShape {
  double alpha = 1.0;
  double beta = 1.0;
};

struct ScoreGenSpec {
  std::size_t n_total = 1000;
  double prevalence = 0.1;
  BetaShape pos_shape{8.0, 2.0};
  BetaShape neg_shape{2.0, 8.0};
  std::uint64_t seed = 0;
};

struct RejectionInjectionConfig {
  double nu_quantile = 0.5;
  double rejected_fraction = 0.05;
  std::uint64_t seed = 0;
};

namespace detail {

/// Beta draw restricted to the open interval (0, 1) by resampling.
inline double draw_open_beta(std::mt19937_64& rng, boost::random::beta_distribution<double>& dist) {
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    const double v = dist(rng);
    if (v > 0.0 && v < 1.0) return v;
  }
  throw Error("Beta shape keeps producing boundary values; choose less extreme shapes");
}

inline std::string device_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%06zu", prefix, i);
  return buf;
}

}  // namespace detail

/// Seeded synthetic dataset: exactly round(n_total * prevalence) recalled devices,
/// scores drawn from per-label Beta distributions, rows in shuffled order.
inline Dataset generate_scores(const ScoreGenSpec& spec) {
  if (spec.n_total == 0) throw Error("n_total must be positive");
  if (!(spec.prevalence > 0.0 && spec.prevalence < 1.0)) throw Error("prevalence must lie in (0,1)");
  for (const auto& s : {spec.pos_shape, spec.neg_shape})
    if (!(s.alpha > 0.0 && s.beta > 0.0)) throw Error("Beta shapes must be positive");

  const auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(spec.n_total) * spec.prevalence));
  std::mt19937_64 rng(spec.seed);
  boost::random::beta_distribution<double> pos(spec.pos_shape.alpha, spec.pos_shape.beta);
  boost::random::beta_distribution<double> neg(spec.neg_shape.alpha, spec.neg_shape.beta);

  std::vector<int> labels(spec.n_total, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  for (std::size_t i = labels.size(); i > 1; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(labels[i - 1], labels[pick(rng)]);
  }

  Dataset out;
  out.reserve(spec.n_total);
  for (std::size_t i = 0; i < spec.n_total; ++i) {
    const int y = labels[i];
    const double s = y == 1 ? detail::draw_open_beta(rng, pos) : detail::draw_open_beta(rng, neg);
    out.push_back({detail::device_name("S", i + 1), s, y});
  }
  return out;
}

/// Appends synthetic regulator-rejected copies of devices sampled (without
/// replacement, uniformly) from those whose risk exceeds the nu-quantile of all
/// risks. Copies get a Bernoulli(risk) recall label and a historical reject.
/// The original records are left untouched.
inline Dataset inject_rejected(std::span<const LabeledScore> dataset, const RejectionInjectionConfig& cfg) {
  if (!(cfg.nu_quantile > 0.0 && cfg.nu_quantile < 1.0)) throw Error("nu must lie in (0,1)");
  if (!(cfg.rejected_fraction > 0.0 && cfg.rejected_fraction < 1.0))
    throw Error("rejected fraction must lie in (0,1)");
  if (dataset.empty()) throw Error("empty dataset");

  std::vector<double> all;
  for (const auto& r : dataset) all.push_back(r.score);
  const Ecdf risk(std::move(all));
  const double cutoff = [&] {
    // Smallest observed risk whose empirical CDF reaches nu.
    const auto v = risk.values();
    const auto idx = static_cast<std::size_t>(std::ceil(cfg.nu_quantile * static_cast<double>(v.size())));
    return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
  }();

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].score > cutoff) pool.push_back(i);
  const auto want = static_cast<std::size_t>(
      std::llround(cfg.rejected_fraction * static_cast<double>(dataset.size())));
  if (want == 0) throw Error("rejected fraction selects zero devices");
  if (pool.size() < want)
    throw Error("only " + std::to_string(pool.size()) + " devices exceed the nu-quantile risk " +
                format_double(cutoff) + ", but " + std::to_string(want) + " are required");

  std::mt19937_64 rng(cfg.seed);
  for (std::size_t i = 0; i < want; ++i) {  // partial Fisher-Yates
    boost::random::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));

  Dataset out(dataset.begin(), dataset.end());
  for (std::size_t i = 0; i < want; ++i) {
    const auto& src = dataset[pool[i]];
    boost::random::bernoulli_distribution<double> recall(src.score);
    LabeledScore copy = src;
    copy.device_id = src.device_id + "_nse";
    copy.label = recall(rng) ? 1 : 0;
    copy.historical = HistoricalAction::Reject;
    copy.fda_rejected = true;
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace clearance
