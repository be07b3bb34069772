#pragma once

// Two-threshold accept / defer / reject policy under minimum-performance and
// workload constraints:
//
//   minimize   lambda * P(pos <= l) + (1 - lambda) * P(neg >= h)
//   subject to P(pos >= h) >= xi_ru
//              P(neg <= l) >= xi_as
//              deferral fraction between l and h <= rho
//              0 <= l <= h <= 1
//
// The bounds h(xi_ru) and l(xi_as) decide the case: infeasible, a single
// threshold, the bound corner itself when it already meets the workload cap,
// or otherwise a grid search over l with an inner bisection for h.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clearance/error.hpp"
#include "clearance/parallel.hpp"
#include "clearance/score_model.hpp"

namespace clearance {

struct PolicyParams {
  double lambda = 0.5;  // weight on accepting unsafe devices
  double xi_ru = 0.3;   // minimum rejection rate of unsafe devices
  double xi_as = 0.3;   // minimum acceptance rate of safe devices
  double rho = 0.6;     // maximum deferred fraction

  void validate() const {
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error("lambda must lie in (0,1)");
    if (!(xi_ru >= 0.0 && xi_ru <= 1.0)) throw Error("xi_ru must lie in [0,1]");
    if (!(xi_as >= 0.0 && xi_as <= 1.0)) throw Error("xi_as must lie in [0,1]");
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error("rho must lie in [0,1]");
  }
};

/// Nested-search tolerances. Explicit grid_step / bisect_tol win; otherwise both
/// are derived from epsilon when both Lipschitz bounds are given; otherwise the
/// defaults grid_step = 1e-3 * (h_bound - l_bound) and bisect_tol = 1e-6 apply.
struct SearchConfig {
  double epsilon = 1e-3;
  std::optional<double> grid_step;
  std::optional<double> bisect_tol;
  std::optional<double> lipschitz_phi;
  std::optional<double> lipschitz_h;
  std::size_t threads = 1;
  std::size_t max_grid_points = 50'000'000;
  // Also try every training score strictly between the bounds as a value of l.
  // The CDFs only move at sample values, so this pins l to the exact step the
  // regular grid lands near; false gives the plain grid.
  bool sample_candidates = true;
  // Keep the bisection midpoint only when it meets the workload cap exactly;
  // otherwise fall back to the slack-side end of the bracket. With false, the
  // midpoint is kept while it overshoots by at most one sample's jump.
  bool strict_workload = true;

  void validate() const {
    if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
    if (grid_step && !(*grid_step > 0.0)) throw Error("grid step must be positive");
    if (bisect_tol && !(*bisect_tol > 0.0)) throw Error("bisection tolerance must be positive");
    if (lipschitz_phi && !(*lipschitz_phi > 0.0)) throw Error("Lipschitz bound on CDFs must be positive");
    if (lipschitz_h && !(*lipschitz_h > 0.0)) throw Error("Lipschitz bound on h*(l) must be positive");
  }
};

enum class CaseTag { ClosedFormCorner, NestedSearch, SingleThreshold, Infeasible };

inline std::string_view to_string(CaseTag c) {
  switch (c) {
    case CaseTag::ClosedFormCorner: return "ClosedFormCorner";
    case CaseTag::NestedSearch: return "NestedSearch";
    case CaseTag::SingleThreshold: return "SingleThreshold";
    case CaseTag::Infeasible: return "Infeasible";
  }
  return "?";
}

inline CaseTag case_tag_from_string(std::string_view s) {
  for (CaseTag c : {CaseTag::ClosedFormCorner, CaseTag::NestedSearch, CaseTag::SingleThreshold,
                    CaseTag::Infeasible})
    if (to_string(c) == s) return c;
  throw Error("unknown policy case '" + std::string(s) + "'");
}

struct ThresholdPolicy {
  double low = 0.0;
  double high = 1.0;
  CaseTag case_tag = CaseTag::Infeasible;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  double workload_at_solution = std::numeric_limits<double>::quiet_NaN();
  // Constraint-induced bounds, kept for reporting (also explain infeasibility).
  double l_bound = 0.0;
  double h_bound = 0.0;

  bool feasible() const { return case_tag != CaseTag::Infeasible; }
};

struct SingleThresholdPolicy {
  double threshold = 0.0;
  double objective_value = 0.0;
};

/// lambda * P(pos <= l) + (1 - lambda) * P(neg >= h).
inline double objective(const ScorePartition& p, double lambda, double l, double h) {
  return lambda * ecdf_eval(p.positives(), l) + (1.0 - lambda) * tail_eval(p.negatives(), h);
}

/// g(l, h) = q (F+(h) - F+(l)) + (1 - q)(F-(h) - F-(l)) - rho.
inline double workload_gap(const ScorePartition& p, double l, double h, double rho) {
  const double q = p.prevalence();
  return q * (ecdf_eval(p.positives(), h) - ecdf_eval(p.positives(), l)) +
         (1.0 - q) * (ecdf_eval(p.negatives(), h) - ecdf_eval(p.negatives(), l)) - rho;
}

/// Final bisection interval for the inner workload equation at a fixed l.
struct Bracket {
  double h_low;   // last point with g < 0
  double h_high;  // last point with g >= 0
  double midpoint() const { return 0.5 * (h_low + h_high); }
};

/// Bisection on h in [l, h_max] for g(l, h) = 0. Returns nullopt when the root is
/// not bracketed: g(l, l) > 0 or g(l, h_max) < 0.
inline std::optional<Bracket> bisect_bracket(const ScorePartition& p, double l, double h_max,
                                             double rho, double zeta) {
  if (!(zeta > 0.0)) throw Error("bisection tolerance must be positive");
  double h_lo = l, h_hi = h_max;
  if (workload_gap(p, l, h_lo, rho) > 0.0 || workload_gap(p, l, h_hi, rho) < 0.0)
    return std::nullopt;
  while (std::abs(h_hi - h_lo) > zeta) {
    const double mid = 0.5 * (h_lo + h_hi);
    if (mid <= h_lo || mid >= h_hi) break;  // interval below floating resolution
    if (workload_gap(p, l, mid, rho) < 0.0)
      h_lo = mid;
    else
      h_hi = mid;
  }
  return Bracket{h_lo, h_hi};
}

/// Midpoint of the final bisection interval, or nullopt when not bracketed.
inline std::optional<double> bisect_h(const ScorePartition& p, double l, double h_max, double rho,
                                      double zeta) {
  if (l > h_max) throw Error("bisect_h requires l <= h_max");
  auto b = bisect_bracket(p, l, h_max, rho, zeta);
  if (!b) return std::nullopt;
  return b->midpoint();
}

/// Workload slack allowed on the step-function CDFs: one sample's jump.
inline double workload_tolerance(const ScorePartition& p) {
  return std::max(1.0 / static_cast<double>(p.n_pos()), 1.0 / static_cast<double>(p.n_neg())) +
         1e-12;
}

struct NestedSearchSettings {
  double grid_step;
  double bisect_tol;
};

inline NestedSearchSettings resolve_search_settings(const SearchConfig& cfg, double lambda,
                                                    double l_bound, double h_bound) {
  NestedSearchSettings s{1e-3 * (h_bound - l_bound), 1e-6};
  if (cfg.lipschitz_phi && cfg.lipschitz_h) {
    const double l_phi = *cfg.lipschitz_phi;
    const double l_bar = l_phi * (lambda + (1.0 - lambda) * *cfg.lipschitz_h);
    s.grid_step = cfg.epsilon / l_bar;
    s.bisect_tol = cfg.epsilon / (2.0 * (1.0 - lambda) * l_phi);
  }
  if (cfg.grid_step) s.grid_step = *cfg.grid_step;
  if (cfg.bisect_tol) s.bisect_tol = *cfg.bisect_tol;
  return s;
}

namespace detail {

struct GridCandidate {
  bool feasible = false;
  double l = 0.0;
  double h = 0.0;
  double value = 0.0;
};

inline constexpr double kTieTolerance = 1e-12;

/// Largest training score <= x, over both classes; nullopt if none.
inline std::optional<double> sample_at_or_below(const ScorePartition& p, double x) {
  std::optional<double> out;
  for (const Ecdf* e : {&p.positives(), &p.negatives()}) {
    const auto v = e->values();
    auto it = std::upper_bound(v.begin(), v.end(), x);
    if (it != v.begin() && (!out || *(it - 1) > *out)) out = *(it - 1);
  }
  return out;
}

/// Smallest training score > x, over both classes; nullopt if none.
inline std::optional<double> sample_above(const ScorePartition& p, double x) {
  std::optional<double> out;
  for (const Ecdf* e : {&p.positives(), &p.negatives()}) {
    const auto v = e->values();
    auto it = std::upper_bound(v.begin(), v.end(), x);
    if (it != v.end() && (!out || *it < *out)) out = *it;
  }
  return out;
}

/// Every CDF is flat between consecutive training scores, so any l in
/// [s_k, s_k+1) is equivalent on the training data; report s_k (or the bound).
inline double canonical_low(const ScorePartition& p, double l, double l_bound) {
  const auto s = sample_at_or_below(p, l);
  return s ? std::max(*s, l_bound) : l_bound;
}

/// An h strictly inside a gap (s_j, s_j+1) is reported as the gap midpoint;
/// an h on a training score is kept.
inline double canonical_high(const ScorePartition& p, double h, double l) {
  const auto below = sample_at_or_below(p, h);
  if (below && *below == h) return h;
  const auto above = sample_above(p, h);
  if (!above) return h;
  const double lo = std::max(below ? *below : 0.0, l);
  const double mid = 0.5 * (lo + *above);
  return mid > lo && mid < *above ? mid : h;
}

/// Given g(l, from) <= 0, steps through the training scores above `from` to the
/// first one where the workload cap breaks and returns the middle of the gap
/// just below it (or h_max if none breaks it). Every point of that gap has the
/// same counts, so this is the largest feasible h up to ties.
inline double largest_feasible_high(const ScorePartition& p, double l, double from, double h_max,
                                    double rho) {
  const auto a = p.positives().values();
  const auto b = p.negatives().values();
  auto ia = std::upper_bound(a.begin(), a.end(), from);
  auto ib = std::upper_bound(b.begin(), b.end(), from);
  double last = from;
  while (ia != a.end() || ib != b.end()) {
    const double next = ib == b.end() || (ia != a.end() && *ia < *ib) ? *ia : *ib;
    if (next > h_max) break;
    if (workload_gap(p, l, next, rho) > 0.0) {
      const double below = std::max(sample_at_or_below(p, last).value_or(l), l);
      const double mid = 0.5 * (below + next);
      return mid > below && mid < next ? mid : last;
    }
    last = next;
    while (ia != a.end() && *ia == next) ++ia;
    while (ib != b.end() && *ib == next) ++ib;
  }
  return h_max;
}

inline ThresholdPolicy nested_search(const ScorePartition& p, const PolicyParams& params,
                                     const SearchConfig& cfg, double l_bound, double h_bound) {
  const NestedSearchSettings s = resolve_search_settings(cfg, params.lambda, l_bound, h_bound);
  const double width = h_bound - l_bound;
  const double m_real = std::ceil(width / s.grid_step);
  if (!(m_real >= 1.0) || m_real > static_cast<double>(cfg.max_grid_points))
    throw Error("nested search grid has " + std::to_string(m_real) +
                " points; increase the grid step");
  const auto m = static_cast<std::size_t>(m_real);
  const double tol_w = workload_tolerance(p);

  std::vector<double> ls;
  ls.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double l = l_bound + static_cast<double>(i) * s.grid_step;
    if (l < h_bound) ls.push_back(l);
  }
  if (cfg.sample_candidates) {
    for (const Ecdf* e : {&p.positives(), &p.negatives()}) {
      const auto v = e->values();
      auto it = std::upper_bound(v.begin(), v.end(), l_bound);
      for (; it != v.end() && *it < h_bound; ++it) ls.push_back(*it);
    }
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
  }

  std::vector<GridCandidate> cand(ls.size());
  parallel_for(ls.size(), cfg.threads, [&](std::size_t i) {
    const double l = ls[i];
    double h = h_bound;
    if (workload_gap(p, l, h_bound, params.rho) > 0.0) {
      const auto b = bisect_bracket(p, l, h_bound, params.rho, s.bisect_tol);
      if (!b) return;
      if (cfg.strict_workload) {
        h = largest_feasible_high(p, l, b->h_low, h_bound, params.rho);
      } else {
        // g is piecewise constant; a midpoint past a large jump (tied scores)
        // is pulled back to the slack side of the bracket.
        h = b->midpoint();
        if (workload_gap(p, l, h, params.rho) > tol_w) h = b->h_low;
      }
    }
    cand[i] = {true, l, h,
               params.lambda * ecdf_eval(p.positives(), l) +
                   (1.0 - params.lambda) * (1.0 - ecdf_eval(p.negatives(), h))};
  });

  // Ordered argmin; the smallest l wins ties (up to rounding), so serial and
  // parallel runs agree and equal-valued optima resolve the same way.
  const GridCandidate* best = nullptr;
  for (const auto& c : cand)
    if (c.feasible && (best == nullptr || c.value < best->value - kTieTolerance)) best = &c;
  if (best == nullptr) throw Error("nested search found no feasible point");

  ThresholdPolicy out;
  out.low = canonical_low(p, best->l, l_bound);
  out.high = canonical_high(p, best->h, out.low);
  out.case_tag = CaseTag::NestedSearch;
  out.objective_value = objective(p, params.lambda, out.low, out.high);
  out.workload_at_solution = workload_gap(p, out.low, out.high, params.rho) + params.rho;
  out.l_bound = l_bound;
  out.h_bound = h_bound;
  return out;
}

}  // namespace detail

/// Solves the two-threshold problem on a training partition.
inline ThresholdPolicy solve(const ScorePartition& p, const PolicyParams& params,
                             const SearchConfig& cfg = {}) {
  params.validate();
  cfg.validate();
  if (p.n_pos() == 0) throw Error("no recalled samples");
  if (p.n_neg() == 0) throw Error("no unrecalled samples");

  const double hb = threshold_h(p, params.xi_ru);
  const double lb = threshold_l(p, params.xi_as);

  ThresholdPolicy out;
  out.l_bound = lb;
  out.h_bound = hb;
  if (hb < lb) {
    out.low = lb;
    out.high = hb;
    out.case_tag = CaseTag::Infeasible;
    return out;
  }
  if (hb == lb) {
    out.low = out.high = hb;
    out.case_tag = CaseTag::SingleThreshold;
  } else if (workload_gap(p, lb, hb, params.rho) <= 0.0) {
    out.low = lb;
    out.high = hb;
    out.case_tag = CaseTag::ClosedFormCorner;
  } else {
    return detail::nested_search(p, params, cfg, lb, hb);
  }
  out.objective_value = objective(p, params.lambda, out.low, out.high);
  out.workload_at_solution = workload_gap(p, out.low, out.high, params.rho) + params.rho;
  return out;
}

/// Best single threshold t for lambda * P(pos <= t) + (1 - lambda) * P(neg >= t).
/// Candidates are 0, 1, every sample value and every midpoint between consecutive
/// distinct values, scanned ascending; the first minimum wins.
inline SingleThresholdPolicy solve_ml_only(const ScorePartition& p, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error("lambda must lie in (0,1)");
  if (p.n_pos() == 0) throw Error("no recalled samples");
  if (p.n_neg() == 0) throw Error("no unrecalled samples");

  std::vector<double> values;
  values.reserve(p.n_total());
  values.insert(values.end(), p.positives().values().begin(), p.positives().values().end());
  values.insert(values.end(), p.negatives().values().begin(), p.negatives().values().end());
  values.push_back(0.0);
  values.push_back(1.0);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  SingleThresholdPolicy best{values.front(), std::numeric_limits<double>::infinity()};
  auto consider = [&](double t) {
    const double v = lambda * ecdf_eval(p.positives(), t) + (1.0 - lambda) * tail_eval(p.negatives(), t);
    if (v < best.objective_value) best = {t, v};
  };
  for (std::size_t i = 0; i < values.size(); ++i) {
    consider(values[i]);
    if (i + 1 < values.size()) consider(0.5 * (values[i] + values[i + 1]));
  }
  return best;
}

}  // namespace clearance
