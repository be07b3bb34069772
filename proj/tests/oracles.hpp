#pragma once

// Brute-force reference computations used only by tests. Nothing here calls
// into the threshold or search routines it is used to check.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace clearance::oracle {

inline double frac_le(const std::vector<double>& v, double x) {
  std::size_t c = 0;
  for (double s : v) c += s <= x;
  return v.empty() ? 0.0 : static_cast<double>(c) / static_cast<double>(v.size());
}

inline double frac_ge(const std::vector<double>& v, double x) {
  std::size_t c = 0;
  for (double s : v) c += s >= x;
  return v.empty() ? 0.0 : static_cast<double>(c) / static_cast<double>(v.size());
}

/// Largest sample value whose upper tail reaches xi, by scanning every value.
inline double scan_threshold_h(const std::vector<double>& pos, double xi) {
  double best = -1.0;
  for (double v : pos)
    if (frac_ge(pos, v) >= xi) best = std::max(best, v);
  return best;
}

/// Smallest sample value (or 0 when xi == 0) whose CDF reaches xi.
inline double scan_threshold_l(const std::vector<double>& neg, double xi) {
  if (xi <= 0.0) return 0.0;
  double best = 2.0;
  for (double v : neg)
    if (frac_le(neg, v) >= xi) best = std::min(best, v);
  return best;
}

struct GridOptimum {
  double l;
  double h;
  double value;
};

/// Exhaustive search over every pair of candidate thresholds (0, each sample
/// value, the midpoint of each gap between sample values, 1) with l <= h,
/// subject to both rate constraints and the workload cap. The CDFs are constant
/// inside a gap, so one interior point per gap covers all of it.
inline std::optional<GridOptimum> exhaustive_optimum(std::vector<double> pos, std::vector<double> neg,
                                                     double lambda, double xi_ru, double xi_as,
                                                     double rho) {
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::vector<double> cand{0.0, 1.0};
  cand.insert(cand.end(), pos.begin(), pos.end());
  cand.insert(cand.end(), neg.begin(), neg.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (std::size_t i = 0, n = cand.size(); i + 1 < n; ++i) {
    const double mid = 0.5 * (cand[i] + cand[i + 1]);
    if (mid > cand[i] && mid < cand[i + 1]) cand.push_back(mid);
  }
  std::sort(cand.begin(), cand.end());

  const std::size_t m = cand.size();
  const double np = static_cast<double>(pos.size()), nn = static_cast<double>(neg.size());
  const double q = np / (np + nn);
  // Counts at each candidate by a linear merge.
  std::vector<std::size_t> p_le(m), n_le(m), p_ge(m), n_ge(m);
  std::size_t ip = 0, in = 0;
  for (std::size_t c = 0; c < m; ++c) {
    while (ip < pos.size() && pos[ip] <= cand[c]) ++ip;
    while (in < neg.size() && neg[in] <= cand[c]) ++in;
    p_le[c] = ip;
    n_le[c] = in;
  }
  ip = 0;
  in = 0;
  for (std::size_t c = 0; c < m; ++c) {
    while (ip < pos.size() && pos[ip] < cand[c]) ++ip;
    while (in < neg.size() && neg[in] < cand[c]) ++in;
    p_ge[c] = pos.size() - ip;
    n_ge[c] = neg.size() - in;
  }

  std::optional<GridOptimum> best;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(static_cast<double>(n_le[i]) / nn >= xi_as)) continue;
    const double acc_unsafe = static_cast<double>(p_le[i]) / np;
    for (std::size_t j = i; j < m; ++j) {
      if (!(static_cast<double>(p_ge[j]) / np >= xi_ru)) continue;
      const double g = q * (static_cast<double>(p_le[j]) / np - acc_unsafe) +
                       (1.0 - q) * (static_cast<double>(n_le[j]) / nn - static_cast<double>(n_le[i]) / nn) - rho;
      if (g > 0.0) continue;
      const double v = lambda * acc_unsafe + (1.0 - lambda) * static_cast<double>(n_ge[j]) / nn;
      if (!best || v < best->value) best = GridOptimum{cand[i], cand[j], v};
    }
  }
  return best;
}

/// Pairwise AUC: P(pos > neg) + 0.5 P(pos == neg).
inline double pairwise_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

/// Uniform draws in (0,1) with a fixed engine, for property tests.
inline std::vector<double> uniform_sample(std::mt19937_64& rng, std::size_t n, double lo = 0.0,
                                          double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) {
    do x = u(rng);
    while (!(x > 0.0 && x < 1.0));
  }
  return v;
}

}  // namespace clearance::oracle
