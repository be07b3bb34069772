#pragma once

// Labeled risk scores, their empirical distributions, and the threshold bounds
// implied by the minimum reject-unsafe and accept-safe rates.

#include <algorithm>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "clearance/csv.hpp"
#include "clearance/error.hpp"

namespace clearance {

/// What the regulator historically did with a submission.
enum class HistoricalAction { Accept, Reject };

struct LabeledScore {
  std::string device_id;
  double score = 0.0;  // model-estimated recall risk, in (0, 1)
  int label = 0;       // 1 = recalled at least once
  HistoricalAction historical = HistoricalAction::Accept;
  bool fda_rejected = false;  // synthetic rejected-device marker
};

using Dataset = std::vector<LabeledScore>;

/// Empirical CDF over a sorted sample. Immutable once built.
class Ecdf {
 public:
  Ecdf() = default;
  explicit Ecdf(std::vector<double> values) : values_(std::move(values)) {
    std::sort(values_.begin(), values_.end());
  }

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::size_t count_le(double x) const {
    return static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), x) -
                                    values_.begin());
  }
  std::size_t count_ge(double x) const {
    return static_cast<std::size_t>(values_.end() -
                                    std::lower_bound(values_.begin(), values_.end(), x));
  }

 private:
  std::vector<double> values_;
};

/// (#values <= x) / n. Right-continuous. An empty sample evaluates to 0.
inline double ecdf_eval(const Ecdf& ecdf, double x) {
  if (ecdf.empty()) return 0.0;
  return static_cast<double>(ecdf.count_le(x)) / static_cast<double>(ecdf.size());
}

/// (#values >= x) / n. Left-continuous.
inline double tail_eval(const Ecdf& ecdf, double x) {
  if (ecdf.empty()) return 0.0;
  return static_cast<double>(ecdf.count_ge(x)) / static_cast<double>(ecdf.size());
}

/// Scores split by label: recalled (positives) and never recalled (negatives).
class ScorePartition {
 public:
  ScorePartition() = default;
  ScorePartition(std::vector<double> positives, std::vector<double> negatives)
      : pos_(std::move(positives)), neg_(std::move(negatives)) {}

  static ScorePartition from_records(std::span<const LabeledScore> records) {
    std::vector<double> pos, neg;
    for (const auto& r : records) {
      if (!(r.score > 0.0 && r.score < 1.0))
        throw Error("device '" + r.device_id + "': score must lie strictly inside (0,1)");
      if (r.label == 1)
        pos.push_back(r.score);
      else if (r.label == 0)
        neg.push_back(r.score);
      else
        throw Error("device '" + r.device_id + "': label must be 0 or 1");
    }
    return ScorePartition(std::move(pos), std::move(neg));
  }

  const Ecdf& positives() const { return pos_; }
  const Ecdf& negatives() const { return neg_; }
  std::size_t n_pos() const { return pos_.size(); }
  std::size_t n_neg() const { return neg_.size(); }
  std::size_t n_total() const { return pos_.size() + neg_.size(); }

  /// N+ / (N+ + N-); 0 for an empty partition.
  double prevalence() const {
    if (n_total() == 0) return 0.0;
    return static_cast<double>(n_pos()) / static_cast<double>(n_total());
  }

 private:
  Ecdf pos_;
  Ecdf neg_;
};

/// Largest recalled-sample value h with P(positive >= h) >= xi_ru.
inline double threshold_h(const ScorePartition& partition, double xi_ru) {
  const auto v = partition.positives().values();
  if (v.empty()) throw Error("no recalled samples");
  // tail_eval is non-increasing along the sorted sample, so the satisfying
  // indices form a prefix; find its last element.
  std::size_t lo = 0, hi = v.size();  // answer index lies in [lo, hi)
  if (!(tail_eval(partition.positives(), v[0]) >= xi_ru)) return v[0];  // xi_ru > 1
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (tail_eval(partition.positives(), v[mid]) >= xi_ru)
      lo = mid;
    else
      hi = mid;
  }
  return v[lo];
}

/// Smallest never-recalled sample value l with P(negative <= l) >= xi_as; 0 when xi_as is 0.
inline double threshold_l(const ScorePartition& partition, double xi_as) {
  const auto v = partition.negatives().values();
  if (v.empty()) throw Error("no unrecalled samples");
  if (xi_as <= 0.0) return 0.0;
  std::size_t lo = 0, hi = v.size() - 1;  // answer index lies in [lo, hi]
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (ecdf_eval(partition.negatives(), v[mid]) >= xi_as)
      hi = mid;
    else
      lo = mid + 1;
  }
  return v[lo];
}

// ---------------------------------------------------------------------------
// Score CSV: device_id,score,label[,fda_rejected][,historical_action]

inline Dataset read_scores_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const std::size_t c_id = t.require_column("device_id");
  const std::size_t c_score = t.require_column("score");
  const std::size_t c_label = t.require_column("label");
  const auto c_rej = t.column("fda_rejected");
  const auto c_hist = t.column("historical_action");
  if (t.header.size() < 3 || t.header[0] != "device_id" || t.header[1] != "score" ||
      t.header[2] != "label")
    throw Error("score CSV header must start with device_id,score,label");

  Dataset out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = "line " + std::to_string(t.line_numbers[i]) + ": ";
    LabeledScore r;
    r.device_id = row[c_id];
    if (r.device_id.empty()) throw Error(where + "empty device_id");
    const auto score = csv::parse_double(row[c_score]);
    if (!score) throw Error(where + "unparseable score '" + row[c_score] + "'");
    if (!(*score > 0.0 && *score < 1.0))
      throw Error(where + "score " + row[c_score] + " outside the open interval (0,1)");
    r.score = *score;
    if (row[c_label] == "1")
      r.label = 1;
    else if (row[c_label] == "0")
      r.label = 0;
    else
      throw Error(where + "label must be 0 or 1, got '" + row[c_label] + "'");
    if (c_rej) {
      const auto& f = row[*c_rej];
      if (f != "0" && f != "1") throw Error(where + "fda_rejected must be 0 or 1");
      r.fda_rejected = f == "1";
    }
    if (c_hist) {
      const auto& h = row[*c_hist];
      if (h == "accept")
        r.historical = HistoricalAction::Accept;
      else if (h == "reject")
        r.historical = HistoricalAction::Reject;
      else
        throw Error(where + "historical_action must be accept or reject");
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Writes the score CSV; the two extra columns are emitted when `with_history` is set.
inline void write_scores_csv(std::ostream& out, std::span<const LabeledScore> records,
                             bool with_history) {
  out << "device_id,score,label";
  if (with_history) out << ",fda_rejected,historical_action";
  out << '\n';
  for (const auto& r : records) {
    out << csv::escape(r.device_id) << ',' << format_double(r.score) << ',' << r.label;
    if (with_history)
      out << ',' << (r.fda_rejected ? 1 : 0) << ','
          << (r.historical == HistoricalAction::Accept ? "accept" : "reject");
    out << '\n';
  }
}

}  // namespace clearance
