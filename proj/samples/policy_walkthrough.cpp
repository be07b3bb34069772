// Synthetic train/test split -> two-threshold policy -> evaluation, with and
// without a committee reviewing the deferred band.

#include <cstdio>

#include "clearance/clearance.hpp"

int main() {
  using namespace clearance;

  ScoreGenSpec spec;
  spec.n_total = 5000;
  spec.prevalence = 0.103;
  spec.pos_shape = {4.0, 3.0};
  spec.neg_shape = {2.0, 6.0};
  spec.seed = 1;
  const Dataset train = generate_scores(spec);
  spec.seed = 2;
  const Dataset test = generate_scores(spec);

  const PolicyParams params{0.5, 0.3, 0.3, 0.6};
  const auto policy = solve(ScorePartition::from_records(train), params);
  std::printf("case %s: l = %.4f, h = %.4f (bounds %.4f, %.4f)\n", std::string(to_string(policy.case_tag)).c_str(),
              policy.low, policy.high, policy.l_bound, policy.h_bound);
  if (!policy.feasible()) return 2;

  const auto m = evaluate_conservative(test, policy);
  std::printf("workload reduction %.1f%%, recall-rate improvement %.1f%% (%.2f points)\n",
              100 * m.workload_reduction, 100 * m.pct_improvement, 100 * m.relative_improvement_points);
  std::printf("rejected unsafe %.3f, accepted safe %.3f\n", m.reject_unsafe, m.accept_safe);

  for (double k : {0.0, 5.0, 20.0}) {
    const auto c = simulate_committee(test, policy, {k, policy.low, 2000, 7, 1});
    std::printf("committee k = %4.1f: recall rate %.4f, improvement %.1f%%\n", k, c.policy_recall_rate,
                100 * c.pct_improvement);
  }

  const auto single = solve_ml_only(ScorePartition::from_records(train), params.lambda);
  std::printf("ML-only threshold at lambda %.1f: %.4f\n", params.lambda, single.threshold);
}
