// clearance: command-line front end for the threshold-policy toolkit.

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "clearance/clearance.hpp"
#include "clearance/json_io.hpp"

namespace {

using namespace clearance;

constexpr const char* kToolVersion = "0.1.0";
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct InputFile {
  std::string path;
  std::string bytes;
};

InputFile slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return {path, ss.str()};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return out.str();
}

// Command, resolved parameters, input digests and tool version. Nothing here
// depends on the clock, the host or the thread count.
struct Manifest {
  std::string command;
  Json params = Json::object();
  Json inputs = Json::object();

  InputFile add(const std::string& role, InputFile f) {
    inputs[role] = Json{{"path", f.path}, {"sha256", sha256_hex(f.bytes)}};
    return f;
  }

  Json to_json() const {
    return Json{{"tool", "clearance"}, {"version", kToolVersion}, {"command", command},
                {"params", params}, {"inputs", inputs}};
  }
};

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write '" + out_path + "'");
  out << text;
  if (!out) throw Error("write to '" + out_path + "' failed");
}

void emit_json(const std::string& out_path, const Json& j) { emit(out_path, j.dump(2) + "\n"); }

std::string csv_with_manifest(const Manifest& m, const std::string& body) {
  return "# manifest " + m.to_json().dump() + "\n" + body;
}

Dataset read_scores(const InputFile& f) {
  std::istringstream in(f.bytes);
  try {
    return read_scores_csv(in);
  } catch (const Error& e) {
    throw Error(f.path + ": " + e.what());
  }
}

ThresholdPolicy read_policy(const InputFile& f) {
  Json j;
  try {
    j = Json::parse(f.bytes);
  } catch (const nlohmann::json::exception& e) {
    throw Error(f.path + ": " + e.what());
  }
  return policy_from_json(j.contains("policy") ? j["policy"] : j);
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, const std::string& command) {
  if (!seed) throw Error("'" + command + "' is stochastic and needs an explicit --seed");
  return *seed;
}

Json policy_brief(const ThresholdPolicy& p) { return Json{{"l", p.low}, {"h", p.high}}; }

// ---------------------------------------------------------------------------

struct Options {
  std::string out = "-";
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;

  std::string train, test, policy, features, devices, avoided, claims, crosswalk, frequencies, scores;

  PolicyParams params;
  double epsilon = 1e-3;
  std::optional<double> grid_step, bisect_tol, lipschitz_phi, lipschitz_h;

  std::vector<double> xi_ru_levels{0.3, 0.5, 0.7};
  std::vector<double> xi_as_levels{0.3, 0.5, 0.7};
  std::vector<double> rho_levels{0.4, 0.6, 0.8};
  std::vector<double> lambda_levels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double cap = 1.0;
  std::string axis = "accept_unsafe";

  double k = 0.0;
  std::size_t replications = 1000;

  std::size_t n = 1000;
  double prevalence = 0.1;
  double pos_alpha = 8.0, pos_beta = 2.0, neg_alpha = 2.0, neg_beta = 8.0;

  double nu = 0.5;
  double fraction = 0.05;

  std::optional<double> annual_submissions;
  std::optional<std::size_t> test_size;
};

SearchConfig search_config(const Options& o) {
  SearchConfig c;
  c.epsilon = o.epsilon;
  c.grid_step = o.grid_step;
  c.bisect_tol = o.bisect_tol;
  c.lipschitz_phi = o.lipschitz_phi;
  c.lipschitz_h = o.lipschitz_h;
  c.threads = o.threads;
  return c;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

void record_search(Manifest& m, const Options& o) {
  m.params["epsilon"] = o.epsilon;
  m.params["grid_step"] = optional_json(o.grid_step);
  m.params["bisect_tol"] = optional_json(o.bisect_tol);
  m.params["lipschitz_phi"] = optional_json(o.lipschitz_phi);
  m.params["lipschitz_h"] = optional_json(o.lipschitz_h);
}

void record_policy_params(Manifest& m, const PolicyParams& p) {
  m.params["lambda"] = p.lambda;
  m.params["xi_ru"] = p.xi_ru;
  m.params["xi_as"] = p.xi_as;
  m.params["rho"] = p.rho;
}

int cmd_optimize(const Options& o) {
  Manifest m{"optimize"};
  record_policy_params(m, o.params);
  record_search(m, o);
  const auto train = read_scores(m.add("train", slurp(o.train)));
  std::optional<Dataset> test;
  if (!o.test.empty()) test = read_scores(m.add("test", slurp(o.test)));

  const auto part = ScorePartition::from_records(train);
  const auto cfg = search_config(o);
  const auto policy = solve(part, o.params, cfg);

  Json out;
  if (policy.case_tag == CaseTag::NestedSearch) {
    const auto s = resolve_search_settings(cfg, o.params.lambda, policy.l_bound, policy.h_bound);
    m.params["resolved_grid_step"] = s.grid_step;
    m.params["resolved_bisect_tol"] = s.bisect_tol;
  }
  out["manifest"] = m.to_json();
  out["policy"] = to_json(policy);
  if (!policy.feasible()) {
    std::ostringstream why;
    why << "threshold_h(xi_ru) = " << format_double(policy.h_bound) << " is below threshold_l(xi_as) = "
        << format_double(policy.l_bound);
    out["status"] = "infeasible";
    out["reason"] = why.str();
    emit_json(o.out, out);
    return kExitInfeasible;
  }
  out["status"] = "ok";
  const auto metrics = evaluate_conservative(test ? *test : train, policy);
  out["report"] = Json{{"evaluated_on", test ? "test" : "train"},
                       {"l", policy.low},
                       {"h", policy.high},
                       {"workload_reduction", 100.0 * metrics.workload_reduction},
                       {"recall_rate_pct_improvement", 100.0 * metrics.pct_improvement}};
  emit_json(o.out, out);
  return 0;
}

int cmd_evaluate(const Options& o) {
  Manifest m{"evaluate"};
  const auto test = read_scores(m.add("test", slurp(o.test)));
  const auto policy = read_policy(m.add("policy", slurp(o.policy)));
  const Json out{{"manifest", m.to_json()}, {"policy", policy_brief(policy)},
                 {"metrics", to_json(evaluate_conservative(test, policy))}};
  emit_json(o.out, out);
  return 0;
}

int cmd_committee(const Options& o) {
  Manifest m{"committee"};
  const auto seed = require_seed(o.seed, m.command);
  const auto test = read_scores(m.add("test", slurp(o.test)));
  const auto policy = read_policy(m.add("policy", slurp(o.policy)));
  const CommitteeModel model{o.k, policy.low, o.replications, seed, o.threads};
  m.params["k"] = model.k;
  m.params["l_hat"] = model.l_hat;
  m.params["replications"] = model.replications;
  m.params["seed"] = seed;
  const Json out{{"manifest", m.to_json()}, {"policy", policy_brief(policy)},
                 {"metrics", to_json(simulate_committee(test, policy, model))}};
  emit_json(o.out, out);
  return 0;
}

int cmd_sweep(const Options& o) {
  Manifest m{"sweep"};
  m.params["lambda"] = o.params.lambda;
  m.params["xi_ru_levels"] = o.xi_ru_levels;
  m.params["xi_as_levels"] = o.xi_as_levels;
  m.params["rho_levels"] = o.rho_levels;
  record_search(m, o);
  const auto train = read_scores(m.add("train", slurp(o.train)));
  const auto test = read_scores(m.add("test", slurp(o.test)));
  const auto rows = sweep(ScorePartition::from_records(train), test,
                          SweepGrid{o.xi_ru_levels, o.xi_as_levels, o.rho_levels}, o.params.lambda,
                          search_config(o));
  std::ostringstream body;
  write_sweep_csv(body, rows);
  emit(o.out, csv_with_manifest(m, body.str()));
  return 0;
}

int cmd_ml_only(const Options& o) {
  Manifest m{"ml-only"};
  m.params["lambda"] = o.params.lambda;
  const auto train = read_scores(m.add("train", slurp(o.train)));
  std::optional<Dataset> test;
  if (!o.test.empty()) test = read_scores(m.add("test", slurp(o.test)));
  const auto t = solve_ml_only(ScorePartition::from_records(train), o.params.lambda);
  Json out{{"manifest", m.to_json()}, {"threshold", t.threshold}, {"objective_value", t.objective_value}};
  if (test) {
    ThresholdPolicy p;
    p.low = p.high = t.threshold;
    p.case_tag = CaseTag::SingleThreshold;
    out["metrics"] = to_json(evaluate_conservative(*test, p));
  }
  emit_json(o.out, out);
  return 0;
}

int cmd_features(const Options& o) {
  Manifest m{"features"};
  const auto f = m.add("devices", slurp(o.devices));
  std::istringstream in(f.bytes);
  std::vector<FeatureVector> rows;
  for (const auto& s : read_submissions_jsonl(in)) rows.push_back(build_features(s));
  std::ostringstream body;
  write_features_csv(body, rows);
  emit(o.out, csv_with_manifest(m, body.str()));
  return 0;
}

int cmd_cost(const Options& o) {
  Manifest m{"cost"};
  std::vector<CrosswalkRule> rules = default_crosswalk();
  if (!o.crosswalk.empty()) {
    const auto f = m.add("crosswalk", slurp(o.crosswalk));
    try {
      rules = crosswalk_from_json(Json::parse(f.bytes));
    } catch (const nlohmann::json::exception& e) {
      throw Error(f.path + ": " + e.what());
    }
  } else {
    m.params["crosswalk"] = "built-in";
  }
  const auto cf = m.add("claims", slurp(o.claims));
  std::istringstream cin_(cf.bytes);
  const auto claims = read_claims_csv(cin_);
  const auto af = m.add("avoided", slurp(o.avoided));
  std::istringstream ain(af.bytes);
  auto avoided = read_avoided_csv(ain);
  for (auto& a : avoided) a.specialty = resolve_specialty(a.specialty, rules);

  std::map<std::string, double> freq;
  if (!o.frequencies.empty()) {
    const auto ff = m.add("frequencies", slurp(o.frequencies));
    std::istringstream fin(ff.bytes);
    const auto t = csv::read_table(fin);
    const auto c_s = t.require_column("specialty");
    const auto c_f = t.require_column("frequency");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto v = csv::parse_double(t.rows[i][c_f]);
      if (!v) throw Error(ff.path + ": line " + std::to_string(t.line_numbers[i]) + ": bad frequency");
      freq[resolve_specialty(t.rows[i][c_s], rules)] += *v;
    }
  } else {
    m.params["frequencies"] = "avoided-device counts";
    for (const auto& a : avoided) freq[a.specialty] += 1.0;
  }

  const auto means = specialty_avg_allowed(claims, rules);
  const auto fb = fallback_bounds(means, freq);
  const auto est = estimate_savings(avoided, means, fb);
  Json out{{"manifest", Json()},
           {"hcpcs_coverage", hcpcs_coverage(claims, rules)},
           {"specialty_avg_allowed", Json(means)},
           {"fallback", Json{{"low", fb.low}, {"high", fb.high}}},
           {"savings", to_json(est)}};
  if (o.annual_submissions || o.test_size) {
    if (!(o.annual_submissions && o.test_size))
      throw Error("--annual-submissions and --test-size must be given together");
    m.params["annual_submissions"] = *o.annual_submissions;
    m.params["test_size"] = *o.test_size;
    out["annualized"] = Json{{"low", annualize_savings(est.total_low, *o.test_size, *o.annual_submissions)},
                             {"high", annualize_savings(est.total_high, *o.test_size, *o.annual_submissions)}};
  }
  out["manifest"] = m.to_json();
  emit_json(o.out, out);
  return 0;
}

int cmd_synth(const Options& o) {
  Manifest m{"synth"};
  ScoreGenSpec spec;
  spec.n_total = o.n;
  spec.prevalence = o.prevalence;
  spec.pos_shape = {o.pos_alpha, o.pos_beta};
  spec.neg_shape = {o.neg_alpha, o.neg_beta};
  spec.seed = require_seed(o.seed, m.command);
  m.params["n"] = spec.n_total;
  m.params["prevalence"] = spec.prevalence;
  m.params["pos_shape"] = {spec.pos_shape.alpha, spec.pos_shape.beta};
  m.params["neg_shape"] = {spec.neg_shape.alpha, spec.neg_shape.beta};
  m.params["seed"] = spec.seed;
  std::ostringstream body;
  write_scores_csv(body, generate_scores(spec), false);
  emit(o.out, csv_with_manifest(m, body.str()));
  return 0;
}

int cmd_inject(const Options& o) {
  Manifest m{"inject"};
  const RejectionInjectionConfig cfg{o.nu, o.fraction, require_seed(o.seed, m.command)};
  m.params["nu"] = cfg.nu_quantile;
  m.params["fraction"] = cfg.rejected_fraction;
  m.params["seed"] = cfg.seed;
  const auto base = read_scores(m.add("scores", slurp(o.scores)));
  std::ostringstream body;
  write_scores_csv(body, inject_rejected(base, cfg), true);
  emit(o.out, csv_with_manifest(m, body.str()));
  return 0;
}

int cmd_pareto(const Options& o) {
  Manifest m{"pareto"};
  ParetoAxis axis;
  if (o.axis == "accept_unsafe")
    axis = ParetoAxis::AcceptUnsafe;
  else if (o.axis == "pct_improvement")
    axis = ParetoAxis::PctImprovement;
  else
    throw Error("--axis must be accept_unsafe or pct_improvement");
  m.params["lambda_levels"] = o.lambda_levels;
  m.params["xi_ru_levels"] = o.xi_ru_levels;
  m.params["xi_as_levels"] = o.xi_as_levels;
  m.params["rho_levels"] = o.rho_levels;
  m.params["cap"] = o.cap;
  m.params["axis"] = o.axis;
  record_search(m, o);
  const auto train = read_scores(m.add("train", slurp(o.train)));
  const auto test = read_scores(m.add("test", slurp(o.test)));
  const auto part = ScorePartition::from_records(train);

  std::vector<ParetoPoint> pts;
  const SweepGrid grid{o.xi_ru_levels, o.xi_as_levels, o.rho_levels};
  for (double lambda : o.lambda_levels) {
    for (const auto& row : sweep(part, test, grid, lambda, search_config(o))) {
      if (!row.metrics) continue;
      pts.push_back({row.metrics->reject_safe, row.metrics->accept_unsafe, row.metrics->pct_improvement,
                     {lambda, row.xi_ru, row.xi_as, row.rho, 0.0}, "two_threshold"});
    }
    ThresholdPolicy single;
    single.low = single.high = solve_ml_only(part, lambda).threshold;
    single.case_tag = CaseTag::SingleThreshold;
    const auto mm = evaluate_conservative(test, single);
    pts.push_back({mm.reject_safe, mm.accept_unsafe, mm.pct_improvement, {lambda, 0, 0, 0, 0}, "ml_only"});
  }
  std::ostringstream body;
  write_pareto_csv(body, pareto_frontier(pts, o.cap, axis));
  emit(o.out, csv_with_manifest(m, body.str()));
  return 0;
}

int cmd_buckets(const Options& o) {
  Manifest m{"buckets"};
  const auto test = read_scores(m.add("test", slurp(o.test)));
  const auto policy = read_policy(m.add("policy", slurp(o.policy)));
  const auto ff = m.add("features", slurp(o.features));
  std::istringstream fin(ff.bytes);
  const auto table = read_feature_table(fin);
  std::ostringstream body;
  write_buckets_csv(body, summarize_buckets(test, table, policy));
  emit(o.out, csv_with_manifest(m, body.str()));
  return 0;
}

// ---------------------------------------------------------------------------

void add_out(CLI::App* c, Options& o) { c->add_option("--out", o.out, "Output file ('-' for stdout)"); }

void add_threads(CLI::App* c, Options& o) {
  c->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void add_policy_params(CLI::App* c, Options& o) {
  c->add_option("--lambda", o.params.lambda, "Weight on accepting unsafe devices")->capture_default_str();
  c->add_option("--xi-ru", o.params.xi_ru, "Minimum rejection rate of unsafe devices")->capture_default_str();
  c->add_option("--xi-as", o.params.xi_as, "Minimum acceptance rate of safe devices")->capture_default_str();
  c->add_option("--rho", o.params.rho, "Maximum deferred fraction")->capture_default_str();
}

void add_search(CLI::App* c, Options& o) {
  c->add_option("--epsilon", o.epsilon, "Target optimality gap")->capture_default_str();
  c->add_option("--grid-step", o.grid_step, "Grid spacing over l (overrides epsilon)");
  c->add_option("--bisect-tol", o.bisect_tol, "Bisection tolerance for h (overrides epsilon)");
  c->add_option("--lipschitz-phi", o.lipschitz_phi, "Lipschitz bound on the class CDFs");
  c->add_option("--lipschitz-h", o.lipschitz_h, "Lipschitz bound on the optimal h as a function of l");
}

void add_levels(CLI::App* c, Options& o) {
  c->add_option("--xi-ru-levels", o.xi_ru_levels, "Comma-separated xi_ru levels")->delimiter(',');
  c->add_option("--xi-as-levels", o.xi_as_levels, "Comma-separated xi_as levels")->delimiter(',');
  c->add_option("--rho-levels", o.rho_levels, "Comma-separated rho levels")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-threshold clearance policies for device submissions"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Options o;
  int (*run)(const Options&) = nullptr;

  auto* opt = app.add_subcommand("optimize", "Solve for (l, h) on a training score CSV");
  opt->add_option("--train", o.train, "Training scores CSV")->required();
  opt->add_option("--test", o.test, "Optional scores CSV for the report (defaults to --train)");
  add_policy_params(opt, o);
  add_search(opt, o);
  add_threads(opt, o);
  add_out(opt, o);
  opt->callback([&] { run = cmd_optimize; });

  auto* ev = app.add_subcommand("evaluate", "Conservative evaluation of a policy");
  ev->add_option("--test", o.test, "Test scores CSV")->required();
  ev->add_option("--policy", o.policy, "Policy JSON")->required();
  add_out(ev, o);
  ev->callback([&] { run = cmd_evaluate; });

  auto* sw = app.add_subcommand("sweep", "Solve and evaluate over a grid of constraint levels");
  sw->add_option("--train", o.train, "Training scores CSV")->required();
  sw->add_option("--test", o.test, "Test scores CSV")->required();
  sw->add_option("--lambda", o.params.lambda, "Weight on accepting unsafe devices")->capture_default_str();
  add_levels(sw, o);
  add_search(sw, o);
  add_threads(sw, o);
  add_out(sw, o);
  sw->callback([&] { run = cmd_sweep; });

  auto* cm = app.add_subcommand("committee", "Monte-Carlo committee review of deferred devices");
  cm->add_option("--test", o.test, "Test scores CSV")->required();
  cm->add_option("--policy", o.policy, "Policy JSON")->required();
  cm->add_option("--k", o.k, "Committee skill (0 = historical practice)")->capture_default_str();
  cm->add_option("--replications", o.replications, "Monte-Carlo replications")->capture_default_str();
  cm->add_option("--seed", o.seed, "Random seed (required)");
  add_threads(cm, o);
  add_out(cm, o);
  cm->callback([&] { run = cmd_committee; });

  auto* ml = app.add_subcommand("ml-only", "Best single threshold for a given lambda");
  ml->add_option("--train", o.train, "Training scores CSV")->required();
  ml->add_option("--test", o.test, "Optional test scores CSV to evaluate");
  ml->add_option("--lambda", o.params.lambda, "Weight on accepting unsafe devices")->capture_default_str();
  add_out(ml, o);
  ml->callback([&] { run = cmd_ml_only; });

  auto* fe = app.add_subcommand("features", "Predicate-network features from a submissions JSONL file");
  fe->add_option("--devices", o.devices, "Submissions, one JSON object per line")->required();
  add_out(fe, o);
  fe->callback([&] { run = cmd_features; });

  auto* co = app.add_subcommand("cost", "Replacement-cost savings of avoided recalls");
  co->add_option("--avoided", o.avoided, "Avoided recalls CSV (device_id,specialty,units)")->required();
  co->add_option("--claims", o.claims, "Claims CSV (hcpcs,description,avg_allowed,total_claims)")->required();
  co->add_option("--crosswalk", o.crosswalk, "Crosswalk JSON (defaults to the built-in rules)");
  co->add_option("--frequencies", o.frequencies, "Specialty frequency CSV (specialty,frequency)");
  co->add_option("--annual-submissions", o.annual_submissions, "Submissions per year for annualizing");
  co->add_option("--test-size", o.test_size, "Evaluation-set size for annualizing");
  add_out(co, o);
  co->callback([&] { run = cmd_cost; });

  auto* sy = app.add_subcommand("synth", "Synthetic labeled score CSV from Beta distributions");
  sy->add_option("--n", o.n, "Number of devices")->capture_default_str();
  sy->add_option("--prevalence", o.prevalence, "Fraction recalled")->capture_default_str();
  sy->add_option("--pos-alpha", o.pos_alpha)->capture_default_str();
  sy->add_option("--pos-beta", o.pos_beta)->capture_default_str();
  sy->add_option("--neg-alpha", o.neg_alpha)->capture_default_str();
  sy->add_option("--neg-beta", o.neg_beta)->capture_default_str();
  sy->add_option("--seed", o.seed, "Random seed (required)");
  add_out(sy, o);
  sy->callback([&] { run = cmd_synth; });

  auto* in = app.add_subcommand("inject", "Append synthetic regulator-rejected devices");
  in->add_option("--scores", o.scores, "Scores CSV")->required();
  in->add_option("--nu", o.nu, "Risk quantile level above which devices may be picked")->capture_default_str();
  in->add_option("--fraction", o.fraction, "Injected devices as a fraction of the input")->capture_default_str();
  in->add_option("--seed", o.seed, "Random seed (required)");
  add_out(in, o);
  in->callback([&] { run = cmd_inject; });

  auto* pa = app.add_subcommand("pareto", "Non-dominated policies across lambda and constraint levels");
  pa->add_option("--train", o.train, "Training scores CSV")->required();
  pa->add_option("--test", o.test, "Test scores CSV")->required();
  pa->add_option("--lambda-levels", o.lambda_levels, "Comma-separated lambda values")->delimiter(',');
  add_levels(pa, o);
  pa->add_option("--cap", o.cap, "Keep points with reject_safe below this")->capture_default_str();
  pa->add_option("--axis", o.axis, "accept_unsafe or pct_improvement")->capture_default_str();
  add_search(pa, o);
  add_threads(pa, o);
  add_out(pa, o);
  pa->callback([&] { run = cmd_pareto; });

  auto* bu = app.add_subcommand("buckets", "Feature means per label and decision");
  bu->add_option("--test", o.test, "Test scores CSV")->required();
  bu->add_option("--policy", o.policy, "Policy JSON")->required();
  bu->add_option("--features", o.features, "Feature CSV with a device_id column")->required();
  add_out(bu, o);
  bu->callback([&] { run = cmd_buckets; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }
  try {
    return run(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
