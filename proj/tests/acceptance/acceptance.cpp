// Acceptance run: one PASS/FAIL/SKIP line per primary criterion. Exits
// nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "oracles/ranksum_oracle.hpp"
#include "oracles/shap_oracle.hpp"
#include "oracles/split_oracle.hpp"
#include "ssa/agenda.hpp"
#include "ssa/explain.hpp"
#include "ssa/http_api.hpp"
#include "ssa/ingest.hpp"
#include "ssa/model_io.hpp"
#include "ssa/pipeline.hpp"
#include "ssa/random.hpp"
#include "ssa/shap.hpp"
#include "ssa/stats.hpp"
#include "ssa/tuning.hpp"
#include "support/agenda_fixture.hpp"
#include "support/random_models.hpp"

namespace fs = std::filesystem;
using namespace ssa;
using testing_support::random_forest;
using testing_support::random_problem;
using testing_support::random_row;
using testing_support::RandomSchema;

namespace {

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kPass;
  std::string detail;
};

/// Collects the first few failure messages of a criterion.
class Failures {
 public:
  void add(const std::string& message) {
    if (count_++ < 3) messages_ += (messages_.empty() ? "" : "; ") + message;
  }
  bool any() const { return count_ > 0; }
  Outcome outcome(const std::string& ok_detail) const {
    if (!any()) return {Status::kPass, ok_detail};
    return {Status::kFail, std::to_string(count_) + " failures: " + messages_};
  }

 private:
  std::size_t count_ = 0;
  std::string messages_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(1);
  s << std::scientific << v;
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome shapley_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(601);
  Failures f;
  double worst = 0.0;
  std::size_t full_checks = 0;
  for (int forest = 0; forest < 500; ++forest) {
    RandomSchema schema;
    const auto model = random_forest(rng, 10, 50, 5, &schema);
    const std::size_t groups = model.schema->group_count();
    for (int i = 0; i < 5; ++i) {
      const auto x = random_row(rng, schema);
      const auto fast = shap_fast(model, x);
      const auto want = oracle::leaf_shapley(model, x);
      // Whole-ensemble coalition enumeration where it stays cheap.
      std::optional<oracle::ShapleyResult> full;
      if (groups <= 6 || i == 0) {
        full = oracle::coalition_shapley(model, x);
        ++full_checks;
      }
      for (std::size_t g = 0; g < groups; ++g) {
        const double d = std::abs(fast.grouped_phi[g] - want.phi[g]);
        worst = std::max(worst, d);
        if (d > 1e-6) f.add("forest " + std::to_string(forest) + " group " + std::to_string(g));
        if (full) {
          const double e = std::abs(fast.grouped_phi[g] - full->phi[g]);
          worst = std::max(worst, e);
          if (e > 1e-6) f.add("forest " + std::to_string(forest) + " coalition group " + std::to_string(g));
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 60.0) f.add("took " + fmt(elapsed, 1) + " s");
  return f.outcome("2500 inputs, " + std::to_string(full_checks) +
                   " also by full enumeration, max diff " + sci(worst) + ", " + fmt(elapsed, 1) + " s");
}

Outcome local_accuracy() {
  Rng rng(602);
  Failures f;
  double worst = 0.0;
  std::size_t cases = 0;
  for (int forest = 0; forest < 1000; ++forest) {
    RandomSchema schema;
    const auto model = random_forest(rng, 8, 20, 5, &schema);
    for (int i = 0; i < 10; ++i, ++cases) {
      const auto x = random_row(rng, schema);
      const double raw = model.predict_raw(x);
      const double fast = shap_fast(model, x).total();
      const double exact = shap_exact(model, x).total();
      worst = std::max({worst, std::abs(fast - raw), std::abs(exact - raw)});
      if (std::abs(fast - raw) > 1e-9) f.add("fast case " + std::to_string(cases));
      if (std::abs(exact - raw) > 1e-9) f.add("exact case " + std::to_string(cases));
    }
  }
  return f.outcome(std::to_string(cases) + " cases, max diff " + sci(worst));
}

HyperParams single_tree(std::optional<int> depth = std::nullopt) {
  HyperParams hp;
  hp.n_trees = 1;
  hp.max_depth = depth;
  hp.bootstrap = false;
  return hp;
}

Outcome tree_oracle() {
  Rng rng(603);
  Failures f;
  std::size_t splits = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto p = random_problem(rng, 1 + rng.index(6), 2 + rng.index(29));
    Rng tree_rng(trial);
    const Tree root = fit_tree(p.X, p.y, single_tree(1), tree_rng);
    const auto best = oracle::best_split(p.X, p.y);
    if (best && !root.root().is_leaf()) {
      ++splits;
      if (root.root().feature != best->feature || root.root().threshold != best->threshold) {
        f.add("root split trial " + std::to_string(trial));
      }
    } else if (best.has_value() != !root.root().is_leaf()) {
      f.add("split presence trial " + std::to_string(trial));
    }

    std::set<std::vector<double>> seen;
    FeatureMatrix X(p.X.schema(), 0);
    std::vector<double> y;
    for (std::size_t r = 0; r < p.X.rows(); ++r) {
      std::vector<double> row(p.X.row(r).begin(), p.X.row(r).end());
      if (seen.insert(row).second) {
        X.append(row);
        y.push_back(p.y[r]);
      }
    }
    const Tree full = fit_tree(X, y, single_tree(), tree_rng);
    std::vector<double> predicted;
    for (std::size_t r = 0; r < X.rows(); ++r) predicted.push_back(full.predict(X.row(r)));
    if (mean_absolute_error(predicted, y) != 0.0) f.add("training MAE trial " + std::to_string(trial));
  }
  return f.outcome("200 datasets, " + std::to_string(splits) + " root splits compared");
}

Outcome rank_sum_exact() {
  Rng rng(604);
  Failures f;
  std::size_t compared = 0;
  for (std::size_t n = 2; n <= 10; ++n) {
    for (std::size_t na = 1; na < n; ++na) {
      for (int rep = 0; rep < 4; ++rep) {
        std::vector<double> pooled(n);
        for (std::size_t i = 0; i < n; ++i) pooled[i] = static_cast<double>(i) + rng.uniform() * 0.5;
        rng.shuffle(std::span<double>(pooled));
        const std::vector<double> a(pooled.begin(), pooled.begin() + static_cast<long>(na));
        const std::vector<double> b(pooled.begin() + static_cast<long>(na), pooled.end());
        const auto want = oracle::permutation_p(a, b);
        const std::string at = std::to_string(na) + "+" + std::to_string(n - na);
        if (rank_sum_test(a, b, Alternative::kLess).p != want.less) f.add("less " + at);
        if (rank_sum_test(a, b, Alternative::kGreater).p != want.greater) f.add("greater " + at);
        if (rank_sum_test(a, b, Alternative::kTwoSided).p != want.two_sided) f.add("two-sided " + at);
        compared += 3;
      }
    }
  }
  const std::vector<double> a = {1, 2, 3}, b = {4, 5, 6};
  const auto r = rank_sum_test(a, b, Alternative::kLess);
  if (r.p != 0.05) f.add("{1,2,3} vs {4,5,6} p = " + fmt(r.p, 6));
  if (r.u != 0.0) f.add("{1,2,3} vs {4,5,6} U = " + fmt(r.u, 1));
  return f.outcome(std::to_string(compared) + " p-values equal, {1,2,3} vs {4,5,6} p = 0.05");
}

// ---------------------------------------------------------------------------

/// Quick-grid pipeline on the bundled synthetic data, shared by the recovery,
/// curated-pair and service criteria.
struct Recovery {
  PipelineModel model;
  EvaluationReport report;
  double seconds = 0.0;
};

const Recovery& recovery() {
  static const Recovery r = [] {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string dir = default_data_dir() + "/synthetic/";
    const auto table = parse_relationships(read_file(dir + "relationships.csv"));
    ParseOptions opts;
    opts.relationships = &table;
    const auto records = load_situations(dir + "situations.csv", opts);
    const auto [train, test] = split(records, {0.2, derive_seed(kDefaultSeed, 0x5b17), false});
    PipelineConfig config;
    config.forest_grid = quick_forest_grid(0);
    config.comparison_trees = false;
    Recovery out;
    out.model = train_pipeline(train, config);
    out.report = evaluate(out.model, test);
    out.seconds = seconds_since(t0);
    return out;
  }();
  return r;
}

const SignificanceResult* route_test(const EvaluationReport& report, std::string_view route) {
  for (const auto& t : report.priority_tests) {
    if ((t.model_a == route && t.model_b == kRouteMean) ||
        (t.model_b == route && t.model_a == kRouteMean)) {
      return &t;
    }
  }
  return nullptr;
}

Outcome synthetic_recovery() {
  const auto& r = recovery();
  Failures f;
  const double mean_mae = r.report.route(kRouteMean)->mae;
  std::string detail;
  for (auto route : {kRouteTrueProfile, kRouteFeatures}) {
    const double mae = r.report.route(route)->mae;
    const auto* t = route_test(r.report, route);
    if (!t) {
      f.add(std::string(route) + " has no test against the mean");
      continue;
    }
    if (!(mae < mean_mae)) f.add(std::string(route) + " MAE " + fmt(mae) + " >= mean " + fmt(mean_mae));
    if (!(t->p < 0.05)) f.add(std::string(route) + " p = " + fmt(t->p, 4));
    detail += std::string(route) + " MAE " + fmt(mae) + " (p " + (t->p < 1e-4 ? "< 1e-4" : "= " + fmt(t->p, 4)) + "), ";
  }
  const auto ranked = r.model.salience->level2.ranked_names();
  if (ranked.empty() || ranked.front() != "duty") {
    f.add("most salient for priority is " + (ranked.empty() ? "nothing" : ranked.front()));
  }
  if (r.seconds >= 300.0) f.add("took " + fmt(r.seconds, 1) + " s");
  return f.outcome(detail + "mean MAE " + fmt(mean_mae) + ", duty most salient, " +
                   fmt(r.seconds, 1) + " s");
}

/// Directory holding the adapted published study data, if present.
std::optional<fs::path> published_dir() {
  if (const char* env = std::getenv("SSA_PUBLISHED_DIR"); env && *env) {
    if (fs::exists(fs::path(env) / "situations.csv")) return fs::path(env);
    return std::nullopt;
  }
  const fs::path bundled = fs::path(default_data_dir()) / "published";
  if (fs::exists(bundled / "situations.csv")) return bundled;
  return std::nullopt;
}

Outcome published_dataset() {
  const auto dir = published_dir();
  if (!dir) {
    return {Status::kSkip, "no situations.csv under SSA_PUBLISHED_DIR or data/published"};
  }
  std::optional<AdapterConfig> adapter;
  if (fs::exists(*dir / "adapter.conf")) adapter = AdapterConfig::load((*dir / "adapter.conf").string());
  std::optional<RelationshipTable> table;
  if (fs::exists(*dir / "relationships.csv")) {
    table = parse_relationships(read_file((*dir / "relationships.csv").string()),
                                adapter ? &*adapter : nullptr);
  }
  ParseOptions opts;
  opts.adapter = adapter ? &*adapter : nullptr;
  opts.relationships = table ? &*table : nullptr;
  if (adapter && adapter->scale) opts.scale = *adapter->scale;
  const auto records = load_situations((*dir / "situations.csv").string(), opts);
  const auto [train, test] = split(records, {0.2, derive_seed(kDefaultSeed, 0x5b17), false});
  PipelineConfig config;
  config.scale = opts.scale;
  const auto model = train_pipeline(train, config);
  const auto report = evaluate(model, test);

  Failures f;
  auto band = [&](const std::string& what, double got, double want) {
    if (std::abs(got - want) > 0.15) f.add(what + " MAE " + fmt(got) + " vs " + fmt(want, 2));
  };
  band("true profile", report.route(kRouteTrueProfile)->mae, 0.98);
  band("features", report.route(kRouteFeatures)->mae, 1.35);
  band("predicted profile", report.route(kRoutePredictedProfile)->mae, 1.37);
  struct Row {
    const char* name;
    double forest;
    double mean;
    bool starred;
  };
  const Row rows[] = {{"duty", 1.34, 1.55, true},       {"intellect", 1.17, 1.3, true},
                      {"adversity", 1.29, 1.36, false}, {"mating", 0.85, 1.03, true},
                      {"positivity", 1.14, 1.26, true}, {"negativity", 1.25, 1.37, true},
                      {"deception", 1.04, 1.09, false}, {"sociality", 1.02, 1.13, true}};
  for (const auto& row : rows) {
    const auto* target = report.characteristic(row.name);
    const double forest = target->find("random_forest")->mae;
    const double mean = target->find("predict_mean")->mae;
    band(row.name, forest, row.forest);
    if (row.starred && !(forest < mean)) f.add(std::string(row.name) + " forest does not beat mean");
  }
  return f.outcome(std::to_string(records.size()) + " records, true profile MAE " +
                   fmt(report.route(kRouteTrueProfile)->mae));
}

Outcome curated_pairs() {
  const auto& model = recovery().model;
  const std::string data = default_data_dir();
  const auto pairs = load_pairs(data + "/pairs.json");
  const auto lexicon = Lexicon::load(data + "/lexicon.json");
  Failures f;
  if (pairs.size() != 8) f.add(std::to_string(pairs.size()) + " pairs in the fixture");
  for (const auto& pair : pairs) {
    try {
      const auto l1 = find_differing_level1(pair);
      const auto l2 = find_differing_level2(pair);
      const auto s = decide_suggestion(pair, *model.salience);
      const auto t1 = render_explanation(s, ExplanationStyle::kLevel1, pair, lexicon);
      const auto t2 = render_explanation(s, ExplanationStyle::kLevel2, pair, lexicon);
      if (!pair.expected) {
        f.add(pair.id + " has no expectation");
        continue;
      }
      const auto& e = *pair.expected;
      if (s.chosen != e.chosen) f.add(pair.id + " chose " + pair.meetings[s.chosen].label);
      if (l1 != e.level1_feature || *s.level1_feature != l1) f.add(pair.id + " level 1 feature " + l1);
      if (to_name(l2) != e.level2_feature || *s.level2_feature != l2) {
        f.add(pair.id + " level 2 feature " + std::string(to_name(l2)));
      }
      if (e.level1_text && *e.level1_text != t1.text) f.add(pair.id + " level 1 text");
      if (e.level2_text && *e.level2_text != t2.text) f.add(pair.id + " level 2 text");
      if (pair.id == "pair-1") {
        if (pair.meetings[s.chosen].label != "Meeting 2") f.add("pair-1 does not pick Meeting 2");
        if (!e.level1_text || !e.level2_text) f.add("pair-1 fixture lacks texts");
      }
    } catch (const Error& e) {
      f.add(pair.id + ": " + e.what());
    }
  }
  return f.outcome("8 pairs agree across levels, pair-1 picks Meeting 2 with fixture texts");
}

Outcome service_durability() {
  const auto& model = recovery().model;
  const std::string model_dir = testing_support::temp_dir("acceptance-model");
  save_pipeline(model, model_dir);
  const auto bundle = load_model_bundle(model_dir, default_data_dir() + "/lexicon.json");
  const std::string store_dir = testing_support::temp_dir("acceptance-store");
  const auto options = testing_support::fixed_clock_options();
  const auto& conflict = testing_support::kDutyConflict;

  Failures f;
  AgendaState before;
  nlohmann::json suggestion;
  {
    Store store(StoreOptions{store_dir, 3, true});
    AgendaService service(store, options);
    service.set_models(bundle);
    testing_support::seed_duty_conflict(service);
    service.put_contact("cy", {{"name", "Cy"}});
    service.put_relationship("cy", testing_support::relationship_body("friend", 6));
    service.add_meeting(testing_support::meeting_body(
        "lunch", "Lunch", "2026-03-03T12:00:00Z", "2026-03-03T13:00:00Z", "cy", "neither", "casual"));
    service.put_relationship("ana", testing_support::relationship_body("supervisor", 4));
    suggestion = service.suggestion(conflict);
    service.record_feedback(conflict, {{"suggested_meeting_id", suggestion["suggestion"]["chosen_meeting_id"]},
                                       {"decision", "accepted"},
                                       {"shown_styles", {"level2"}}});
    before = store.state();
  }
  Store store(StoreOptions{store_dir, 3, true});
  if (!(store.state() == before)) f.add("replayed state differs");
  if (store.state().feedback.size() != 1) f.add("feedback not replayed");
  AgendaService service(store, options);
  service.set_models(bundle);
  if (service.suggestion(conflict) != suggestion) f.add("suggestion differs after replay");

  httplib::Server server;
  install_routes(server, service, HttpOptions{"127.0.0.1", 0, ""});
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  {
    httplib::Client client("127.0.0.1", port);
    const std::string path = "/conflicts/" + conflict + "/suggestion";
    const auto first = client.Get(path);
    if (!first || first->status != 200) {
      f.add("first HTTP suggestion failed");
    } else {
      if (nlohmann::json::parse(first->body) != suggestion) f.add("HTTP body differs from the service");
      for (int i = 0; i < 100; ++i) {
        const auto r = client.Get(path);
        if (!r || r->status != 200 || r->body != first->body) f.add("call " + std::to_string(i) + " differs");
      }
    }
  }
  server.stop();
  thread.join();
  return f.outcome("state and suggestion survive reopen, 100 HTTP calls identical");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"shapley_oracle_equivalence", shapley_oracle},
      {"local_accuracy", local_accuracy},
      {"tree_learner_oracle", tree_oracle},
      {"rank_sum_exactness", rank_sum_exact},
      {"synthetic_pipeline_recovery", synthetic_recovery},
      {"published_dataset_reproduction", published_dataset},
      {"curated_pair_fidelity", curated_pairs},
      {"service_durability_and_determinism", service_durability},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {Status::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
    failed += o.status == Status::kFail;
    std::cout << tag << " " << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
