#include "ssa/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "ssa/csv.hpp"
#include "ssa/error.hpp"
#include "ssa/model_io.hpp"

namespace ssa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Job indices feeding derive_seed; stable so artifacts never shift.
constexpr std::uint64_t kPriorityJob = 8;
constexpr std::uint64_t kDirectJob = 9;
constexpr std::uint64_t kFoldStream = 0xf01d;
constexpr std::uint64_t kTreeStream = 0x7ee;

std::vector<double> characteristic_labels(
    const std::vector<SituationRecord>& records, std::size_t c) {
  std::vector<double> y;
  y.reserve(records.size());
  for (const auto& r : records) {
    if (!r.profile) {
      throw Error(ErrorCode::kMissingLabels, "profile",
                  "record " + r.situation_id + " has no profile");
    }
    y.push_back(r.profile->values()[c]);
  }
  return y;
}

std::vector<double> priority_labels(const std::vector<SituationRecord>& records) {
  std::vector<double> y;
  y.reserve(records.size());
  for (const auto& r : records) {
    if (!r.priority) {
      throw Error(ErrorCode::kMissingLabels, "priority",
                  "record " + r.situation_id + " has no priority");
    }
    y.push_back(r.priority->value());
  }
  return y;
}

std::vector<HyperParams> with_seed(std::vector<HyperParams> grid,
                                   std::uint64_t seed) {
  for (auto& hp : grid) hp.seed = seed;
  return grid;
}

TargetModels train_target(const FeatureMatrix& X, const std::vector<double>& y,
                          const TargetSpec& target, const PipelineConfig& config,
                          std::uint64_t job_seed,
                          const TrainingMetadata& metadata) {
  TargetModels out;
  const auto grid = with_seed(config.forest_grid, job_seed);
  const std::uint64_t fold_seed = derive_seed(job_seed, kFoldStream);
  const CvResult cv =
      cross_validate(X, y, grid, config.folds, fold_seed, target);
  out.forest = fit_forest(X, y, cv.best, target);
  out.cv_mae = cv.cells[cv.best_index].mean_mae;
  out.grid_cells = grid.size();
  out.forest.metadata = metadata;
  out.forest.metadata.seed = job_seed;

  if (config.comparison_trees && !config.tree_grid.empty()) {
    const std::uint64_t tree_seed = derive_seed(job_seed, kTreeStream);
    const auto tree_grid = with_seed(config.tree_grid, tree_seed);
    const CvResult tree_cv = cross_validate(X, y, tree_grid, config.folds,
                                            fold_seed, target,
                                            ModelKind::kDecisionTree);
    out.decision_tree = fit_decision_tree(X, y, tree_cv.best, target);
    out.decision_tree->metadata = metadata;
    out.decision_tree->metadata.seed = tree_seed;
  }
  out.baseline = fit_mean_baseline(y, target, X.schema());
  out.baseline.metadata = metadata;
  out.baseline.metadata.seed = job_seed;
  return out;
}

FeatureMatrix predicted_profiles(const PipelineModel& model,
                                 const FeatureMatrix& X) {
  FeatureMatrix P(profile_schema(), X.rows());
  for (std::size_t c = 0; c < kNumCharacteristics; ++c) {
    const auto preds = predict_batch(model.level2.at(c).forest, X);
    for (std::size_t r = 0; r < X.rows(); ++r) P.row(r)[c] = preds[r].clamped;
  }
  return P;
}

std::vector<double> clamped(const std::vector<Prediction>& preds) {
  std::vector<double> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out[i] = preds[i].clamped;
  return out;
}

ModelScore score(std::string name, const std::vector<double>& predicted,
                 const std::vector<double>& actual) {
  ModelScore s;
  s.model = std::move(name);
  s.abs_errors = absolute_errors(predicted, actual);
  s.mae = mean(s.abs_errors);
  return s;
}

SignificanceResult compare(const ModelScore& a, const ModelScore& b) {
  const auto r = rank_sum_test(a.abs_errors, b.abs_errors,
                               Alternative::kTwoSided);
  return {a.model, b.model, r.u, r.p, r.method, r.p < kSignificanceLevel};
}

std::vector<double> external_values(const ExternalPredictions::mapped_type& preds,
                                    const std::vector<SituationRecord>& test,
                                    const std::string& model,
                                    const std::string& target) {
  std::vector<double> out;
  out.reserve(test.size());
  for (const auto& r : test) {
    auto it = preds.find({r.situation_id, target});
    if (it == preds.end()) {
      throw Error(ErrorCode::kMissingField, model,
                  "external model '" + model + "' has no " + target +
                      " prediction for situation " + r.situation_id);
    }
    out.push_back(it->second);
  }
  return out;
}

bool has_target(const ExternalPredictions::mapped_type& preds,
                const std::string& target) {
  for (const auto& [key, value] : preds) {
    if (key.second == target) return true;
  }
  return false;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

json score_json(const ModelScore& s) { return {{"model", s.model}, {"mae", s.mae}}; }

json test_json(const SignificanceResult& t) {
  return {{"model_a", t.model_a},
          {"model_b", t.model_b},
          {"u", t.u},
          {"p", t.p},
          {"method", t.method == RankSumMethod::kExact ? "exact" : "normal"},
          {"alpha", kSignificanceLevel},
          {"significant", t.significant}};
}

json target_models_json(const TargetModels& t) {
  json j = {{"target", t.forest.target.name},
            {"hyperparams", hyperparams_to_json(t.forest.hyperparams)},
            {"cv_mae", t.cv_mae},
            {"grid_cells", t.grid_cells},
            {"training_rows", t.forest.metadata.training_rows},
            {"baseline_mean", t.baseline.trees.front().root().value}};
  if (t.decision_tree) {
    j["decision_tree_hyperparams"] =
        hyperparams_to_json(t.decision_tree->hyperparams);
  }
  return j;
}


CharacteristicScale parse_scale(int v) {
  if (v == 6) return CharacteristicScale::kSixPoint;
  if (v == 7) return CharacteristicScale::kSevenPoint;
  throw Error(ErrorCode::kUnsupportedScale, "scale", "scale must be 6 or 7");
}

}  // namespace

std::vector<std::string> forest_file_stems() {
  std::vector<std::string> stems;
  for (auto name : kCharacteristicNames) stems.emplace_back(name);
  stems.emplace_back("priority");
  stems.emplace_back("priority_direct");
  return stems;
}

PipelineModel train_pipeline(const std::vector<SituationRecord>& train,
                             const PipelineConfig& config) {
  if (train.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "train", "no training records");
  }
  for (const auto& r : train) {
    if (r.profile && r.profile->scale() != config.scale) {
      throw Error(ErrorCode::kInvalidValue, "scale",
                  "record " + r.situation_id +
                      " uses a different characteristic scale");
    }
  }
  PipelineModel model;
  model.scale = config.scale;
  model.metadata.seed = config.seed;
  model.metadata.dataset_fingerprint = fingerprint_hex(fingerprint(train));
  model.metadata.timestamp = config.timestamp;
  model.metadata.training_rows = train.size();

  const FeatureMatrix X = encode_features(train);
  const FeatureMatrix P = encode_profiles(train);
  const auto y_priority = priority_labels(train);

  for (std::size_t c = 0; c < kNumCharacteristics; ++c) {
    const auto y = characteristic_labels(train, c);
    model.level2.push_back(train_target(
        X, y, characteristic_target(static_cast<Characteristic>(c), config.scale),
        config, derive_seed(config.seed, c), model.metadata));
  }
  model.priority = train_target(P, y_priority, priority_target(), config,
                                derive_seed(config.seed, kPriorityJob),
                                model.metadata);
  model.direct = train_target(X, y_priority, priority_target(), config,
                              derive_seed(config.seed, kDirectJob),
                              model.metadata);
  model.direct.forest.target.name = "priority_direct";
  model.direct.baseline.target.name = "priority_direct";
  if (model.direct.decision_tree) {
    model.direct.decision_tree->target.name = "priority_direct";
  }
  if (config.salience_rows > 0) {
    model.salience = compute_salience(model, train, config.salience_rows,
                                      config.seed);
  }
  return model;
}

SalienceSummary compute_salience(const PipelineModel& model,
                                 const std::vector<SituationRecord>& records,
                                 std::size_t max_rows, std::uint64_t seed) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "records", "no records for salience");
  }
  std::vector<std::size_t> rows(records.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (rows.size() > max_rows) {
    Rng rng(derive_seed(seed, 0x5a1));
    rng.shuffle(std::span<std::size_t>(rows));
    rows.resize(max_rows);
    std::sort(rows.begin(), rows.end());
  }
  std::vector<SituationRecord> sample;
  sample.reserve(rows.size());
  for (auto r : rows) sample.push_back(records[r]);
  SalienceSummary out;
  out.level1 = global_salience(model.direct_model(), encode_features(sample));
  out.level2 = global_salience(model.priority_model(), encode_profiles(sample));
  return out;
}

SituationProfile predict_profile(const PipelineModel& model,
                                 const SocialSituationFeatures& features) {
  const FeatureEncoder encoder;
  const EncodedVector x = encoder.encode(features);
  SituationProfile::Values values{};
  for (std::size_t c = 0; c < kNumCharacteristics; ++c) {
    values[c] = predict(model.level2.at(c).forest, x).clamped;
  }
  return SituationProfile(values, model.scale);
}

Priority predict_priority(const PipelineModel& model,
                          const SituationProfile& profile) {
  return Priority(predict(model.priority_model(), encode_profile(profile)).clamped);
}

Priority predict_priority(const PipelineModel& model,
                          const SocialSituationFeatures& features) {
  return predict_priority(model, predict_profile(model, features));
}

Priority predict_priority_direct(const PipelineModel& model,
                                 const SocialSituationFeatures& features) {
  const FeatureEncoder encoder;
  return Priority(predict(model.direct_model(), encoder.encode(features)).clamped);
}

const ModelScore* TargetReport::find(std::string_view name) const {
  for (const auto& m : models) {
    if (m.model == name) return &m;
  }
  return nullptr;
}

const ModelScore* EvaluationReport::route(std::string_view name) const {
  for (const auto& m : priority_routes) {
    if (m.model == name) return &m;
  }
  return nullptr;
}

const TargetReport* EvaluationReport::characteristic(std::string_view name) const {
  for (const auto& t : characteristics) {
    if (t.target == name) return &t;
  }
  return nullptr;
}

ExternalPredictions parse_external_predictions(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) return {};
  const std::vector<std::string> expected = {"model", "situation_id", "target",
                                             "prediction"};
  if (rows.front().fields != expected) {
    throw Error(ErrorCode::kHeaderMismatch, "header",
                "expected model,situation_id,target,prediction");
  }
  ExternalPredictions out;
  std::vector<RowIssue> issues;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    std::vector<Violation> v;
    if (f.size() != 4) {
      v.push_back({ErrorCode::kFormatError, "row", "expected 4 fields"});
    } else {
      if (f[2] != "priority" && !parse_characteristic(f[2])) {
        v.push_back({ErrorCode::kUnknownEnumValue, "target",
                     "unknown target '" + f[2] + "'"});
      }
      double value = 0.0;
      try {
        std::size_t used = 0;
        value = std::stod(f[3], &used);
        if (used != f[3].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        v.push_back({ErrorCode::kInvalidValue, "prediction",
                     "'" + f[3] + "' is not a number"});
      }
      if (v.empty()) out[f[0]][{f[1], f[2]}] = value;
    }
    if (!v.empty()) issues.push_back({i, std::move(v)});
  }
  if (!issues.empty()) throw RowError(std::move(issues));
  return out;
}

EvaluationReport evaluate(const PipelineModel& model,
                          const std::vector<SituationRecord>& test,
                          const ExternalPredictions* external) {
  if (test.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "test", "no test records");
  }
  EvaluationReport report;
  report.dataset_fingerprint = model.metadata.dataset_fingerprint;
  report.seed = model.metadata.seed;
  report.test_rows = test.size();
  report.train_rows = model.metadata.training_rows;
  report.scale = model.scale;

  const FeatureMatrix X = encode_features(test);
  const FeatureMatrix P_true = encode_profiles(test);
  const auto y_priority = priority_labels(test);

  for (std::size_t c = 0; c < kNumCharacteristics; ++c) {
    const auto& tm = model.level2.at(c);
    const auto y = characteristic_labels(test, c);
    TargetReport t;
    t.target = std::string(kCharacteristicNames[c]);
    t.models.push_back(score("random_forest", clamped(predict_batch(tm.forest, X)), y));
    if (tm.decision_tree) {
      t.models.push_back(score("decision_tree",
                               clamped(predict_batch(*tm.decision_tree, X)), y));
    }
    if (external) {
      for (const auto& [name, preds] : *external) {
        if (!has_target(preds, t.target)) continue;
        t.models.push_back(
            score(name, external_values(preds, test, name, t.target), y));
      }
    }
    t.models.push_back(
        score("predict_mean", clamped(predict_batch(tm.baseline, X)), y));
    const ModelScore* best = nullptr;
    for (const auto& m : t.models) {
      if (m.model == "predict_mean") continue;
      if (!best || m.mae < best->mae) best = &m;
    }
    t.best_model = best->model;
    t.best_vs_mean = compare(*best, t.models.back());
    report.characteristics.push_back(std::move(t));
  }

  const FeatureMatrix P_pred = predicted_profiles(model, X);
  report.priority_routes.push_back(score(
      std::string(kRouteFeatures), clamped(predict_batch(model.direct_model(), X)),
      y_priority));
  report.priority_routes.push_back(
      score(std::string(kRouteTrueProfile),
            clamped(predict_batch(model.priority_model(), P_true)), y_priority));
  report.priority_routes.push_back(
      score(std::string(kRoutePredictedProfile),
            clamped(predict_batch(model.priority_model(), P_pred)), y_priority));
  if (external) {
    for (const auto& [name, preds] : *external) {
      if (!has_target(preds, "priority")) continue;
      report.priority_routes.push_back(score(
          name, external_values(preds, test, name, "priority"), y_priority));
    }
  }
  report.priority_routes.push_back(
      score(std::string(kRouteMean),
            clamped(predict_batch(model.priority.baseline, P_true)), y_priority));
  const auto& routes = report.priority_routes;
  for (std::size_t a = 0; a < routes.size(); ++a) {
    for (std::size_t b = a + 1; b < routes.size(); ++b) {
      report.priority_tests.push_back(compare(routes[a], routes[b]));
    }
  }
  return report;
}

json report_to_json(const EvaluationReport& report) {
  json chars = json::array();
  for (const auto& t : report.characteristics) {
    json models = json::array();
    for (const auto& m : t.models) models.push_back(score_json(m));
    chars.push_back({{"target", t.target},
                     {"models", models},
                     {"best_model", t.best_model},
                     {"best_vs_mean", test_json(t.best_vs_mean)}});
  }
  json routes = json::array();
  for (const auto& r : report.priority_routes) routes.push_back(score_json(r));
  json tests = json::array();
  for (const auto& t : report.priority_tests) tests.push_back(test_json(t));
  return {{"format", "ssa-evaluation"},
          {"format_version", "1.0"},
          {"dataset_fingerprint", report.dataset_fingerprint},
          {"seed", report.seed},
          {"train_rows", report.train_rows},
          {"test_rows", report.test_rows},
          {"scale", scale_max(report.scale)},
          {"significance_procedure",
           "two-sided Wilcoxon rank-sum on per-example absolute errors"},
          {"characteristics", chars},
          {"priority_routes", routes},
          {"priority_tests", tests}};
}

std::string render_report(const EvaluationReport& report) {
  std::ostringstream out;
  out << "Mean absolute error per characteristic (" << report.test_rows
      << " test rows, " << scale_max(report.scale) << "-point scale)\n";
  std::vector<std::string> columns;
  if (!report.characteristics.empty()) {
    for (const auto& m : report.characteristics.front().models) {
      columns.push_back(m.model);
    }
  }
  std::size_t width = 16;
  for (const auto& c : columns) width = std::max(width, c.size() + 2);
  out << pad("characteristic", 16);
  for (const auto& c : columns) out << pad(c, width);
  out << "best vs mean p\n";
  for (const auto& t : report.characteristics) {
    out << pad(t.target + (t.best_vs_mean.significant ? "*" : ""), 16);
    for (const auto& c : columns) {
      const ModelScore* m = t.find(c);
      out << pad(m ? fixed(m->mae) : "-", width);
    }
    out << fixed(t.best_vs_mean.p, 4) << " (" << t.best_model << ")\n";
  }
  out << "* best model differs from predict_mean (p < 0.05)\n\n";

  out << "Mean absolute error in priority prediction\n";
  for (const auto& r : report.priority_routes) {
    out << pad(r.model, 30) << fixed(r.mae) << "\n";
  }
  out << "\nTwo-sided Wilcoxon rank-sum tests on per-example absolute errors\n";
  for (const auto& t : report.priority_tests) {
    out << pad(t.model_a + " vs " + t.model_b, 52) << "U=" << fixed(t.u, 1)
        << "  p=" << fixed(t.p, 4) << (t.significant ? "  *" : "") << "\n";
  }
  out << "\ndataset " << report.dataset_fingerprint << "  seed " << report.seed
      << "\n";
  return out.str();
}

json training_report(const PipelineModel& model) {
  json targets = json::array();
  for (const auto& t : model.level2) targets.push_back(target_models_json(t));
  targets.push_back(target_models_json(model.priority));
  targets.push_back(target_models_json(model.direct));
  return {{"format", "ssa-training-report"},
          {"format_version", "1.0"},
          {"seed", model.metadata.seed},
          {"dataset_fingerprint", model.metadata.dataset_fingerprint},
          {"timestamp", model.metadata.timestamp},
          {"training_rows", model.metadata.training_rows},
          {"scale", scale_max(model.scale)},
          {"targets", targets}};
}

json salience_to_json(const SalienceReport& report, const Schema& schema) {
  json groups = json::array();
  for (auto g : report.ranking) {
    groups.push_back({{"feature", report.group_names[g]},
                      {"mean_abs_phi", report.mean_abs_phi[g]}});
  }
  json columns = json::object();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    columns[schema.column(c).name] =
        std::string(to_string(report.column_direction[c]));
  }
  return {{"ranking", groups}, {"directions", columns}};
}

SalienceReport salience_from_json(const json& j, const Schema& schema) {
  SalienceReport report;
  report.group_names = schema.groups();
  report.mean_abs_phi.assign(schema.group_count(), 0.0);
  for (const auto& entry : j.at("ranking")) {
    const auto g = schema.find_group(entry.at("feature").get<std::string>());
    if (!g) {
      throw Error(ErrorCode::kFormatError, "salience",
                  "unknown feature in salience ranking");
    }
    report.ranking.push_back(*g);
    report.mean_abs_phi[*g] = entry.at("mean_abs_phi").get<double>();
  }
  if (report.ranking.size() != schema.group_count()) {
    throw Error(ErrorCode::kFormatError, "salience",
                "salience ranking does not cover the schema");
  }
  report.column_direction.assign(schema.size(), Direction::kIndeterminate);
  const auto& dirs = j.at("directions");
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto text = dirs.at(schema.column(c).name).get<std::string>();
    if (text == "increases_priority") {
      report.column_direction[c] = Direction::kIncreasesPriority;
    } else if (text == "decreases_priority") {
      report.column_direction[c] = Direction::kDecreasesPriority;
    } else if (text != "indeterminate") {
      throw Error(ErrorCode::kFormatError, "salience",
                  "unknown direction '" + text + "'");
    }
  }
  return report;
}

void save_pipeline(const PipelineModel& model, const std::string& directory) {
  const fs::path root(directory);
  std::error_code ec;
  for (auto sub : {"models", "comparison", "baselines"}) {
    fs::create_directories(root / sub, ec);
    if (ec) {
      throw Error(ErrorCode::kIoError, directory,
                  "cannot create " + (root / sub).string() + ": " + ec.message());
    }
  }
  std::vector<const TargetModels*> targets;
  for (const auto& t : model.level2) targets.push_back(&t);
  targets.push_back(&model.priority);
  targets.push_back(&model.direct);
  const auto stems = forest_file_stems();

  json files = json::array();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = *targets[i];
    const std::string name = stems[i] + ".json";
    save_model(t.forest, (root / "models" / name).string());
    save_model(t.baseline, (root / "baselines" / name).string());
    json entry = {{"target", stems[i]},
                  {"forest", "models/" + name},
                  {"baseline", "baselines/" + name},
                  {"cv_mae", t.cv_mae},
                  {"grid_cells", t.grid_cells}};
    if (t.decision_tree) {
      save_model(*t.decision_tree, (root / "comparison" / name).string());
      entry["decision_tree"] = "comparison/" + name;
    }
    files.push_back(entry);
  }
  if (model.salience) {
    const json s = {
        {"format", "ssa-salience"},
        {"format_version", "1.0"},
        {"level1", salience_to_json(model.salience->level1,
                                    *model.direct_model().schema)},
        {"level2", salience_to_json(model.salience->level2,
                                    *model.priority_model().schema)}};
    write_file_atomic((root / "salience.json").string(), s.dump(2) + "\n");
  }
  write_file_atomic((root / "training_report.json").string(),
                    training_report(model).dump(2) + "\n");
  const json manifest = {
      {"format", kPipelineFormatName},
      {"format_version", kPipelineFormatVersion},
      {"scale", scale_max(model.scale)},
      {"seed", model.metadata.seed},
      {"dataset_fingerprint", model.metadata.dataset_fingerprint},
      {"timestamp", model.metadata.timestamp},
      {"training_rows", model.metadata.training_rows},
      {"targets", files},
      {"salience", model.salience ? json("salience.json") : json(nullptr)}};
  write_file_atomic((root / "pipeline.json").string(), manifest.dump(2) + "\n");
}

PipelineModel load_pipeline(const std::string& directory) {
  const fs::path root(directory);
  json manifest;
  try {
    manifest = json::parse(read_file((root / "pipeline.json").string()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, "pipeline.json", e.what());
  }
  try {
    if (manifest.at("format").get<std::string>() != kPipelineFormatName) {
      throw Error(ErrorCode::kFormatError, "format", "not a pipeline manifest");
    }
    check_format_version(manifest.at("format_version").get<std::string>(), 1);
    PipelineModel model;
    model.scale = parse_scale(manifest.at("scale").get<int>());
    model.metadata.seed = manifest.at("seed").get<std::uint64_t>();
    model.metadata.dataset_fingerprint =
        manifest.at("dataset_fingerprint").get<std::string>();
    model.metadata.timestamp = manifest.at("timestamp").get<std::string>();
    model.metadata.training_rows =
        manifest.at("training_rows").get<std::size_t>();

    const auto stems = forest_file_stems();
    const auto& entries = manifest.at("targets");
    if (entries.size() != stems.size()) {
      throw Error(ErrorCode::kFormatError, "targets",
                  "manifest must list " + std::to_string(stems.size()) +
                      " targets");
    }
    std::vector<TargetModels> targets;
    for (std::size_t i = 0; i < stems.size(); ++i) {
      const auto& e = entries[i];
      if (e.at("target").get<std::string>() != stems[i]) {
        throw Error(ErrorCode::kFormatError, "targets",
                    "unexpected target order in manifest");
      }
      TargetModels t;
      t.forest = load_model((root / e.at("forest").get<std::string>()).string());
      t.baseline =
          load_model((root / e.at("baseline").get<std::string>()).string());
      if (e.contains("decision_tree")) {
        t.decision_tree = load_model(
            (root / e.at("decision_tree").get<std::string>()).string());
      }
      t.cv_mae = e.at("cv_mae").get<double>();
      t.grid_cells = e.at("grid_cells").get<std::size_t>();
      targets.push_back(std::move(t));
    }
    model.direct = std::move(targets.back());
    targets.pop_back();
    model.priority = std::move(targets.back());
    targets.pop_back();
    model.level2 = std::move(targets);

    const FeatureEncoder encoder;
    for (const auto& t : model.level2) check_schema(t.forest, *encoder.schema());
    check_schema(model.direct.forest, *encoder.schema());
    check_schema(model.priority.forest, *profile_schema());

    if (!manifest.at("salience").is_null()) {
      const json s = json::parse(
          read_file((root / manifest.at("salience").get<std::string>()).string()));
      check_format_version(s.at("format_version").get<std::string>(), 1);
      model.salience = SalienceSummary{
          salience_from_json(s.at("level1"), *encoder.schema()),
          salience_from_json(s.at("level2"), *profile_schema())};
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, "pipeline.json", e.what());
  }
}

}  // namespace ssa
