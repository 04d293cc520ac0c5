#pragma once

// The three-level chain: Level-1 features -> eight characteristic forests ->
// priority forest over the profile, plus a features-direct priority forest
// and the comparison models used by the evaluation tables.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ssa/domain.hpp"
#include "ssa/forest.hpp"
#include "ssa/ingest.hpp"
#include "ssa/shap.hpp"
#include "ssa/stats.hpp"
#include "ssa/tuning.hpp"

namespace ssa {

inline constexpr std::uint64_t kDefaultSeed = 20221;
inline constexpr std::string_view kDefaultTimestamp = "1970-01-01T00:00:00Z";
inline constexpr std::string_view kPipelineFormatName = "ssa-pipeline";
inline constexpr std::string_view kPipelineFormatVersion = "1.0";
inline constexpr double kSignificanceLevel = 0.05;

struct PipelineConfig {
  std::vector<HyperParams> forest_grid = default_forest_grid(0);
  std::vector<HyperParams> tree_grid = default_tree_grid(0);
  std::size_t folds = 5;
  std::uint64_t seed = kDefaultSeed;
  CharacteristicScale scale = CharacteristicScale::kSixPoint;
  bool comparison_trees = true;
  /// Rows of the training set used for the stored salience reports.
  std::size_t salience_rows = 200;
  std::string timestamp = std::string(kDefaultTimestamp);
};

/// Everything trained for one target.
struct TargetModels {
  TreeEnsembleModel forest;
  std::optional<TreeEnsembleModel> decision_tree;
  TreeEnsembleModel baseline;
  double cv_mae = 0.0;  // mean validation MAE of the chosen forest cell
  std::size_t grid_cells = 0;
};

/// Global attribution summaries stored with a trained pipeline: Level 1 from
/// the features-direct model, Level 2 from the profile-to-priority model.
struct SalienceSummary {
  SalienceReport level1;
  SalienceReport level2;
};

struct PipelineModel {
  CharacteristicScale scale = CharacteristicScale::kSixPoint;
  std::vector<TargetModels> level2;  // canonical characteristic order
  TargetModels priority;             // true profile -> priority
  TargetModels direct;               // features -> priority
  TrainingMetadata metadata;
  std::optional<SalienceSummary> salience;

  const TreeEnsembleModel& characteristic_model(Characteristic c) const {
    return level2.at(static_cast<std::size_t>(c)).forest;
  }
  const TreeEnsembleModel& priority_model() const { return priority.forest; }
  const TreeEnsembleModel& direct_model() const { return direct.forest; }
};

/// Trains the ten forests, their decision-tree comparisons and mean
/// baselines. Job j uses derive_seed(config.seed, j) for its grid and folds.
PipelineModel train_pipeline(const std::vector<SituationRecord>& train,
                             const PipelineConfig& config);

/// Attribution summaries over a deterministic subsample of the records.
SalienceSummary compute_salience(const PipelineModel& model,
                                 const std::vector<SituationRecord>& records,
                                 std::size_t max_rows, std::uint64_t seed);

SituationProfile predict_profile(const PipelineModel& model,
                                 const SocialSituationFeatures& features);
/// Profile route: priority_model(profile).
Priority predict_priority(const PipelineModel& model,
                          const SituationProfile& profile);
/// Features route: exactly priority_model(predict_profile(features)).
Priority predict_priority(const PipelineModel& model,
                          const SocialSituationFeatures& features);
/// Level-1 features straight to priority.
Priority predict_priority_direct(const PipelineModel& model,
                                 const SocialSituationFeatures& features);

struct ModelScore {
  std::string model;  // random_forest, decision_tree, predict_mean, ...
  double mae = 0.0;
  std::vector<double> abs_errors;
};

struct SignificanceResult {
  std::string model_a;
  std::string model_b;
  double u = 0.0;
  double p = 1.0;
  RankSumMethod method = RankSumMethod::kNormal;
  bool significant = false;  // p < kSignificanceLevel
};

struct TargetReport {
  std::string target;
  std::vector<ModelScore> models;
  std::string best_model;              // lowest MAE other than predict_mean
  SignificanceResult best_vs_mean;     // two-sided, per-example abs errors

  const ModelScore* find(std::string_view model) const;
};

/// Priority routes of the second table.
inline constexpr std::string_view kRouteFeatures = "social_situation_features";
inline constexpr std::string_view kRouteTrueProfile = "true_profile";
inline constexpr std::string_view kRoutePredictedProfile = "predicted_profile";
inline constexpr std::string_view kRouteMean = "predict_mean";

struct EvaluationReport {
  std::vector<TargetReport> characteristics;
  std::vector<ModelScore> priority_routes;
  std::vector<SignificanceResult> priority_tests;  // every pair of routes
  std::string dataset_fingerprint;
  std::uint64_t seed = 0;
  std::size_t test_rows = 0;
  std::size_t train_rows = 0;
  CharacteristicScale scale = CharacteristicScale::kSixPoint;

  const ModelScore* route(std::string_view name) const;
  const TargetReport* characteristic(std::string_view name) const;
};

/// Predictions from models trained elsewhere: model -> (situation_id,
/// target) -> value. target is a characteristic name or "priority".
using ExternalPredictions =
    std::map<std::string, std::map<std::pair<std::string, std::string>, double>>;

/// CSV with header model,situation_id,target,prediction.
ExternalPredictions parse_external_predictions(std::string_view text);

/// Scores every model on the test records. Throws MissingLabels when a test
/// record lacks its profile or priority.
EvaluationReport evaluate(const PipelineModel& model,
                          const std::vector<SituationRecord>& test,
                          const ExternalPredictions* external = nullptr);

nlohmann::json report_to_json(const EvaluationReport& report);
/// Plain-text layout of the two result tables.
std::string render_report(const EvaluationReport& report);

nlohmann::json training_report(const PipelineModel& model);

nlohmann::json salience_to_json(const SalienceReport& report,
                                const Schema& schema);
SalienceReport salience_from_json(const nlohmann::json& j,
                                  const Schema& schema);

/// Directory layout:
///   pipeline.json            manifest
///   models/<target>.json     ten forests (8 characteristics, priority,
///                            priority_direct)
///   comparison/<target>.json decision trees
///   baselines/<target>.json  predict-mean models
///   salience.json            stored attribution summaries
///   training_report.json
void save_pipeline(const PipelineModel& model, const std::string& directory);
PipelineModel load_pipeline(const std::string& directory);

/// Model-file stem of every forest, in save order.
std::vector<std::string> forest_file_stems();

}  // namespace ssa
