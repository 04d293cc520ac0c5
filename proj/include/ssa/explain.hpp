#pragma once

// Curated-pair analysis, suggestion tie-breaking and templated comparative
// explanations. Phrases live in a lexicon file; scenario pairs in a fixture
// file. Both are JSON.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ssa/domain.hpp"
#include "ssa/ingest.hpp"
#include "ssa/pipeline.hpp"
#include "ssa/shap.hpp"

namespace ssa {

/// Pronouns of the person the agent advises.
struct Persona {
  std::string name = "Alice";
  std::string subject = "she";
  std::string object = "her";
  std::string possessive = "her";
  bool plural_verbs = false;  // "they are" rather than "she is"
};

struct ScenarioMeeting {
  std::string label;        // "Meeting 1"
  std::string description;
  SocialSituationFeatures features;
  SituationProfile profile{SituationProfile::Values{1, 1, 1, 1, 1, 1, 1, 1}};
};

/// Fixture expectations for a curated pair.
struct PairExpectation {
  std::size_t chosen = 0;  // 0 = meeting a, 1 = meeting b
  std::string level1_feature;
  std::string level2_feature;
  std::optional<std::string> level1_text;
  std::optional<std::string> level2_text;
};

struct ScenarioPair {
  std::string id;
  std::string description;
  Persona user;
  std::array<ScenarioMeeting, 2> meetings;
  std::optional<PairExpectation> expected;

  ScenarioPair swapped() const;
};

/// Loads the pair fixture file. Profiles use the file's declared scale.
std::vector<ScenarioPair> parse_pairs(const nlohmann::json& j);
std::vector<ScenarioPair> load_pairs(const std::string& path);

/// Returns the single Level-1 field whose value differs. Throws NoDifference,
/// AmbiguousPair, or UnequalInformation when only one meeting knows the age
/// difference.
std::string find_differing_level1(const ScenarioPair& pair);

/// Returns the single characteristic whose relevance class differs.
Characteristic find_differing_level2(const ScenarioPair& pair);

enum class TieBreakerLevel { kLevel1, kLevel2, kModelScore };
std::string_view to_string(TieBreakerLevel level);

struct Suggestion {
  std::size_t chosen = 0;  // index into the pair's meetings
  TieBreakerLevel tie_breaker_level = TieBreakerLevel::kLevel1;
  std::optional<std::string> level1_feature;
  Direction level1_direction = Direction::kIndeterminate;
  std::optional<Characteristic> level2_feature;
  Direction level2_direction = Direction::kIndeterminate;
  std::optional<std::array<double, 2>> predicted_priority;
};

/// Curated mode: the differing feature's direction at each level picks the
/// winner; the levels must agree (ConflictingLevels otherwise), and an
/// undecidable direction raises IndeterminateDirection.
Suggestion decide_suggestion(const ScenarioPair& pair,
                             const SalienceSummary& salience);

/// Free-form mode: the higher predicted priority wins, ties go to meeting
/// `earlier` (the one created first). The explanation features are the most
/// salient pool members that differ and whose direction favors the winner.
Suggestion decide_free_form(const ScenarioPair& pair,
                            const std::array<double, 2>& predicted_priority,
                            std::size_t earlier,
                            const SalienceSummary& salience);

/// Level-1 and Level-2 pools eligible for free-form explanations.
const std::vector<std::string>& level1_pool();
const std::vector<Characteristic>& level2_pool();

enum class ExplanationStyle { kLevel1, kLevel2, kControl };
std::string_view to_string(ExplanationStyle style);
std::optional<ExplanationStyle> parse_explanation_style(std::string_view text);

struct Explanation {
  ExplanationStyle style = ExplanationStyle::kLevel1;
  std::string text;
  std::string cited_feature;
  std::string template_id;
};

class Lexicon {
 public:
  static Lexicon parse(const nlohmann::json& j);
  static Lexicon load(const std::string& path);

  /// Features (Level-1 fields, characteristics, control features) whose
  /// mention phrases occur in text.
  std::vector<std::string> mentioned_features(std::string_view text) const;

  const nlohmann::json& raw() const noexcept { return raw_; }

 private:
  nlohmann::json raw_;
};

/// Fills the style's template. Throws UnknownTemplate when the lexicon has
/// no phrase for the cited feature/value.
Explanation render_explanation(const Suggestion& suggestion,
                               ExplanationStyle style,
                               const ScenarioPair& pair,
                               const Lexicon& lexicon);

/// Replaces {key} placeholders; throws UnknownTemplate for leftovers.
std::string fill_template(std::string_view text,
                          const std::vector<std::pair<std::string, std::string>>&
                              values);

/// Directory holding lexicon.json and pairs.json. SSA_DATA_DIR overrides the
/// build-time default.
std::string default_data_dir();

}  // namespace ssa
