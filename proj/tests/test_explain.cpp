#include <gtest/gtest.h>

#include <set>

#include "ssa/error.hpp"
#include "ssa/explain.hpp"
#include "ssa/model_io.hpp"
#include "support/reference_salience.hpp"

using namespace ssa;
using testing_support::reference_salience;

namespace {

const std::vector<ScenarioPair>& fixture_pairs() {
  static const auto pairs = load_pairs(default_data_dir() + "/pairs.json");
  return pairs;
}

const Lexicon& lexicon() {
  static const auto lex = Lexicon::load(default_data_dir() + "/lexicon.json");
  return lex;
}

const ScenarioPair& reference_pair() { return fixture_pairs().front(); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIoError;
}

SocialSituationFeatures with_field(SocialSituationFeatures f, const std::string& field,
                                   const std::string& value) {
  auto raw = to_raw_fields(f);
  raw[field] = value;
  return validate_features(raw);
}

std::vector<std::string> all_feature_names() {
  std::vector<std::string> names(kFeatureFields.begin(), kFeatureFields.end());
  for (auto c : kCharacteristicNames) names.emplace_back(c);
  return names;
}

}  // namespace

TEST(Fixture, HoldsEightPairsOnSevenPoints) {
  ASSERT_EQ(fixture_pairs().size(), 8u);
  std::set<std::string> ids;
  for (const auto& p : fixture_pairs()) {
    ids.insert(p.id);
    EXPECT_TRUE(p.expected.has_value()) << p.id;
    for (const auto& m : p.meetings) {
      EXPECT_EQ(m.profile.scale(), CharacteristicScale::kSevenPoint);
    }
  }
  EXPECT_EQ(ids.size(), 8u);
}

TEST(FindDiffering, EveryFixturePairHasOneFeaturePerLevel) {
  for (const auto& p : fixture_pairs()) {
    EXPECT_EQ(find_differing_level1(p), p.expected->level1_feature) << p.id;
    EXPECT_EQ(to_name(find_differing_level2(p)), p.expected->level2_feature) << p.id;
  }
}

TEST(FindDiffering, ReferencePairDiffersInHelpDynamicAndDuty) {
  const auto& p = reference_pair();
  EXPECT_EQ(find_differing_level1(p), "help_dynamic");
  EXPECT_EQ(p.meetings[0].features.help_dynamic, HelpDynamic::kNeither);
  EXPECT_EQ(p.meetings[1].features.help_dynamic, HelpDynamic::kGivingHelp);
  EXPECT_EQ(find_differing_level2(p), Characteristic::kDuty);
  EXPECT_DOUBLE_EQ(p.meetings[0].profile[Characteristic::kDuty], 3.0);
  EXPECT_DOUBLE_EQ(p.meetings[1].profile[Characteristic::kDuty], 6.0);
}

TEST(FindDiffering, IdenticalMeetingsHaveNoDifference) {
  auto p = reference_pair();
  p.meetings[1] = p.meetings[0];
  EXPECT_EQ(code_of([&] { find_differing_level1(p); }), ErrorCode::kNoDifference);
  EXPECT_EQ(code_of([&] { find_differing_level2(p); }), ErrorCode::kNoDifference);
}

TEST(FindDiffering, TwoDifferencesAreAmbiguous) {
  auto p = reference_pair();
  auto& f = p.meetings[1].features;
  f = with_field(with_field(p.meetings[0].features, "role", "friend"), "setting", "casual");
  EXPECT_EQ(code_of([&] { find_differing_level1(p); }), ErrorCode::kAmbiguousPair);

  auto values = p.meetings[1].profile.values();
  values[static_cast<std::size_t>(Characteristic::kNegativity)] = 6;
  p.meetings[1].profile = SituationProfile(values, CharacteristicScale::kSevenPoint);
  EXPECT_EQ(code_of([&] { find_differing_level2(p); }), ErrorCode::kAmbiguousPair);
}

TEST(FindDiffering, ScoreChangesWithinOneClassDoNotCount) {
  auto p = reference_pair();
  auto values = p.meetings[1].profile.values();
  values[static_cast<std::size_t>(Characteristic::kSociality)] = 1;  // 4 -> 1, both low
  p.meetings[1].profile = SituationProfile(values, CharacteristicScale::kSevenPoint);
  EXPECT_EQ(find_differing_level2(p), Characteristic::kDuty);
}

TEST(FindDiffering, UnknownAgeOnOneSideIsUnequalInformation) {
  auto p = reference_pair();
  p.meetings[0].features.age_difference.reset();
  EXPECT_EQ(code_of([&] { find_differing_level1(p); }), ErrorCode::kUnequalInformation);
  p.meetings[1].features.age_difference.reset();
  EXPECT_EQ(find_differing_level1(p), "help_dynamic");
}

TEST(DecideSuggestion, FixturePairsMatchExpectations) {
  const auto salience = reference_salience();
  for (const auto& p : fixture_pairs()) {
    const auto s = decide_suggestion(p, salience);
    EXPECT_EQ(s.chosen, p.expected->chosen) << p.id;
    EXPECT_EQ(s.tie_breaker_level, TieBreakerLevel::kLevel1);
    EXPECT_EQ(*s.level1_feature, p.expected->level1_feature) << p.id;
    EXPECT_EQ(to_name(*s.level2_feature), p.expected->level2_feature) << p.id;
    EXPECT_NE(s.level1_direction, Direction::kIndeterminate);
    EXPECT_NE(s.level2_direction, Direction::kIndeterminate);
  }
}

TEST(DecideSuggestion, ReferencePairPicksMeetingTwo) {
  const auto s = decide_suggestion(reference_pair(), reference_salience());
  EXPECT_EQ(reference_pair().meetings[s.chosen].label, "Meeting 2");
  EXPECT_EQ(s.level1_direction, Direction::kIncreasesPriority);
  EXPECT_EQ(s.level2_direction, Direction::kIncreasesPriority);
}

TEST(DecideSuggestion, InvariantUnderSwap) {
  const auto salience = reference_salience();
  for (const auto& p : fixture_pairs()) {
    const auto s = decide_suggestion(p, salience);
    const auto q = p.swapped();
    const auto t = decide_suggestion(q, salience);
    EXPECT_EQ(q.meetings[t.chosen].label, p.meetings[s.chosen].label) << p.id;
    EXPECT_EQ(t.level1_feature, s.level1_feature);
    EXPECT_EQ(t.level2_feature, s.level2_feature);
  }
}

TEST(DecideSuggestion, DisagreeingLevelsConflict) {
  auto salience = reference_salience();
  const auto duty = *profile_schema()->find_column("duty");
  salience.level2.column_direction[duty] = Direction::kDecreasesPriority;
  EXPECT_EQ(code_of([&] { decide_suggestion(reference_pair(), salience); }),
            ErrorCode::kConflictingLevels);
}

TEST(DecideSuggestion, IndeterminateDirectionIsReported) {
  auto salience = reference_salience();
  const auto& schema = *FeatureEncoder().schema();
  for (auto v : {"giving_help", "receiving_help", "neither"}) {
    salience.level1.column_direction[*schema.find_column(std::string("help_dynamic=") + v)] =
        Direction::kIndeterminate;
  }
  EXPECT_EQ(code_of([&] { decide_suggestion(reference_pair(), salience); }),
            ErrorCode::kIndeterminateDirection);

  auto level2 = reference_salience();
  level2.level2.column_direction[*profile_schema()->find_column("duty")] =
      Direction::kIndeterminate;
  EXPECT_EQ(code_of([&] { decide_suggestion(reference_pair(), level2); }),
            ErrorCode::kIndeterminateDirection);
}

TEST(RenderExplanation, ReferencePairTextsMatchFixture) {
  const auto& p = reference_pair();
  const auto s = decide_suggestion(p, reference_salience());
  const auto l1 = render_explanation(s, ExplanationStyle::kLevel1, p, lexicon());
  const auto l2 = render_explanation(s, ExplanationStyle::kLevel2, p, lexicon());
  ASSERT_TRUE(p.expected->level1_text && p.expected->level2_text);
  EXPECT_EQ(l1.text, *p.expected->level1_text);
  EXPECT_EQ(l2.text, *p.expected->level2_text);
  EXPECT_EQ(l1.cited_feature, "help_dynamic");
  EXPECT_EQ(l2.cited_feature, "duty");
  EXPECT_EQ(l1.template_id, "level1/help_dynamic/giving_help");
  EXPECT_EQ(l2.template_id, "level2/duty/higher");
}

TEST(RenderExplanation, FixtureTextsMatchWhereGiven) {
  const auto salience = reference_salience();
  for (const auto& p : fixture_pairs()) {
    const auto s = decide_suggestion(p, salience);
    const auto l1 = render_explanation(s, ExplanationStyle::kLevel1, p, lexicon());
    const auto l2 = render_explanation(s, ExplanationStyle::kLevel2, p, lexicon());
    if (p.expected->level1_text) EXPECT_EQ(l1.text, *p.expected->level1_text) << p.id;
    if (p.expected->level2_text) EXPECT_EQ(l2.text, *p.expected->level2_text) << p.id;
  }
}

TEST(RenderExplanation, TextsMentionOnlyTheCitedFeature) {
  const auto salience = reference_salience();
  for (const auto& base : fixture_pairs()) {
    for (const auto& p : {base, base.swapped()}) {
      const auto s = decide_suggestion(p, salience);
      for (auto style : {ExplanationStyle::kLevel1, ExplanationStyle::kLevel2}) {
        const auto e = render_explanation(s, style, p, lexicon());
        EXPECT_EQ(lexicon().mentioned_features(e.text),
                  std::vector<std::string>{e.cited_feature})
            << p.id << ": " << e.text;
      }
    }
  }
}

TEST(RenderExplanation, ControlCitesOneIrrelevantFeature) {
  std::set<std::string> pool;
  for (const auto& entry : lexicon().raw().at("control")) {
    pool.insert(entry.at("feature").get<std::string>());
  }
  EXPECT_EQ(pool, (std::set<std::string>{"weather", "season",
                                         "geographical_location", "time"}));
  const auto names = all_feature_names();
  const auto salience = reference_salience();
  for (const auto& p : fixture_pairs()) {
    const auto s = decide_suggestion(p, salience);
    const auto e = render_explanation(s, ExplanationStyle::kControl, p, lexicon());
    EXPECT_TRUE(pool.count(e.cited_feature)) << e.cited_feature;
    const auto mentioned = lexicon().mentioned_features(e.text);
    EXPECT_EQ(mentioned, std::vector<std::string>{e.cited_feature}) << e.text;
    for (const auto& n : names) {
      EXPECT_EQ(std::count(mentioned.begin(), mentioned.end(), n), 0) << e.text;
    }
    EXPECT_EQ(e.text.rfind(p.user.name + " should attend " + p.meetings[s.chosen].label, 0), 0u);
  }
}

TEST(RenderExplanation, ControlDependsOnlyOnPairId) {
  const auto salience = reference_salience();
  auto p = reference_pair();
  const auto s = decide_suggestion(p, salience);
  const auto a = render_explanation(s, ExplanationStyle::kControl, p, lexicon());
  p.description = "something else entirely";
  const auto b = render_explanation(s, ExplanationStyle::kControl, p, lexicon());
  EXPECT_EQ(a.cited_feature, b.cited_feature);
  std::set<std::string> cited;
  for (int i = 0; i < 40; ++i) {
    p.id = "probe-" + std::to_string(i);
    cited.insert(render_explanation(s, ExplanationStyle::kControl, p, lexicon()).cited_feature);
  }
  EXPECT_GT(cited.size(), 1u);
}

TEST(RenderExplanation, Deterministic) {
  const auto salience = reference_salience();
  for (const auto& p : fixture_pairs()) {
    const auto s = decide_suggestion(p, salience);
    for (auto style : {ExplanationStyle::kLevel1, ExplanationStyle::kLevel2,
                       ExplanationStyle::kControl}) {
      EXPECT_EQ(render_explanation(s, style, p, lexicon()).text,
                render_explanation(s, style, p, lexicon()).text);
    }
  }
}

TEST(RenderExplanation, PluralPersona) {
  auto p = reference_pair();
  p.user = Persona{"You", "you", "you", "your", true};
  const auto s = decide_suggestion(p, reference_salience());
  const auto text = render_explanation(s, ExplanationStyle::kLevel1, p, lexicon()).text;
  EXPECT_EQ(text.rfind("You should attend Meeting 2 because you are expected", 0), 0u) << text;
  EXPECT_NE(text.find("in Meeting 1 you aren't"), std::string::npos) << text;
}

TEST(RenderExplanation, UnknownPhraseIsUnknownTemplate) {
  auto s = decide_suggestion(reference_pair(), reference_salience());
  s.level1_feature = "years_known";
  EXPECT_EQ(code_of([&] {
              render_explanation(s, ExplanationStyle::kLevel1, reference_pair(), lexicon());
            }),
            ErrorCode::kUnknownTemplate);
}

TEST(FillTemplate, ReplacesEveryPlaceholder) {
  EXPECT_EQ(fill_template("{a} and {b}{a}", {{"a", "x"}, {"b", "y"}}), "x and yx");
  EXPECT_EQ(code_of([] { fill_template("{a} {c}", {{"a", "x"}}); }),
            ErrorCode::kUnknownTemplate);
  EXPECT_EQ(code_of([] { fill_template("{a", {{"a", "x"}}); }),
            ErrorCode::kUnknownTemplate);
}

TEST(ExplanationStyle, NamesRoundTrip) {
  for (auto style : {ExplanationStyle::kLevel1, ExplanationStyle::kLevel2,
                     ExplanationStyle::kControl}) {
    EXPECT_EQ(parse_explanation_style(to_string(style)), style);
  }
  EXPECT_FALSE(parse_explanation_style("level3").has_value());
}

TEST(FreeForm, HigherPredictedPriorityWins) {
  const auto salience = reference_salience();
  const auto& p = reference_pair();
  EXPECT_EQ(decide_free_form(p, {5.1, 3.9}, 1, salience).chosen, 0u);
  EXPECT_EQ(decide_free_form(p, {3.9, 5.1}, 0, salience).chosen, 1u);
  const auto s = decide_free_form(p, {3.9, 5.1}, 0, salience);
  EXPECT_EQ(s.tie_breaker_level, TieBreakerLevel::kModelScore);
  EXPECT_EQ(s.predicted_priority, (std::array<double, 2>{3.9, 5.1}));
}

TEST(FreeForm, TiesGoToTheEarlierMeeting) {
  const auto salience = reference_salience();
  EXPECT_EQ(decide_free_form(reference_pair(), {4.0, 4.0}, 0, salience).chosen, 0u);
  EXPECT_EQ(decide_free_form(reference_pair(), {4.0, 4.0}, 1, salience).chosen, 1u);
}

TEST(FreeForm, ExplanationFeaturesFavorWinnerAndComeFromPools) {
  const auto salience = reference_salience();
  const auto s = decide_free_form(reference_pair(), {3.0, 5.0}, 0, salience);
  EXPECT_EQ(s.level1_feature, "help_dynamic");
  EXPECT_EQ(s.level2_feature, Characteristic::kDuty);

  // Meeting 1 wins on the model score but nothing that differs favors it.
  const auto loser = decide_free_form(reference_pair(), {5.0, 3.0}, 0, salience);
  EXPECT_EQ(loser.chosen, 0u);
  EXPECT_FALSE(loser.level1_feature.has_value());
  EXPECT_FALSE(loser.level2_feature.has_value());
  const auto text =
      render_explanation(loser, ExplanationStyle::kLevel1, reference_pair(), lexicon()).text;
  EXPECT_NE(text.find("predicted priority"), std::string::npos) << text;
  EXPECT_NE(text.find("5"), std::string::npos);

  for (const auto& p : fixture_pairs()) {
    for (std::size_t winner = 0; winner < 2; ++winner) {
      std::array<double, 2> pr{3.0, 3.0};
      pr[winner] = 5.0;
      const auto f = decide_free_form(p, pr, 0, salience);
      if (f.level1_feature) {
        EXPECT_NE(std::find(level1_pool().begin(), level1_pool().end(), *f.level1_feature),
                  level1_pool().end());
        EXPECT_NE(field_text(p.meetings[0].features, *f.level1_feature),
                  field_text(p.meetings[1].features, *f.level1_feature));
      }
      if (f.level2_feature) {
        EXPECT_NE(std::find(level2_pool().begin(), level2_pool().end(), *f.level2_feature),
                  level2_pool().end());
      }
    }
  }
}

TEST(FreeForm, PoolsMatchTheDocumentedFeatures) {
  EXPECT_EQ(level1_pool(), (std::vector<std::string>{"setting", "help_dynamic", "role",
                                                     "relationship_quality",
                                                     "age_difference", "shared_interests"}));
  EXPECT_EQ(level2_pool(),
            (std::vector<Characteristic>{Characteristic::kDuty, Characteristic::kIntellect,
                                         Characteristic::kPositivity,
                                         Characteristic::kNegativity}));
}

TEST(ParsePairs, RejectsMalformedFiles) {
  auto j = nlohmann::json::parse(read_file(default_data_dir() + "/pairs.json"));
  auto bad_scale = j;
  bad_scale["scale"] = 5;
  EXPECT_EQ(code_of([&] { parse_pairs(bad_scale); }), ErrorCode::kUnsupportedScale);
  auto bad_version = j;
  bad_version["format_version"] = "2.0";
  EXPECT_EQ(code_of([&] { parse_pairs(bad_version); }), ErrorCode::kUnsupportedVersion);
  auto three = j;
  three["pairs"][0]["meetings"].push_back(three["pairs"][0]["meetings"][0]);
  EXPECT_EQ(code_of([&] { parse_pairs(three); }), ErrorCode::kFormatError);
  auto out_of_range = j;
  out_of_range["pairs"][0]["meetings"][0]["profile"]["duty"] = 9;
  EXPECT_THROW(parse_pairs(out_of_range), Error);
}

TEST(Lexicon, RejectsEmptyControlPool) {
  auto j = lexicon().raw();
  j["control"] = nlohmann::json::array();
  EXPECT_EQ(code_of([&] { Lexicon::parse(j); }), ErrorCode::kFormatError);
}
