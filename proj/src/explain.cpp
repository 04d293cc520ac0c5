#include "ssa/explain.hpp"

#include <algorithm>
#include <cstdlib>

#include "ssa/encoding.hpp"
#include "ssa/error.hpp"
#include "ssa/model_io.hpp"

#ifndef SSA_DATA_DIR
#define SSA_DATA_DIR "data"
#endif

namespace ssa {

using nlohmann::json;

namespace {

bool is_nominal(std::string_view field) {
  return field == "setting" || field == "event_frequency" ||
         field == "initiator" || field == "help_dynamic" || field == "role" ||
         field == "hierarchy_level";
}

double numeric_field(const SocialSituationFeatures& f, std::string_view field) {
  if (field == "age_difference") return f.age_difference.value_or(0.0);
  if (field == "years_known") return f.years_known;
  return std::stod(field_text(f, field));
}

Direction column_direction(const SalienceReport& report, const Schema& schema,
                           const std::string& column) {
  const auto c = schema.find_column(column);
  if (!c || *c >= report.column_direction.size()) {
    throw Error(ErrorCode::kUnknownFeature, column,
                "no direction recorded for '" + column + "'");
  }
  return report.column_direction[*c];
}

int sign(Direction d) {
  switch (d) {
    case Direction::kIncreasesPriority: return 1;
    case Direction::kDecreasesPriority: return -1;
    case Direction::kIndeterminate: return 0;
  }
  return 0;
}

struct LevelVerdict {
  std::optional<std::size_t> winner;  // nullopt: indeterminate
  Direction direction = Direction::kIndeterminate;
};

LevelVerdict level1_verdict(const ScenarioPair& pair, const std::string& field,
                            const SalienceReport& report) {
  const Schema& schema = *FeatureEncoder().schema();
  const auto& a = pair.meetings[0].features;
  const auto& b = pair.meetings[1].features;
  LevelVerdict v;
  if (is_nominal(field)) {
    const Direction da =
        column_direction(report, schema, field + "=" + field_text(a, field));
    const Direction db =
        column_direction(report, schema, field + "=" + field_text(b, field));
    if (sign(da) > sign(db)) v.winner = 0;
    if (sign(db) > sign(da)) v.winner = 1;
    if (v.winner) v.direction = *v.winner == 0 ? da : db;
    return v;
  }
  const Direction d = column_direction(report, schema, field);
  const double xa = numeric_field(a, field);
  const double xb = numeric_field(b, field);
  v.direction = d;
  if (d == Direction::kIndeterminate || xa == xb) return v;
  const bool a_higher = xa > xb;
  v.winner = (d == Direction::kIncreasesPriority) == a_higher ? 0 : 1;
  return v;
}

LevelVerdict level2_verdict(const ScenarioPair& pair, Characteristic c,
                            const SalienceReport& report) {
  const Direction d = column_direction(report, *profile_schema(),
                                       std::string(to_name(c)));
  const double xa = pair.meetings[0].profile[c];
  const double xb = pair.meetings[1].profile[c];
  LevelVerdict v;
  v.direction = d;
  if (d == Direction::kIndeterminate || xa == xb) return v;
  v.winner = (d == Direction::kIncreasesPriority) == (xa > xb) ? 0 : 1;
  return v;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

using Values = std::vector<std::pair<std::string, std::string>>;

Values persona_values(const Persona& p) {
  return {{"subject", p.subject},
          {"object", p.object},
          {"possessive", p.possessive},
          {"is", p.plural_verbs ? "are" : "is"},
          {"is_not", p.plural_verbs ? "aren't" : "isn't"},
          {"has", p.plural_verbs ? "have" : "has"},
          {"does_not", p.plural_verbs ? "don't" : "doesn't"}};
}

const json& lookup(const json& j, std::string_view key, std::string_view what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::kUnknownTemplate, std::string(key),
                "lexicon has no " + std::string(what) + " '" +
                    std::string(key) + "'");
  }
  return *it;
}

std::string phrase(const json& entry, std::string_view key, const Persona& p) {
  return fill_template(lookup(entry, key, "phrase").get<std::string>(),
                       persona_values(p));
}

std::string format_priority(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

Explanation model_score_explanation(const Suggestion& s, ExplanationStyle style,
                                    const ScenarioPair& pair,
                                    const json& templates) {
  if (!s.predicted_priority) {
    throw Error(ErrorCode::kUnknownTemplate, "model_score",
                "no differing feature and no predicted priorities");
  }
  const std::size_t other = 1 - s.chosen;
  Values values = persona_values(pair.user);
  values.insert(values.end(),
                {{"user", pair.user.name},
                 {"chosen", pair.meetings[s.chosen].label},
                 {"other", pair.meetings[other].label},
                 {"chosen_priority", format_priority((*s.predicted_priority)[s.chosen])},
                 {"other_priority", format_priority((*s.predicted_priority)[other])}});
  Explanation e;
  e.style = style;
  e.cited_feature = "priority";
  e.template_id = "model_score";
  e.text = fill_template(
      lookup(templates, "model_score", "template").get<std::string>(), values);
  return e;
}

ScenarioMeeting parse_meeting(const json& j, CharacteristicScale scale) {
  ScenarioMeeting m{j.at("label").get<std::string>(),
                    j.value("description", std::string{}),
                    {},
                    SituationProfile(SituationProfile::Values{1, 1, 1, 1, 1, 1, 1, 1},
                                     scale)};
  RawFields raw;
  for (const auto& [key, value] : j.at("features").items()) {
    raw.emplace(key, value.is_string() ? value.get<std::string>() : value.dump());
  }
  m.features = validate_features(raw);
  SituationProfile::Values values{};
  const auto& profile = j.at("profile");
  for (std::size_t c = 0; c < kNumCharacteristics; ++c) {
    values[c] = profile.at(std::string(kCharacteristicNames[c])).get<double>();
  }
  m.profile = SituationProfile(values, scale);
  return m;
}

}  // namespace

ScenarioPair ScenarioPair::swapped() const {
  ScenarioPair out = *this;
  std::swap(out.meetings[0], out.meetings[1]);
  if (out.expected) {
    out.expected->chosen = 1 - out.expected->chosen;
    out.expected->level1_text.reset();
    out.expected->level2_text.reset();
  }
  return out;
}

std::vector<ScenarioPair> parse_pairs(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "ssa-scenario-pairs") {
      throw Error(ErrorCode::kFormatError, "format", "not a scenario-pair file");
    }
    check_format_version(j.at("format_version").get<std::string>(), 1);
    const int scale_value = j.at("scale").get<int>();
    if (scale_value != 6 && scale_value != 7) {
      throw Error(ErrorCode::kUnsupportedScale, "scale", "scale must be 6 or 7");
    }
    const auto scale = static_cast<CharacteristicScale>(scale_value);
    std::vector<ScenarioPair> pairs;
    for (const auto& p : j.at("pairs")) {
      ScenarioPair pair;
      pair.id = p.at("id").get<std::string>();
      pair.description = p.value("description", std::string{});
      if (p.contains("user")) {
        const auto& u = p.at("user");
        pair.user.name = u.value("name", pair.user.name);
        pair.user.subject = u.value("subject", pair.user.subject);
        pair.user.object = u.value("object", pair.user.object);
        pair.user.possessive = u.value("possessive", pair.user.possessive);
        pair.user.plural_verbs = u.value("plural_verbs", false);
      }
      const auto& meetings = p.at("meetings");
      if (meetings.size() != 2) {
        throw Error(ErrorCode::kFormatError, pair.id, "a pair has two meetings");
      }
      pair.meetings = {parse_meeting(meetings[0], scale),
                       parse_meeting(meetings[1], scale)};
      if (p.contains("expected")) {
        const auto& e = p.at("expected");
        PairExpectation ex;
        const auto label = e.at("chosen").get<std::string>();
        if (label == pair.meetings[0].label) {
          ex.chosen = 0;
        } else if (label == pair.meetings[1].label) {
          ex.chosen = 1;
        } else {
          throw Error(ErrorCode::kFormatError, pair.id,
                      "expected choice names no meeting");
        }
        ex.level1_feature = e.at("level1_feature").get<std::string>();
        ex.level2_feature = e.at("level2_feature").get<std::string>();
        if (e.contains("level1_text")) ex.level1_text = e.at("level1_text");
        if (e.contains("level2_text")) ex.level2_text = e.at("level2_text");
        pair.expected = ex;
      }
      pairs.push_back(std::move(pair));
    }
    return pairs;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, "pairs", e.what());
  }
}

std::vector<ScenarioPair> load_pairs(const std::string& path) {
  try {
    return parse_pairs(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, path, e.what());
  }
}

std::string find_differing_level1(const ScenarioPair& pair) {
  const auto& a = pair.meetings[0].features;
  const auto& b = pair.meetings[1].features;
  if (a.age_difference.has_value() != b.age_difference.has_value()) {
    throw Error(ErrorCode::kUnequalInformation, "age_difference",
                "only one meeting of pair " + pair.id + " knows the age difference");
  }
  std::vector<std::string> differing;
  for (auto field : kFeatureFields) {
    if (field_text(a, field) != field_text(b, field)) {
      differing.emplace_back(field);
    }
  }
  if (differing.empty()) {
    throw Error(ErrorCode::kNoDifference, pair.id,
                "meetings have identical Level-1 features");
  }
  if (differing.size() > 1) {
    std::string list;
    for (const auto& d : differing) list += (list.empty() ? "" : ", ") + d;
    throw Error(ErrorCode::kAmbiguousPair, pair.id,
                "meetings differ in several features: " + list);
  }
  return differing.front();
}

Characteristic find_differing_level2(const ScenarioPair& pair) {
  const auto& a = pair.meetings[0].profile;
  const auto& b = pair.meetings[1].profile;
  if (a.scale() != b.scale()) {
    throw Error(ErrorCode::kInvalidValue, "scale",
                "meetings of pair " + pair.id + " use different scales");
  }
  const int hi = scale_max(a.scale());
  std::vector<Characteristic> differing;
  for (std::size_t c = 0; c < kNumCharacteristics; ++c) {
    const auto ch = static_cast<Characteristic>(c);
    if (classify_relevance(a[ch], hi) != classify_relevance(b[ch], hi)) {
      differing.push_back(ch);
    }
  }
  if (differing.empty()) {
    throw Error(ErrorCode::kNoDifference, pair.id,
                "every characteristic has the same relevance class");
  }
  if (differing.size() > 1) {
    throw Error(ErrorCode::kAmbiguousPair, pair.id,
                "several characteristics change relevance class");
  }
  return differing.front();
}

std::string_view to_string(TieBreakerLevel level) {
  switch (level) {
    case TieBreakerLevel::kLevel1: return "level1";
    case TieBreakerLevel::kLevel2: return "level2";
    case TieBreakerLevel::kModelScore: return "model_score";
  }
  return "level1";
}

Suggestion decide_suggestion(const ScenarioPair& pair,
                             const SalienceSummary& salience) {
  const std::string field = find_differing_level1(pair);
  const Characteristic ch = find_differing_level2(pair);
  const LevelVerdict l1 = level1_verdict(pair, field, salience.level1);
  const LevelVerdict l2 = level2_verdict(pair, ch, salience.level2);
  if (!l1.winner) {
    throw Error(ErrorCode::kIndeterminateDirection, field,
                "direction of '" + field + "' does not separate the meetings");
  }
  if (!l2.winner) {
    throw Error(ErrorCode::kIndeterminateDirection, std::string(to_name(ch)),
                "direction of '" + std::string(to_name(ch)) +
                    "' does not separate the meetings");
  }
  if (*l1.winner != *l2.winner) {
    throw Error(ErrorCode::kConflictingLevels, pair.id,
                "'" + field + "' and '" + std::string(to_name(ch)) +
                    "' favor different meetings");
  }
  Suggestion s;
  s.chosen = *l1.winner;
  s.tie_breaker_level = TieBreakerLevel::kLevel1;
  s.level1_feature = field;
  s.level1_direction = l1.direction;
  s.level2_feature = ch;
  s.level2_direction = l2.direction;
  return s;
}

const std::vector<std::string>& level1_pool() {
  static const std::vector<std::string> pool = {
      "setting", "help_dynamic", "role", "relationship_quality",
      "age_difference", "shared_interests"};
  return pool;
}

const std::vector<Characteristic>& level2_pool() {
  static const std::vector<Characteristic> pool = {
      Characteristic::kDuty, Characteristic::kIntellect,
      Characteristic::kPositivity, Characteristic::kNegativity};
  return pool;
}

Suggestion decide_free_form(const ScenarioPair& pair,
                            const std::array<double, 2>& predicted_priority,
                            std::size_t earlier,
                            const SalienceSummary& salience) {
  Suggestion s;
  s.tie_breaker_level = TieBreakerLevel::kModelScore;
  s.predicted_priority = predicted_priority;
  if (predicted_priority[0] > predicted_priority[1]) {
    s.chosen = 0;
  } else if (predicted_priority[1] > predicted_priority[0]) {
    s.chosen = 1;
  } else {
    s.chosen = earlier;
  }

  const auto& a = pair.meetings[0].features;
  const auto& b = pair.meetings[1].features;
  for (auto g : salience.level1.ranking) {
    const std::string& field = salience.level1.group_names[g];
    if (std::find(level1_pool().begin(), level1_pool().end(), field) ==
        level1_pool().end()) {
      continue;
    }
    if (field == "age_difference" && (!a.age_difference || !b.age_difference)) {
      continue;
    }
    if (field_text(a, field) == field_text(b, field)) continue;
    const LevelVerdict v = level1_verdict(pair, field, salience.level1);
    if (v.winner && *v.winner == s.chosen) {
      s.level1_feature = field;
      s.level1_direction = v.direction;
      break;
    }
  }
  for (auto g : salience.level2.ranking) {
    const auto ch = static_cast<Characteristic>(g);
    if (std::find(level2_pool().begin(), level2_pool().end(), ch) ==
        level2_pool().end()) {
      continue;
    }
    const LevelVerdict v = level2_verdict(pair, ch, salience.level2);
    if (v.winner && *v.winner == s.chosen) {
      s.level2_feature = ch;
      s.level2_direction = v.direction;
      break;
    }
  }
  return s;
}

std::string_view to_string(ExplanationStyle style) {
  switch (style) {
    case ExplanationStyle::kLevel1: return "level1";
    case ExplanationStyle::kLevel2: return "level2";
    case ExplanationStyle::kControl: return "control";
  }
  return "level1";
}

std::optional<ExplanationStyle> parse_explanation_style(std::string_view text) {
  if (text == "level1") return ExplanationStyle::kLevel1;
  if (text == "level2") return ExplanationStyle::kLevel2;
  if (text == "control") return ExplanationStyle::kControl;
  return std::nullopt;
}

Lexicon Lexicon::parse(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "ssa-lexicon") {
      throw Error(ErrorCode::kFormatError, "format", "not a lexicon file");
    }
    check_format_version(j.at("format_version").get<std::string>(), 1);
    for (auto key : {"templates", "level1", "level2", "control"}) {
      if (!j.contains(key)) {
        throw Error(ErrorCode::kFormatError, key,
                    "lexicon lacks section '" + std::string(key) + "'");
      }
    }
    if (!j.at("control").is_array() || j.at("control").empty()) {
      throw Error(ErrorCode::kFormatError, "control",
                  "control pool must be a nonempty list");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, "lexicon", e.what());
  }
  Lexicon lex;
  lex.raw_ = j;
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  try {
    return parse(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, path, e.what());
  }
}

std::vector<std::string> Lexicon::mentioned_features(std::string_view text) const {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::vector<std::string> out;
  auto scan = [&](const std::string& name, const json& entry) {
    for (const auto& m : entry.value("mentions", json::array())) {
      if (lower.find(m.get<std::string>()) != std::string::npos) {
        out.push_back(name);
        return;
      }
    }
  };
  for (const auto& [name, entry] : raw_.at("level1").items()) scan(name, entry);
  for (const auto& [name, entry] : raw_.at("level2").items()) scan(name, entry);
  for (const auto& entry : raw_.at("control")) {
    scan(entry.at("feature").get<std::string>(), entry);
  }
  return out;
}

std::string fill_template(std::string_view text, const Values& values) {
  std::string out;
  out.reserve(text.size() + 64);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const auto close = text.find('}', open);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::kUnknownTemplate, "template",
                  "unterminated placeholder");
    }
    const auto key = text.substr(open + 1, close - open - 1);
    auto it = std::find_if(values.begin(), values.end(),
                           [&](const auto& kv) { return kv.first == key; });
    if (it == values.end()) {
      throw Error(ErrorCode::kUnknownTemplate, std::string(key),
                  "no value for placeholder {" + std::string(key) + "}");
    }
    out.append(it->second);
    pos = close + 1;
  }
  return out;
}

Explanation render_explanation(const Suggestion& s, ExplanationStyle style,
                               const ScenarioPair& pair,
                               const Lexicon& lexicon) {
  const json& lex = lexicon.raw();
  const json& templates = lex.at("templates");
  const std::size_t other = 1 - s.chosen;
  const auto& chosen_m = pair.meetings[s.chosen];
  const auto& other_m = pair.meetings[other];
  Values values = {{"user", pair.user.name},
                   {"chosen", chosen_m.label},
                   {"other", other_m.label}};
  Explanation e;
  e.style = style;

  switch (style) {
    case ExplanationStyle::kLevel1: {
      if (!s.level1_feature) {
        return model_score_explanation(s, style, pair, templates);
      }
      const std::string& field = *s.level1_feature;
      const json& entry = lookup(lex.at("level1"), field, "feature");
      const json* phrases = nullptr;
      std::string variant;
      if (entry.value("kind", std::string("nominal")) == "nominal") {
        variant = field_text(chosen_m.features, field);
        phrases = &lookup(lookup(entry, "values", "section"), variant, "value");
      } else {
        variant = numeric_field(chosen_m.features, field) >
                          numeric_field(other_m.features, field)
                      ? "higher"
                      : "lower";
        phrases = &lookup(entry, variant, "comparative");
      }
      values.emplace_back("clause", phrase(*phrases, "clause", pair.user));
      values.emplace_back("contrast", phrase(*phrases, "contrast", pair.user));
      values.emplace_back("generalization",
                          phrase(*phrases, "generalization", pair.user));
      e.cited_feature = field;
      e.template_id = "level1/" + field + "/" + variant;
      e.text = fill_template(
          lookup(templates, "level1", "template").get<std::string>(), values);
      return e;
    }
    case ExplanationStyle::kLevel2: {
      if (!s.level2_feature) {
        return model_score_explanation(s, style, pair, templates);
      }
      const std::string name(to_name(*s.level2_feature));
      const json& entry = lookup(lex.at("level2"), name, "characteristic");
      const std::string comparative =
          chosen_m.profile[*s.level2_feature] > other_m.profile[*s.level2_feature]
              ? "higher"
              : "lower";
      const json& phrases = lookup(entry, comparative, "comparative");
      values.emplace_back("comparative", comparative);
      values.emplace_back("characteristic",
                          entry.value("display", name));
      values.emplace_back("gloss", phrase(phrases, "gloss", pair.user));
      e.cited_feature = name;
      e.template_id = "level2/" + name + "/" + comparative;
      e.text = fill_template(
          lookup(templates, "level2", "template").get<std::string>(), values);
      return e;
    }
    case ExplanationStyle::kControl: {
      const json& pool = lex.at("control");
      const json& entry = pool[fnv1a(pair.id) % pool.size()];
      values.emplace_back("clause", phrase(entry, "clause", pair.user));
      e.cited_feature = entry.at("feature").get<std::string>();
      e.template_id = "control/" + e.cited_feature;
      e.text = fill_template(
          lookup(templates, "control", "template").get<std::string>(), values);
      return e;
    }
  }
  throw Error(ErrorCode::kUnknownTemplate, "style", "unknown explanation style");
}

std::string default_data_dir() {
  if (const char* env = std::getenv("SSA_DATA_DIR"); env && *env) return env;
  return SSA_DATA_DIR;
}

}  // namespace ssa
