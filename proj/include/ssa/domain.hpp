#pragma once

// Level-1 situation features, Level-2 DIAMONDS profiles, Level-3 priority and
// the Likert-scale semantics shared by all other modules.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace ssa {

enum class Setting { kWork, kCasual, kFamily, kOther };
enum class EventFrequency { kFirstTime, kRarely, kMonthly, kWeekly, kDaily };
enum class Initiator { kUser, kOtherPerson, kExternal };
enum class HelpDynamic { kGivingHelp, kReceivingHelp, kNeither };
enum class Role {
  kSupervisor,
  kColleague,
  kFriend,
  kFamilyMember,
  kPartner,
  kAcquaintance,
  kOther
};
enum class HierarchyLevel { kLower, kEqual, kHigher };

template <class E>
struct EnumTokens;

template <>
struct EnumTokens<Setting> {
  static constexpr std::string_view field = "setting";
  static constexpr std::array<std::string_view, 4> tokens = {
      "work", "casual", "family", "other"};
};
template <>
struct EnumTokens<EventFrequency> {
  static constexpr std::string_view field = "event_frequency";
  static constexpr std::array<std::string_view, 5> tokens = {
      "first_time", "rarely", "monthly", "weekly", "daily"};
};
template <>
struct EnumTokens<Initiator> {
  static constexpr std::string_view field = "initiator";
  static constexpr std::array<std::string_view, 3> tokens = {
      "user", "other_person", "external"};
};
template <>
struct EnumTokens<HelpDynamic> {
  static constexpr std::string_view field = "help_dynamic";
  static constexpr std::array<std::string_view, 3> tokens = {
      "giving_help", "receiving_help", "neither"};
};
template <>
struct EnumTokens<Role> {
  static constexpr std::string_view field = "role";
  static constexpr std::array<std::string_view, 7> tokens = {
      "supervisor", "colleague", "friend",      "family_member",
      "partner",    "acquaintance", "other"};
};
template <>
struct EnumTokens<HierarchyLevel> {
  static constexpr std::string_view field = "hierarchy_level";
  static constexpr std::array<std::string_view, 3> tokens = {"lower", "equal",
                                                             "higher"};
};

template <class E>
constexpr std::string_view to_token(E value) {
  return EnumTokens<E>::tokens[static_cast<std::size_t>(value)];
}

template <class E>
constexpr std::optional<E> parse_token(std::string_view token) {
  const auto& tokens = EnumTokens<E>::tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == token) return static_cast<E>(i);
  }
  return std::nullopt;
}

template <class E>
constexpr std::size_t enum_size() {
  return EnumTokens<E>::tokens.size();
}

struct OrdinalRange {
  int lo;
  int hi;
};

inline constexpr OrdinalRange kSevenPoint{1, 7};
inline constexpr OrdinalRange kDistanceRange{1, 5};

/// Level-1 description of a meeting: four situation cues plus the
/// relationship to the other person. Validated on construction through
/// validate_features(); treat instances as immutable values.
struct SocialSituationFeatures {
  Setting setting = Setting::kOther;
  EventFrequency event_frequency = EventFrequency::kFirstTime;
  Initiator initiator = Initiator::kUser;
  HelpDynamic help_dynamic = HelpDynamic::kNeither;
  Role role = Role::kOther;
  HierarchyLevel hierarchy_level = HierarchyLevel::kEqual;
  int contact_frequency = 1;      // 1..7
  int geographical_distance = 1;  // 1 = same building .. 5 = different country
  double years_known = 0.0;
  int relationship_quality = 1;   // 1..7
  int depth_of_acquaintance = 1;  // 1..7
  int formality_level = 1;        // 1..7
  int shared_interests = 1;       // 1..7
  std::optional<double> age_difference;  // other minus user, years

  friend bool operator==(const SocialSituationFeatures&,
                         const SocialSituationFeatures&) = default;
};

using RawFields = std::map<std::string, std::string, std::less<>>;

/// Names of the fourteen Level-1 fields in canonical order. The first four
/// are situation cues; the rest describe the relationship.
inline constexpr std::array<std::string_view, 14> kFeatureFields = {
    "setting",
    "event_frequency",
    "initiator",
    "help_dynamic",
    "role",
    "hierarchy_level",
    "contact_frequency",
    "geographical_distance",
    "years_known",
    "relationship_quality",
    "depth_of_acquaintance",
    "formality_level",
    "shared_interests",
    "age_difference"};

inline constexpr std::array<std::string_view, 4> kCueFields = {
    "setting", "event_frequency", "initiator", "help_dynamic"};

inline constexpr std::array<std::string_view, 10> kRelationshipFields = {
    "role",
    "hierarchy_level",
    "contact_frequency",
    "geographical_distance",
    "years_known",
    "relationship_quality",
    "depth_of_acquaintance",
    "formality_level",
    "shared_interests",
    "age_difference"};

/// Parses and validates a field map. Reports every violation at once through
/// ValidationError rather than stopping at the first.
SocialSituationFeatures validate_features(const RawFields& raw);

/// Checks an already-typed instance against every declared range.
void check_features(const SocialSituationFeatures& features);

/// Inverse of validate_features. Absent age_difference is omitted.
RawFields to_raw_fields(const SocialSituationFeatures& features);

/// Raw text for one field ("" for an absent age_difference).
std::string field_text(const SocialSituationFeatures& features,
                       std::string_view field);

enum class Characteristic {
  kDuty,
  kIntellect,
  kAdversity,
  kMating,
  kPositivity,
  kNegativity,
  kDeception,
  kSociality
};

inline constexpr std::size_t kNumCharacteristics = 8;

inline constexpr std::array<std::string_view, kNumCharacteristics>
    kCharacteristicNames = {"duty",       "intellect",  "adversity",
                            "mating",     "positivity", "negativity",
                            "deception",  "sociality"};

std::optional<Characteristic> parse_characteristic(std::string_view name);

constexpr std::string_view to_name(Characteristic c) {
  return kCharacteristicNames[static_cast<std::size_t>(c)];
}

/// Likert scale of the characteristic ratings. Study data uses six points;
/// annotated scenario pairs use seven. Never mixed within one model.
enum class CharacteristicScale { kSixPoint = 6, kSevenPoint = 7 };

constexpr int scale_max(CharacteristicScale scale) {
  return static_cast<int>(scale);
}

/// The eight DIAMONDS characteristics of a situation, in canonical order.
class SituationProfile {
 public:
  using Values = std::array<double, kNumCharacteristics>;

  explicit SituationProfile(
      const Values& values,
      CharacteristicScale scale = CharacteristicScale::kSixPoint);

  double operator[](Characteristic c) const {
    return values_[static_cast<std::size_t>(c)];
  }
  const Values& values() const noexcept { return values_; }
  CharacteristicScale scale() const noexcept { return scale_; }

  friend bool operator==(const SituationProfile&,
                         const SituationProfile&) = default;

 private:
  Values values_;
  CharacteristicScale scale_;
};

inline constexpr double kPriorityMin = 1.0;
inline constexpr double kPriorityMax = 7.0;

class Priority {
 public:
  explicit Priority(double value);
  double value() const noexcept { return value_; }
  friend bool operator==(const Priority&, const Priority&) = default;

 private:
  double value_;
};

enum class Relevance { kHigh, kLow };

/// High iff the score is strictly above the scale midpoint (4 on seven
/// points, 3.5 on six).
Relevance classify_relevance(double score, int scale_max);

std::string format_number(double value);

}  // namespace ssa
