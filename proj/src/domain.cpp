#include "ssa/domain.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <vector>

#include "ssa/error.hpp"

namespace ssa {

namespace {

std::optional<double> parse_real(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<int> parse_int(std::string_view text) {
  if (text.empty()) return std::nullopt;
  int value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

class Collector {
 public:
  explicit Collector(const RawFields& raw) : raw_(raw) {}

  const std::string* find(std::string_view field) {
    auto it = raw_.find(field);
    if (it == raw_.end()) {
      add(ErrorCode::kMissingField, field, "required field is missing");
      return nullptr;
    }
    return &it->second;
  }

  template <class E>
  E enumeration() {
    constexpr auto field = EnumTokens<E>::field;
    const std::string* text = find(field);
    if (!text) return E{};
    auto value = parse_token<E>(*text);
    if (!value) {
      add(ErrorCode::kUnknownEnumValue, field,
          "unknown value '" + *text + "'");
      return E{};
    }
    return *value;
  }

  int ordinal(std::string_view field, OrdinalRange range) {
    const std::string* text = find(field);
    if (!text) return range.lo;
    auto value = parse_int(*text);
    if (!value) {
      add(ErrorCode::kInvalidValue, field, "not an integer: '" + *text + "'");
      return range.lo;
    }
    if (*value < range.lo || *value > range.hi) {
      add(ErrorCode::kOutOfRange, field,
          std::to_string(*value) + " outside [" + std::to_string(range.lo) +
              ", " + std::to_string(range.hi) + "]");
      return range.lo;
    }
    return *value;
  }

  double years_known() {
    const std::string* text = find("years_known");
    if (!text) return 0.0;
    auto value = parse_real(*text);
    if (!value) {
      add(ErrorCode::kInvalidValue, "years_known",
          "not a number: '" + *text + "'");
      return 0.0;
    }
    if (*value < 0) {
      add(ErrorCode::kOutOfRange, "years_known", "must be non-negative");
      return 0.0;
    }
    return *value;
  }

  std::optional<double> age_difference() {
    auto it = raw_.find(std::string_view{"age_difference"});
    if (it == raw_.end() || it->second.empty()) return std::nullopt;
    auto value = parse_real(it->second);
    if (!value) {
      add(ErrorCode::kInvalidValue, "age_difference",
          "not a number: '" + it->second + "'");
      return std::nullopt;
    }
    return value;
  }

  void add(ErrorCode code, std::string_view field, std::string message) {
    violations_.push_back({code, std::string(field), std::move(message)});
  }

  std::vector<Violation>& violations() { return violations_; }

 private:
  const RawFields& raw_;
  std::vector<Violation> violations_;
};

void check_ordinal(std::vector<Violation>& out, std::string_view field,
                   int value, OrdinalRange range) {
  if (value < range.lo || value > range.hi) {
    out.push_back({ErrorCode::kOutOfRange, std::string(field),
                   std::to_string(value) + " outside range"});
  }
}

template <class E>
void check_enum(std::vector<Violation>& out, E value) {
  if (static_cast<std::size_t>(value) >= enum_size<E>()) {
    out.push_back({ErrorCode::kUnknownEnumValue,
                   std::string(EnumTokens<E>::field), "enum out of range"});
  }
}

}  // namespace

SocialSituationFeatures validate_features(const RawFields& raw) {
  Collector c(raw);
  SocialSituationFeatures f;
  f.setting = c.enumeration<Setting>();
  f.event_frequency = c.enumeration<EventFrequency>();
  f.initiator = c.enumeration<Initiator>();
  f.help_dynamic = c.enumeration<HelpDynamic>();
  f.role = c.enumeration<Role>();
  f.hierarchy_level = c.enumeration<HierarchyLevel>();
  f.contact_frequency = c.ordinal("contact_frequency", kSevenPoint);
  f.geographical_distance = c.ordinal("geographical_distance", kDistanceRange);
  f.years_known = c.years_known();
  f.relationship_quality = c.ordinal("relationship_quality", kSevenPoint);
  f.depth_of_acquaintance = c.ordinal("depth_of_acquaintance", kSevenPoint);
  f.formality_level = c.ordinal("formality_level", kSevenPoint);
  f.shared_interests = c.ordinal("shared_interests", kSevenPoint);
  f.age_difference = c.age_difference();
  if (!c.violations().empty()) {
    throw ValidationError(std::move(c.violations()));
  }
  return f;
}

void check_features(const SocialSituationFeatures& f) {
  std::vector<Violation> v;
  check_enum(v, f.setting);
  check_enum(v, f.event_frequency);
  check_enum(v, f.initiator);
  check_enum(v, f.help_dynamic);
  check_enum(v, f.role);
  check_enum(v, f.hierarchy_level);
  check_ordinal(v, "contact_frequency", f.contact_frequency, kSevenPoint);
  check_ordinal(v, "geographical_distance", f.geographical_distance,
                kDistanceRange);
  if (!(f.years_known >= 0) || !std::isfinite(f.years_known)) {
    v.push_back({ErrorCode::kOutOfRange, "years_known", "must be >= 0"});
  }
  check_ordinal(v, "relationship_quality", f.relationship_quality,
                kSevenPoint);
  check_ordinal(v, "depth_of_acquaintance", f.depth_of_acquaintance,
                kSevenPoint);
  check_ordinal(v, "formality_level", f.formality_level, kSevenPoint);
  check_ordinal(v, "shared_interests", f.shared_interests, kSevenPoint);
  if (f.age_difference && !std::isfinite(*f.age_difference)) {
    v.push_back({ErrorCode::kInvalidValue, "age_difference", "not finite"});
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string field_text(const SocialSituationFeatures& f,
                       std::string_view field) {
  if (field == "setting") return std::string(to_token(f.setting));
  if (field == "event_frequency") return std::string(to_token(f.event_frequency));
  if (field == "initiator") return std::string(to_token(f.initiator));
  if (field == "help_dynamic") return std::string(to_token(f.help_dynamic));
  if (field == "role") return std::string(to_token(f.role));
  if (field == "hierarchy_level") return std::string(to_token(f.hierarchy_level));
  if (field == "contact_frequency") return std::to_string(f.contact_frequency);
  if (field == "geographical_distance")
    return std::to_string(f.geographical_distance);
  if (field == "years_known") return format_number(f.years_known);
  if (field == "relationship_quality")
    return std::to_string(f.relationship_quality);
  if (field == "depth_of_acquaintance")
    return std::to_string(f.depth_of_acquaintance);
  if (field == "formality_level") return std::to_string(f.formality_level);
  if (field == "shared_interests") return std::to_string(f.shared_interests);
  if (field == "age_difference")
    return f.age_difference ? format_number(*f.age_difference) : std::string{};
  throw Error(ErrorCode::kUnknownFeature, std::string(field),
              "unknown feature field");
}

RawFields to_raw_fields(const SocialSituationFeatures& f) {
  RawFields raw;
  for (auto field : kFeatureFields) {
    if (field == "age_difference" && !f.age_difference) continue;
    raw.emplace(std::string(field), field_text(f, field));
  }
  return raw;
}

std::optional<Characteristic> parse_characteristic(std::string_view name) {
  for (std::size_t i = 0; i < kCharacteristicNames.size(); ++i) {
    if (kCharacteristicNames[i] == name) return static_cast<Characteristic>(i);
  }
  return std::nullopt;
}

SituationProfile::SituationProfile(const Values& values,
                                   CharacteristicScale scale)
    : values_(values), scale_(scale) {
  const int hi = scale_max(scale);
  if (hi != 6 && hi != 7) {
    throw Error(ErrorCode::kUnsupportedScale, "scale",
                "characteristic scale must be 6 or 7");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 1.0 && values[i] <= hi)) {
      throw Error(ErrorCode::kOutOfRange, std::string(kCharacteristicNames[i]),
                  format_number(values[i]) + " outside [1, " +
                      std::to_string(hi) + "]");
    }
  }
}

Priority::Priority(double value) : value_(value) {
  if (!(value >= kPriorityMin && value <= kPriorityMax)) {
    throw Error(ErrorCode::kOutOfRange, "priority",
                format_number(value) + " outside [1, 7]");
  }
}

Relevance classify_relevance(double score, int scale_max) {
  if (scale_max != 6 && scale_max != 7) {
    throw Error(ErrorCode::kUnsupportedScale, "scale_max",
                "supported scales are 6 and 7");
  }
  if (!(score >= 1.0 && score <= scale_max)) {
    throw Error(ErrorCode::kOutOfRangeScore, "score",
                format_number(score) + " outside [1, " +
                    std::to_string(scale_max) + "]");
  }
  const double midpoint = (1.0 + scale_max) / 2.0;
  return score > midpoint ? Relevance::kHigh : Relevance::kLow;
}

}  // namespace ssa
