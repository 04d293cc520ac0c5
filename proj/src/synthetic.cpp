#include "ssa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssa/random.hpp"

namespace ssa {

namespace {

double indicator(bool b) { return b ? 1.0 : 0.0; }

template <class E>
E draw_enum(Rng& rng) {
  return static_cast<E>(rng.index(enum_size<E>()));
}

int draw_ordinal(Rng& rng, OrdinalRange range) {
  return range.lo + static_cast<int>(rng.index(
                        static_cast<std::size_t>(range.hi - range.lo + 1)));
}

std::string padded(char prefix, std::size_t n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

void draw_relationship(Rng& rng, double age_present_probability,
                       SocialSituationFeatures& f) {
  f.role = draw_enum<Role>(rng);
  if (f.role == Role::kSupervisor) {
    f.hierarchy_level = rng.bernoulli(0.8) ? HierarchyLevel::kHigher
                                           : HierarchyLevel::kEqual;
  } else {
    f.hierarchy_level = draw_enum<HierarchyLevel>(rng);
  }
  f.contact_frequency = draw_ordinal(rng, kSevenPoint);
  f.geographical_distance = draw_ordinal(rng, kDistanceRange);
  f.years_known = 0.5 * static_cast<double>(rng.index(61));
  f.relationship_quality = draw_ordinal(rng, kSevenPoint);
  f.depth_of_acquaintance = draw_ordinal(rng, kSevenPoint);
  f.formality_level = draw_ordinal(rng, kSevenPoint);
  f.shared_interests = draw_ordinal(rng, kSevenPoint);
  if (rng.bernoulli(age_present_probability)) {
    f.age_difference = static_cast<double>(rng.index(61)) - 30.0;
  } else {
    f.age_difference.reset();
  }
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace

SituationProfile::Values synthetic_profile_mean(
    const SocialSituationFeatures& f) {
  const double work = indicator(f.setting == Setting::kWork);
  const double casual = indicator(f.setting == Setting::kCasual);
  const double family = indicator(f.setting == Setting::kFamily);
  const double giving = indicator(f.help_dynamic == HelpDynamic::kGivingHelp);
  const double receiving =
      indicator(f.help_dynamic == HelpDynamic::kReceivingHelp);
  const double supervisor = indicator(f.role == Role::kSupervisor);
  const double colleague = indicator(f.role == Role::kColleague);
  const double friend_ = indicator(f.role == Role::kFriend);
  const double kin = indicator(f.role == Role::kFamilyMember);
  const double partner = indicator(f.role == Role::kPartner);
  const double acquaintance = indicator(f.role == Role::kAcquaintance);
  const double higher = indicator(f.hierarchy_level == HierarchyLevel::kHigher);
  const double first_time =
      indicator(f.event_frequency == EventFrequency::kFirstTime);
  const double external = indicator(f.initiator == Initiator::kExternal);
  const double quality = f.relationship_quality - 4.0;
  const double shared = f.shared_interests - 4.0;
  const double formality = f.formality_level - 4.0;
  const double depth = f.depth_of_acquaintance - 4.0;
  const double contact = f.contact_frequency - 4.0;
  const double age = f.age_difference.value_or(0.0);

  SituationProfile::Values v{};
  v[0] = 1.4 + 1.5 * work + 1.2 * giving + 0.6 * supervisor + 0.4 * higher +
         0.15 * formality + 0.02 * age;
  v[1] = 2.0 + 0.8 * work + 0.8 * receiving + 0.3 * (supervisor + colleague) +
         0.15 * shared + 0.01 * age;
  v[2] = 2.0 - 0.25 * quality + 0.3 * higher + 0.3 * external;
  v[3] = 1.5 + 1.5 * partner + 0.5 * casual + 0.1 * depth;
  v[4] = 3.5 + 0.35 * quality + 0.2 * shared + 0.6 * casual + 0.3 * family;
  v[5] = 2.5 - 0.3 * quality + 0.5 * receiving + 0.1 * formality;
  v[6] = 2.0 - 0.2 * quality + 0.3 * acquaintance + 0.3 * first_time;
  v[7] = 3.0 + 0.3 * contact + 0.5 * casual + 0.5 * friend_ + 0.4 * kin;
  return v;
}

double synthetic_priority_mean(const SituationProfile::Values& p) {
  return 0.5 + 0.6 * p[0] + 0.3 * p[4] + 0.15 * p[1] - 0.15 * p[5];
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  SyntheticData out;

  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t p = 0; p < spec.participants; ++p) {
    for (std::size_t c = 0; c < spec.contacts_per_participant; ++c) {
      const std::string pid = padded('p', p + 1, 3);
      const std::string cid = pid + "-c" + std::to_string(c + 1);
      SocialSituationFeatures f;
      draw_relationship(rng, spec.age_present_probability, f);
      Relationship rel{pid, cid, {}};
      for (auto field : kRelationshipFields) {
        if (field == "age_difference" && !f.age_difference) continue;
        rel.fields.emplace(std::string(field), field_text(f, field));
      }
      out.relationships.emplace(std::make_pair(pid, cid), std::move(rel));
      pairs.emplace_back(pid, cid);
    }
  }

  const int hi = scale_max(CharacteristicScale::kSixPoint);
  for (std::size_t s = 0; s < spec.situations; ++s) {
    const auto& [pid, cid] = pairs[rng.index(pairs.size())];
    RawFields raw = out.relationships.at({pid, cid}).fields;
    SocialSituationFeatures cues;
    cues.setting = draw_enum<Setting>(rng);
    cues.event_frequency = draw_enum<EventFrequency>(rng);
    cues.initiator = draw_enum<Initiator>(rng);
    cues.help_dynamic = draw_enum<HelpDynamic>(rng);
    for (auto field : kCueFields) {
      raw[std::string(field)] = field_text(cues, field);
    }
    const SocialSituationFeatures features = validate_features(raw);

    auto values = synthetic_profile_mean(features);
    for (auto& v : values) {
      v = round3(std::clamp(v + rng.normal(0.0, spec.profile_noise), 1.0,
                            static_cast<double>(hi)));
    }
    const double priority = round3(std::clamp(
        synthetic_priority_mean(values) + rng.normal(0.0, spec.priority_noise),
        kPriorityMin, kPriorityMax));
    out.situations.push_back(SituationRecord{
        padded('s', s + 1, 4), pid, cid, features,
        SituationProfile(values, CharacteristicScale::kSixPoint),
        Priority(priority)});
  }
  return out;
}

}  // namespace ssa
