#pragma once

// Synthetic study generator with a documented ground truth. Relationship
// features are drawn once per (participant, contact); each situation then
// draws its own cues. Profiles are a fixed function of the features plus
// Gaussian noise, and priority is affine in the profile.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ssa/domain.hpp"
#include "ssa/ingest.hpp"

namespace ssa {

struct SyntheticSpec {
  std::size_t situations = 2224;
  std::size_t participants = 100;
  std::size_t contacts_per_participant = 14;
  double profile_noise = 0.3;
  double priority_noise = 0.3;
  double age_present_probability = 0.85;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  std::vector<SituationRecord> situations;
  RelationshipTable relationships;
};

/// Noise-free six-point profile of a situation (before clamping to [1, 6]).
SituationProfile::Values synthetic_profile_mean(
    const SocialSituationFeatures& features);

/// Noise-free priority of a profile (before clamping to [1, 7]).
double synthetic_priority_mean(const SituationProfile::Values& profile);

SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace ssa
