#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ssa/domain.hpp"
#include "ssa/encoding.hpp"

namespace ssa {

struct SituationRecord {
  std::string situation_id;
  std::string participant_id;
  std::string contact_id;
  SocialSituationFeatures features;
  std::optional<SituationProfile> profile;
  std::optional<Priority> priority;

  friend bool operator==(const SituationRecord&, const SituationRecord&) = default;
};

/// Relationship features of one (participant, contact) pair.
struct Relationship {
  std::string participant_id;
  std::string contact_id;
  RawFields fields;  // the ten relationship fields, validated
};

using RelationshipTable =
    std::map<std::pair<std::string, std::string>, Relationship>;

/// Column and token remapping that bridges an external dataset onto the
/// canonical schema. Loaded from a key=value file:
///
///   column.<canonical>=<external header>
///   value.<field>.<external token>=<canonical token>
///   scale=6|7
///   ignore_unknown_columns=true|false
struct AdapterConfig {
  std::map<std::string, std::string> column_for;  // canonical -> external
  std::map<std::string, std::map<std::string, std::string>> value_map;
  std::optional<CharacteristicScale> scale;
  bool ignore_unknown_columns = false;

  static AdapterConfig parse(std::string_view text);
  static AdapterConfig load(const std::string& path);
};

struct ParseOptions {
  CharacteristicScale scale = CharacteristicScale::kSixPoint;
  const AdapterConfig* adapter = nullptr;
  /// Needed when the situations file carries only the four situation cues.
  const RelationshipTable* relationships = nullptr;
  bool require_labels = true;
};

/// Canonical header of situations.csv.
const std::vector<std::string>& situation_columns();
/// Canonical header of relationships.csv.
const std::vector<std::string>& relationship_columns();

/// Parses a situations file. Returns every record or throws: HeaderMismatch
/// for an unusable header, RowError listing every malformed row otherwise.
std::vector<SituationRecord> parse_situations(std::string_view text,
                                              const ParseOptions& options = {});
std::vector<SituationRecord> parse_situations(std::istream& in,
                                              const ParseOptions& options = {});

RelationshipTable parse_relationships(std::string_view text,
                                      const AdapterConfig* adapter = nullptr);

void write_situations(std::ostream& out,
                      const std::vector<SituationRecord>& records);
void write_relationships(std::ostream& out, const RelationshipTable& table);

/// FNV-1a over the canonical serialization of the records.
std::uint64_t fingerprint(const std::vector<SituationRecord>& records);
std::string fingerprint_hex(std::uint64_t fp);

std::vector<SituationRecord> load_situations(const std::string& path,
                                             const ParseOptions& options = {});

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  /// Keeps every participant's records on one side of the split.
  bool group_by_participant = false;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Simple random split; |test| = round(test_fraction * N). Indices are
/// returned in ascending order.
SplitIndices split_indices(const std::vector<SituationRecord>& records,
                           const SplitSpec& spec);

std::pair<std::vector<SituationRecord>, std::vector<SituationRecord>> split(
    const std::vector<SituationRecord>& records, const SplitSpec& spec);

/// Feature matrix of a record list in the canonical encoding.
FeatureMatrix encode_features(const std::vector<SituationRecord>& records);
/// True profile matrix (priority-model input).
FeatureMatrix encode_profiles(const std::vector<SituationRecord>& records);

}  // namespace ssa
