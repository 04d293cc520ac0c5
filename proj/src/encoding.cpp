#include "ssa/encoding.hpp"

#include <algorithm>

#include "ssa/error.hpp"

namespace ssa {

std::string_view to_string(EncodingKind kind) {
  switch (kind) {
    case EncodingKind::kOrdinal: return "ordinal";
    case EncodingKind::kOneHotComponent: return "one_hot_component";
    case EncodingKind::kNumeric: return "numeric";
  }
  return "numeric";
}

std::optional<EncodingKind> parse_encoding_kind(std::string_view text) {
  if (text == "ordinal") return EncodingKind::kOrdinal;
  if (text == "one_hot_component") return EncodingKind::kOneHotComponent;
  if (text == "numeric") return EncodingKind::kNumeric;
  return std::nullopt;
}

Schema::Schema(std::vector<SchemaColumn> columns,
               std::vector<std::string> groups)
    : columns_(std::move(columns)),
      groups_(std::move(groups)),
      group_columns_(groups_.size()) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].group >= groups_.size()) {
      throw Error(ErrorCode::kFormatError, columns_[i].name,
                  "column refers to an unknown group");
    }
    group_columns_[columns_[i].group].push_back(i);
  }
}

std::optional<std::size_t> Schema::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Schema::find_group(std::string_view name) const {
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (groups_[i] == name) return i;
  }
  return std::nullopt;
}

FeatureMatrix::FeatureMatrix(SchemaPtr schema, std::size_t rows)
    : schema_(std::move(schema)),
      rows_(rows),
      cols_(schema_ ? schema_->size() : 0),
      data_(rows_ * cols_, 0.0) {}

FeatureMatrix FeatureMatrix::from_vectors(
    std::span<const EncodedVector> vectors) {
  if (vectors.empty()) return {};
  FeatureMatrix m(vectors.front().schema, 0);
  for (const auto& v : vectors) {
    if (!v.schema || !(*v.schema == *m.schema_) ||
        v.values.size() != m.cols_) {
      throw Error(ErrorCode::kSchemaMismatch,
                  "vectors do not share one schema");
    }
    m.append(v.values);
  }
  return m;
}

void FeatureMatrix::append(std::span<const double> values) {
  if (values.size() != cols_) {
    throw Error(ErrorCode::kSchemaMismatch, "row width does not match schema");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> rows) const {
  FeatureMatrix out(schema_, 0);
  out.data_.reserve(rows.size() * cols_);
  for (auto r : rows) out.append(row(r));
  return out;
}

EncodedVector FeatureMatrix::vector(std::size_t r) const {
  auto values = row(r);
  return {std::vector<double>(values.begin(), values.end()), schema_};
}

namespace {

template <class E>
void add_one_hot(std::vector<SchemaColumn>& columns,
                 std::vector<std::string>& groups) {
  const std::size_t g = groups.size();
  groups.emplace_back(EnumTokens<E>::field);
  for (auto token : EnumTokens<E>::tokens) {
    columns.push_back({std::string(EnumTokens<E>::field) + "=" +
                           std::string(token),
                       EncodingKind::kOneHotComponent, g});
  }
}

void add_single(std::vector<SchemaColumn>& columns,
                std::vector<std::string>& groups, std::string_view name,
                EncodingKind kind) {
  columns.push_back({std::string(name), kind, groups.size()});
  groups.emplace_back(name);
}

SchemaPtr build_feature_schema() {
  std::vector<SchemaColumn> columns;
  std::vector<std::string> groups;
  add_one_hot<Setting>(columns, groups);
  add_one_hot<EventFrequency>(columns, groups);
  add_one_hot<Initiator>(columns, groups);
  add_one_hot<HelpDynamic>(columns, groups);
  add_one_hot<Role>(columns, groups);
  add_one_hot<HierarchyLevel>(columns, groups);
  add_single(columns, groups, "contact_frequency", EncodingKind::kOrdinal);
  add_single(columns, groups, "geographical_distance", EncodingKind::kOrdinal);
  add_single(columns, groups, "years_known", EncodingKind::kNumeric);
  add_single(columns, groups, "relationship_quality", EncodingKind::kOrdinal);
  add_single(columns, groups, "depth_of_acquaintance", EncodingKind::kOrdinal);
  add_single(columns, groups, "formality_level", EncodingKind::kOrdinal);
  add_single(columns, groups, "shared_interests", EncodingKind::kOrdinal);
  const std::size_t age_group = groups.size();
  groups.emplace_back("age_difference");
  columns.push_back({"age_difference", EncodingKind::kNumeric, age_group});
  columns.push_back(
      {"age_difference_present", EncodingKind::kNumeric, age_group});
  return std::make_shared<const Schema>(std::move(columns), std::move(groups));
}

template <class E>
double* put_one_hot(double* out, E value) {
  constexpr std::size_t n = enum_size<E>();
  std::fill(out, out + n, 0.0);
  out[static_cast<std::size_t>(value)] = 1.0;
  return out + n;
}

}  // namespace

FeatureEncoder::FeatureEncoder() {
  static const SchemaPtr schema = build_feature_schema();
  schema_ = schema;
}

void FeatureEncoder::encode_into(const SocialSituationFeatures& f,
                                 std::span<double> out) const {
  if (out.size() != schema_->size()) {
    throw Error(ErrorCode::kSchemaMismatch, "output width mismatch");
  }
  double* p = out.data();
  p = put_one_hot(p, f.setting);
  p = put_one_hot(p, f.event_frequency);
  p = put_one_hot(p, f.initiator);
  p = put_one_hot(p, f.help_dynamic);
  p = put_one_hot(p, f.role);
  p = put_one_hot(p, f.hierarchy_level);
  *p++ = f.contact_frequency;
  *p++ = f.geographical_distance;
  *p++ = f.years_known;
  *p++ = f.relationship_quality;
  *p++ = f.depth_of_acquaintance;
  *p++ = f.formality_level;
  *p++ = f.shared_interests;
  *p++ = f.age_difference.value_or(0.0);
  *p++ = f.age_difference ? 1.0 : 0.0;
}

EncodedVector FeatureEncoder::encode(const SocialSituationFeatures& f) const {
  EncodedVector v{std::vector<double>(schema_->size()), schema_};
  encode_into(f, v.values);
  return v;
}

SchemaPtr profile_schema() {
  static const SchemaPtr schema = [] {
    std::vector<SchemaColumn> columns;
    std::vector<std::string> groups;
    for (auto name : kCharacteristicNames) {
      add_single(columns, groups, name, EncodingKind::kOrdinal);
    }
    return std::make_shared<const Schema>(std::move(columns),
                                          std::move(groups));
  }();
  return schema;
}

EncodedVector encode_profile(const SituationProfile& profile) {
  const auto& v = profile.values();
  return {std::vector<double>(v.begin(), v.end()), profile_schema()};
}

}  // namespace ssa
