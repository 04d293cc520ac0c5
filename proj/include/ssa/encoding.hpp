#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssa/domain.hpp"

namespace ssa {

enum class EncodingKind { kOrdinal, kOneHotComponent, kNumeric };

std::string_view to_string(EncodingKind kind);
std::optional<EncodingKind> parse_encoding_kind(std::string_view text);

struct SchemaColumn {
  std::string name;
  EncodingKind kind;
  std::size_t group;  // index of the source feature this column belongs to

  friend bool operator==(const SchemaColumn&, const SchemaColumn&) = default;
};

/// Ordered list of encoded columns and the source-feature groups they
/// collapse into. Attribution treats each group as one player.
class Schema {
 public:
  Schema() = default;
  Schema(std::vector<SchemaColumn> columns, std::vector<std::string> groups);

  std::size_t size() const noexcept { return columns_.size(); }
  std::size_t group_count() const noexcept { return groups_.size(); }
  const SchemaColumn& column(std::size_t i) const { return columns_.at(i); }
  const std::vector<SchemaColumn>& columns() const noexcept { return columns_; }
  const std::string& group_name(std::size_t g) const { return groups_.at(g); }
  const std::vector<std::string>& groups() const noexcept { return groups_; }
  std::size_t group_of(std::size_t column) const {
    return columns_[column].group;
  }
  const std::vector<std::size_t>& group_columns(std::size_t g) const {
    return group_columns_.at(g);
  }

  std::optional<std::size_t> find_column(std::string_view name) const;
  std::optional<std::size_t> find_group(std::string_view name) const;

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.columns_ == b.columns_ && a.groups_ == b.groups_;
  }

 private:
  std::vector<SchemaColumn> columns_;
  std::vector<std::string> groups_;
  std::vector<std::vector<std::size_t>> group_columns_;
};

using SchemaPtr = std::shared_ptr<const Schema>;

struct EncodedVector {
  std::vector<double> values;
  SchemaPtr schema;
};

/// Dense row-major design matrix sharing one schema.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(SchemaPtr schema, std::size_t rows);
  static FeatureMatrix from_vectors(std::span<const EncodedVector> vectors);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const SchemaPtr& schema() const noexcept { return schema_; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  void append(std::span<const double> values);
  FeatureMatrix select(std::span<const std::size_t> rows) const;
  EncodedVector vector(std::size_t r) const;

 private:
  SchemaPtr schema_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Maps Level-1 features onto a fixed numeric vector: ordinals and numerics
/// pass through, nominal enums become one-hot groups, and the optional age
/// difference contributes a value plus a presence indicator.
class FeatureEncoder {
 public:
  FeatureEncoder();

  const SchemaPtr& schema() const noexcept { return schema_; }
  EncodedVector encode(const SocialSituationFeatures& features) const;
  void encode_into(const SocialSituationFeatures& features,
                   std::span<double> out) const;

 private:
  SchemaPtr schema_;
};

/// Schema for the eight-component profile input of the priority model.
SchemaPtr profile_schema();
EncodedVector encode_profile(const SituationProfile& profile);

}  // namespace ssa
