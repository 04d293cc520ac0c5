#include "ssa/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ssa/csv.hpp"
#include "ssa/error.hpp"
#include "ssa/random.hpp"

namespace ssa {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

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

/// Resolved header: canonical column name -> position.
struct Header {
  std::map<std::string, std::size_t, std::less<>> position;
  std::size_t width = 0;

  const std::size_t* find(std::string_view name) const {
    auto it = position.find(name);
    return it == position.end() ? nullptr : &it->second;
  }
};

Header resolve_header(const std::vector<std::string>& raw,
                      const AdapterConfig* adapter,
                      const std::set<std::string, std::less<>>& known) {
  std::map<std::string, std::string> canonical_of;  // external -> canonical
  if (adapter) {
    for (const auto& [canonical, external] : adapter->column_for) {
      canonical_of[external] = canonical;
    }
  }
  Header header;
  header.width = raw.size();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::string name = trim(raw[i]);
    if (auto it = canonical_of.find(name); it != canonical_of.end()) {
      name = it->second;
    }
    if (!known.contains(name)) {
      if (adapter && adapter->ignore_unknown_columns) continue;
      throw Error(ErrorCode::kHeaderMismatch, name,
                  "unknown column '" + name + "'");
    }
    if (!header.position.emplace(name, i).second) {
      throw Error(ErrorCode::kHeaderMismatch, name,
                  "duplicate column '" + name + "'");
    }
  }
  return header;
}

std::string map_value(const AdapterConfig* adapter, std::string_view field,
                      std::string value) {
  if (!adapter) return value;
  auto f = adapter->value_map.find(std::string(field));
  if (f == adapter->value_map.end()) return value;
  auto v = f->second.find(value);
  return v == f->second.end() ? value : v->second;
}

std::string cell(const csv::Row& row, const Header& header,
                 std::string_view name, const AdapterConfig* adapter) {
  const std::size_t* pos = header.find(name);
  if (!pos) return {};
  return map_value(adapter, name, trim(row.fields[*pos]));
}

}  // namespace

const std::vector<std::string>& situation_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c = {"situation_id", "participant_id",
                                  "contact_id"};
    for (auto f : kFeatureFields) c.emplace_back(f);
    for (auto ch : kCharacteristicNames) c.emplace_back(ch);
    c.emplace_back("priority");
    return c;
  }();
  return columns;
}

const std::vector<std::string>& relationship_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c = {"participant_id", "contact_id"};
    for (auto f : kRelationshipFields) c.emplace_back(f);
    return c;
  }();
  return columns;
}

AdapterConfig AdapterConfig::parse(std::string_view text) {
  AdapterConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kFormatError, "",
                  "adapter line " + std::to_string(number) + ": missing '='");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.starts_with("column.")) {
      config.column_for[key.substr(7)] = value;
    } else if (key.starts_with("value.")) {
      const std::string rest = key.substr(6);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) {
        throw Error(ErrorCode::kFormatError, key,
                    "value remap needs value.<field>.<token>");
      }
      config.value_map[rest.substr(0, dot)][rest.substr(dot + 1)] = value;
    } else if (key == "scale") {
      if (value == "6") {
        config.scale = CharacteristicScale::kSixPoint;
      } else if (value == "7") {
        config.scale = CharacteristicScale::kSevenPoint;
      } else {
        throw Error(ErrorCode::kUnsupportedScale, key, "scale must be 6 or 7");
      }
    } else if (key == "ignore_unknown_columns") {
      config.ignore_unknown_columns = value == "true" || value == "1";
    } else {
      throw Error(ErrorCode::kFormatError, key, "unknown adapter key");
    }
  }
  return config;
}

AdapterConfig AdapterConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, path, "cannot open adapter file");
  return parse(csv::read_all(in));
}

std::vector<SituationRecord> parse_situations(std::string_view text,
                                              const ParseOptions& options) {
  const AdapterConfig* adapter = options.adapter;
  const CharacteristicScale scale =
      adapter && adapter->scale ? *adapter->scale : options.scale;
  const int hi = scale_max(scale);

  std::vector<csv::Row> rows;
  try {
    rows = csv::parse(text);
  } catch (const Error& e) {
    throw RowError({RowIssue{0, {{ErrorCode::kFormatError, "", e.what()}}}});
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kHeaderMismatch, "", "missing header row");
  }

  const auto& columns = situation_columns();
  const std::set<std::string, std::less<>> known(columns.begin(),
                                                 columns.end());
  const Header header = resolve_header(rows.front().fields, adapter, known);

  for (auto required : {"participant_id", "contact_id"}) {
    if (!header.find(required)) {
      throw Error(ErrorCode::kHeaderMismatch, required,
                  std::string("missing column '") + required + "'");
    }
  }
  for (auto f : kCueFields) {
    if (!header.find(f)) {
      throw Error(ErrorCode::kHeaderMismatch, std::string(f),
                  "missing column '" + std::string(f) + "'");
    }
  }
  for (auto c : kCharacteristicNames) {
    if (!header.find(c)) {
      throw Error(ErrorCode::kHeaderMismatch, std::string(c),
                  "missing column '" + std::string(c) + "'");
    }
  }
  if (!header.find("priority")) {
    throw Error(ErrorCode::kHeaderMismatch, "priority",
                "missing column 'priority'");
  }
  std::size_t rel_present = 0;
  for (auto f : kRelationshipFields) {
    if (f != "age_difference" && header.find(f)) ++rel_present;
  }
  const bool inline_relationships = rel_present > 0;
  if (inline_relationships && rel_present != kRelationshipFields.size() - 1) {
    for (auto f : kRelationshipFields) {
      if (f != "age_difference" && !header.find(f)) {
        throw Error(ErrorCode::kHeaderMismatch, std::string(f),
                    "missing column '" + std::string(f) + "'");
      }
    }
  }
  if (!inline_relationships && !options.relationships) {
    throw Error(ErrorCode::kHeaderMismatch, "role",
                "relationship columns absent and no relationships table given");
  }

  std::vector<SituationRecord> records;
  std::vector<RowIssue> issues;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    std::vector<Violation> v;
    if (row.fields.size() != header.width) {
      v.push_back({ErrorCode::kFormatError, "",
                   "expected " + std::to_string(header.width) +
                       " fields, found " + std::to_string(row.fields.size())});
      issues.push_back({r, std::move(v)});
      continue;
    }
    SituationRecord rec;
    rec.situation_id = cell(row, header, "situation_id", adapter);
    if (rec.situation_id.empty()) rec.situation_id = "s" + std::to_string(r);
    rec.participant_id = cell(row, header, "participant_id", adapter);
    rec.contact_id = cell(row, header, "contact_id", adapter);
    if (rec.participant_id.empty()) {
      v.push_back({ErrorCode::kMissingField, "participant_id", "empty id"});
    }
    if (rec.contact_id.empty()) {
      v.push_back({ErrorCode::kMissingField, "contact_id", "empty id"});
    }

    RawFields raw;
    for (auto f : kCueFields) {
      const std::string value = cell(row, header, f, adapter);
      if (!value.empty()) raw.emplace(std::string(f), value);
    }
    if (inline_relationships) {
      for (auto f : kRelationshipFields) {
        const std::string value = cell(row, header, f, adapter);
        if (!value.empty()) raw.emplace(std::string(f), value);
      }
    } else {
      auto it = options.relationships->find(
          {rec.participant_id, rec.contact_id});
      if (it == options.relationships->end()) {
        v.push_back({ErrorCode::kMissingRelationship, "contact_id",
                     "no relationship for (" + rec.participant_id + ", " +
                         rec.contact_id + ")"});
      } else {
        for (const auto& [k, value] : it->second.fields) raw.emplace(k, value);
      }
    }
    try {
      rec.features = validate_features(raw);
    } catch (const ValidationError& e) {
      v.insert(v.end(), e.violations().begin(), e.violations().end());
    }

    SituationProfile::Values values{};
    std::size_t filled = 0;
    for (std::size_t c = 0; c < kNumCharacteristics; ++c) {
      const std::string name(kCharacteristicNames[c]);
      const std::string text = cell(row, header, name, adapter);
      if (text.empty()) continue;
      ++filled;
      auto value = parse_real(text);
      if (!value) {
        v.push_back({ErrorCode::kInvalidValue, name, "not a number"});
      } else if (*value < 1.0 || *value > hi) {
        v.push_back({ErrorCode::kOutOfRange, name,
                     text + " outside [1, " + std::to_string(hi) + "]"});
      } else {
        values[c] = *value;
      }
    }
    const bool profile_ok = filled == kNumCharacteristics;
    if (filled != 0 && filled != kNumCharacteristics) {
      v.push_back({ErrorCode::kMissingField, "profile",
                   "partial situation profile"});
    }

    const std::string priority_text = cell(row, header, "priority", adapter);
    std::optional<double> priority;
    if (!priority_text.empty()) {
      priority = parse_real(priority_text);
      if (!priority) {
        v.push_back({ErrorCode::kInvalidValue, "priority", "not a number"});
      } else if (*priority < kPriorityMin || *priority > kPriorityMax) {
        v.push_back({ErrorCode::kOutOfRange, "priority",
                     priority_text + " outside [1, 7]"});
        priority.reset();
      }
    }
    if (options.require_labels && filled == 0 && priority_text.empty()) {
      v.push_back({ErrorCode::kMissingLabels, "priority",
                   "record has neither a profile nor a priority"});
    }

    if (!v.empty()) {
      issues.push_back({r, std::move(v)});
      continue;
    }
    if (profile_ok) rec.profile.emplace(values, scale);
    if (priority) rec.priority.emplace(*priority);
    records.push_back(std::move(rec));
  }
  if (!issues.empty()) throw RowError(std::move(issues));
  return records;
}

std::vector<SituationRecord> parse_situations(std::istream& in,
                                              const ParseOptions& options) {
  return parse_situations(csv::read_all(in), options);
}

RelationshipTable parse_relationships(std::string_view text,
                                      const AdapterConfig* adapter) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::parse(text);
  } catch (const Error& e) {
    throw RowError({RowIssue{0, {{ErrorCode::kFormatError, "", e.what()}}}});
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kHeaderMismatch, "", "missing header row");
  }
  const auto& columns = relationship_columns();
  const std::set<std::string, std::less<>> known(columns.begin(),
                                                 columns.end());
  const Header header = resolve_header(rows.front().fields, adapter, known);
  for (const auto& c : columns) {
    if (c != "age_difference" && !header.find(c)) {
      throw Error(ErrorCode::kHeaderMismatch, c, "missing column '" + c + "'");
    }
  }

  RelationshipTable table;
  std::vector<RowIssue> issues;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    std::vector<Violation> v;
    if (row.fields.size() != header.width) {
      issues.push_back({r, {{ErrorCode::kFormatError, "", "wrong field count"}}});
      continue;
    }
    Relationship rel;
    rel.participant_id = cell(row, header, "participant_id", adapter);
    rel.contact_id = cell(row, header, "contact_id", adapter);
    if (rel.participant_id.empty() || rel.contact_id.empty()) {
      v.push_back({ErrorCode::kMissingField, "contact_id", "empty id"});
    }
    RawFields probe = {{"setting", "other"},
                       {"event_frequency", "first_time"},
                       {"initiator", "user"},
                       {"help_dynamic", "neither"}};
    for (auto f : kRelationshipFields) {
      const std::string value = cell(row, header, f, adapter);
      if (!value.empty()) {
        rel.fields.emplace(std::string(f), value);
        probe.emplace(std::string(f), value);
      }
    }
    try {
      validate_features(probe);
    } catch (const ValidationError& e) {
      v.insert(v.end(), e.violations().begin(), e.violations().end());
    }
    auto key = std::make_pair(rel.participant_id, rel.contact_id);
    if (v.empty() && table.contains(key)) {
      v.push_back({ErrorCode::kInvalidValue, "contact_id",
                   "duplicate relationship"});
    }
    if (!v.empty()) {
      issues.push_back({r, std::move(v)});
      continue;
    }
    table.emplace(std::move(key), std::move(rel));
  }
  if (!issues.empty()) throw RowError(std::move(issues));
  return table;
}

namespace {

std::vector<std::string> record_fields(const SituationRecord& rec) {
  std::vector<std::string> out = {rec.situation_id, rec.participant_id,
                                  rec.contact_id};
  for (auto f : kFeatureFields) out.push_back(field_text(rec.features, f));
  for (std::size_t c = 0; c < kNumCharacteristics; ++c) {
    out.push_back(rec.profile ? format_number(rec.profile->values()[c])
                              : std::string{});
  }
  out.push_back(rec.priority ? format_number(rec.priority->value())
                             : std::string{});
  return out;
}

}  // namespace

void write_situations(std::ostream& out,
                      const std::vector<SituationRecord>& records) {
  csv::write_row(out, situation_columns());
  for (const auto& rec : records) csv::write_row(out, record_fields(rec));
}

void write_relationships(std::ostream& out, const RelationshipTable& table) {
  csv::write_row(out, relationship_columns());
  for (const auto& [key, rel] : table) {
    std::vector<std::string> row = {rel.participant_id, rel.contact_id};
    for (auto f : kRelationshipFields) {
      auto it = rel.fields.find(f);
      row.push_back(it == rel.fields.end() ? std::string{} : it->second);
    }
    csv::write_row(out, row);
  }
}

std::uint64_t fingerprint(const std::vector<SituationRecord>& records) {
  std::ostringstream out;
  write_situations(out, records);
  const std::string text = out.str();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fp));
  return buf;
}

std::vector<SituationRecord> load_situations(const std::string& path,
                                             const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, path, "cannot open " + path);
  return parse_situations(in, options);
}

SplitIndices split_indices(const std::vector<SituationRecord>& records,
                           const SplitSpec& spec) {
  const std::size_t n = records.size();
  if (n < 5) {
    throw Error(ErrorCode::kTooFewRecords, "records",
                "a split needs at least 5 records");
  }
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "test_fraction",
                "test fraction must lie in (0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(
      std::llround(spec.test_fraction * static_cast<double>(n)));
  Rng rng(spec.seed);
  std::vector<char> in_test(n, 0);

  if (!spec.group_by_participant) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = 1;
  } else {
    std::vector<std::string> participants;
    for (const auto& r : records) participants.push_back(r.participant_id);
    std::sort(participants.begin(), participants.end());
    participants.erase(std::unique(participants.begin(), participants.end()),
                       participants.end());
    rng.shuffle(std::span<std::string>(participants));
    std::set<std::string> chosen;
    std::size_t count = 0;
    for (const auto& p : participants) {
      if (count >= n_test) break;
      chosen.insert(p);
      for (const auto& r : records) count += r.participant_id == p;
    }
    for (std::size_t i = 0; i < n; ++i) {
      in_test[i] = chosen.contains(records[i].participant_id);
    }
  }

  SplitIndices out;
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? out.test : out.train).push_back(i);
  }
  return out;
}

std::pair<std::vector<SituationRecord>, std::vector<SituationRecord>> split(
    const std::vector<SituationRecord>& records, const SplitSpec& spec) {
  const SplitIndices idx = split_indices(records, spec);
  std::vector<SituationRecord> train, test;
  train.reserve(idx.train.size());
  test.reserve(idx.test.size());
  for (auto i : idx.train) train.push_back(records[i]);
  for (auto i : idx.test) test.push_back(records[i]);
  return {std::move(train), std::move(test)};
}

FeatureMatrix encode_features(const std::vector<SituationRecord>& records) {
  const FeatureEncoder encoder;
  FeatureMatrix m(encoder.schema(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    encoder.encode_into(records[i].features, m.row(i));
  }
  return m;
}

FeatureMatrix encode_profiles(const std::vector<SituationRecord>& records) {
  FeatureMatrix m(profile_schema(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].profile) {
      throw Error(ErrorCode::kMissingLabels, "profile",
                  "record " + records[i].situation_id + " has no profile");
    }
    const auto& v = records[i].profile->values();
    std::copy(v.begin(), v.end(), m.row(i).begin());
  }
  return m;
}

}  // namespace ssa
