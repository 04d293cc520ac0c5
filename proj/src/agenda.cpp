#include "ssa/agenda.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ssa/encoding.hpp"
#include "ssa/error.hpp"
#include "ssa/model_io.hpp"

namespace ssa {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Timestamps

namespace {

// Days since 1970-01-01 of a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(std::int64_t y, unsigned m) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  out = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    out = out * 10 + (s[i] - '0');
  }
  return true;
}

}  // namespace

Timestamp Timestamp::parse(std::string_view text, std::string_view field) {
  auto fail = [&]() -> Timestamp {
    throw Error(ErrorCode::kInvalidValue, std::string(field),
                "'" + std::string(text) +
                    "' is not an RFC 3339 timestamp with an offset");
  };
  int year, month, day, hour, minute, second;
  if (!read_digits(text, 0, 4, year) || text.size() < 20 || text[4] != '-' ||
      !read_digits(text, 5, 2, month) || text[7] != '-' ||
      !read_digits(text, 8, 2, day) || (text[10] != 'T' && text[10] != 't') ||
      !read_digits(text, 11, 2, hour) || text[13] != ':' ||
      !read_digits(text, 14, 2, minute) || text[16] != ':' ||
      !read_digits(text, 17, 2, second)) {
    return fail();
  }
  if (month < 1 || month > 12 || day < 1 ||
      static_cast<unsigned>(day) > days_in_month(year, month) || hour > 23 ||
      minute > 59 || second > 60) {
    return fail();
  }
  std::size_t pos = 19;
  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return fail();
    for (int i = digits; i < 3; ++i) millis *= 10;
  }
  int offset_minutes = 0;
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '+' ? 1 : -1;
    int oh, om;
    if (!read_digits(text, pos + 1, 2, oh) || pos + 3 >= text.size() ||
        text[pos + 3] != ':' || !read_digits(text, pos + 4, 2, om) || oh > 23 ||
        om > 59) {
      return fail();
    }
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    return fail();
  }
  if (pos != text.size()) return fail();
  const std::int64_t days = days_from_civil(year, month, day);
  const std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second -
                            offset_minutes * 60;
  return {secs * 1000 + millis, std::string(text)};
}

Timestamp Timestamp::from_epoch_ms(std::int64_t ms) {
  std::int64_t secs = ms / 1000;
  std::int64_t millis = ms % 1000;
  if (millis < 0) {
    millis += 1000;
    --secs;
  }
  std::int64_t days = secs / 86400;
  std::int64_t rem = secs % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[40];
  if (millis) {
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60), static_cast<long long>(millis));
  } else {
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60));
  }
  return {ms, buf};
}

// ---------------------------------------------------------------------------
// Conflicts

std::string conflict_id(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  return "c-" + std::string(a) + "-" + std::string(b);
}

std::vector<Conflict> detect_conflicts(const std::vector<Meeting>& meetings) {
  std::vector<Conflict> out;
  for (std::size_t i = 0; i < meetings.size(); ++i) {
    for (std::size_t j = i + 1; j < meetings.size(); ++j) {
      const Meeting* a = &meetings[i];
      const Meeting* b = &meetings[j];
      if (a->id == b->id) continue;
      const auto lo = std::max(a->start.epoch_ms, b->start.epoch_ms);
      const auto hi = std::min(a->end.epoch_ms, b->end.epoch_ms);
      if (lo >= hi) continue;
      if (b->id < a->id) std::swap(a, b);
      out.push_back({conflict_id(a->id, b->id), a->id, b->id,
                     Timestamp::from_epoch_ms(lo), Timestamp::from_epoch_ms(hi)});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Conflict& x, const Conflict& y) { return x.id < y.id; });
  return out;
}

std::vector<Meeting> AgendaState::meeting_list() const {
  std::vector<Meeting> out;
  out.reserve(meetings.size());
  for (const auto& [id, m] : meetings) out.push_back(m);
  return out;
}

std::optional<Conflict> AgendaState::find_conflict(std::string_view id) const {
  for (const auto& c : detect_conflicts(meeting_list())) {
    if (c.id == id) return c;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

std::string_view to_string(Decision d) {
  return d == Decision::kAccepted ? "accepted" : "overrode";
}

std::optional<Decision> parse_decision(std::string_view s) {
  if (s == "accepted") return Decision::kAccepted;
  if (s == "overrode") return Decision::kOverrode;
  return std::nullopt;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

template <class E>
E token_or_throw(const std::string& field, const std::string& value) {
  auto parsed = parse_token<E>(value);
  if (!parsed) {
    throw Error(ErrorCode::kUnknownEnumValue, field,
                "'" + value + "' is not a valid " + field);
  }
  return *parsed;
}

Meeting meeting_from_json(const json& j) {
  Meeting m;
  m.id = j.at("id").get<std::string>();
  m.title = j.at("title").get<std::string>();
  m.start = Timestamp::parse(j.at("start").get<std::string>(), "start");
  m.end = Timestamp::parse(j.at("end").get<std::string>(), "end");
  m.contact_id = j.at("contact_id").get<std::string>();
  m.setting = token_or_throw<Setting>("setting", j.at("setting"));
  m.event_frequency =
      token_or_throw<EventFrequency>("event_frequency", j.at("event_frequency"));
  m.initiator = token_or_throw<Initiator>("initiator", j.at("initiator"));
  m.help_dynamic = token_or_throw<HelpDynamic>("help_dynamic", j.at("help_dynamic"));
  m.created_at = Timestamp::parse(j.at("created_at").get<std::string>(), "created_at");
  m.sequence = j.at("sequence").get<std::uint64_t>();
  return m;
}

FeedbackEvent feedback_from_json(const json& j) {
  FeedbackEvent e;
  e.conflict_id = j.at("conflict_id").get<std::string>();
  e.suggested_meeting_id = j.at("suggested_meeting_id").get<std::string>();
  const auto d = parse_decision(j.at("decision").get<std::string>());
  if (!d) throw Error(ErrorCode::kUnknownEnumValue, "decision", "bad decision");
  e.decision = *d;
  e.shown_styles = j.at("shown_styles").get<std::vector<std::string>>();
  e.timestamp = Timestamp::parse(j.at("timestamp").get<std::string>());
  return e;
}

}  // namespace

json to_json(const Meeting& m) {
  return {{"id", m.id},
          {"title", m.title},
          {"start", m.start.text},
          {"end", m.end.text},
          {"contact_id", m.contact_id},
          {"setting", to_token(m.setting)},
          {"event_frequency", to_token(m.event_frequency)},
          {"initiator", to_token(m.initiator)},
          {"help_dynamic", to_token(m.help_dynamic)},
          {"created_at", m.created_at.text},
          {"sequence", m.sequence}};
}

json to_json(const Conflict& c, const AgendaState& state) {
  json meetings = json::array();
  for (const auto& id : {c.meeting_a, c.meeting_b}) {
    auto it = state.meetings.find(id);
    if (it != state.meetings.end()) meetings.push_back(to_json(it->second));
  }
  return {{"id", c.id},
          {"meeting_ids", {c.meeting_a, c.meeting_b}},
          {"overlap", {{"start", c.overlap_start.text}, {"end", c.overlap_end.text}}},
          {"meetings", meetings}};
}

json to_json(const FeedbackEvent& e) {
  return {{"conflict_id", e.conflict_id},
          {"suggested_meeting_id", e.suggested_meeting_id},
          {"decision", to_string(e.decision)},
          {"shown_styles", e.shown_styles},
          {"timestamp", e.timestamp.text}};
}

json state_to_json(const AgendaState& s) {
  json contacts = json::array();
  for (const auto& [id, c] : s.contacts) {
    contacts.push_back({{"id", c.id}, {"name", c.name}});
  }
  json relationships = json::object();
  for (const auto& [id, fields] : s.relationships) {
    relationships[id] = json(fields);
  }
  json meetings = json::array();
  for (const auto& [id, m] : s.meetings) meetings.push_back(to_json(m));
  json feedback = json::array();
  for (const auto& e : s.feedback) feedback.push_back(to_json(e));
  return {{"contacts", contacts},
          {"relationships", relationships},
          {"meetings", meetings},
          {"feedback", feedback},
          {"next_meeting", s.next_meeting},
          {"last_seq", s.last_seq}};
}

AgendaState state_from_json(const json& j) {
  AgendaState s;
  for (const auto& c : j.at("contacts")) {
    Contact contact{c.at("id").get<std::string>(), c.at("name").get<std::string>()};
    s.contacts.emplace(contact.id, contact);
  }
  for (const auto& [id, fields] : j.at("relationships").items()) {
    RawFields raw;
    for (const auto& [k, v] : fields.items()) raw.emplace(k, v.get<std::string>());
    s.relationships.emplace(id, std::move(raw));
  }
  for (const auto& m : j.at("meetings")) {
    Meeting meeting = meeting_from_json(m);
    s.meetings.emplace(meeting.id, std::move(meeting));
  }
  for (const auto& e : j.at("feedback")) s.feedback.push_back(feedback_from_json(e));
  s.next_meeting = j.at("next_meeting").get<std::uint64_t>();
  s.last_seq = j.at("last_seq").get<std::uint64_t>();
  return s;
}

RawFields validate_relationship(const RawFields& fields) {
  std::vector<Violation> violations;
  RawFields raw;
  for (const auto& [key, value] : fields) {
    if (std::find(kRelationshipFields.begin(), kRelationshipFields.end(), key) ==
        kRelationshipFields.end()) {
      violations.push_back({ErrorCode::kInvalidValue, key,
                            "'" + key + "' is not a relationship field"});
      continue;
    }
    raw.emplace(key, value);
  }
  RawFields probe = raw;
  probe.emplace("setting", "work");
  probe.emplace("event_frequency", "weekly");
  probe.emplace("initiator", "user");
  probe.emplace("help_dynamic", "neither");
  try {
    validate_features(probe);
  } catch (const ValidationError& e) {
    for (const auto& v : e.violations()) violations.push_back(v);
  } catch (const Error& e) {
    violations.push_back({e.code(), e.field(), e.what()});
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return raw;
}

void apply_operation(AgendaState& state, const json& op) {
  const auto kind = op.at("op").get<std::string>();
  if (kind == "put_contact") {
    Contact c{op.at("id").get<std::string>(), op.at("name").get<std::string>()};
    if (c.id.empty()) throw Error(ErrorCode::kMissingField, "id", "empty contact id");
    state.contacts[c.id] = c;
  } else if (kind == "put_relationship") {
    const auto id = op.at("contact_id").get<std::string>();
    if (!state.contacts.count(id)) {
      throw Error(ErrorCode::kUnknownContact, id, "unknown contact '" + id + "'");
    }
    RawFields raw;
    for (const auto& [k, v] : op.at("fields").items()) raw.emplace(k, v.get<std::string>());
    state.relationships[id] = validate_relationship(raw);
  } else if (kind == "add_meeting") {
    Meeting m = meeting_from_json(op.at("meeting"));
    if (!state.contacts.count(m.contact_id)) {
      throw Error(ErrorCode::kUnknownContact, m.contact_id,
                  "unknown contact '" + m.contact_id + "'");
    }
    if (!(m.start.epoch_ms < m.end.epoch_ms)) {
      throw Error(ErrorCode::kInvalidValue, "end", "meeting must end after it starts");
    }
    if (state.meetings.count(m.id)) {
      throw Error(ErrorCode::kInvalidValue, "id", "meeting '" + m.id + "' exists");
    }
    state.next_meeting = std::max(state.next_meeting, m.sequence + 1);
    state.meetings.emplace(m.id, std::move(m));
  } else if (kind == "feedback") {
    FeedbackEvent e = feedback_from_json(op.at("event"));
    const auto conflict = state.find_conflict(e.conflict_id);
    if (!conflict) {
      throw Error(ErrorCode::kUnknownConflict, e.conflict_id,
                  "unknown conflict '" + e.conflict_id + "'");
    }
    if (e.suggested_meeting_id != conflict->meeting_a &&
        e.suggested_meeting_id != conflict->meeting_b) {
      throw Error(ErrorCode::kInvalidValue, "suggested_meeting_id",
                  "meeting is not part of the conflict");
    }
    state.feedback.push_back(std::move(e));
  } else {
    throw Error(ErrorCode::kFormatError, "op", "unknown operation '" + kind + "'");
  }
  state.last_seq = op.at("seq").get<std::uint64_t>();
}

// ---------------------------------------------------------------------------
// Store

namespace {

[[noreturn]] void storage_failure(const std::string& what) {
  throw Error(ErrorCode::kStorageFailure, "store",
              what + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      storage_failure("write failed");
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void write_durable(const fs::path& path, std::string_view contents, bool sync) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) storage_failure("cannot open " + tmp.string());
  write_all(fd, contents);
  if (sync && ::fsync(fd) != 0) storage_failure("fsync failed");
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) storage_failure("rename failed");
  if (sync) {
    const int dir = ::open(path.parent_path().c_str(), O_RDONLY);
    if (dir >= 0) {
      ::fsync(dir);
      ::close(dir);
    }
  }
}

}  // namespace

Store::Store(StoreOptions options) : options_(std::move(options)) {
  std::error_code ec;
  fs::create_directories(options_.directory, ec);
  if (ec) {
    throw Error(ErrorCode::kStorageFailure, "store",
                "cannot create " + options_.directory + ": " + ec.message());
  }
  replay();
  const fs::path log = fs::path(options_.directory) / "agenda.log";
  log_fd_ = ::open(log.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (log_fd_ < 0) storage_failure("cannot open " + log.string());
}

Store::~Store() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

void Store::replay() {
  const fs::path dir(options_.directory);
  const fs::path snapshot = dir / "snapshot.json";
  if (fs::exists(snapshot)) {
    try {
      state_ = state_from_json(json::parse(read_file(snapshot.string())));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kStorageFailure, "snapshot",
                  std::string("unreadable snapshot: ") + e.what());
    }
  }
  const fs::path log = dir / "agenda.log";
  if (!fs::exists(log)) return;
  const std::string text = read_file(log.string());
  std::size_t pos = 0;
  std::size_t good_end = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::string line = text.substr(pos, complete ? nl - pos : std::string::npos);
    json op;
    try {
      op = json::parse(line);
    } catch (const json::exception&) {
      if (!complete) break;  // torn final append
      throw Error(ErrorCode::kStorageFailure, "log",
                  "corrupt log entry at byte " + std::to_string(pos));
    }
    if (!complete) break;
    if (op.at("seq").get<std::uint64_t>() > state_.last_seq) {
      apply_operation(state_, op);
      ++since_snapshot_;
    }
    ++log_entries_;
    pos = nl + 1;
    good_end = pos;
  }
  if (good_end != text.size()) {
    fs::resize_file(log, good_end);
  }
}

AgendaState Store::state() const {
  std::shared_lock lock(mutex_);
  return state_;
}

std::size_t Store::log_entries() const {
  std::shared_lock lock(mutex_);
  return log_entries_;
}

void Store::append(const json& op) {
  write_all(log_fd_, op.dump() + "\n");
  if (options_.sync && ::fsync(log_fd_) != 0) storage_failure("fsync failed");
  ++log_entries_;
}

void Store::write_snapshot() {
  const fs::path dir(options_.directory);
  write_durable(dir / "snapshot.json", state_to_json(state_).dump() + "\n",
                options_.sync);
  if (::ftruncate(log_fd_, 0) != 0) storage_failure("cannot truncate log");
  if (options_.sync) ::fsync(log_fd_);
  log_entries_ = 0;
  since_snapshot_ = 0;
}

json Store::commit(json op) {
  op["seq"] = state_.last_seq + 1;
  AgendaState next = state_;
  apply_operation(next, op);
  append(op);
  state_ = std::move(next);
  if (options_.snapshot_every > 0 && ++since_snapshot_ >= options_.snapshot_every) {
    write_snapshot();
  }
  return op;
}

void Store::compact() {
  std::unique_lock lock(mutex_);
  write_snapshot();
}

Contact Store::put_contact(Contact contact) {
  std::unique_lock lock(mutex_);
  commit({{"op", "put_contact"}, {"id", contact.id}, {"name", contact.name}});
  return contact;
}

RawFields Store::put_relationship(const std::string& contact_id, RawFields fields) {
  std::unique_lock lock(mutex_);
  commit({{"op", "put_relationship"}, {"contact_id", contact_id},
          {"fields", json(fields)}});
  return state_.relationships.at(contact_id);
}

Meeting Store::add_meeting(Meeting draft) {
  std::unique_lock lock(mutex_);
  draft.sequence = state_.next_meeting;
  if (draft.id.empty()) draft.id = "m-" + std::to_string(draft.sequence);
  commit({{"op", "add_meeting"}, {"meeting", to_json(draft)}});
  return state_.meetings.at(draft.id);
}

FeedbackEvent Store::record_feedback(FeedbackEvent event) {
  std::unique_lock lock(mutex_);
  commit({{"op", "feedback"}, {"event", to_json(event)}});
  return event;
}

// ---------------------------------------------------------------------------
// Service

std::shared_ptr<const ModelBundle> load_model_bundle(
    const std::string& model_dir, const std::string& lexicon_path) {
  auto bundle = std::make_shared<ModelBundle>(
      ModelBundle{load_pipeline(model_dir), Lexicon::load(lexicon_path), model_dir});
  if (!bundle->pipeline.salience) {
    throw Error(ErrorCode::kFormatError, "salience",
                "model directory has no stored salience report");
  }
  return bundle;
}

AgendaService::AgendaService(Store& store, ServiceOptions options)
    : store_(store), options_(std::move(options)) {}

void AgendaService::set_models(std::shared_ptr<const ModelBundle> models) {
  std::lock_guard lock(models_mutex_);
  models_ = std::move(models);
}

std::shared_ptr<const ModelBundle> AgendaService::models() const {
  std::lock_guard lock(models_mutex_);
  return models_;
}

Timestamp AgendaService::now() const {
  if (options_.clock) return options_.clock();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count();
  return Timestamp::from_epoch_ms(ms);
}

namespace {

json envelope(json body) {
  body["schema_version"] = kApiSchemaVersion;
  return body;
}

RawFields fields_from_body(const json& body) {
  if (!body.is_object()) {
    throw Error(ErrorCode::kFormatError, "body", "expected a JSON object");
  }
  RawFields raw;
  for (const auto& [k, v] : body.items()) {
    if (v.is_null()) continue;
    raw.emplace(k, scalar_text(v));
  }
  return raw;
}

json attribution_summary(const Attribution& a, const Schema& schema,
                         std::size_t top) {
  std::vector<std::size_t> order(schema.group_count());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(a.grouped_phi[x]) > std::abs(a.grouped_phi[y]);
  });
  json features = json::array();
  for (std::size_t i = 0; i < std::min(top, order.size()); ++i) {
    features.push_back({{"feature", schema.group_name(order[i])},
                        {"phi", a.grouped_phi[order[i]]}});
  }
  return {{"base_value", a.base_value}, {"top_features", features}};
}

json explanation_json(const Explanation& e) {
  return {{"style", to_string(e.style)},
          {"text", e.text},
          {"cited_feature", e.cited_feature},
          {"template_id", e.template_id}};
}

}  // namespace

SocialSituationFeatures AgendaService::meeting_features(const AgendaState& state,
                                                        const Meeting& m) {
  auto it = state.relationships.find(m.contact_id);
  if (it == state.relationships.end()) {
    throw Error(ErrorCode::kMissingRelationship, m.contact_id,
                "no relationship stored for contact '" + m.contact_id + "'");
  }
  RawFields raw = it->second;
  raw["setting"] = std::string(to_token(m.setting));
  raw["event_frequency"] = std::string(to_token(m.event_frequency));
  raw["initiator"] = std::string(to_token(m.initiator));
  raw["help_dynamic"] = std::string(to_token(m.help_dynamic));
  return validate_features(raw);
}

json AgendaService::put_contact(const std::string& id, const json& body) {
  if (!body.is_object()) {
    throw Error(ErrorCode::kFormatError, "body", "expected a JSON object");
  }
  std::string name = id;
  if (body.contains("name")) {
    if (!body.at("name").is_string()) {
      throw Error(ErrorCode::kInvalidValue, "name", "name must be a string");
    }
    name = body.at("name").get<std::string>();
  }
  const Contact c = store_.put_contact({id, name});
  return envelope({{"contact", {{"id", c.id}, {"name", c.name}}}});
}

json AgendaService::put_relationship(const std::string& id, const json& body) {
  const RawFields raw = validate_relationship(fields_from_body(body));
  const RawFields stored = store_.put_relationship(id, raw);
  return envelope({{"contact_id", id}, {"relationship", json(stored)}});
}

json AgendaService::add_meeting(const json& body) {
  if (!body.is_object()) {
    throw Error(ErrorCode::kFormatError, "body", "expected a JSON object");
  }
  std::vector<Violation> violations;
  auto text = [&](const char* field, bool required) -> std::string {
    auto it = body.find(field);
    if (it == body.end() || it->is_null()) {
      if (required) {
        violations.push_back({ErrorCode::kMissingField, field,
                              std::string("missing field '") + field + "'"});
      }
      return {};
    }
    if (!it->is_string()) {
      violations.push_back({ErrorCode::kInvalidValue, field,
                            std::string(field) + " must be a string"});
      return {};
    }
    return it->get<std::string>();
  };
  Meeting m;
  m.id = text("id", false);
  m.title = text("title", true);
  m.contact_id = text("contact_id", true);
  auto stamp = [&](const char* field, bool required, Timestamp& out) {
    const std::string s = text(field, required);
    if (s.empty()) return false;
    try {
      out = Timestamp::parse(s, field);
    } catch (const Error& e) {
      violations.push_back({e.code(), field, e.what()});
      return false;
    }
    return true;
  };
  const bool has_start = stamp("start", true, m.start);
  const bool has_end = stamp("end", true, m.end);
  if (!stamp("created_at", false, m.created_at)) m.created_at = now();
  if (has_start && has_end && !(m.start.epoch_ms < m.end.epoch_ms)) {
    violations.push_back({ErrorCode::kInvalidValue, "end",
                          "meeting must end after it starts"});
  }
  auto cue = [&]<class E>(const char* field, E& out) {
    const std::string s = text(field, true);
    if (s.empty()) return;
    if (auto v = parse_token<E>(s)) {
      out = *v;
    } else {
      violations.push_back({ErrorCode::kUnknownEnumValue, field,
                            "'" + s + "' is not a valid " + field});
    }
  };
  cue("setting", m.setting);
  cue("event_frequency", m.event_frequency);
  cue("initiator", m.initiator);
  cue("help_dynamic", m.help_dynamic);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  const Meeting stored = store_.add_meeting(std::move(m));
  return envelope({{"meeting", to_json(stored)}});
}

json AgendaService::list_conflicts() const {
  return store_.read([](const AgendaState& state) {
    json list = json::array();
    for (const auto& c : detect_conflicts(state.meeting_list())) {
      list.push_back(to_json(c, state));
    }
    return envelope({{"conflicts", list}});
  });
}

json AgendaService::suggestion(const std::string& id) const {
  const auto bundle = models();
  if (!bundle) {
    throw Error(ErrorCode::kModelNotLoaded, "models", "no pipeline model loaded");
  }
  const AgendaState state = store_.state();
  const auto conflict = state.find_conflict(id);
  if (!conflict) {
    throw Error(ErrorCode::kUnknownConflict, id, "unknown conflict '" + id + "'");
  }
  const PipelineModel& pipeline = bundle->pipeline;
  const std::array<const Meeting*, 2> meetings = {
      &state.meetings.at(conflict->meeting_a), &state.meetings.at(conflict->meeting_b)};

  ScenarioPair pair;
  pair.id = conflict->id;
  pair.user = options_.user;
  std::array<double, 2> priority{};
  json priorities = json::object();
  json profiles = json::object();
  json attribution = json::object();
  const FeatureEncoder encoder;
  for (std::size_t i = 0; i < 2; ++i) {
    const Meeting& m = *meetings[i];
    const auto features = meeting_features(state, m);
    const auto profile = predict_profile(pipeline, features);
    priority[i] = predict_priority(pipeline, profile).value();
    ScenarioMeeting& sm = pair.meetings[i];
    sm.label = m.title;
    sm.features = features;
    sm.profile = profile;
    priorities[m.id] = priority[i];
    json p = json::object();
    for (std::size_t c = 0; c < kNumCharacteristics; ++c) {
      p[std::string(kCharacteristicNames[c])] = profile.values()[c];
    }
    profiles[m.id] = p;
    const auto l1 = shap_fast(pipeline.direct_model(), encoder.encode(features));
    const auto l2 = shap_fast(pipeline.priority_model(), encode_profile(profile));
    attribution[m.id] = {
        {"level1", attribution_summary(l1, *encoder.schema(),
                                       options_.attribution_features)},
        {"level2", attribution_summary(l2, *profile_schema(),
                                       options_.attribution_features)}};
  }
  if (pair.meetings[0].label == pair.meetings[1].label) {
    for (std::size_t i = 0; i < 2; ++i) {
      pair.meetings[i].label += " (" + meetings[i]->id + ")";
    }
  }
  const auto created = [](const Meeting& m) {
    return std::make_pair(m.created_at.epoch_ms, m.sequence);
  };
  const std::size_t earlier = created(*meetings[1]) < created(*meetings[0]) ? 1 : 0;
  const Suggestion s =
      decide_free_form(pair, priority, earlier, *pipeline.salience);
  const auto l1 = render_explanation(s, ExplanationStyle::kLevel1, pair, bundle->lexicon);
  const auto l2 = render_explanation(s, ExplanationStyle::kLevel2, pair, bundle->lexicon);

  json suggestion = {
      {"chosen_meeting_id", meetings[s.chosen]->id},
      {"other_meeting_id", meetings[1 - s.chosen]->id},
      {"tie_breaker_level", to_string(s.tie_breaker_level)},
      {"level1_feature", s.level1_feature ? json(*s.level1_feature) : json(nullptr)},
      {"level2_feature",
       s.level2_feature ? json(std::string(to_name(*s.level2_feature))) : json(nullptr)},
      {"level1_direction", to_string(s.level1_direction)},
      {"level2_direction", to_string(s.level2_direction)},
      {"action", "suggest_only"}};
  return envelope({{"conflict", to_json(*conflict, state)},
                   {"suggestion", suggestion},
                   {"predicted_priorities", priorities},
                   {"predicted_profiles", profiles},
                   {"explanations",
                    {{"level1", explanation_json(l1)}, {"level2", explanation_json(l2)}}},
                   {"attribution", attribution}});
}

json AgendaService::record_feedback(const std::string& id, const json& body) {
  if (!body.is_object()) {
    throw Error(ErrorCode::kFormatError, "body", "expected a JSON object");
  }
  std::vector<Violation> violations;
  FeedbackEvent e;
  e.conflict_id = id;
  if (!body.contains("suggested_meeting_id") || !body["suggested_meeting_id"].is_string()) {
    violations.push_back({ErrorCode::kMissingField, "suggested_meeting_id",
                          "missing field 'suggested_meeting_id'"});
  } else {
    e.suggested_meeting_id = body["suggested_meeting_id"].get<std::string>();
  }
  if (!body.contains("decision") || !body["decision"].is_string()) {
    violations.push_back({ErrorCode::kMissingField, "decision",
                          "missing field 'decision'"});
  } else if (auto d = parse_decision(body["decision"].get<std::string>())) {
    e.decision = *d;
  } else {
    violations.push_back({ErrorCode::kUnknownEnumValue, "decision",
                          "decision must be 'accepted' or 'overrode'"});
  }
  if (body.contains("shown_styles")) {
    const auto& styles = body["shown_styles"];
    if (!styles.is_array()) {
      violations.push_back({ErrorCode::kInvalidValue, "shown_styles",
                            "shown_styles must be a list"});
    } else {
      for (const auto& s : styles) {
        if (!s.is_string() || !parse_explanation_style(s.get<std::string>())) {
          violations.push_back({ErrorCode::kUnknownEnumValue, "shown_styles",
                                "unknown explanation style"});
          break;
        }
        e.shown_styles.push_back(s.get<std::string>());
      }
    }
  }
  e.timestamp = now();
  if (body.contains("timestamp")) {
    try {
      e.timestamp = Timestamp::parse(body["timestamp"].get<std::string>(), "timestamp");
    } catch (const std::exception& ex) {
      violations.push_back({ErrorCode::kInvalidValue, "timestamp", ex.what()});
    }
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));
  const FeedbackEvent stored = store_.record_feedback(std::move(e));
  const std::size_t count =
      store_.read([](const AgendaState& s) { return s.feedback.size(); });
  return envelope({{"ack", true}, {"event", to_json(stored)}, {"feedback_count", count}});
}

json AgendaService::health() const {
  const auto bundle = models();
  return envelope({{"status", "ok"},
                   {"models_loaded", static_cast<bool>(bundle)},
                   {"model_source", bundle ? json(bundle->source) : json(nullptr)}});
}

json error_body(const Error& error) {
  json body = {{"code", error_code_name(error.code())},
               {"field", error.field()},
               {"message", error.what()}};
  if (const auto* v = dynamic_cast<const ValidationError*>(&error)) {
    json list = json::array();
    for (const auto& item : v->violations()) {
      list.push_back({{"code", error_code_name(item.code)},
                      {"field", item.field},
                      {"message", item.message}});
    }
    body["violations"] = list;
  }
  if (const auto* r = dynamic_cast<const RowError*>(&error)) {
    body["rows"] = r->row_numbers();
  }
  return envelope(body);
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingField:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kOutOfRangeScore:
    case ErrorCode::kUnknownEnumValue:
    case ErrorCode::kInvalidValue:
    case ErrorCode::kUnsupportedScale:
    case ErrorCode::kFormatError:
    case ErrorCode::kRowError:
    case ErrorCode::kHeaderMismatch:
      return 400;
    case ErrorCode::kUnauthorized:
      return 401;
    case ErrorCode::kUnknownConflict:
    case ErrorCode::kUnknownContact:
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kMissingRelationship:
      return 409;
    case ErrorCode::kModelNotLoaded:
      return 503;
    default:
      return 500;
  }
}

}  // namespace ssa
