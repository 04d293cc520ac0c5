#pragma once

// Agenda state, conflict detection and the suggestion service. State lives
// in an append-only JSON-lines log with periodic snapshots; every mutation
// goes through one writer lock and readers share a consistent view.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ssa/domain.hpp"
#include "ssa/error.hpp"
#include "ssa/explain.hpp"
#include "ssa/pipeline.hpp"

namespace ssa {

inline constexpr std::string_view kApiSchemaVersion = "1.0";

/// RFC 3339 instant with an explicit offset ("Z" or +hh:mm). Keeps the text
/// it was parsed from.
struct Timestamp {
  std::int64_t epoch_ms = 0;
  std::string text;

  static Timestamp parse(std::string_view text, std::string_view field = "timestamp");
  static Timestamp from_epoch_ms(std::int64_t ms);  // text in UTC, "Z"
  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

struct Contact {
  std::string id;
  std::string name;
  friend bool operator==(const Contact&, const Contact&) = default;
};

struct Meeting {
  std::string id;
  std::string title;
  Timestamp start;
  Timestamp end;
  std::string contact_id;
  Setting setting = Setting::kOther;
  EventFrequency event_frequency = EventFrequency::kFirstTime;
  Initiator initiator = Initiator::kUser;
  HelpDynamic help_dynamic = HelpDynamic::kNeither;
  Timestamp created_at;
  std::uint64_t sequence = 0;  // creation order

  friend bool operator==(const Meeting&, const Meeting&) = default;
};

struct Conflict {
  std::string id;  // "c-<first id>-<second id>", ids in lexicographic order
  std::string meeting_a;
  std::string meeting_b;
  Timestamp overlap_start;
  Timestamp overlap_end;

  friend bool operator==(const Conflict&, const Conflict&) = default;
};

std::string conflict_id(std::string_view a, std::string_view b);

/// Every pairwise overlap of half-open [start, end) intervals, sorted by id.
std::vector<Conflict> detect_conflicts(const std::vector<Meeting>& meetings);

enum class Decision { kAccepted, kOverrode };

struct FeedbackEvent {
  std::string conflict_id;
  std::string suggested_meeting_id;
  Decision decision = Decision::kAccepted;
  std::vector<std::string> shown_styles;
  Timestamp timestamp;

  friend bool operator==(const FeedbackEvent&, const FeedbackEvent&) = default;
};

struct AgendaState {
  std::map<std::string, Contact> contacts;
  std::map<std::string, RawFields> relationships;  // contact id -> fields
  std::map<std::string, Meeting> meetings;
  std::vector<FeedbackEvent> feedback;
  std::uint64_t next_meeting = 1;
  std::uint64_t last_seq = 0;

  std::vector<Meeting> meeting_list() const;
  std::optional<Conflict> find_conflict(std::string_view id) const;
  friend bool operator==(const AgendaState&, const AgendaState&) = default;
};

nlohmann::json to_json(const Meeting& m);
nlohmann::json to_json(const Conflict& c, const AgendaState& state);
nlohmann::json to_json(const FeedbackEvent& e);
nlohmann::json state_to_json(const AgendaState& state);
AgendaState state_from_json(const nlohmann::json& j);

/// Checks the ten relationship fields (age difference optional). Throws
/// ValidationError listing every problem.
RawFields validate_relationship(const RawFields& fields);

struct StoreOptions {
  std::string directory;
  std::size_t snapshot_every = 64;  // operations between snapshots; 0 = never
  bool sync = true;                 // fsync after every append
};

/// Embedded store: <dir>/agenda.log holds one JSON operation per line,
/// <dir>/snapshot.json the state as of some sequence number. Opening loads
/// the snapshot and replays later log entries.
class Store {
 public:
  explicit Store(StoreOptions options);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  AgendaState state() const;

  /// Runs f with a shared lock over the current state.
  template <class F>
  auto read(F&& f) const {
    std::shared_lock lock(mutex_);
    return f(state_);
  }

  Contact put_contact(Contact contact);
  RawFields put_relationship(const std::string& contact_id, RawFields fields);
  Meeting add_meeting(Meeting draft);
  FeedbackEvent record_feedback(FeedbackEvent event);

  /// Writes a snapshot now and truncates the log.
  void compact();
  std::size_t log_entries() const;

 private:
  nlohmann::json commit(nlohmann::json op);
  void append(const nlohmann::json& op);
  void write_snapshot();
  void replay();

  StoreOptions options_;
  mutable std::shared_mutex mutex_;
  AgendaState state_;
  int log_fd_ = -1;
  std::size_t since_snapshot_ = 0;
  std::size_t log_entries_ = 0;
};

/// Applies one logged operation. Shared by live commits and replay.
void apply_operation(AgendaState& state, const nlohmann::json& op);

/// Everything a suggestion needs, immutable once built.
struct ModelBundle {
  PipelineModel pipeline;
  Lexicon lexicon;
  std::string source;  // directory the models came from
};

std::shared_ptr<const ModelBundle> load_model_bundle(
    const std::string& model_dir, const std::string& lexicon_path);

struct ServiceOptions {
  Persona user{"You", "you", "you", "your", true};
  std::size_t attribution_features = 5;
  std::function<Timestamp()> clock;  // defaults to the system clock
};

class AgendaService {
 public:
  AgendaService(Store& store, ServiceOptions options = {});

  void set_models(std::shared_ptr<const ModelBundle> models);
  std::shared_ptr<const ModelBundle> models() const;

  nlohmann::json put_contact(const std::string& id, const nlohmann::json& body);
  nlohmann::json put_relationship(const std::string& id,
                                  const nlohmann::json& body);
  nlohmann::json add_meeting(const nlohmann::json& body);
  nlohmann::json list_conflicts() const;
  nlohmann::json suggestion(const std::string& conflict_id) const;
  nlohmann::json record_feedback(const std::string& conflict_id,
                                 const nlohmann::json& body);
  nlohmann::json health() const;

  /// Full Level-1 features of a stored meeting.
  static SocialSituationFeatures meeting_features(const AgendaState& state,
                                                  const Meeting& meeting);

 private:
  Timestamp now() const;

  Store& store_;
  ServiceOptions options_;
  mutable std::mutex models_mutex_;
  std::shared_ptr<const ModelBundle> models_;
};

/// {"code", "field", "message"} plus "violations"/"rows" when present.
nlohmann::json error_body(const Error& error);
int http_status(ErrorCode code);

}  // namespace ssa
