#include "ssa/cli.hpp"

#include <omp.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "ssa/agenda.hpp"
#include "ssa/error.hpp"
#include "ssa/explain.hpp"
#include "ssa/http_api.hpp"
#include "ssa/ingest.hpp"
#include "ssa/model_io.hpp"
#include "ssa/pipeline.hpp"
#include "ssa/shap.hpp"
#include "ssa/random.hpp"
#include "ssa/synthetic.hpp"

namespace ssa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOutOfRangeScore:
    case ErrorCode::kUnsupportedScale:
    case ErrorCode::kMissingField:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kUnknownEnumValue:
    case ErrorCode::kInvalidValue:
    case ErrorCode::kHeaderMismatch:
    case ErrorCode::kRowError:
    case ErrorCode::kTooFewRecords:
    case ErrorCode::kEmptyTrainingSet:
    case ErrorCode::kEmptyDataset:
    case ErrorCode::kEmptySample:
    case ErrorCode::kMissingLabels:
      return kExitData;
    case ErrorCode::kIoError:
    case ErrorCode::kNotFound:
      return kExitIo;
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kGridEmpty:
    case ErrorCode::kTooManyFeatures:
    case ErrorCode::kUnknownFeature:
    case ErrorCode::kFormatError:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kModelNotLoaded:
      return kExitModel;
    case ErrorCode::kNoDifference:
    case ErrorCode::kAmbiguousPair:
    case ErrorCode::kUnequalInformation:
    case ErrorCode::kConflictingLevels:
    case ErrorCode::kIndeterminateDirection:
    case ErrorCode::kUnknownTemplate:
      return kExitExplanation;
    case ErrorCode::kMissingRelationship:
    case ErrorCode::kUnknownConflict:
    case ErrorCode::kUnknownContact:
    case ErrorCode::kStorageFailure:
    case ErrorCode::kUnauthorized:
      return kExitService;
  }
  return kExitInternal;
}

void report_error(const Error& e, std::ostream& err) {
  err << "error: " << error_code_name(e.code());
  if (!e.field().empty()) err << " [" << e.field() << "]";
  err << ": ";
  if (const auto* rows = dynamic_cast<const RowError*>(&e)) {
    err << rows->rows().size() << " invalid row(s)\n";
    for (const auto& issue : rows->rows()) {
      for (const auto& v : issue.violations) {
        err << "  row " << issue.row << ": " << error_code_name(v.code) << " ["
            << v.field << "] " << v.message << "\n";
      }
    }
    return;
  }
  if (const auto* many = dynamic_cast<const ValidationError*>(&e)) {
    err << many->violations().size() << " violation(s)\n";
    for (const auto& v : many->violations()) {
      err << "  " << error_code_name(v.code) << " [" << v.field << "] "
          << v.message << "\n";
    }
    return;
  }
  err << e.what() << "\n";
}

CharacteristicScale scale_of(const CliOptions& o) {
  return o.scale == 7 ? CharacteristicScale::kSevenPoint
                      : CharacteristicScale::kSixPoint;
}

std::string bundled(const std::string& name) {
  return (fs::path(default_data_dir()) / "synthetic" / name).string();
}

std::vector<SituationRecord> load_records(const CliOptions& o,
                                          bool require_labels) {
  std::string situations = o.situations;
  std::string relationships = o.relationships;
  if (situations.empty()) {
    situations = bundled("situations.csv");
    if (relationships.empty()) relationships = bundled("relationships.csv");
  }
  std::optional<AdapterConfig> adapter;
  if (!o.adapter.empty()) adapter = AdapterConfig::load(o.adapter);
  std::optional<RelationshipTable> table;
  if (!relationships.empty()) {
    table = parse_relationships(read_file(relationships),
                                adapter ? &*adapter : nullptr);
  }
  ParseOptions opts;
  opts.scale = adapter && adapter->scale ? *adapter->scale : scale_of(o);
  opts.adapter = adapter ? &*adapter : nullptr;
  opts.relationships = table ? &*table : nullptr;
  opts.require_labels = require_labels;
  return load_situations(situations, opts);
}

PipelineConfig pipeline_config(const CliOptions& o, CharacteristicScale scale) {
  PipelineConfig config;
  config.forest_grid = o.grid == "quick" ? quick_forest_grid(0) : default_forest_grid(0);
  config.folds = o.folds;
  config.seed = o.seed;
  config.scale = scale;
  config.comparison_trees = !o.no_comparison;
  config.salience_rows = o.salience_rows;
  config.timestamp = o.timestamp;
  return config;
}

CharacteristicScale records_scale(const std::vector<SituationRecord>& records,
                                  CharacteristicScale fallback) {
  for (const auto& r : records) {
    if (r.profile) return r.profile->scale();
  }
  return fallback;
}

SplitSpec split_spec(const CliOptions& o) {
  return {o.test_fraction, derive_seed(o.seed, 0x5b17), o.group_by_participant};
}

json split_to_json(const std::vector<SituationRecord>& records,
                   const SplitIndices& idx, const CliOptions& o) {
  auto ids = [&](const std::vector<std::size_t>& rows) {
    json list = json::array();
    for (auto i : rows) list.push_back(records[i].situation_id);
    return list;
  };
  return {{"format", "ssa-split"},
          {"version", "1.0"},
          {"seed", o.seed},
          {"test_fraction", o.test_fraction},
          {"group_by_participant", o.group_by_participant},
          {"dataset_fingerprint", fingerprint_hex(fingerprint(records))},
          {"train", ids(idx.train)},
          {"test", ids(idx.test)}};
}

std::vector<SituationRecord> select_ids(const std::vector<SituationRecord>& records,
                                        const json& ids) {
  std::map<std::string, const SituationRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.situation_id, &r);
  std::vector<SituationRecord> out;
  for (const auto& id : ids) {
    auto it = by_id.find(id.get<std::string>());
    if (it == by_id.end()) {
      throw Error(ErrorCode::kSchemaMismatch, "split",
                  "split references unknown situation '" + id.get<std::string>() + "'");
    }
    out.push_back(*it->second);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_file_atomic(path, text);
}

// ---------------------------------------------------------------------------

int cmd_validate(const CliOptions& o, std::ostream& out) {
  const auto records = load_records(o, !o.no_labels);
  std::size_t labelled = 0;
  for (const auto& r : records) labelled += r.profile && r.priority;
  out << "ok: " << records.size() << " records, " << labelled
      << " labelled, fingerprint " << fingerprint_hex(fingerprint(records)) << "\n";
  return kExitOk;
}

int cmd_train(const CliOptions& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw Error(ErrorCode::kMissingField, "--out", "--out is required");
  const auto records = load_records(o, true);
  const auto idx = split_indices(records, split_spec(o));
  std::vector<SituationRecord> train;
  for (auto i : idx.train) train.push_back(records[i]);
  const auto scale = records_scale(records, scale_of(o));
  err << "training on " << train.size() << " of " << records.size()
      << " records (" << (o.grid == "quick" ? "quick" : "default") << " grid)\n";
  const auto model = train_pipeline(train, pipeline_config(o, scale));
  save_pipeline(model, o.out);
  write_text((fs::path(o.out) / "split.json").string(),
             split_to_json(records, idx, o).dump(2) + "\n");
  out << "wrote " << forest_file_stems().size() << " models to " << o.out << "\n";
  return kExitOk;
}

int cmd_evaluate(const CliOptions& o, std::ostream& out, std::ostream& err) {
  const auto records = load_records(o, true);
  std::vector<SituationRecord> test;
  std::optional<PipelineModel> model;
  if (!o.model.empty()) {
    model = load_pipeline(o.model);
    const fs::path split_path = fs::path(o.model) / "split.json";
    if (o.all_rows || !fs::exists(split_path)) {
      test = records;
    } else {
      const json split = json::parse(read_file(split_path.string()));
      if (split.at("dataset_fingerprint") != fingerprint_hex(fingerprint(records))) {
        throw Error(ErrorCode::kSchemaMismatch, "split",
                    "dataset differs from the one the model was trained on");
      }
      test = select_ids(records, split.at("test"));
    }
  } else {
    const auto [train, held_out] = split(records, split_spec(o));
    err << "no --model given; training on " << train.size() << " records\n";
    model = train_pipeline(train, pipeline_config(o, records_scale(records, scale_of(o))));
    test = held_out;
  }
  std::optional<ExternalPredictions> external;
  if (!o.external.empty()) external = parse_external_predictions(read_file(o.external));
  const auto report = evaluate(*model, test, external ? &*external : nullptr);
  const std::string text = render_report(report);
  if (!o.out.empty()) write_text(o.out, report_to_json(report).dump(2) + "\n");
  if (!o.text_out.empty()) write_text(o.text_out, text);
  out << text;
  return kExitOk;
}

json attribution_json(const Attribution& a, const Schema& schema, std::size_t top) {
  std::vector<std::size_t> order(schema.group_count());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(a.grouped_phi[x]) > std::abs(a.grouped_phi[y]);
  });
  json list = json::array();
  for (std::size_t i = 0; i < std::min(top, order.size()); ++i) {
    list.push_back({{"feature", schema.group_name(order[i])},
                    {"phi", a.grouped_phi[order[i]]}});
  }
  return {{"base_value", a.base_value}, {"prediction", a.total()}, {"features", list}};
}

int cmd_explain(const CliOptions& o, std::ostream& out) {
  if (o.model.empty()) throw Error(ErrorCode::kMissingField, "--model", "--model is required");
  const auto model = load_pipeline(o.model);
  SocialSituationFeatures features{};
  std::string id;
  if (!o.features.empty()) {
    const json j = json::parse(read_file(o.features));
    RawFields raw;
    for (const auto& [k, v] : j.items()) {
      if (!v.is_null()) raw.emplace(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    features = validate_features(raw);
    id = o.features;
  } else if (!o.situation_id.empty()) {
    const auto records = load_records(o, false);
    auto it = std::find_if(records.begin(), records.end(), [&](const auto& r) {
      return r.situation_id == o.situation_id;
    });
    if (it == records.end()) {
      throw Error(ErrorCode::kNotFound, "--situation-id",
                  "no situation '" + o.situation_id + "'");
    }
    features = it->features;
    id = o.situation_id;
  } else {
    throw Error(ErrorCode::kMissingField, "--situation-id",
                "give --situation-id or --features");
  }
  const FeatureEncoder encoder;
  const auto x = encoder.encode(features);
  const auto profile = predict_profile(model, features);
  auto attribute = [&](const TreeEnsembleModel& m, const EncodedVector& v) {
    return o.exact ? shap_exact(m, v, 16) : shap_fast(m, v);
  };
  json characteristics = json::object();
  for (std::size_t c = 0; c < kNumCharacteristics; ++c) {
    characteristics[std::string(kCharacteristicNames[c])] = {
        {"predicted", profile.values()[c]},
        {"attribution",
         attribution_json(attribute(model.level2[c].forest, x), *encoder.schema(), o.top)}};
  }
  const auto pv = encode_profile(profile);
  json result = {
      {"situation", id},
      {"method", o.exact ? "exact" : "tree"},
      {"characteristics", characteristics},
      {"priority",
       {{"predicted", predict_priority(model, profile).value()},
        {"attribution",
         attribution_json(attribute(model.priority_model(), pv), *profile_schema(), o.top)}}},
      {"priority_direct",
       {{"predicted", predict_priority_direct(model, features).value()},
        {"attribution",
         attribution_json(attribute(model.direct_model(), x), *encoder.schema(), o.top)}}}};
  out << result.dump(2) << "\n";
  return kExitOk;
}

PipelineModel pairs_model(const CliOptions& o, std::ostream& err) {
  if (!o.model.empty()) return load_pipeline(o.model);
  err << "no --model given; training a quick pipeline on the bundled dataset\n";
  CliOptions defaults = o;
  defaults.situations.clear();
  defaults.relationships.clear();
  defaults.adapter.clear();
  defaults.grid = "quick";
  defaults.no_comparison = true;
  const auto records = load_records(defaults, true);
  return train_pipeline(records, pipeline_config(defaults, records_scale(records, scale_of(o))));
}

int cmd_pairs(const CliOptions& o, std::ostream& out, std::ostream& err) {
  const std::string data = default_data_dir();
  const auto pairs = load_pairs(o.pairs.empty() ? data + "/pairs.json" : o.pairs);
  const auto lexicon =
      Lexicon::load(o.lexicon.empty() ? data + "/lexicon.json" : o.lexicon);
  const auto model = pairs_model(o, err);
  if (!model.salience) {
    throw Error(ErrorCode::kFormatError, "salience", "model has no salience report");
  }
  int status = kExitOk;
  json results = json::array();
  for (const auto& pair : pairs) {
    json entry = {{"id", pair.id}};
    try {
      const auto s = decide_suggestion(pair, *model.salience);
      const auto l1 = render_explanation(s, ExplanationStyle::kLevel1, pair, lexicon);
      const auto l2 = render_explanation(s, ExplanationStyle::kLevel2, pair, lexicon);
      entry["chosen"] = pair.meetings[s.chosen].label;
      entry["level1_feature"] = *s.level1_feature;
      entry["level2_feature"] = std::string(to_name(*s.level2_feature));
      entry["level1"] = l1.text;
      entry["level2"] = l2.text;
      bool ok = true;
      if (pair.expected) {
        const auto& e = *pair.expected;
        ok = e.chosen == s.chosen && e.level1_feature == *s.level1_feature &&
             e.level2_feature == to_name(*s.level2_feature);
        if (e.level1_text) ok = ok && *e.level1_text == l1.text;
        if (e.level2_text) ok = ok && *e.level2_text == l2.text;
      }
      entry["matches_fixture"] = ok;
      if (!ok) {
        err << pair.id << ": result differs from the fixture expectation\n";
        status = kExitExplanation;
      }
    } catch (const Error& e) {
      entry["error"] = {{"code", error_code_name(e.code())}, {"message", e.what()}};
      err << pair.id << ": ";
      report_error(e, err);
      status = kExitExplanation;
    }
    results.push_back(entry);
  }
  if (o.json) {
    out << json{{"pairs", results}}.dump(2) << "\n";
  } else {
    for (const auto& r : results) {
      out << r["id"].get<std::string>() << ": ";
      if (r.contains("error")) {
        out << "error " << r["error"]["code"].get<std::string>() << "\n";
        continue;
      }
      out << "suggest " << r["chosen"].get<std::string>() << " (level 1: "
          << r["level1_feature"].get<std::string>() << ", level 2: "
          << r["level2_feature"].get<std::string>() << ")\n"
          << "  " << r["level1"].get<std::string>() << "\n"
          << "  " << r["level2"].get<std::string>() << "\n";
    }
  }
  return status;
}

std::atomic<int> g_signal{0};

extern "C" void on_signal(int sig) { g_signal.store(sig); }

int cmd_serve(const CliOptions& o, std::ostream& out, std::ostream& err) {
  if (o.store.empty()) throw Error(ErrorCode::kMissingField, "--store", "--store is required");
  const std::string lexicon =
      o.lexicon.empty() ? default_data_dir() + "/lexicon.json" : o.lexicon;
  Store store(StoreOptions{o.store, o.snapshot_every, true});
  AgendaService service(store);
  if (!o.model.empty()) service.set_models(load_model_bundle(o.model, lexicon));
  httplib::Server server;
  install_routes(server, service, HttpOptions{o.host, o.port, o.token});
  if (!server.bind_to_port(o.host, o.port)) {
    throw Error(ErrorCode::kIoError, "--port",
                "cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  g_signal.store(0);
  std::signal(SIGHUP, on_signal);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread watcher([&] {
    while (true) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
      const int sig = g_signal.exchange(0);
      if (sig == SIGHUP) {
        if (o.model.empty()) continue;
        try {
          service.set_models(load_model_bundle(o.model, lexicon));
          err << "reloaded models from " << o.model << "\n";
        } catch (const Error& e) {
          err << "reload failed, keeping previous models: ";
          report_error(e, err);
        }
      } else if (sig == SIGINT || sig == SIGTERM) {
        server.stop();
        return;
      }
    }
  });
  out << "listening on " << o.host << ":" << o.port << "\n" << std::flush;
  server.listen_after_bind();
  g_signal.store(SIGTERM);
  watcher.join();
  std::signal(SIGHUP, SIG_DFL);
  std::signal(SIGINT, SIG_DFL);
  std::signal(SIGTERM, SIG_DFL);
  return kExitOk;
}

int cmd_synth(const CliOptions& o, std::ostream& out) {
  if (o.out.empty()) throw Error(ErrorCode::kMissingField, "--out", "--out is required");
  SyntheticSpec spec;
  spec.situations = o.rows;
  spec.participants = o.participants;
  spec.contacts_per_participant = o.contacts;
  spec.profile_noise = o.profile_noise;
  spec.priority_noise = o.priority_noise;
  spec.seed = o.seed;
  const auto data = generate_synthetic(spec);
  fs::create_directories(o.out);
  std::ostringstream situations, relationships;
  write_situations(situations, data.situations);
  write_relationships(relationships, data.relationships);
  write_file_atomic((fs::path(o.out) / "situations.csv").string(), situations.str());
  write_file_atomic((fs::path(o.out) / "relationships.csv").string(), relationships.str());
  out << "wrote " << data.situations.size() << " situations and "
      << data.relationships.size() << " relationships to " << o.out << "\n";
  return kExitOk;
}

void add_common(CLI::App* sub, CliOptions& o) {
  sub->add_option("--seed", o.seed, "Master seed for splits, grids and bootstraps")
      ->capture_default_str();
  sub->add_option("--jobs", o.jobs, "Worker threads for training (0 = all cores)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

void add_data(CLI::App* sub, CliOptions& o) {
  sub->add_option("--situations", o.situations,
                  "Situations CSV (default: bundled synthetic dataset)");
  sub->add_option("--relationships", o.relationships,
                  "Relationships CSV joined on participant_id and contact_id");
  sub->add_option("--adapter", o.adapter,
                  "Adapter file (key = value lines) mapping external columns and tokens");
  sub->add_option("--scale", o.scale, "Characteristic scale maximum (6 or 7)")
      ->check(CLI::IsMember({6, 7}))
      ->capture_default_str();
}

void add_training(CLI::App* sub, CliOptions& o) {
  sub->add_option("--grid", o.grid, "Forest hyperparameter grid")
      ->check(CLI::IsMember({"default", "quick"}))
      ->capture_default_str();
  sub->add_option("--folds", o.folds, "Cross-validation folds")
      ->check(CLI::Range(2, 100))
      ->capture_default_str();
  sub->add_option("--test-fraction", o.test_fraction, "Held-out share of the records")
      ->check(CLI::Range(0.01, 0.99))
      ->capture_default_str();
  sub->add_flag("--group-by-participant", o.group_by_participant,
                "Keep each participant's situations on one side of the split");
  sub->add_option("--timestamp", o.timestamp, "Timestamp recorded in model metadata")
      ->capture_default_str();
  sub->add_flag("--no-comparison", o.no_comparison,
                "Skip the single decision-tree comparison models");
  sub->add_option("--salience-rows", o.salience_rows,
                  "Training rows sampled for global salience (0 disables)")
      ->capture_default_str();
}

}  // namespace

std::unique_ptr<CLI::App> make_app(CliOptions& o) {
  auto app = std::make_unique<CLI::App>(
      "Social-situation priority models, explanations and agenda service", "ssa");
  app->set_config("--config", "", "TOML file of defaults; command-line flags win");
  app->require_subcommand(1);

  auto* validate = app->add_subcommand("validate", "Check a dataset and report row errors");
  add_common(validate, o);
  add_data(validate, o);
  validate->add_flag("--no-labels", o.no_labels, "Accept rows without profile or priority");

  auto* train = app->add_subcommand("train", "Fit the ten forests and write a model directory");
  add_common(train, o);
  add_data(train, o);
  add_training(train, o);
  train->add_option("--out", o.out, "Model output directory")->required();

  auto* evaluate = app->add_subcommand("evaluate", "Score models against baselines on held-out rows");
  add_common(evaluate, o);
  add_data(evaluate, o);
  add_training(evaluate, o);
  evaluate->add_option("--model", o.model,
                       "Model directory (trains in memory when omitted)");
  evaluate->add_option("--out", o.out, "JSON report path");
  evaluate->add_option("--text", o.text_out, "Plain-text report path");
  evaluate->add_option("--external", o.external,
                       "CSV of extra model predictions (model,situation_id,target,prediction)");
  evaluate->add_flag("--all", o.all_rows, "Evaluate every row instead of the stored test split");

  auto* explain = app->add_subcommand("explain", "Print attributions for one situation");
  add_common(explain, o);
  add_data(explain, o);
  explain->add_option("--model", o.model, "Model directory")->required();
  explain->add_option("--situation-id", o.situation_id, "Situation to explain from the dataset");
  explain->add_option("--features", o.features, "JSON file of Level-1 feature values");
  explain->add_option("--top", o.top, "Attributed features listed per model")
      ->capture_default_str();
  explain->add_flag("--exact", o.exact, "Enumerate all coalitions instead of tree paths");

  auto* pairs = app->add_subcommand("pairs", "Run the curated meeting pairs");
  add_common(pairs, o);
  pairs->add_option("--model", o.model,
                    "Model directory (a quick model is trained when omitted)");
  pairs->add_option("--pairs", o.pairs, "Pair fixture file (default: bundled pairs.json)");
  pairs->add_option("--lexicon", o.lexicon, "Lexicon file (default: bundled lexicon.json)");
  pairs->add_flag("--json", o.json, "Print results as JSON");

  auto* serve = app->add_subcommand("serve", "Run the agenda HTTP service");
  add_common(serve, o);
  serve->add_option("--model", o.model, "Model directory; reloaded on SIGHUP");
  serve->add_option("--store", o.store, "Directory for the agenda log and snapshots")
      ->required();
  serve->add_option("--lexicon", o.lexicon, "Lexicon file (default: bundled lexicon.json)");
  serve->add_option("--host", o.host, "Listen address")->capture_default_str();
  serve->add_option("--port", o.port, "Listen port")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();
  serve->add_option("--token", o.token, "Bearer token required on every route but /healthz");
  serve->add_option("--snapshot-every", o.snapshot_every,
                    "Log entries between snapshots (0 disables)")
      ->capture_default_str();

  auto* synth = app->add_subcommand("synth", "Write a synthetic dataset with known structure");
  add_common(synth, o);
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--rows", o.rows, "Situations to generate")->capture_default_str();
  synth->add_option("--participants", o.participants, "Participants")->capture_default_str();
  synth->add_option("--contacts", o.contacts, "Contacts per participant")
      ->capture_default_str();
  synth->add_option("--profile-noise", o.profile_noise, "Profile noise standard deviation")
      ->capture_default_str();
  synth->add_option("--priority-noise", o.priority_noise,
                    "Priority noise standard deviation")
      ->capture_default_str();
  return app;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliOptions o;
  auto app = make_app(o);
  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app->parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (o.jobs > 0) omp_set_num_threads(o.jobs);
  const CLI::App* sub = app->get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "validate") return cmd_validate(o, out);
    if (name == "train") return cmd_train(o, out, err);
    if (name == "evaluate") return cmd_evaluate(o, out, err);
    if (name == "explain") return cmd_explain(o, out);
    if (name == "pairs") return cmd_pairs(o, out, err);
    if (name == "serve") return cmd_serve(o, out, err);
    if (name == "synth") return cmd_synth(o, out);
  } catch (const Error& e) {
    report_error(e, err);
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: FormatError: " << e.what() << "\n";
    return kExitModel;
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace ssa
