#pragma once

// The ssa command line: validate, train, evaluate, explain, pairs, serve and
// synth. Diagnostics go to the error stream; artifacts go to files or out.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace ssa {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitData = 3,        // validation and row errors
  kExitIo = 4,          // unreadable or missing files
  kExitModel = 5,       // model format, schema or version problems
  kExitExplanation = 6, // curated-pair or template failures
  kExitService = 7,     // storage and agenda state
};

struct CliOptions {
  std::uint64_t seed = 20221;
  int jobs = 0;  // 0 = OpenMP default

  std::string situations;
  std::string relationships;
  std::string adapter;
  int scale = 6;
  bool no_labels = false;

  std::string out;
  std::string grid = "default";
  std::size_t folds = 5;
  double test_fraction = 0.2;
  bool group_by_participant = false;
  std::string timestamp = "1970-01-01T00:00:00Z";
  bool no_comparison = false;
  std::size_t salience_rows = 200;

  std::string model;
  std::string text_out;
  std::string external;
  bool all_rows = false;

  std::string situation_id;
  std::string features;
  std::size_t top = 5;
  bool exact = false;

  std::string pairs;
  std::string lexicon;
  bool json = false;

  std::string store;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string token;
  std::size_t snapshot_every = 64;

  std::size_t rows = 2224;
  std::size_t participants = 100;
  std::size_t contacts = 14;
  double profile_noise = 0.3;
  double priority_noise = 0.3;
};

/// Builds the parser bound to opts. Exposed so tests can walk every
/// subcommand and flag.
std::unique_ptr<CLI::App> make_app(CliOptions& opts);

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);
int run(int argc, char** argv);

}  // namespace ssa
