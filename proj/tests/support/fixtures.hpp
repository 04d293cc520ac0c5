#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

#include "ssa/pipeline.hpp"
#include "ssa/synthetic.hpp"

namespace testing_support {

inline ssa::PipelineConfig small_config(std::uint64_t seed = 7) {
  ssa::PipelineConfig config;
  ssa::HyperParams hp;
  hp.n_trees = 30;
  hp.min_samples_leaf = 2;
  config.forest_grid = {hp};
  ssa::HyperParams tree;
  tree.n_trees = 1;
  tree.max_depth = 6;
  tree.bootstrap = false;
  config.tree_grid = {tree};
  config.folds = 2;
  config.seed = seed;
  config.salience_rows = 150;
  return config;
}

inline const ssa::SyntheticData& small_data() {
  static const ssa::SyntheticData data = [] {
    ssa::SyntheticSpec spec;
    spec.situations = 600;
    spec.participants = 30;
    spec.seed = 11;
    return ssa::generate_synthetic(spec);
  }();
  return data;
}

/// Trained once per test binary.
inline const ssa::PipelineModel& small_pipeline() {
  static const ssa::PipelineModel model =
      ssa::train_pipeline(small_data().situations, small_config());
  return model;
}

/// Fresh empty directory under the system temp dir.
inline std::string temp_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() /
                     ("ssa-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

}  // namespace testing_support
