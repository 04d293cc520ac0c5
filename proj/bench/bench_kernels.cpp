// Parallel kernels against their serial references on the bundled synthetic
// data encoding.
#include <benchmark/benchmark.h>

#include "ssa/forest.hpp"
#include "ssa/ingest.hpp"
#include "ssa/shap.hpp"
#include "ssa/synthetic.hpp"

namespace {

struct Problem {
  ssa::FeatureMatrix X;
  std::vector<double> y;
  ssa::HyperParams hp;
};

const Problem& problem() {
  static const Problem p = [] {
    ssa::SyntheticSpec spec;
    spec.situations = 1000;
    spec.seed = 3;
    const auto data = ssa::generate_synthetic(spec);
    Problem out{ssa::encode_features(data.situations), {}, {}};
    for (const auto& r : data.situations) out.y.push_back(r.priority->value());
    out.hp.n_trees = 64;
    out.hp.max_depth = 10;
    out.hp.min_samples_leaf = 2;
    out.hp.features_per_split = ssa::FeatureSubset::kSqrt;
    out.hp.seed = 17;
    return out;
  }();
  return p;
}

const ssa::TreeEnsembleModel& model() {
  static const auto m = ssa::fit_forest(problem().X, problem().y, problem().hp,
                                        ssa::priority_target());
  return m;
}

/// Attribution is far costlier per row, so it runs on a slice.
const ssa::FeatureMatrix& shap_rows() {
  static const auto X = [] {
    ssa::FeatureMatrix out(problem().X.schema(), 0);
    for (std::size_t r = 0; r < 100; ++r) out.append(problem().X.row(r));
    return out;
  }();
  return X;
}

void BM_FitForest(benchmark::State& state) {
  const auto& p = problem();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ssa::fit_forest(p.X, p.y, p.hp, ssa::priority_target()));
  }
}

void BM_FitForestSerial(benchmark::State& state) {
  const auto& p = problem();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ssa::fit_forest_serial(p.X, p.y, p.hp, ssa::priority_target()));
  }
}

void BM_PredictBatch(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ssa::predict_batch(model(), problem().X));
}

void BM_PredictBatchSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ssa::predict_batch_serial(model(), problem().X));
}

void BM_ShapBatch(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ssa::shap_batch(model(), shap_rows()));
}

void BM_ShapBatchSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ssa::shap_batch_serial(model(), shap_rows()));
}

}  // namespace

BENCHMARK(BM_FitForest)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitForestSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictBatch)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShapBatch)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShapBatchSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
