#include <benchmark/benchmark.h>

#include <random>

#include "chartpipe/backend.h"
#include "chartpipe/compiler.h"
#include "chartpipe/dataset.h"
#include "chartpipe/eval.h"
#include "chartpipe/filter.h"
#include "chartpipe/metrics.h"
#include "chartpipe/pipeline.h"

namespace cp = chartpipe;

namespace {

const std::string kFixtures = CHARTPIPE_FIXTURE_DIR;

void BM_RougeAndBleu(benchmark::State& state) {
  std::mt19937 rng(7);
  const std::vector<std::string> vocab{"bar", "none", "genre", "gross", "sum", "y_desc"};
  std::vector<cp::TokenSeq> seqs(64);
  for (auto& s : seqs) {
    for (size_t i = 0; i < cp::kSequenceLength; ++i) s.push_back(vocab[rng() % vocab.size()]);
  }
  size_t i = 0;
  for (auto _ : state) {
    const auto& a = seqs[i % seqs.size()];
    const auto& b = seqs[(i + 1) % seqs.size()];
    benchmark::DoNotOptimize(cp::rouge_l(a, b) + cp::bleu(a, b));
    ++i;
  }
}
BENCHMARK(BM_RougeAndBleu);

void BM_FilterEval(benchmark::State& state) {
  const cp::DataTable t = cp::load_csv_file(kFixtures + "/movies.csv");
  const auto f = cp::parse_filter("Release Year >= 2000 and Major Genre = 'Comedy' or IMDB Rating > 7", t);
  for (auto _ : state) benchmark::DoNotOptimize(cp::eval_filter(*f, t));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * t.n_rows()));
}
BENCHMARK(BM_FilterEval);

void BM_CompileVegaLite(benchmark::State& state) {
  const cp::DataTable t = cp::load_csv_file(kFixtures + "/movies.csv");
  cp::VisSpec s;
  s.mark = cp::Mark::bar;
  s.x = {"Major Genre", std::nullopt};
  s.y = {"Worldwide Gross", cp::AggregateFn::average};
  for (auto _ : state) benchmark::DoNotOptimize(cp::compile_vegalite(s, t));
}
BENCHMARK(BM_CompileVegaLite);

void BM_GenerateScripted(benchmark::State& state) {
  const cp::DataTable t = cp::load_csv_file(kFixtures + "/movies.csv");
  const auto backend = cp::ScriptedBackend::from_file(kFixtures + "/movies_scenario.script.json");
  for (auto _ : state) {
    benchmark::DoNotOptimize(cp::generate_topk(t, "what kind of movies are the most popular?", {}, backend));
  }
}
BENCHMARK(BM_GenerateScripted);

void BM_EvaluateSplit(benchmark::State& state) {
  const auto triplets = cp::load_dataset(kFixtures + "/split378.jsonl");
  const auto preds = cp::load_predictions(kFixtures + "/split378_predictions.jsonl", triplets);
  cp::EvalOptions opts;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(cp::evaluate_run(triplets, preds, opts));
}
BENCHMARK(BM_EvaluateSplit)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
