#include <benchmark/benchmark.h>

#include "bhavnet/model.hpp"
#include "bhavnet/objective.hpp"
#include "bhavnet/synthetic.hpp"
#include "bhavnet/trainer.hpp"

using namespace bhavnet;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t({r, c});
  for (double& x : t.data()) x = rng.normal();
  return t;
}

struct Fixture {
  SyntheticTask task = make_synthetic_task(SyntheticSpec{});
  HyperParams hp = HyperParams{}.resolved(32);
  ModelParams params;
  std::vector<LabeledPair> batch;

  Fixture() {
    Rng rng(1);
    params = init_params(hp, rng);
    batch.assign(task.train.begin(), task.train.begin() + static_cast<std::ptrdiff_t>(hp.batch_size));
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(0);
  const Tensor a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(256);

static void BM_ForwardBatch(benchmark::State& state) {
  const Fixture& f = fixture();
  Rng rng(0);
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch(f.batch, f.task.table, f.params, f.hp, Mode::eval, rng));
}
BENCHMARK(BM_ForwardBatch);

static void BM_BuildGraph(benchmark::State& state) {
  const Fixture& f = fixture();
  Rng rng(0);
  const BatchPrediction bp = predict_batch(f.batch, f.task.table, f.params, f.hp, Mode::eval, rng);
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(f.batch, bp.pairs, f.hp.tau, f.hp.trans_weight));
}
BENCHMARK(BM_BuildGraph);

static void BM_TrainStep(benchmark::State& state) {
  const Fixture& f = fixture();
  ModelParams params = f.params;
  Rng rng(0);
  for (auto _ : state) {
    Tape tape;
    const ParamVars vars = bind(tape, params);
    const BatchForward fw = forward_batch(tape, vars, f.batch, f.task.table, f.hp, Mode::train, rng);
    const ad::LossVars loss = ad::total_loss(tape, fw, f.batch, f.hp);
    tape.backward(loss.total);
    sgd_step(params, gradients(tape, vars), f.hp.lr);
  }
}
BENCHMARK(BM_TrainStep);

BENCHMARK_MAIN();
