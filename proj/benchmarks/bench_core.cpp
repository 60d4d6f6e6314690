#include <benchmark/benchmark.h>

#include "rave/agent/actor_critic.hpp"
#include "rave/dynamics/ensemble.hpp"
#include "rave/expansion/value_expansion.hpp"
#include "rave/nn/mlp.hpp"

using namespace rave;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

TransitionBatch toy_batch(int b, Rng& rng) {
  std::vector<Transition> out;
  for (int i = 0; i < b; ++i) {
    const double s = rng.uniform(-4.0, 4.0);
    const double a = rng.uniform(-1.0, 1.0);
    out.push_back({{s}, {a}, -1.0, {s + (a >= 0 ? 1.0 : -1.0)}, 0.0});
  }
  return make_batch(out);
}

struct Setup {
  agent::ActorCritic agent;
  dynamics::DynamicsEnsemble dynamics;
  TransitionBatch batch;
  expansion::ExpansionConfig config;

  Setup(int width, int n, int hmax, int batch_size, expansion::EstimatorKind kind) {
    agent::AgentConfig ac;
    ac.hidden_width = width;
    ac.critic_ensemble = n;
    agent = agent::ActorCritic(ac, 1);
    dynamics::DynamicsConfig dc;
    dc.hidden_width = width;
    dc.ensemble_size = n;
    dynamics = dynamics::DynamicsEnsemble(dc, 2);
    Rng rng(3);
    batch = toy_batch(batch_size, rng);
    config.ensemble_size = n;
    config.max_horizon = hmax;
    config.kind = kind;
  }
};

}  // namespace

static void BM_MlpForward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const int rows = static_cast<int>(state.range(1));
  nn::Mlp net({2, width, width, width, 1}, nn::OutputHead::Identity, 1);
  Rng rng(1);
  const Matrix x = random_matrix(rows, 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_MlpForward)->Args({32, 128})->Args({64, 128})->Args({64, 512});

static void BM_MlpBackward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  nn::Mlp net({2, width, width, width, 1}, nn::OutputHead::Identity, 1);
  Rng rng(1);
  const Matrix x = random_matrix(128, 2, rng);
  const Matrix g = Matrix::Ones(128, 1);
  for (auto _ : state) {
    const nn::ForwardPass pass = net.record(x);
    benchmark::DoNotOptimize(net.backward(pass, g));
  }
}
BENCHMARK(BM_MlpBackward)->Arg(32)->Arg(64);

static void BM_BuildCandidates(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 3, 128,
          expansion::EstimatorKind::RAVE);
  Rng rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(expansion::build_candidates(s.batch, s.dynamics, s.agent.value_models(),
                                                         s.config, true, rng));
  }
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_BuildCandidates)->Args({32, 4})->Args({64, 4})->Args({64, 2})->Unit(benchmark::kMillisecond);

static void BM_DynamicsTrain(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)), 4, 3, 128, expansion::EstimatorKind::RAVE);
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(s.dynamics.train(s.batch, rng));
}
BENCHMARK(BM_DynamicsTrain)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_LearnerUpdate(benchmark::State& state) {
  const auto kind = static_cast<expansion::EstimatorKind>(state.range(1));
  Setup s(static_cast<int>(state.range(0)), 4, 3, 128, kind);
  Rng rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent::learner_update(s.agent, &s.dynamics, s.batch, s.config, rng));
  }
}
BENCHMARK(BM_LearnerUpdate)
    ->Args({64, static_cast<int>(expansion::EstimatorKind::TD0)})
    ->Args({64, static_cast<int>(expansion::EstimatorKind::MVE)})
    ->Args({64, static_cast<int>(expansion::EstimatorKind::RAVE)})
    ->Args({32, static_cast<int>(expansion::EstimatorKind::RAVE)})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
