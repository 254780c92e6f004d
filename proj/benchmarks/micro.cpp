#include <benchmark/benchmark.h>

#include <cstddef>

#include "wugnn/channel.hpp"
#include "wugnn/models.hpp"
#include "wugnn/wmmse.hpp"

namespace {

using namespace wugnn;

channel::NetworkInstance instance_of(std::size_t n) {
  channel::ChannelConfig config;
  config.n = n;
  config.seed = 2024;
  return channel::generate_instance(config);
}

void BM_Wmmse(benchmark::State& state) {
  const auto inst = instance_of(static_cast<std::size_t>(state.range(0)));
  const auto init = wmmse::full_power(inst);
  for (auto _ : state) {
    auto trace = wmmse::run_wmmse(inst, init, wmmse::WmmseSettings{});
    benchmark::DoNotOptimize(trace);
  }
}

void BM_WugnnForward(benchmark::State& state) {
  const auto inst = instance_of(static_cast<std::size_t>(state.range(0)));
  const auto model = model::Model::make_wugnn(model::WugnnSpec::make(), 1);
  for (auto _ : state) {
    auto v = model.allocate(inst);
    benchmark::DoNotOptimize(v);
  }
}

void BM_BaselineForward(benchmark::State& state) {
  const auto inst = instance_of(static_cast<std::size_t>(state.range(0)));
  const auto target = model::WugnnSpec::make().parameter_count();
  const auto model = model::Model::make_baseline(model::GnnBaselineSpec::matched(target), 1);
  for (auto _ : state) {
    auto v = model.allocate(inst);
    benchmark::DoNotOptimize(v);
  }
}

void BM_GenerateInstance(benchmark::State& state) {
  channel::ChannelConfig config;
  config.n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    ++config.seed;
    auto inst = channel::generate_instance(config);
    benchmark::DoNotOptimize(inst);
  }
}

}  // namespace

BENCHMARK(BM_Wmmse)->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_WugnnForward)->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BaselineForward)->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GenerateInstance)->Arg(10)->Arg(100);
BENCHMARK_MAIN();
