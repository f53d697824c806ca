#include "mashup/cli.hpp"
#include "mashup/recursive_fixture.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>

using namespace mashup;

namespace {

std::filesystem::path fixture(const std::string& rel)
{
    return std::filesystem::path(MASHUP_FIXTURE_DIR) / rel;
}

const Language& fuml()
{
    static auto lang = load_language(fixture("fuml-lite/fuml.mashup"));
    return *lang;
}

void BM_ComposeFuml(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(load_language(fixture("fuml-lite/fuml.mashup")));
}
BENCHMARK(BM_ComposeFuml)->Unit(benchmark::kMicrosecond);

void BM_LinearizeChain(benchmark::State& state)
{
    // Each class extends every earlier one: the worst case for repetition.
    SupertypeGraph g;
    const int n = static_cast<int>(state.range(0));
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> sups;
        for (int j = 0; j < i; ++j)
            sups.push_back("C" + std::to_string(j));
        g["C" + std::to_string(i)] = sups;
    }
    const std::string last = "C" + std::to_string(n - 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(linearize(last, g));
}
BENCHMARK(BM_LinearizeChain)->Arg(8)->Arg(32)->Arg(128);

void BM_RunRecursive(benchmark::State& state)
{
    const int depth = static_cast<int>(state.range(0));
    ModelInstance base = load_model(generate_recursive_fixture(depth).model_json, fuml().woven);
    RuntimeOptions opts;
    for (auto _ : state) {
        state.PauseTiming();
        ModelInstance m = base;
        state.ResumeTiming();
        Interpreter interp(m, opts);
        interp.invoke(*m.find("o1"), "execute");
        benchmark::DoNotOptimize(interp.trace().events.size());
    }
    state.counters["elements"] = static_cast<double>(base.size());
}
BENCHMARK(BM_RunRecursive)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_CheckWorkSession(benchmark::State& state)
{
    ModelInstance m = load_model_file(fixture("models/work_session.model"), fuml());
    for (auto _ : state)
        benchmark::DoNotOptimize(check_model(m));
}
BENCHMARK(BM_CheckWorkSession)->Unit(benchmark::kMicrosecond);

void BM_SaveLoadRecursive(benchmark::State& state)
{
    ModelInstance m = load_model(generate_recursive_fixture(3).model_json, fuml().woven);
    for (auto _ : state)
        benchmark::DoNotOptimize(load_model(save_model(m), fuml().woven));
}
BENCHMARK(BM_SaveLoadRecursive)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
