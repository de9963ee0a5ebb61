#include "metriccalc/reference.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace mc;

namespace {

struct Fixture {
    Space space = make_grid(2, 64, 1.0);
    ScaleLadder ladder = ScaleLadder::for_space(space);
    ResolutionContext ctx{space, ladder};
    ScalarField field = make_field();
    std::vector<Derivation> derivations = make_derivations();
    std::vector<ScalarField> generators = make_generators();

    ScalarField make_field() {
        std::mt19937 rng(1);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> v(space.size());
        for (double& x : v) x = u(rng);
        return {space, std::move(v)};
    }
    std::vector<Derivation> make_derivations() {
        std::vector<Derivation> ds;
        ds.push_back(make_axis_derivation(space, 0, 1.0 / 63.0));
        ds.push_back(make_axis_derivation(space, 1, 1.0 / 63.0));
        ds.push_back(make_knn_derivation(space, 4));
        return ds;
    }
    std::vector<ScalarField> make_generators() {
        std::vector<ScalarField> gens;
        for (int k = 0; k < 2; ++k) {
            std::vector<double> v(space.size());
            for (int i = 0; i < space.size(); ++i) v[i] = space.coord(i, k);
            gens.emplace_back(space, std::move(v));
        }
        gens.push_back(field);
        return gens;
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

void BM_lip_resolved_parallel(benchmark::State& state) {
    Fixture& f = fixture();
    std::vector<double> up, lo;
    for (auto _ : state) {
        lip_resolved(f.field, f.ctx, up, lo);
        benchmark::DoNotOptimize(up.data());
    }
}

void BM_lip_resolved_serial(benchmark::State& state) {
    Fixture& f = fixture();
    std::vector<double> up, lo;
    for (auto _ : state) {
        reference::lip_resolved(f.field, f.ladder, up, lo);
        benchmark::DoNotOptimize(up.data());
    }
}

void BM_glip_parallel(benchmark::State& state) {
    Fixture& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(glip(f.field));
}

void BM_glip_serial(benchmark::State& state) {
    Fixture& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(reference::glip(f.field));
}

void BM_component_table_parallel(benchmark::State& state) {
    Fixture& f = fixture();
    for (auto _ : state) {
        ComponentTable t = component_table(f.derivations, f.generators);
        benchmark::DoNotOptimize(t.values.data());
    }
}

void BM_component_table_serial(benchmark::State& state) {
    Fixture& f = fixture();
    for (auto _ : state) {
        ComponentTable t = reference::component_table(f.derivations, f.generators);
        benchmark::DoNotOptimize(t.values.data());
    }
}

void BM_mcshane_parallel(benchmark::State& state) {
    Fixture& f = fixture();
    std::vector<int> A;
    std::vector<double> data;
    const ScalarField base = landmark_generators(f.space, {0}).front();
    for (int i = 0; i < f.space.size(); i += 3) {
        A.push_back(i);
        data.push_back(base[i]);
    }
    for (auto _ : state) {
        ScalarField g = mcshane_extend(f.space, A, data, 1.0);
        benchmark::DoNotOptimize(g.values.data());
    }
}

void BM_mcshane_serial(benchmark::State& state) {
    Fixture& f = fixture();
    std::vector<int> A;
    std::vector<double> data;
    const ScalarField base = landmark_generators(f.space, {0}).front();
    for (int i = 0; i < f.space.size(); i += 3) {
        A.push_back(i);
        data.push_back(base[i]);
    }
    for (auto _ : state) {
        ScalarField g = reference::mcshane_extend(f.space, A, data, 1.0);
        benchmark::DoNotOptimize(g.values.data());
    }
}

} // namespace

BENCHMARK(BM_lip_resolved_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_lip_resolved_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_glip_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_glip_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_component_table_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_component_table_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mcshane_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mcshane_serial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
