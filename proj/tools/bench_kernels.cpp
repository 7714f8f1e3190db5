// Serial vs OpenMP comparison for the data-parallel kernels: matrix assembly,
// forward synthesis, and the residual diagnostic. Uses google benchmark when
// available, otherwise a plain timing loop.

#include <iostream>
#include <vector>

#include <em/eigenmatrix.hpp>
#include <em/harness.hpp>
#include <em/parallel.hpp>
#include <em/rng.hpp>

namespace {

using namespace em;

struct Fixture {
    Kernel               kernel = Kernel::fourier();
    SampleSet            samples;
    std::vector<Complex> nodes;
    SpikeModel           spikes;
    Eigenmatrix          e;
    std::vector<Complex> test_points;
    DomainMap            map = DomainMap::identity();

    Fixture() {
        samples = generate_samples({SampleSpec::Kind::interval, -5.0, 5.0, 1024}, 7);
        const ProbeGrid g = probe_grid(ReferenceDomain::interval, 256);
        nodes = g.nodes;
        Rng rng(11);
        for (int i = 0; i < 64; ++i) {
            spikes.locations.emplace_back(rng.uniform(-0.9, 0.9), 0.0);
            spikes.weights.emplace_back(1.0, 0.0);
        }
        e = build(kernel, samples, ReferenceDomain::interval, map, 24, 3.0);
        for (int i = 0; i < 256; ++i) test_points.emplace_back(rng.uniform(-0.9, 0.9), 0.0);
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

} // namespace

#ifdef EM_HAVE_GOOGLE_BENCHMARK

#include <benchmark/benchmark.h>

static void BM_assemble(benchmark::State& state) {
    Fixture& f = fixture();
    set_parallel_enabled(state.range(0) != 0);
    for (auto _ : state) {
        Mat m = assemble_normalized_matrix(f.kernel, f.samples, f.nodes);
        benchmark::DoNotOptimize(m.data());
    }
    set_parallel_enabled(true);
}
BENCHMARK(BM_assemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_synthesize(benchmark::State& state) {
    Fixture& f = fixture();
    set_parallel_enabled(state.range(0) != 0);
    for (auto _ : state) {
        Observations u = synthesize(f.kernel, f.samples, f.spikes);
        benchmark::DoNotOptimize(u.values.data());
    }
    set_parallel_enabled(true);
}
BENCHMARK(BM_synthesize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_residual_diagnostic(benchmark::State& state) {
    Fixture& f = fixture();
    set_parallel_enabled(state.range(0) != 0);
    for (auto _ : state) {
        Real r = residual_diagnostic(f.e, f.kernel, f.samples, f.map, f.test_points);
        benchmark::DoNotOptimize(r);
    }
    set_parallel_enabled(true);
}
BENCHMARK(BM_residual_diagnostic)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#else

#include <chrono>

template <class F>
static double time_ms(F&& fn, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

int main() {
    Fixture& f = fixture();
    struct Row {
        const char* name;
        double serial_ms, parallel_ms;
    };
    std::vector<Row> rows;

    auto run = [&](const char* name, auto&& fn, int reps) {
        set_parallel_enabled(false);
        const double s = time_ms(fn, reps);
        set_parallel_enabled(true);
        const double p = time_ms(fn, reps);
        rows.push_back({name, s, p});
    };
    run("assemble_normalized_matrix", [&] {
        volatile auto m = assemble_normalized_matrix(f.kernel, f.samples, f.nodes).rows();
        (void)m;
    }, 10);
    run("synthesize", [&] {
        volatile auto n = synthesize(f.kernel, f.samples, f.spikes).values.size();
        (void)n;
    }, 10);
    run("residual_diagnostic", [&] {
        volatile auto r = residual_diagnostic(f.e, f.kernel, f.samples, f.map, f.test_points);
        (void)r;
    }, 5);

    std::cout << "threads: " << hardware_threads() << "\n";
    for (const Row& r : rows)
        std::cout << r.name << ": serial " << r.serial_ms << " ms, parallel "
                  << r.parallel_ms << " ms, speedup " << r.serial_ms / r.parallel_ms
                  << "x\n";
    return 0;
}

#endif
