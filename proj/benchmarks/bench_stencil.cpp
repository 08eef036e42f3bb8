#include <benchmark/benchmark.h>

#include "mkg/diagnostics.hpp"
#include "mkg/dynamics.hpp"
#include "mkg/parallel.hpp"
#include "support.hpp"

using namespace mkg;

namespace {

struct Setup {
    Lattice lat;
    ModelSpec model;
    FieldState state;

    explicit Setup(int n)
        : lat(make_spec(n)),
          model(test::interacting_model(2, 2)),
          state(test::smooth_state(lat, model, 7, 0.1)) {}

    static LatticeSpec make_spec(int n) {
        LatticeSpec s;
        s.dims = {n, n, n};
        s.dx = 1.0 / n;
        return s;
    }
};

void BM_eom_rhs(benchmark::State& st) {
    set_thread_count(1);
    Setup s(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(eom_rhs(s.state, s.lat, s.model));
    st.SetItemsProcessed(st.iterations() * std::int64_t(s.lat.sites()));
}

void BM_step_rk4(benchmark::State& st) {
    set_thread_count(1);
    Setup s(int(st.range(0)));
    FieldState cur = s.state;
    for (auto _ : st) {
        cur = step_rk4(cur, s.lat, s.model, 0.1 / st.range(0));
        benchmark::DoNotOptimize(cur.t);
    }
    st.SetItemsProcessed(st.iterations() * std::int64_t(s.lat.sites()));
}

void BM_norms(benchmark::State& st) {
    set_thread_count(1);
    Setup s(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(norms(s.state, s.lat, s.model));
    st.SetItemsProcessed(st.iterations() * std::int64_t(s.lat.sites()));
}

}  // namespace

BENCHMARK(BM_eom_rhs)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_step_rk4)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_norms)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
