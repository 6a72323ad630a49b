// Compares the serial reference kernels against the OpenMP variants and
// checks that both produce bitwise-identical output.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include <omp.h>

#include "ladder/increments.hpp"
#include "ladder/kernels.hpp"
#include "ladder/montecarlo.hpp"

using namespace ladder;
using clk = std::chrono::steady_clock;

namespace {

double secs(clk::time_point a, clk::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

void bench_conv(long n) {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> a(n), b(n), out_s(n), out_p(n);
    for (long i = 0; i < n; ++i) {
        a[i] = dist(gen);
        b[i] = dist(gen);
    }

    auto t0 = clk::now();
    kernels::conv_window_serial(a, 0, b, 0, out_s, 0);
    auto t1 = clk::now();
    kernels::conv_window_omp(a, 0, b, 0, out_p, 0);
    auto t2 = clk::now();

    bool identical = out_s == out_p;
    std::printf("conv n=%-6ld serial %8.3fs  omp %8.3fs  speedup %5.2fx  bitwise %s\n", n,
                secs(t0, t1), secs(t1, t2), secs(t0, t1) / secs(t1, t2),
                identical ? "ok" : "MISMATCH");
}

void bench_mc(uint64_t trials) {
    IncrementModel lazy = IncrementModel::finite_lattice({0.25, 0.5, 0.25}, -1);
    SeedPlan plan{42, 8};

    int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    auto t0 = clk::now();
    LadderSimResult serial = simulate_ladders(lazy, 256, trials, plan);
    auto t1 = clk::now();
    omp_set_num_threads(max_threads);
    LadderSimResult parallel = simulate_ladders(lazy, 256, trials, plan);
    auto t2 = clk::now();

    bool identical = serial.tau_minus.counts == parallel.tau_minus.counts &&
                     serial.chi_acc.mean() == parallel.chi_acc.mean();
    std::printf("mc trials=%-8llu 1 thread %8.3fs  %d threads %8.3fs  speedup %5.2fx  bitwise %s\n",
                static_cast<unsigned long long>(trials), secs(t0, t1), max_threads, secs(t1, t2),
                secs(t0, t1) / secs(t1, t2), identical ? "ok" : "MISMATCH");
}

} // namespace

int main() {
    std::printf("threads available: %d\n", omp_get_max_threads());
    bench_conv(4096);
    bench_conv(16384);
    bench_mc(200000);
    bench_mc(1000000);
    return 0;
}
