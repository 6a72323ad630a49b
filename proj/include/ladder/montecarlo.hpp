#ifndef LADDER_MONTECARLO_HPP
#define LADDER_MONTECARLO_HPP

#include <cstdint>
#include <vector>

#include "ladder/increments.hpp"
#include "ladder/rng.hpp"
#include "ladder/series.hpp"

namespace ladder {

/// Mean/variance accumulator that keeps one partial per stream and reduces
/// them in stream order only when read. Merging is therefore exactly
/// associative (it is an ordered union of disjoint stream partials), and
/// pooled results are bitwise reproducible for any worker count or merge
/// tree. The ordered list of stream ids doubles as the merge log.
struct StreamStat {
    uint32_t stream = 0;
    uint64_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
};

struct EstimatorAccumulator {
    std::vector<StreamStat> parts; // sorted by stream id, ids distinct

    static EstimatorAccumulator for_stream(uint32_t stream) {
        EstimatorAccumulator a;
        a.parts.push_back(StreamStat{stream, 0, 0.0, 0.0});
        return a;
    }
    void add(double x) {
        StreamStat& p = parts.back();
        ++p.count;
        p.sum += x;
        p.sum_sq += x * x;
    }
    /// Ordered union; stream id sets must be disjoint.
    void merge(const EstimatorAccumulator& other);

    uint64_t count() const;
    double mean() const;
    double variance() const;
    double std_error() const;
    /// 95% normal CI half-width.
    double ci_half_width() const { return 1.959963984540054 * std_error(); }
    std::vector<uint32_t> merge_log() const;
};

struct IntHistogram {
    std::vector<uint64_t> counts; // index 0..horizon
    uint64_t censored = 0;
    uint64_t total = 0;

    double p_eq(long n) const { return static_cast<double>(counts.at(n)) / total; }
    /// P(tau > n) from direct counting; censored paths have tau > horizon.
    double p_gt(long n) const;
    /// Binomial standard error of p_eq(n).
    double stderr_eq(long n) const;
};

/// Geometric bins over [lo, hi) plus underflow/overflow counters.
struct GeomHistogram {
    double lo = 1e-3;
    double hi = 1e3;
    int bins_per_decade = 20;
    std::vector<uint64_t> counts;
    uint64_t below = 0, above = 0;
    uint64_t total = 0;

    void init();
    void add(double x);
    double bin_left(size_t i) const;
    /// Fraction of all recorded mass inside [a, b).
    double mass_fraction(double a, double b) const;
};

struct LadderSample {
    long tau_minus = -1; // -1 = censored at horizon
    long tau_plus = -1;
    double chi_plus = 0.0;            // S at tau+ (valid if tau_plus >= 1)
    double pre_passage_position = 0.0; // S_{tau- - 1} (valid if tau_minus >= 1)
    long path_horizon = 0;
};

struct LadderSimResult {
    IntHistogram tau_minus;
    IntHistogram tau_plus;
    GeomHistogram chi_plus;
    EstimatorAccumulator chi_acc;
    uint64_t trials = 0;
    SeedPlan plan;
    long horizon = 0;
};

/// Seeded ladder-epoch simulation: per-n estimates of P(tau-+/- = n) with
/// censoring counted explicitly, plus the ladder-height sample. Deterministic
/// for a fixed seed plan regardless of thread count.
LadderSimResult simulate_ladders(const IncrementModel& model, long horizon, uint64_t trials,
                                 SeedPlan plan);

/// One path's ladder record; exposed for path-level property checks.
LadderSample sample_one_path(const IncrementModel& model, long horizon, RngStream& rng);

struct MeanderResult {
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    double companion = 0.0; // (1 - rho)/q
    double acceptance = 0.0;
    uint64_t accepted = 0;
    uint64_t trials = 0;
    double c_n = 0.0;
    EstimatorAccumulator acc;
};

/// Rejection-sampled estimate of E[(S_n/c_n)^{-alpha} | tau- > n] against the
/// companion value (1-rho)/q. Throws when q = 0 (the identity degenerates)
/// or when the acceptance rate falls below `acceptance_guard`.
MeanderResult meander_functional(const IncrementModel& model, long n, uint64_t trials,
                                 SeedPlan plan, double acceptance_guard = 1e-4);

struct EndpointResult {
    GeomHistogram scaled;  // S_{n-1}/c_n on geometric bins
    std::vector<uint64_t> raw_unit; // unit bins [0,1),...,[99,100) of S_{n-1}
    uint64_t raw_overflow = 0;
    uint64_t accepted = 0;
    uint64_t trials = 0;
    double acceptance = 0.0;
    double c_n = 0.0;

    /// Fraction of accepted mass with S_{n-1}/c_n in (eps, 1/eps).
    double fraction_scaled_window(double eps) const;
    /// Fraction of accepted mass with S_{n-1} in [0, x].
    double fraction_raw_below(double x) const;
};

/// Distribution of the pre-passage position S_{n-1} given tau- = n exactly.
EndpointResult conditioned_endpoint(const IncrementModel& model, long n, uint64_t trials,
                                    SeedPlan plan);

/// Estimated sign probabilities for a continuous model (lattice models use
/// exact marginals instead). eq_zero is identically zero.
SignSequence sign_probabilities_mc(const IncrementModel& model, long N, uint64_t trials,
                                   SeedPlan plan);

} // namespace ladder

#endif
