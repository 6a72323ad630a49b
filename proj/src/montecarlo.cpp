#include "ladder/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ladder {

void EstimatorAccumulator::merge(const EstimatorAccumulator& other) {
    std::vector<StreamStat> merged;
    merged.reserve(parts.size() + other.parts.size());
    size_t i = 0, j = 0;
    while (i < parts.size() || j < other.parts.size()) {
        if (j == other.parts.size() ||
            (i < parts.size() && parts[i].stream < other.parts[j].stream))
            merged.push_back(parts[i++]);
        else if (i == parts.size() || other.parts[j].stream < parts[i].stream)
            merged.push_back(other.parts[j++]);
        else
            throw std::logic_error("EstimatorAccumulator::merge: duplicate stream id");
    }
    parts = std::move(merged);
}

uint64_t EstimatorAccumulator::count() const {
    uint64_t c = 0;
    for (const StreamStat& p : parts) c += p.count;
    return c;
}

double EstimatorAccumulator::mean() const {
    uint64_t c = count();
    if (c == 0) return 0.0;
    double s = 0.0;
    for (const StreamStat& p : parts) s += p.sum;
    return s / static_cast<double>(c);
}

double EstimatorAccumulator::variance() const {
    uint64_t c = count();
    if (c < 2) return 0.0;
    double s = 0.0, ss = 0.0;
    for (const StreamStat& p : parts) {
        s += p.sum;
        ss += p.sum_sq;
    }
    double m = s / static_cast<double>(c);
    double v = (ss - static_cast<double>(c) * m * m) / static_cast<double>(c - 1);
    return std::max(v, 0.0);
}

double EstimatorAccumulator::std_error() const {
    uint64_t c = count();
    return c ? std::sqrt(variance() / static_cast<double>(c)) : 0.0;
}

std::vector<uint32_t> EstimatorAccumulator::merge_log() const {
    std::vector<uint32_t> ids;
    ids.reserve(parts.size());
    for (const StreamStat& p : parts) ids.push_back(p.stream);
    return ids;
}

double IntHistogram::p_gt(long n) const {
    uint64_t le = 0;
    for (long k = 0; k <= n && k < static_cast<long>(counts.size()); ++k) le += counts[k];
    return static_cast<double>(total - le) / static_cast<double>(total);
}

double IntHistogram::stderr_eq(long n) const {
    double p = p_eq(n);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(total));
}

void GeomHistogram::init() {
    int decades = static_cast<int>(std::round(std::log10(hi / lo)));
    counts.assign(static_cast<size_t>(decades) * bins_per_decade, 0);
}

void GeomHistogram::add(double x) {
    ++total;
    if (x < lo) {
        ++below;
        return;
    }
    if (x >= hi) {
        ++above;
        return;
    }
    double t = std::log10(x / lo) * bins_per_decade;
    size_t i = std::min(counts.size() - 1, static_cast<size_t>(t));
    ++counts[i];
}

double GeomHistogram::bin_left(size_t i) const {
    return lo * std::pow(10.0, static_cast<double>(i) / bins_per_decade);
}

double GeomHistogram::mass_fraction(double a, double b) const {
    if (total == 0) return 0.0;
    uint64_t acc = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
        double l = bin_left(i), r = bin_left(i + 1);
        if (l >= a && r <= b) acc += counts[i];
    }
    return static_cast<double>(acc) / static_cast<double>(total);
}

LadderSimResult simulate_ladders(const IncrementModel& model, long horizon, uint64_t trials,
                                 SeedPlan plan) {
    if (horizon < 1 || trials < 1)
        throw std::invalid_argument("simulate_ladders: horizon and trials must be >= 1");

    uint32_t S = plan.streams;
    std::vector<IntHistogram> hm(S), hp(S);
    std::vector<GeomHistogram> hc(S);
    std::vector<EstimatorAccumulator> ac(S);
    for (uint32_t s = 0; s < S; ++s) {
        hm[s].counts.assign(horizon + 1, 0);
        hp[s].counts.assign(horizon + 1, 0);
        hc[s].lo = 1e-3;
        hc[s].hi = 1e6;
        hc[s].init();
        ac[s] = EstimatorAccumulator::for_stream(s);
    }

#pragma omp parallel for schedule(dynamic)
    for (long si = 0; si < static_cast<long>(S); ++si) {
        uint32_t s = static_cast<uint32_t>(si);
        auto [first, last] = plan.stream_range(s, trials);
        RngStream rng(plan.stream_seed(s));
        for (uint64_t t = first; t < last; ++t) {
            double pos = 0.0;
            long tau_minus = -1, tau_plus = -1;
            for (long k = 1; k <= horizon; ++k) {
                pos += model.sample(rng);
                if (tau_minus < 0 && pos <= 0.0) {
                    tau_minus = k;
                    if (tau_plus >= 0) break;
                }
                if (tau_plus < 0 && pos > 0.0) {
                    tau_plus = k;
                    ac[s].add(pos);
                    hc[s].add(pos);
                    if (tau_minus >= 0) break;
                }
            }
            ++hm[s].total;
            ++hp[s].total;
            if (tau_minus >= 1)
                ++hm[s].counts[tau_minus];
            else
                ++hm[s].censored;
            if (tau_plus >= 1)
                ++hp[s].counts[tau_plus];
            else
                ++hp[s].censored;
        }
    }

    LadderSimResult out;
    out.trials = trials;
    out.plan = plan;
    out.horizon = horizon;
    out.tau_minus.counts.assign(horizon + 1, 0);
    out.tau_plus.counts.assign(horizon + 1, 0);
    out.chi_plus.lo = 1e-3;
    out.chi_plus.hi = 1e6;
    out.chi_plus.init();
    for (uint32_t s = 0; s < S; ++s) {
        for (long n = 0; n <= horizon; ++n) {
            out.tau_minus.counts[n] += hm[s].counts[n];
            out.tau_plus.counts[n] += hp[s].counts[n];
        }
        out.tau_minus.censored += hm[s].censored;
        out.tau_plus.censored += hp[s].censored;
        out.tau_minus.total += hm[s].total;
        out.tau_plus.total += hp[s].total;
        for (size_t i = 0; i < out.chi_plus.counts.size(); ++i)
            out.chi_plus.counts[i] += hc[s].counts[i];
        out.chi_plus.below += hc[s].below;
        out.chi_plus.above += hc[s].above;
        out.chi_plus.total += hc[s].total;
        out.chi_acc.merge(ac[s]);
    }
    return out;
}

LadderSample sample_one_path(const IncrementModel& model, long horizon, RngStream& rng) {
    LadderSample rec;
    rec.path_horizon = horizon;
    double pos = 0.0, prev = 0.0;
    for (long k = 1; k <= horizon; ++k) {
        prev = pos;
        pos += model.sample(rng);
        if (rec.tau_minus < 0 && pos <= 0.0) {
            rec.tau_minus = k;
            rec.pre_passage_position = prev;
        }
        if (rec.tau_plus < 0 && pos > 0.0) {
            rec.tau_plus = k;
            rec.chi_plus = pos;
        }
        if (rec.tau_minus >= 0 && rec.tau_plus >= 0) break;
    }
    return rec;
}

MeanderResult meander_functional(const IncrementModel& model, long n, uint64_t trials,
                                 SeedPlan plan, double acceptance_guard) {
    if (model.q() == 0.0)
        throw std::invalid_argument("meander_functional: identity undefined (q = 0)");
    if (model.alpha() >= 2.0)
        throw std::invalid_argument("meander_functional: requires alpha < 2");
    if (n < 1 || trials < 1)
        throw std::invalid_argument("meander_functional: n and trials must be >= 1");

    double alpha = model.alpha();
    double c_n = normalizing_sequence(model, n);
    double rho = rho_index(alpha, model.beta());

    uint32_t S = plan.streams;
    std::vector<EstimatorAccumulator> acc(S);
    for (uint32_t s = 0; s < S; ++s) acc[s] = EstimatorAccumulator::for_stream(s);

#pragma omp parallel for schedule(dynamic)
    for (long si = 0; si < static_cast<long>(S); ++si) {
        uint32_t s = static_cast<uint32_t>(si);
        auto [first, last] = plan.stream_range(s, trials);
        RngStream rng(plan.stream_seed(s));
        for (uint64_t t = first; t < last; ++t) {
            double pos = 0.0;
            bool alive = true;
            for (long k = 1; k <= n; ++k) {
                pos += model.sample(rng);
                if (pos <= 0.0) {
                    alive = false;
                    break;
                }
            }
            if (alive) acc[s].add(std::pow(pos / c_n, -alpha));
        }
    }

    MeanderResult out;
    for (uint32_t s = 0; s < S; ++s) out.acc.merge(acc[s]);
    out.trials = trials;
    out.accepted = out.acc.count();
    out.acceptance = static_cast<double>(out.accepted) / static_cast<double>(trials);
    out.c_n = c_n;
    out.companion = (1.0 - rho) / model.q();
    if (out.acceptance < acceptance_guard) {
        throw std::runtime_error(
            "meander_functional: acceptance rate " + std::to_string(out.acceptance) +
            " below guard " + std::to_string(acceptance_guard) + "; use a smaller n");
    }
    out.estimate = out.acc.mean();
    out.std_error = out.acc.std_error();
    double half = out.acc.ci_half_width();
    out.ci_lo = out.estimate - half;
    out.ci_hi = out.estimate + half;
    return out;
}

EndpointResult conditioned_endpoint(const IncrementModel& model, long n, uint64_t trials,
                                    SeedPlan plan) {
    if (model.alpha() >= 2.0)
        throw std::invalid_argument("conditioned_endpoint: requires alpha < 2");
    if (n < 2 || trials < 1)
        throw std::invalid_argument("conditioned_endpoint: need n >= 2 and trials >= 1");

    double c_n = normalizing_sequence(model, n);
    uint32_t S = plan.streams;
    std::vector<GeomHistogram> hs(S);
    std::vector<std::vector<uint64_t>> raw(S);
    std::vector<uint64_t> raw_over(S, 0), accepted(S, 0);
    for (uint32_t s = 0; s < S; ++s) {
        hs[s].lo = 1e-3;
        hs[s].hi = 1e3;
        hs[s].init();
        raw[s].assign(100, 0);
    }

#pragma omp parallel for schedule(dynamic)
    for (long si = 0; si < static_cast<long>(S); ++si) {
        uint32_t s = static_cast<uint32_t>(si);
        auto [first, last] = plan.stream_range(s, trials);
        RngStream rng(plan.stream_seed(s));
        for (uint64_t t = first; t < last; ++t) {
            double pos = 0.0, prev = 0.0;
            long tau = -1;
            for (long k = 1; k <= n; ++k) {
                prev = pos;
                pos += model.sample(rng);
                if (pos <= 0.0) {
                    tau = k;
                    break;
                }
            }
            if (tau != n) continue;
            ++accepted[s];
            hs[s].add(prev / c_n);
            if (prev < 100.0)
                ++raw[s][static_cast<size_t>(prev)];
            else
                ++raw_over[s];
        }
    }

    EndpointResult out;
    out.scaled.lo = 1e-3;
    out.scaled.hi = 1e3;
    out.scaled.init();
    out.raw_unit.assign(100, 0);
    for (uint32_t s = 0; s < S; ++s) {
        for (size_t i = 0; i < out.scaled.counts.size(); ++i)
            out.scaled.counts[i] += hs[s].counts[i];
        out.scaled.below += hs[s].below;
        out.scaled.above += hs[s].above;
        out.scaled.total += hs[s].total;
        for (size_t i = 0; i < 100; ++i) out.raw_unit[i] += raw[s][i];
        out.raw_overflow += raw_over[s];
        out.accepted += accepted[s];
    }
    out.trials = trials;
    out.acceptance = static_cast<double>(out.accepted) / static_cast<double>(trials);
    out.c_n = c_n;
    if (out.accepted == 0)
        throw std::runtime_error(
            "conditioned_endpoint: no accepted samples (acceptance diagnostics: trials=" +
            std::to_string(trials) + ", n=" + std::to_string(n) + ")");
    return out;
}

double EndpointResult::fraction_scaled_window(double eps) const {
    return scaled.mass_fraction(eps, 1.0 / eps);
}

double EndpointResult::fraction_raw_below(double x) const {
    if (accepted == 0) return 0.0;
    uint64_t acc = 0;
    for (size_t i = 0; i < raw_unit.size() && static_cast<double>(i + 1) <= x + 1e-12; ++i)
        acc += raw_unit[i];
    return static_cast<double>(acc) / static_cast<double>(accepted);
}

SignSequence sign_probabilities_mc(const IncrementModel& model, long N, uint64_t trials,
                                   SeedPlan plan) {
    if (model.is_lattice())
        throw std::invalid_argument(
            "sign_probabilities_mc: lattice models use exact marginals instead");
    if (N < 1 || trials < 1)
        throw std::invalid_argument("sign_probabilities_mc: N and trials must be >= 1");

    uint32_t S = plan.streams;
    std::vector<std::vector<uint64_t>> gt(S, std::vector<uint64_t>(N + 1, 0));

#pragma omp parallel for schedule(dynamic)
    for (long si = 0; si < static_cast<long>(S); ++si) {
        uint32_t s = static_cast<uint32_t>(si);
        auto [first, last] = plan.stream_range(s, trials);
        RngStream rng(plan.stream_seed(s));
        for (uint64_t t = first; t < last; ++t) {
            double pos = 0.0;
            for (long k = 1; k <= N; ++k) {
                pos += model.sample(rng);
                if (pos > 0.0) ++gt[s][k];
            }
        }
    }

    SignSequence out;
    out.source = SignSource::MonteCarlo;
    out.le_zero.assign(N + 1, 0.0);
    out.gt_zero.assign(N + 1, 0.0);
    out.eq_zero.assign(N + 1, 0.0);
    out.stderr_gt.assign(N + 1, 0.0);
    for (long k = 1; k <= N; ++k) {
        uint64_t c = 0;
        for (uint32_t s = 0; s < S; ++s) c += gt[s][k];
        double p = static_cast<double>(c) / static_cast<double>(trials);
        out.gt_zero[k] = p;
        out.le_zero[k] = 1.0 - p;
        out.stderr_gt[k] = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    }
    return out;
}

} // namespace ladder
