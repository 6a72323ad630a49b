#include "ladder/lattice_exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ladder/kernels.hpp"

namespace ladder {

namespace {

// Wide-support models (heavy-tailed lattice Pareto) switch the DP row update
// to FFT convolution and the renewal machinery to truncated-plus-extrapolated
// mode.
constexpr long kNarrowSupportWidth = 129;

} // namespace

LatticeStep LatticeStep::from_model(const IncrementModel& model) {
    if (!model.is_lattice())
        throw std::invalid_argument("lattice operation on a continuous model");
    LatticeStep s;
    s.pmf = model.lattice_pmf();
    s.k_min = model.k_min();
    return s;
}

double MarginalTable::row_sum(long n) const {
    return kernels::sum_ordered(rows.at(n));
}

double MarginalTable::prob_in(long n, long x) const {
    double acc = 0.0;
    for (long j = 1; j <= x; ++j) acc += prob(n, j);
    return acc;
}

MarginalTable marginals(const IncrementModel& model, long N, size_t max_cells) {
    LatticeStep step = LatticeStep::from_model(model);
    long K = std::max(std::abs(step.k_min), std::abs(step.k_max()));
    size_t cells = 0;
    for (long n = 0; n <= N; ++n) cells += 2 * static_cast<size_t>(n) * K + 1;
    if (cells > max_cells)
        throw std::runtime_error("marginals: table of " + std::to_string(cells) +
                                 " cells exceeds the memory guard");

    MarginalTable t;
    t.span = model.span();
    t.rows.resize(N + 1);
    t.lo.resize(N + 1);
    t.rows[0] = {1.0};
    t.lo[0] = 0;
    for (long n = 1; n <= N; ++n) {
        long lo = t.lo[n - 1] + step.k_min;
        long len = static_cast<long>(t.rows[n - 1].size()) + step.width() - 1;
        t.rows[n].assign(len, 0.0);
        kernels::conv_window(t.rows[n - 1], t.lo[n - 1], step.pmf, step.k_min, t.rows[n], lo);
        t.lo[n] = lo;
    }
    return t;
}

SignSequence sign_sequence_exact(const IncrementModel& model, long N) {
    LatticeStep step = LatticeStep::from_model(model);
    SignSequence s;
    s.source = SignSource::Exact;
    s.le_zero.assign(N + 1, 0.0);
    s.gt_zero.assign(N + 1, 0.0);
    s.eq_zero.assign(N + 1, 0.0);

    std::vector<double> row = {1.0};
    long lo = 0;
    std::vector<double> next;
    for (long n = 1; n <= N; ++n) {
        long nlo = lo + step.k_min;
        next.assign(row.size() + step.pmf.size() - 1, 0.0);
        kernels::conv_window(row, lo, step.pmf, step.k_min, next, nlo);
        row.swap(next);
        lo = nlo;

        double le = 0.0, gt = 0.0;
        long zero_idx = -lo;
        for (long i = 0; i < static_cast<long>(row.size()); ++i) {
            if (lo + i <= 0)
                le += row[i];
            else
                gt += row[i];
        }
        s.le_zero[n] = le;
        s.gt_zero[n] = gt;
        s.eq_zero[n] = (zero_idx >= 0 && zero_idx < static_cast<long>(row.size()))
                           ? row[zero_idx]
                           : 0.0;
    }
    return s;
}

double KilledWalkTable::b(long n, long j) const {
    if (j < 1 || j > j_max) return 0.0;
    if (n == N) return last_row[j - 1];
    if (rows.empty() || n < 1 || n > N)
        throw std::out_of_range("KilledWalkTable::b: row not kept");
    return rows[n][j - 1];
}

double KilledWalkTable::B(long n, long x) const {
    const std::vector<double>& row = (n == N && rows.empty()) ? last_row : rows.at(n);
    double acc = 0.0;
    long hi = std::min<long>(x, static_cast<long>(row.size()));
    for (long j = 1; j <= hi; ++j) acc += row[j - 1];
    return acc;
}

KilledWalkTable killed_walk(const IncrementModel& model, long N, KilledWalkOptions opts) {
    LatticeStep step = LatticeStep::from_model(model);
    long k_max = step.k_max();
    if (k_max < 1) throw std::invalid_argument("killed_walk: walk cannot enter (0, inf)");

    long j_max = opts.j_max > 0 ? opts.j_max : N * k_max;
    j_max = std::min(j_max, N * k_max);
    if (opts.keep_rows &&
        static_cast<size_t>(N + 1) * static_cast<size_t>(j_max) > opts.max_cells)
        throw std::runtime_error("killed_walk: kept rows exceed the memory guard");

    KilledWalkTable t;
    t.N = N;
    t.j_max = j_max;
    t.span = model.span();
    t.survival.assign(N + 1, 0.0);
    t.pmf.assign(N + 1, 0.0);
    t.survival[0] = 1.0;
    if (opts.keep_rows) t.rows.resize(N + 1);
    if (opts.accum_x > 0) t.dual_partial.assign(opts.accum_x + 1, 0.0);

    bool fft = static_cast<unsigned long>(step.width()) * j_max > (1UL << 24);

    // Step pmf clipped to the jumps that can matter inside [1, j_max]; the
    // clipped ends go straight to killed/leaked for any source cell.
    long clip_lo = std::max(step.k_min, -j_max);
    long clip_hi = std::min(k_max, j_max - 1);
    std::vector<double> w(step.pmf.begin() + (clip_lo - step.k_min),
                          step.pmf.begin() + (clip_hi - step.k_min) + 1);
    double clip_left = 0.0, clip_right = 0.0;
    for (long m = step.k_min; m < clip_lo; ++m) clip_left += step.prob(m);
    for (long m = clip_hi + 1; m <= k_max; ++m) clip_right += step.prob(m);

    std::vector<double> row(j_max, 0.0); // index j-1
    for (long j = 1; j <= std::min(j_max, k_max); ++j) row[j - 1] = step.prob(j);
    for (long j = j_max + 1; j <= k_max; ++j) t.leaked_mass += step.prob(j);
    t.survival[1] = kernels::sum_ordered(row);
    t.pmf[1] = 1.0 - t.survival[1] - t.leaked_mass;
    if (opts.keep_rows) t.rows[1] = row;
    if (opts.accum_x > 0)
        for (long y = 1; y <= std::min<long>(opts.accum_x, j_max); ++y)
            t.dual_partial[y] += row[y - 1];

    std::vector<double> out;
    for (long n = 2; n <= N; ++n) {
        double leaked = t.survival[n - 1] * clip_right;
        long out_lo = 1 + clip_lo;

        if (!fft) {
            long out_len = j_max + clip_hi - out_lo + 1;
            out.assign(out_len, 0.0);
            kernels::conv_window(row, 1, w, clip_lo, out, out_lo);
            for (long i = j_max + 1 - out_lo; i < out_len; ++i) leaked += out[i];
            for (long j = 1; j <= j_max; ++j) row[j - 1] = out[j - out_lo];
        } else {
            out = kernels::conv_full_fft(row, w);
            // out[i] corresponds to position (1 + clip_lo) + i.
            long out_len = static_cast<long>(out.size());
            for (long i = j_max + 1 - out_lo; i < out_len; ++i) leaked += out[i];
            for (long j = 1; j <= j_max; ++j) {
                long i = j - out_lo;
                row[j - 1] = (i >= 0 && i < out_len) ? std::max(out[i], 0.0) : 0.0;
            }
        }

        t.leaked_mass += leaked;
        t.survival[n] = kernels::sum_ordered(row);
        t.pmf[n] = t.survival[n - 1] - t.survival[n];
        if (opts.keep_rows) t.rows[n] = row;
        if (opts.accum_x > 0) {
            for (long y = 1; y <= std::min<long>(opts.accum_x, j_max); ++y)
                t.dual_partial[y] += row[y - 1];
            if (std::binary_search(opts.snapshot_at.begin(), opts.snapshot_at.end(), n))
                t.dual_snapshots.emplace_back(n, t.dual_partial);
        }
    }
    t.last_row = row;
    t.flagged = t.leaked_mass > opts.leak_flag_tol;
    return t;
}

// ---------------------------------------------------------------------------
// Resolvent solve: banded LU without pivoting (the system matrix I - Q is an
// M-matrix) plus one bordered unknown for the constant closure beyond the
// domain.

namespace {

detail::GreenRawT<double> solve_green_domain(const LatticeStep& step,
                                             const std::vector<double>& src, long Y) {
    return detail::solve_green_domain_t<double>(step.pmf, step.k_min, src, Y);
}

} // namespace

GreenFunction killed_green(const IncrementModel& model, const std::vector<double>& src,
                           long x_max) {
    LatticeStep step = LatticeStep::from_model(model);
    if (step.width() > kNarrowSupportWidth)
        throw std::runtime_error("killed_green: support too wide for the resolvent route");
    if (std::abs(model.mean()) > 1e-9)
        throw std::invalid_argument("killed_green: constant closure requires a zero-mean walk");

    long src_max = static_cast<long>(src.size()) - 1;
    long W = std::max(step.k_max(), -step.k_min);
    long margin = std::max<long>(64, 16 * W);
    long Y1 = std::max(x_max, src_max) + step.k_max() + margin;
    detail::GreenRawT<double> a = solve_green_domain(step, src, Y1);
    detail::GreenRawT<double> b =
        solve_green_domain(step, src, Y1 + std::max<long>(margin, 64) * 2);

    GreenFunction out;
    out.g.assign(x_max + 1, 0.0);
    double stab = 0.0;
    for (long y = 1; y <= x_max; ++y) {
        out.g[y] = b.g[y];
        stab = std::max(stab, std::abs(a.g[y] - b.g[y]));
    }
    out.g_inf = b.g_inf;
    out.stability = stab;

    // Residual on equations just beyond the solved domain, using the closure.
    long Y = Y1;
    double res = 0.0;
    for (long y = Y + 2; y <= Y + step.k_max(); ++y) {
        double acc = -a.g_inf;
        for (long mm = step.k_min; mm <= step.k_max(); ++mm) {
            long i = y - mm;
            if (i < 1) continue;
            double gi = i <= Y ? a.g[i] : a.g_inf;
            acc += step.prob(mm) * gi;
        }
        res = std::max(res, std::abs(acc));
    }
    out.residual = res;
    return out;
}

RenewalTable renewal_function(const IncrementModel& model, long x_max, long n_dual) {
    LatticeStep step = LatticeStep::from_model(model);
    long k_max = step.k_max();
    if (k_max < 1) throw std::invalid_argument("renewal_function: walk never ascends");
    bool narrow = step.width() <= kNarrowSupportWidth;

    RenewalTable t;
    t.span = model.span();
    t.n_dual = n_dual;
    t.exact = narrow;

    // Duality partial sums from the killed-walk DP. Wide models run past
    // n_dual so the tail of the duality series can be measured.
    KilledWalkOptions opts;
    opts.accum_x = x_max;
    opts.j_max = narrow ? 0 : std::max<long>(4 * x_max, x_max + 4096);
    long n_run = narrow ? n_dual : n_dual + n_dual / 2;
    if (!narrow) opts.snapshot_at = {n_dual, n_dual + n_dual / 4};
    KilledWalkTable kt = killed_walk(model, n_run, opts);

    const std::vector<double>& partial_at_ndual =
        narrow ? kt.dual_partial : kt.dual_snapshots.at(0).second;
    t.H_partial.assign(x_max + 1, 1.0);
    for (long x = 1; x <= x_max; ++x)
        t.H_partial[x] = t.H_partial[x - 1] + partial_at_ndual[x];

    if (narrow) {
        // Exact completion: G solves the resolvent equation; remainder =
        // G - partial must be nonnegative.
        std::vector<double> src(k_max + 1, 0.0);
        for (long y = 1; y <= k_max; ++y) src[y] = step.prob(y);
        GreenFunction green = killed_green(model, src, x_max);

        t.H.assign(x_max + 1, 1.0);
        for (long x = 1; x <= x_max; ++x) t.H[x] = t.H[x - 1] + green.g[x];
        t.remainder_bound =
            (green.residual + green.stability) * static_cast<double>(x_max) + 1e-12 * (x_max + 1) +
            kt.leaked_mass * static_cast<double>(x_max);

        // Ladder route: chi+ pmf from the mirrored resolvent (first entry into
        // (0, inf) from the nonpositive half-line).
        LatticeStep refl;
        refl.pmf.assign(step.pmf.rbegin(), step.pmf.rend());
        refl.k_min = -k_max;
        IncrementModel mirror = IncrementModel::finite_lattice(refl.pmf, refl.k_min, 1.0);
        std::vector<double> delta = {0.0, 1.0}; // source at k = 1 (origin)
        GreenFunction occ = killed_green(mirror, delta, k_max + 8);

        t.chi_pmf.assign(k_max + 1, 0.0);
        double total = 0.0;
        for (long y = 1; y <= k_max; ++y) {
            double acc = 0.0;
            for (long k = 1; k <= k_max + 8; ++k) {
                // A(j) at j = 1 - k; step from j to y has probability p(y - j).
                double p = step.prob(y + k - 1);
                if (p != 0.0) acc += occ.g[k] * p;
            }
            t.chi_pmf[y] = acc;
            total += acc;
        }
        t.chi_total = total;
    } else {
        // Wide support: truncated duality sum; the tail is bounded by the
        // measured decay of the last two extension blocks (the duality series
        // for these heavy-tailed families decays polynomially fast in n).
        const std::vector<double>& partial_mid = kt.dual_snapshots.at(1).second;
        double grown1 = 0.0, grown2 = 0.0;
        for (long x = 1; x <= x_max; ++x) {
            grown1 = std::max(grown1, partial_mid[x] - partial_at_ndual[x]);
            grown2 = std::max(grown2, kt.dual_partial[x] - partial_mid[x]);
        }
        double r = grown1 > 0 ? std::clamp(grown2 / grown1, 0.0, 0.95) : 0.0;
        double tail_bound = 2.0 * grown2 * (r > 0 ? r / (1.0 - r) : 1.0) + grown2;

        t.H.assign(x_max + 1, 1.0);
        for (long x = 1; x <= x_max; ++x) t.H[x] = t.H[x - 1] + kt.dual_partial[x];
        t.remainder_bound = tail_bound + kt.leaked_mass * static_cast<double>(x_max);

        // chi+ by truncated first-passage DP on the nonpositive half-line;
        // only chi values <= x_max enter H on [0, x_max].
        long depth = std::max<long>(512, n_dual / 4);
        long j_min = opts.j_max;
        long w_lo = std::max(step.k_min, -j_min - 1);
        long w_hi = std::min(step.k_max(), j_min + x_max + 1);
        std::vector<double> w(step.pmf.begin() + (w_lo - step.k_min),
                              step.pmf.begin() + (w_hi - step.k_min) + 1);
        double w_lost_below = 0.0;
        for (long m = step.k_min; m < w_lo; ++m) w_lost_below += step.prob(m);

        std::vector<double> a(j_min + 1, 0.0); // a[k] = mass at position -k
        a[0] = 1.0;
        t.chi_pmf.assign(x_max + 1, 0.0);
        double lost_below = 0.0, alive = 1.0;
        for (long n = 1; n <= depth && alive > 1e-12; ++n) {
            std::vector<double> in(a.rbegin(), a.rend()); // positions -j_min..0
            std::vector<double> full = kernels::conv_full_fft(in, w);
            long out_lo = -j_min + w_lo;
            lost_below += alive * w_lost_below;
            std::fill(a.begin(), a.end(), 0.0);
            alive = 0.0;
            for (long idx = 0; idx < static_cast<long>(full.size()); ++idx) {
                long pos = out_lo + idx;
                double mass = full[idx];
                if (mass <= 0) continue;
                if (pos >= 1) {
                    if (pos <= x_max) t.chi_pmf[pos] += mass;
                } else if (pos >= -j_min) {
                    a[-pos] = mass;
                    alive += mass;
                } else {
                    lost_below += mass;
                }
            }
        }
        double total = 0.0;
        for (long y = 1; y <= x_max; ++y) total += t.chi_pmf[y];
        t.chi_total = total;
        double chi_err = alive + lost_below;
        t.remainder_bound += 2.0 * chi_err * t.H_partial[x_max];
    }

    // Ladder-height renewal recursion.
    long chi_max = static_cast<long>(t.chi_pmf.size()) - 1;
    std::vector<double> u(x_max + 1, 0.0);
    u[0] = 1.0;
    for (long j = 1; j <= x_max; ++j) {
        double acc = 0.0;
        for (long i = 1; i <= std::min(j, chi_max); ++i)
            if (t.chi_pmf[i] != 0.0) acc += t.chi_pmf[i] * u[j - i];
        u[j] = acc;
    }
    t.H_ladder.assign(x_max + 1, 0.0);
    t.H_ladder[0] = 1.0;
    for (long j = 1; j <= x_max; ++j) t.H_ladder[j] = t.H_ladder[j - 1] + u[j];

    // Duality is an exact identity: the two routes must agree within the bound.
    double worst = 0.0;
    for (long x = 0; x <= x_max; ++x)
        worst = std::max(worst, std::abs(t.H[x] - t.H_ladder[x]));
    double gate = t.exact ? std::max(t.remainder_bound, 1e-8)
                          : std::max(t.remainder_bound, 0.05 * t.H[x_max]);
    if (worst > gate)
        throw std::runtime_error("renewal_function: duality and ladder constructions disagree (" +
                                 std::to_string(worst) + " > bound " + std::to_string(gate) + ")");
    return t;
}

double eppel_residual(const MarginalTable& marg, const KilledWalkTable& killed, long n, long x) {
    if (n < 1 || n > killed.N || (n > 1 && killed.rows.empty()))
        throw std::invalid_argument("eppel_residual: killed table must keep rows up to n");
    if (marg.order() < n - 1)
        throw std::invalid_argument("eppel_residual: marginals must cover n-1");

    double lhs = static_cast<double>(n) * killed.B(n, x);
    double rhs = marg.prob_in(n, x);
    for (long k = 1; k <= n - 1; ++k) {
        double acc = 0.0;
        for (long y = 1; y <= x; ++y) {
            double pk = marg.prob(k, y);
            if (pk != 0.0) acc += killed.B(n - k, x - y) * pk;
        }
        rhs += acc;
    }
    return std::abs(lhs - rhs);
}

std::string killed_table_to_csv(const KilledWalkTable& t) {
    if (t.rows.empty())
        throw std::runtime_error("killed_table_to_csv: rows were not kept");
    std::string out = "n,j,value\n";
    char buf[80];
    for (long n = 1; n <= t.N; ++n) {
        for (long j = 1; j <= t.j_max; ++j) {
            double v = t.rows[n][j - 1];
            if (v == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%ld,%ld,%.17g\n", n, j, v);
            out += buf;
        }
    }
    return out;
}

namespace {
constexpr char kCacheMagic[4] = {'L', 'K', 'W', 'T'};
constexpr uint32_t kCacheVersion = 1;
} // namespace

void killed_table_save(const KilledWalkTable& t, uint64_t model_hash, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("killed_table_save: cannot open " + path);
    os.write(kCacheMagic, 4);
    auto put = [&os](const void* p, size_t n) { os.write(static_cast<const char*>(p), n); };
    put(&kCacheVersion, sizeof kCacheVersion);
    put(&model_hash, sizeof model_hash);
    put(&t.N, sizeof t.N);
    put(&t.j_max, sizeof t.j_max);
    put(&t.span, sizeof t.span);
    put(&t.leaked_mass, sizeof t.leaked_mass);
    put(t.survival.data(), t.survival.size() * sizeof(double));
    put(t.pmf.data(), t.pmf.size() * sizeof(double));
    put(t.last_row.data(), t.last_row.size() * sizeof(double));
    uint64_t acc = t.dual_partial.size();
    put(&acc, sizeof acc);
    put(t.dual_partial.data(), t.dual_partial.size() * sizeof(double));
}

std::optional<KilledWalkTable> killed_table_load(const std::string& path, uint64_t model_hash) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return std::nullopt;
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCacheMagic, 4) != 0) return std::nullopt;
    auto get = [&is](void* p, size_t n) { is.read(static_cast<char*>(p), n); };
    uint32_t version = 0;
    uint64_t hash = 0;
    get(&version, sizeof version);
    get(&hash, sizeof hash);
    if (version != kCacheVersion || hash != model_hash) return std::nullopt;
    KilledWalkTable t;
    get(&t.N, sizeof t.N);
    get(&t.j_max, sizeof t.j_max);
    get(&t.span, sizeof t.span);
    get(&t.leaked_mass, sizeof t.leaked_mass);
    t.survival.resize(t.N + 1);
    t.pmf.resize(t.N + 1);
    t.last_row.resize(t.j_max);
    get(t.survival.data(), t.survival.size() * sizeof(double));
    get(t.pmf.data(), t.pmf.size() * sizeof(double));
    get(t.last_row.data(), t.last_row.size() * sizeof(double));
    uint64_t acc = 0;
    get(&acc, sizeof acc);
    t.dual_partial.resize(acc);
    get(t.dual_partial.data(), acc * sizeof(double));
    if (!is) return std::nullopt;
    return t;
}

} // namespace ladder
