#ifndef LADDER_LATTICE_EXACT_HPP
#define LADDER_LATTICE_EXACT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ladder/increments.hpp"
#include "ladder/series.hpp"

namespace ladder {

/// Step distribution of a lattice model in reduced units (the span divided
/// out): pmf[i] = P(X = (k_min + i) * span).
struct LatticeStep {
    std::vector<double> pmf;
    long k_min = 0;

    long k_max() const { return k_min + static_cast<long>(pmf.size()) - 1; }
    long width() const { return static_cast<long>(pmf.size()); }
    double prob(long k) const {
        long i = k - k_min;
        return (i >= 0 && i < width()) ? pmf[i] : 0.0;
    }
    static LatticeStep from_model(const IncrementModel& model);
};

/// Exact marginals P(S_n = j * span) for n <= N. Row n is supported on
/// |j| <= n * K and sums to 1 within 1e-12.
struct MarginalTable {
    std::vector<std::vector<double>> rows; // rows[n][j - lo[n]]
    std::vector<long> lo;
    double span = 1.0;

    long order() const { return static_cast<long>(rows.size()) - 1; }
    double prob(long n, long j) const {
        long i = j - lo[n];
        if (i < 0 || i >= static_cast<long>(rows[n].size())) return 0.0;
        return rows[n][i];
    }
    double row_sum(long n) const;
    /// P(S_n in (0, x]) in lattice units.
    double prob_in(long n, long x) const;
};

/// Iterated exact convolution. Throws when the table would exceed max_cells
/// entries (memory guard).
MarginalTable marginals(const IncrementModel& model, long N, size_t max_cells = size_t(1) << 26);

/// Streaming exact sign probabilities P(S_n <= 0), P(S_n > 0), P(S_n = 0)
/// for n = 1..N without storing the marginal rows.
SignSequence sign_sequence_exact(const IncrementModel& model, long N);

struct KilledWalkOptions {
    long j_max = 0;          // spatial truncation; 0 = auto (N * k_max, exact for bounded steps)
    bool keep_rows = false;  // retain all b_n rows (needed by eppel_residual)
    long accum_x = 0;        // accumulate duality partial sums for y <= accum_x
    std::vector<long> snapshot_at; // sorted n values at which to snapshot dual_partial
    double leak_flag_tol = 1e-9;
    size_t max_cells = size_t(1) << 27;
};

/// Exact tables of the walk killed on (-infty, 0]:
///   b_n(j) = P(S_n = j * span; tau- > n), survival[n] = P(tau- > n),
///   pmf[n] = P(tau- = n) = survival[n-1] - survival[n].
/// Row sums reproduce survival in the same summation order. Mass pushed
/// above j_max is accumulated into leaked_mass (an upper bound on the
/// table's deficit); crossing leak_flag_tol flags the table.
struct KilledWalkTable {
    long N = 0;
    long j_max = 0;
    double span = 1.0;
    std::vector<double> survival; // [0..N], survival[0] = 1
    std::vector<double> pmf;      // [0..N], pmf[0] = 0
    std::vector<std::vector<double>> rows; // when keep_rows; rows[n][j-1] = b_n(j)
    std::vector<double> last_row;          // b_N, always kept (index j-1)
    std::vector<double> dual_partial;      // [1..accum_x]: sum_{n<=N} b_n(y)
    std::vector<std::pair<long, std::vector<double>>> dual_snapshots;
    double leaked_mass = 0.0;
    bool flagged = false;

    double b(long n, long j) const;
    /// B_n(x) = P(S_n in (0, x]; tau- > n) in lattice units.
    double B(long n, long x) const;
};

KilledWalkTable killed_walk(const IncrementModel& model, long N, KilledWalkOptions opts = {});

/// Green function of the killed walk: G(y) = sum_{n>=1} b_n(y), solved
/// exactly from the resolvent equation G = s + (G * p)|_{(0,inf)} with a
/// constant closure beyond the domain (valid for zero-mean finite-support
/// steps, where bounded harmonic solutions are constants plus exponentially
/// decaying modes).
struct GreenFunction {
    std::vector<double> g; // [1..x_max] stored at index y
    double g_inf = 0.0;
    double residual = 0.0; // max equation violation just beyond the domain
    double stability = 0.0; // change under domain doubling
};

/// Solves G = src + (G * p)|_{(0,inf)} on [1, x_max] for a zero-mean,
/// finite-support lattice model; src is indexed from 1.
GreenFunction killed_green(const IncrementModel& model, const std::vector<double>& source,
                           long x_max);

/// Renewal function H (duality route, completed) against the ladder-height
/// construction. For finite-support models both routes are exact up to the
/// reported remainder_bound; for wide-support (heavy-tailed) lattice models
/// the duality route is a truncated sum with a power-law extrapolated
/// remainder and the ladder route uses a renormalized chi+ extraction.
struct RenewalTable {
    double span = 1.0;
    std::vector<double> H;         // duality route, H[x] for x = 0..x_max
    std::vector<double> H_partial; // truncated duality sum (1 + partial)
    std::vector<double> H_ladder;  // ladder-height convolution route
    std::vector<double> chi_pmf;   // [1..chi_max] at index j
    double chi_total = 0.0;
    double remainder_bound = 0.0;
    long n_dual = 0;
    bool exact = false;

    long x_max() const { return static_cast<long>(H.size()) - 1; }
};

RenewalTable renewal_function(const IncrementModel& model, long x_max, long n_dual);

/// |n B_n(x) - P(S_n in (0,x]) - sum_{k=1}^{n-1} sum_{0<y<=x} B_{n-k}(x-y) P(S_k = y)|.
double eppel_residual(const MarginalTable& marg, const KilledWalkTable& killed, long n, long x);

/// CSV export of the kept killed-walk rows as "n,j,value".
std::string killed_table_to_csv(const KilledWalkTable& t);

/// Versioned binary cache of a killed-walk table, keyed by the model hash.
void killed_table_save(const KilledWalkTable& t, uint64_t model_hash, const std::string& path);
std::optional<KilledWalkTable> killed_table_load(const std::string& path, uint64_t model_hash);

namespace detail {

// Banded LU without pivoting (I - Q is an M-matrix) with one bordered
// unknown closing the domain at a constant. Templated so the exact-rational
// escape hatch can run the same solve.
template <class T>
struct GreenRawT {
    std::vector<T> g; // [0..Y], index y, [0] unused
    T g_inf = T(0);
};

template <class T>
GreenRawT<T> solve_green_domain_t(const std::vector<T>& pmf, long k_min,
                                  const std::vector<T>& src, long Y) {
    long k_max = k_min + static_cast<long>(pmf.size()) - 1;
    long W = std::max(k_max, -k_min);
    if (static_cast<long>(src.size()) - 1 > Y - k_max)
        throw std::invalid_argument("green solve: domain too small for the source support");
    auto prob = [&](long m) -> T {
        long i = m - k_min;
        return (i >= 0 && i < static_cast<long>(pmf.size())) ? pmf[i] : T(0);
    };

    std::vector<T> band(static_cast<size_t>(2 * W + 1) * Y, T(0));
    auto at = [&](long r, long c) -> T& {
        return band[static_cast<size_t>(r - 1) * (2 * W + 1) + (c - r + W)];
    };
    for (long y = 1; y <= Y; ++y)
        for (long c = std::max<long>(1, y - k_max); c <= std::min(Y, y - k_min); ++c)
            at(y, c) = (c == y ? T(1) : T(0)) - prob(y - c);

    std::vector<T> u(Y + 1, T(0)), v(Y + 1, T(0));
    for (long y = 1; y < static_cast<long>(src.size()) && y <= Y; ++y) u[y] = src[y];
    for (long y = std::max<long>(1, Y + 1 + k_min); y <= Y; ++y) {
        T acc(0);
        for (long m = k_min; m <= y - Y - 1; ++m) acc += prob(m);
        v[y] = acc;
    }

    for (long y = 1; y <= Y; ++y) {
        T piv = at(y, y);
        if (piv == T(0)) throw std::runtime_error("green solve: zero pivot");
        for (long r = y + 1; r <= std::min(Y, y + W); ++r) {
            T f = at(r, y) / piv;
            if (f == T(0)) continue;
            at(r, y) = T(0);
            for (long c = y + 1; c <= std::min(Y, y + W); ++c) at(r, c) -= f * at(y, c);
            u[r] -= f * u[y];
            v[r] -= f * v[y];
        }
    }
    for (long y = Y; y >= 1; --y) {
        T au = u[y], av = v[y];
        for (long c = y + 1; c <= std::min(Y, y + W); ++c) {
            au -= at(y, c) * u[c];
            av -= at(y, c) * v[c];
        }
        u[y] = au / at(y, y);
        v[y] = av / at(y, y);
    }

    T p_plus(0);
    for (long m = 1; m <= k_max; ++m) p_plus += prob(m);
    T num(0), den = p_plus;
    for (long i = std::max<long>(1, Y + 1 - k_max); i <= Y; ++i) {
        T p = prob(Y + 1 - i);
        num += p * u[i];
        den -= p * v[i];
    }
    if (den == T(0)) throw std::runtime_error("green solve: singular closure");
    GreenRawT<T> out;
    out.g_inf = num / den;
    out.g.assign(Y + 1, T(0));
    for (long y = 1; y <= Y; ++y) out.g[y] = u[y] + out.g_inf * v[y];
    return out;
}

} // namespace detail

// --- exact-rational escape hatch -----------------------------------------
// The same DP and sign extraction, templated on the scalar. Used by tests
// with boost::multiprecision::cpp_rational to pin ground truth; j_max must
// cover the full support (no leak accounting here).

template <class T>
struct ExactSigns {
    std::vector<T> le, gt, eq; // index 1..N
};

template <class T>
ExactSigns<T> sign_sequence_exact_t(const std::vector<T>& pmf, long k_min, long N) {
    ExactSigns<T> out;
    out.le.assign(N + 1, T(0));
    out.gt.assign(N + 1, T(0));
    out.eq.assign(N + 1, T(0));
    std::vector<T> row(1, T(1)); // S_0 = 0
    long lo = 0;
    for (long n = 1; n <= N; ++n) {
        long nlo = lo + k_min;
        std::vector<T> next(row.size() + pmf.size() - 1, T(0));
        for (size_t i = 0; i < row.size(); ++i) {
            if (row[i] == T(0)) continue;
            for (size_t m = 0; m < pmf.size(); ++m) next[i + m] += row[i] * pmf[m];
        }
        row.swap(next);
        lo = nlo;
        T le(0), gt(0), eq(0);
        for (size_t i = 0; i < row.size(); ++i) {
            long j = lo + static_cast<long>(i);
            if (j <= 0) le += row[i];
            if (j > 0) gt += row[i];
            if (j == 0) eq = row[i];
        }
        out.le[n] = le;
        out.gt[n] = gt;
        out.eq[n] = eq;
    }
    return out;
}

template <class T>
struct KilledWalkT {
    std::vector<T> survival; // [0..N]
    std::vector<T> pmf;      // [0..N]
};

template <class T>
KilledWalkT<T> killed_walk_t(const std::vector<T>& pmf, long k_min, long N) {
    long k_max = k_min + static_cast<long>(pmf.size()) - 1;
    if (k_max < 1) throw std::invalid_argument("killed_walk_t: no upward mass");
    KilledWalkT<T> out;
    out.survival.assign(N + 1, T(0));
    out.pmf.assign(N + 1, T(0));
    out.survival[0] = T(1);

    long width = N * std::max<long>(k_max, 1);
    std::vector<T> b(width + 1, T(0)); // index j = 1..width
    for (long j = 1; j <= std::min(width, k_max); ++j) b[j] = pmf[j - k_min];
    T surv(0);
    for (long j = 1; j <= width; ++j) surv += b[j];
    out.survival[1] = surv;
    out.pmf[1] = T(1) - surv;

    std::vector<T> next(width + 1, T(0));
    for (long n = 2; n <= N; ++n) {
        std::fill(next.begin(), next.end(), T(0));
        for (long i = 1; i <= width; ++i) {
            if (b[i] == T(0)) continue;
            long jlo = std::max<long>(1, i + k_min);
            long jhi = std::min<long>(width, i + k_max);
            for (long j = jlo; j <= jhi; ++j) next[j] += b[i] * pmf[j - i - k_min];
        }
        b.swap(next);
        surv = T(0);
        for (long j = 1; j <= width; ++j) surv += b[j];
        out.survival[n] = surv;
        out.pmf[n] = out.survival[n - 1] - surv;
    }
    return out;
}

} // namespace ladder

#endif
