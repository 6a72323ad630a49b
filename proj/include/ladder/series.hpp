#ifndef LADDER_SERIES_HPP
#define LADDER_SERIES_HPP

#include <string>
#include <vector>

#include "ladder/power_series.hpp"

namespace ladder {

enum class SignSource { Exact, MonteCarlo, Analytic };

/// The sign probabilities P(S_n <= 0), P(S_n > 0), P(S_n = 0) for n = 1..N
/// (index 0 unused). These are the only inputs the Wiener-Hopf identities
/// need. Monte Carlo sources carry per-entry standard errors.
struct SignSequence {
    std::vector<double> le_zero;
    std::vector<double> gt_zero;
    std::vector<double> eq_zero;
    std::vector<double> stderr_gt; // only for MonteCarlo sources
    SignSource source = SignSource::Exact;

    long order() const { return static_cast<long>(le_zero.size()) - 1; }
    void validate() const;
};

/// A ladder-epoch pmf together with propagated uncertainty. error_bound is
/// empty for exact/analytic sources; for Monte Carlo inputs it holds a
/// first-order per-coefficient bound obtained by resampling the input at
/// +-1 standard error.
struct LadderPmf {
    PowerSeries pmf;
    std::vector<double> error_bound;
    SignSource source = SignSource::Exact;

    double survival(long n) const; // P(tau > n) = 1 - sum_{k<=n} pmf[k]
};

/// Generic Wiener-Hopf epoch pmf: coefficients of 1 - exp{-sum z^n/n probs[n]}
/// where probs[n] is P(S_n <= 0) for the weak descending epoch or P(S_n > 0)
/// for the strict ascending one. probs is indexed 1..N (entry 0 ignored).
template <class T>
BasicPowerSeries<T> wiener_hopf_pmf(const std::vector<T>& probs, long N) {
    if (static_cast<long>(probs.size()) < N + 1)
        throw std::invalid_argument("wiener_hopf_pmf: probs must cover 1..N");
    BasicPowerSeries<T> a(N);
    for (long n = 1; n <= N; ++n) a[n] = -probs[n] / T(n);
    BasicPowerSeries<T> e = exp_series(a);
    BasicPowerSeries<T> out(N);
    out[0] = T(0);
    for (long n = 1; n <= N; ++n) out[n] = -e[n];
    return out;
}

/// Omega series exp{+sum z^n/n P(S_n = 0)} with coefficients omega_k >= 0.
template <class T>
BasicPowerSeries<T> omega_series_t(const std::vector<T>& eq_probs, long N) {
    if (static_cast<long>(eq_probs.size()) < N + 1)
        throw std::invalid_argument("omega_series: eq probabilities must cover 1..N");
    BasicPowerSeries<T> a(N);
    for (long n = 1; n <= N; ++n) a[n] = eq_probs[n] / T(n);
    return exp_series(a);
}

/// P(T- = n) = sum_{k=1..n} P(tau- = k) omega_{n-k} - omega_n.
template <class T>
BasicPowerSeries<T> t_minus_pmf_t(const BasicPowerSeries<T>& tau_minus,
                                  const BasicPowerSeries<T>& omega) {
    detail::require_same_order(tau_minus, omega);
    long N = tau_minus.order();
    BasicPowerSeries<T> out(N);
    out[0] = T(0);
    for (long n = 1; n <= N; ++n) {
        T acc(0);
        for (long k = 1; k <= n; ++k) acc += tau_minus[k] * omega[n - k];
        out[n] = acc - omega[n];
    }
    return out;
}

LadderPmf tau_minus_pmf(const SignSequence& signs, long N);
LadderPmf tau_plus_pmf(const SignSequence& signs, long N);
PowerSeries omega_series(const SignSequence& signs, long N);
PowerSeries t_minus_pmf(const LadderPmf& tau_minus, const PowerSeries& omega);

/// max_n |coeff_n[(1 - G+)(1 - G-) - (1 - z)]| over the shared order.
double factorization_residual(const PowerSeries& pmf_plus, const PowerSeries& pmf_minus);

template <class T>
T factorization_residual_t(const BasicPowerSeries<T>& pmf_plus,
                           const BasicPowerSeries<T>& pmf_minus) {
    detail::require_same_order(pmf_plus, pmf_minus);
    long N = pmf_plus.order();
    BasicPowerSeries<T> a(N), b(N);
    a[0] = T(1);
    b[0] = T(1);
    for (long n = 1; n <= N; ++n) {
        a[n] = -pmf_plus[n];
        b[n] = -pmf_minus[n];
    }
    BasicPowerSeries<T> prod = multiply(a, b);
    T worst(0);
    for (long n = 0; n <= N; ++n) {
        T target = n == 0 ? T(1) : (n == 1 ? T(-1) : T(0));
        T d = prod[n] - target;
        if (d < T(0)) d = -d;
        if (d > worst) worst = d;
    }
    return worst;
}

/// Omega(1) = sum_k omega_k completed with a fitted power-law tail
/// (omega_k ~ C k^{-3/2} for aperiodic finite-variance lattice walks).
/// `converged` reports whether the completion is stable to `tol` under
/// doubling the cutoff.
struct OmegaTotal {
    double value = 1.0;
    double remainder = 0.0;   // mass added beyond the partial sum
    double instability = 0.0; // |value(K) - value(K/2)|
    bool converged = true;
};
OmegaTotal omega_total(const PowerSeries& omega, double tol = 1e-6);

/// CSV export/import of a series: header "n,coeff", 17 significant digits.
std::string series_to_csv(const PowerSeries& s);
PowerSeries series_from_csv(const std::string& csv);

} // namespace ladder

#endif
