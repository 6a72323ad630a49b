#ifndef LADDER_POWER_SERIES_HPP
#define LADDER_POWER_SERIES_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "ladder/kernels.hpp"

namespace ladder {

/// Truncated formal power series sum_{n=0..N} coeffs[n] z^n. All arithmetic
/// is closed under truncation at the common order; multiply is the exact
/// convolution of the truncated inputs. The scalar type is a template
/// parameter so the same engine runs in doubles and in exact rationals.
template <class T>
struct BasicPowerSeries {
    std::vector<T> coeffs;

    BasicPowerSeries() = default;
    explicit BasicPowerSeries(long order) : coeffs(order + 1, T(0)) {}

    long order() const { return static_cast<long>(coeffs.size()) - 1; }
    T& operator[](long n) { return coeffs[n]; }
    const T& operator[](long n) const { return coeffs[n]; }
};

using PowerSeries = BasicPowerSeries<double>;

namespace detail {

template <class T>
void require_same_order(const BasicPowerSeries<T>& a, const BasicPowerSeries<T>& b) {
    if (a.order() != b.order())
        throw std::invalid_argument("power series: operands must share the truncation order");
}

} // namespace detail

template <class T>
BasicPowerSeries<T> add(const BasicPowerSeries<T>& a, const BasicPowerSeries<T>& b) {
    detail::require_same_order(a, b);
    BasicPowerSeries<T> out(a.order());
    for (long n = 0; n <= a.order(); ++n) out[n] = a[n] + b[n];
    return out;
}

template <class T>
BasicPowerSeries<T> multiply(const BasicPowerSeries<T>& a, const BasicPowerSeries<T>& b) {
    detail::require_same_order(a, b);
    BasicPowerSeries<T> out(a.order());
    if constexpr (std::is_same_v<T, double>) {
        kernels::conv_window(std::span<const double>(a.coeffs), 0,
                             std::span<const double>(b.coeffs), 0,
                             std::span<double>(out.coeffs), 0);
    } else {
        for (long n = 0; n <= a.order(); ++n) {
            T acc(0);
            for (long k = 0; k <= n; ++k) acc += a[k] * b[n - k];
            out[n] = acc;
        }
    }
    return out;
}

/// exp of a series with zero constant term, by the coefficient recursion
/// n b_n = sum_{k=1..n} k a_k b_{n-k}, b_0 = 1. Exactly inverts log_series.
template <class T>
BasicPowerSeries<T> exp_series(const BasicPowerSeries<T>& a) {
    if (!(a.coeffs.at(0) == T(0)))
        throw std::invalid_argument("exp_series: constant term must be 0");
    long N = a.order();
    BasicPowerSeries<T> b(N);
    b[0] = T(1);
    for (long n = 1; n <= N; ++n) {
        T acc(0);
        for (long k = 1; k <= n; ++k) acc += T(k) * a[k] * b[n - k];
        b[n] = acc / T(n);
    }
    return b;
}

/// Inverse of exp_series. Requires a positive constant term; in exact
/// arithmetic the constant term must be 1.
template <class T>
BasicPowerSeries<T> log_series(const BasicPowerSeries<T>& b) {
    long N = b.order();
    BasicPowerSeries<T> a(N);
    if constexpr (std::is_same_v<T, double>) {
        if (!(b[0] > 0)) throw std::invalid_argument("log_series: constant term must be > 0");
        a[0] = std::log(b[0]);
    } else {
        if (!(b[0] == T(1)))
            throw std::invalid_argument("log_series: exact mode requires constant term 1");
        a[0] = T(0);
    }
    for (long n = 1; n <= N; ++n) {
        T acc = T(n) * b[n];
        for (long k = 1; k < n; ++k) acc -= T(k) * a[k] * b[n - k];
        a[n] = acc / (T(n) * b[0]);
    }
    return a;
}

/// Checks the "probability role" contract: coefficients in [-eps, 1+eps]
/// with eps = 1e-12 and partial sums bounded by 1 + 1e-9.
inline bool is_subprobability(const PowerSeries& s, double coeff_eps = 1e-12,
                              double sum_eps = 1e-9) {
    double run = 0.0;
    for (long n = 0; n <= s.order(); ++n) {
        if (s[n] < -coeff_eps || s[n] > 1.0 + coeff_eps) return false;
        run += s[n];
        if (run > 1.0 + sum_eps) return false;
    }
    return true;
}

} // namespace ladder

#endif
