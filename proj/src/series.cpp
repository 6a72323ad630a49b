#include "ladder/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ladder {

void SignSequence::validate() const {
    long N = order();
    if (N < 1) throw std::invalid_argument("sign sequence: need at least n = 1");
    if (static_cast<long>(gt_zero.size()) != N + 1 || static_cast<long>(eq_zero.size()) != N + 1)
        throw std::invalid_argument("sign sequence: le/gt/eq arrays must share length");
    double tol = source == SignSource::MonteCarlo ? 1e-7 : 1e-11;
    for (long n = 1; n <= N; ++n) {
        if (std::abs(le_zero[n] + gt_zero[n] - 1.0) > tol)
            throw std::invalid_argument("sign sequence: le + gt must equal 1");
        if (eq_zero[n] > le_zero[n] + tol)
            throw std::invalid_argument("sign sequence: eq must not exceed le");
        if (le_zero[n] < -tol || le_zero[n] > 1.0 + tol)
            throw std::invalid_argument("sign sequence: probabilities out of range");
    }
    if (source == SignSource::MonteCarlo && static_cast<long>(stderr_gt.size()) != N + 1)
        throw std::invalid_argument("sign sequence: Monte Carlo source requires stderr array");
}

double LadderPmf::survival(long n) const {
    if (n < 0 || n > pmf.order()) throw std::out_of_range("survival: n outside series order");
    double acc = 0.0;
    for (long k = 0; k <= n; ++k) acc += pmf[k];
    return 1.0 - acc;
}

namespace {

LadderPmf build_pmf(const SignSequence& signs, long N, bool weak_descending) {
    signs.validate();
    if (N > signs.order())
        throw std::invalid_argument("ladder pmf: sign sequence shorter than requested order");

    const std::vector<double>& probs = weak_descending ? signs.le_zero : signs.gt_zero;
    std::vector<double> v(probs.begin(), probs.begin() + N + 1);
    LadderPmf out;
    out.pmf = wiener_hopf_pmf(v, N);
    out.source = signs.source;

    if (signs.source == SignSource::MonteCarlo) {
        // First-order propagation: resample the input at +-1 stderr and take
        // half the spread per coefficient.
        std::vector<double> up(v), dn(v);
        for (long n = 1; n <= N; ++n) {
            double s = signs.stderr_gt[n];
            double u = std::clamp(v[n] + s, 0.0, 1.0);
            double d = std::clamp(v[n] - s, 0.0, 1.0);
            up[n] = u;
            dn[n] = d;
        }
        PowerSeries hi = wiener_hopf_pmf(up, N);
        PowerSeries lo = wiener_hopf_pmf(dn, N);
        out.error_bound.assign(N + 1, 0.0);
        for (long n = 0; n <= N; ++n)
            out.error_bound[n] = 0.5 * std::abs(hi[n] - lo[n]);
    }
    return out;
}

} // namespace

LadderPmf tau_minus_pmf(const SignSequence& signs, long N) {
    return build_pmf(signs, N, true);
}

LadderPmf tau_plus_pmf(const SignSequence& signs, long N) {
    return build_pmf(signs, N, false);
}

PowerSeries omega_series(const SignSequence& signs, long N) {
    signs.validate();
    if (N > signs.order())
        throw std::invalid_argument("omega_series: sign sequence shorter than requested order");
    std::vector<double> v(signs.eq_zero.begin(), signs.eq_zero.begin() + N + 1);
    return omega_series_t(v, N);
}

PowerSeries t_minus_pmf(const LadderPmf& tau_minus, const PowerSeries& omega) {
    PowerSeries out = t_minus_pmf_t(tau_minus.pmf, omega);
    for (long n = 0; n <= out.order(); ++n)
        if (out[n] < -1e-12)
            throw std::runtime_error("t_minus_pmf: negative coefficient beyond tolerance");
    return out;
}

double factorization_residual(const PowerSeries& pmf_plus, const PowerSeries& pmf_minus) {
    return factorization_residual_t(pmf_plus, pmf_minus);
}

OmegaTotal omega_total(const PowerSeries& omega, double tol) {
    long K = omega.order();
    OmegaTotal out;

    // Support spacing: omega of a period-d walk lives on multiples of d.
    long d = 0;
    for (long k = 1; k <= K; ++k)
        if (omega[k] > 1e-300) d = d == 0 ? k : std::gcd(d, k);
    if (d == 0) {
        // Continuous model: omega = delta_0.
        out.value = omega[0];
        return out;
    }

    // Euler-Maclaurin sum_{m > M} m^{-s}.
    auto power_tail = [](double s, long M) {
        double x = static_cast<double>(M) + 1.0;
        return std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s) +
               s / 12.0 * std::pow(x, -s - 1.0);
    };

    // Two-term envelope omega_{d m} ~ C m^{-3/2} + D m^{-5/2}, least squares
    // over the top half of the computed range, then the fitted tail is summed
    // in closed form.
    auto completed = [&](long cutoff) {
        double partial = 0.0;
        for (long k = 0; k <= cutoff; ++k) partial += omega[k];
        long M = cutoff / d;
        long lo = std::max<long>(M / 2, 1);
        double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
        for (long m = lo; m <= M; ++m) {
            double u = std::pow(static_cast<double>(m), -1.5);
            double v = std::pow(static_cast<double>(m), -2.5);
            double y = omega[m * d];
            a11 += u * u;
            a12 += u * v;
            a22 += v * v;
            b1 += y * u;
            b2 += y * v;
        }
        double det = a11 * a22 - a12 * a12;
        double C = 0, D = 0;
        if (std::abs(det) > 1e-300) {
            C = (b1 * a22 - b2 * a12) / det;
            D = (a11 * b2 - a12 * b1) / det;
        } else if (a11 > 0) {
            C = b1 / a11;
        }
        double tail = C * power_tail(1.5, M) + D * power_tail(2.5, M);
        return std::pair<double, double>(partial + tail, tail);
    };

    auto [full, tail_full] = completed(K);
    auto [half, tail_half] = completed(K / 2);
    (void)tail_half;
    out.value = full;
    out.remainder = tail_full;
    out.instability = std::abs(full - half);
    out.converged = out.instability <= tol;
    return out;
}

std::string series_to_csv(const PowerSeries& s) {
    std::string out = "n,coeff\n";
    char buf[64];
    for (long n = 0; n <= s.order(); ++n) {
        std::snprintf(buf, sizeof buf, "%ld,%.17g\n", n, s[n]);
        out += buf;
    }
    return out;
}

PowerSeries series_from_csv(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line) || line != "n,coeff")
        throw std::invalid_argument("series_from_csv: missing 'n,coeff' header");
    std::vector<double> coeffs;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("series_from_csv: malformed row: " + line);
        long n = std::stol(line.substr(0, comma));
        double v = std::stod(line.substr(comma + 1));
        if (n != static_cast<long>(coeffs.size()))
            throw std::invalid_argument("series_from_csv: rows must be consecutive from 0");
        coeffs.push_back(v);
    }
    if (coeffs.empty()) throw std::invalid_argument("series_from_csv: no rows");
    PowerSeries s;
    s.coeffs = std::move(coeffs);
    return s;
}

} // namespace ladder
