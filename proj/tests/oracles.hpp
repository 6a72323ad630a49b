// Test-only oracles, independent of the library's computation paths:
// exhaustive path enumeration, closed-form integrals, and fixed test models.

#ifndef LADDER_TESTS_ORACLES_HPP
#define LADDER_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "ladder/increments.hpp"
#include "ladder/rng.hpp"

namespace oracles {

enum class Epoch { WeakDescending, StrictAscending, StrictDescending };

// P(tau = n) for n <= n_max by exhaustive DFS over support paths, pruning a
// path at its stopping time. Sums path probabilities directly; never shares
// code with the DP or series engines.
template <class T>
std::vector<T> enumerate_epoch_pmf(const std::vector<T>& pmf, long k_min, long n_max,
                                   Epoch epoch) {
    std::vector<T> out(n_max + 1, T(0));
    std::function<void(long, long, T)> walk = [&](long depth, long pos, T weight) {
        for (size_t i = 0; i < pmf.size(); ++i) {
            if (pmf[i] == T(0)) continue;
            long next = pos + k_min + static_cast<long>(i);
            T w = weight * pmf[i];
            bool stopped = epoch == Epoch::WeakDescending
                               ? next <= 0
                               : (epoch == Epoch::StrictAscending ? next > 0 : next < 0);
            if (stopped)
                out[depth] += w;
            else if (depth < n_max)
                walk(depth + 1, next, w);
        }
    };
    walk(1, 0, T(1));
    return out;
}

// Closed form of Int_0^inf u^{s-1} e^{-u} cos(bu) du = Gamma(s) cos(s atan b)
// / (1+b^2)^{s/2}, giving g_{alpha,beta}(0) without quadrature.
inline double stable_density_zero_closed(double alpha, double beta, double c) {
    double s = 1.0 / alpha;
    double b = beta * std::tan(M_PI * alpha / 2.0);
    double integral = std::tgamma(s) * std::cos(s * std::atan(b)) /
                      std::pow(1.0 + b * b, s / 2.0);
    return integral / (M_PI * alpha * std::pow(c, 1.0 / alpha));
}

// sum_n P(S_n = 0)/n = -(1/2pi) Int_{-pi}^{pi} log|1 - phi(theta)| dtheta for
// an aperiodic zero-mean lattice walk, via the characteristic function
// phi(theta) = sum_k p_k e^{ik theta}. Omega(1) = exp of this.
inline double omega_total_cf_oracle(const ladder::IncrementModel& model) {
    const std::vector<double>& pmf = model.lattice_pmf();
    long k_min = model.k_min();
    auto log_abs_one_minus_phi = [&](double theta) {
        double re = 0.0, im = 0.0;
        for (size_t i = 0; i < pmf.size(); ++i) {
            double k = static_cast<double>(k_min + static_cast<long>(i));
            re += pmf[i] * std::cos(k * theta);
            im += pmf[i] * std::sin(k * theta);
        }
        double dre = 1.0 - re;
        return 0.5 * std::log(dre * dre + im * im);
    };
    // 1 - phi(theta) ~ (sigma^2/2) theta^2 near 0: integrate the log of that
    // analytically on [0, delta], Simpson elsewhere.
    double sigma2 = 0.0;
    for (size_t i = 0; i < pmf.size(); ++i) {
        double k = static_cast<double>(k_min + static_cast<long>(i));
        sigma2 += pmf[i] * k * k;
    }
    double delta = 1e-5;
    double head = delta * (std::log(sigma2 / 2.0) - 2.0) + 2.0 * delta * std::log(delta);
    double acc = 0.0;
    int m = 200001; // odd count, composite Simpson on [delta, pi]
    double h = (M_PI - delta) / (m - 1);
    for (int i = 0; i < m; ++i) {
        double w = (i == 0 || i == m - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * log_abs_one_minus_phi(delta + i * h);
    }
    acc *= h / 3.0;
    double integral = 2.0 * (head + acc); // even integrand, [-pi, pi]
    double sum = -integral / (2.0 * M_PI);
    return std::exp(sum);
}

inline ladder::IncrementModel lazy_walk() {
    return ladder::IncrementModel::finite_lattice({0.25, 0.5, 0.25}, -1);
}

inline ladder::IncrementModel simple_walk() {
    return ladder::IncrementModel::finite_lattice({0.5, 0.0, 0.5}, -1);
}

// Random symmetric mean-zero pmf on {-K..K} with all probabilities dyadic
// (multiples of 2^-10), so double and rational runs see identical inputs.
inline ladder::IncrementModel random_dyadic_model(uint64_t seed, long K = 2) {
    ladder::RngStream rng(seed);
    const long denom = 1024;
    while (true) {
        std::vector<long> numer(2 * K + 1, 0);
        long used = 0;
        for (long k = 1; k <= K; ++k) {
            long n = 1 + static_cast<long>(rng.next_u64() % 120);
            numer[K + k] = n;
            numer[K - k] = n;
            used += 2 * n;
        }
        if (used >= denom - 64) continue; // keep a healthy atom at 0
        numer[K] = denom - used;
        std::vector<double> pmf(2 * K + 1);
        for (long i = 0; i < 2 * K + 1; ++i)
            pmf[i] = static_cast<double>(numer[i]) / static_cast<double>(denom);
        return ladder::IncrementModel::finite_lattice(pmf, -K);
    }
}

// The same pmf as exact rationals (numerator over 1024).
template <class T>
std::vector<T> model_pmf_rational(const ladder::IncrementModel& model) {
    std::vector<T> out;
    for (double v : model.lattice_pmf()) {
        long numer = std::lround(v * 1024.0);
        if (std::abs(v * 1024.0 - static_cast<double>(numer)) > 1e-9)
            throw std::runtime_error("model pmf is not dyadic/1024");
        out.push_back(T(numer) / T(1024));
    }
    return out;
}

} // namespace oracles

#endif
