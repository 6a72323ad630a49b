#include "ladder/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace ladder {
namespace kernels {

namespace {

inline void conv_one(std::span<const double> in, long in_off, std::span<const double> w,
                     long w_off, std::span<double> out, long out_off, long j) {
    // k range such that in index j - (k + w_off) is inside `in`.
    long x = j + out_off;
    long k_lo = std::max<long>(0, x - w_off - (in_off + static_cast<long>(in.size()) - 1));
    long k_hi = std::min<long>(static_cast<long>(w.size()) - 1, x - w_off - in_off);
    double acc = 0.0;
    for (long k = k_lo; k <= k_hi; ++k) acc += w[k] * in[x - w_off - k - in_off];
    out[j] = acc;
}

} // namespace

void conv_window_serial(std::span<const double> in, long in_off, std::span<const double> w,
                        long w_off, std::span<double> out, long out_off) {
    for (long j = 0; j < static_cast<long>(out.size()); ++j)
        conv_one(in, in_off, w, w_off, out, out_off, j);
}

void conv_window_omp(std::span<const double> in, long in_off, std::span<const double> w,
                     long w_off, std::span<double> out, long out_off) {
#pragma omp parallel for schedule(static)
    for (long j = 0; j < static_cast<long>(out.size()); ++j)
        conv_one(in, in_off, w, w_off, out, out_off, j);
}

void conv_window(std::span<const double> in, long in_off, std::span<const double> w,
                 long w_off, std::span<double> out, long out_off) {
    if (out.size() * w.size() >= 1u << 16)
        conv_window_omp(in, in_off, w, w_off, out, out_off);
    else
        conv_window_serial(in, in_off, w, w_off, out, out_off);
}

std::vector<double> conv_full_fft(std::span<const double> in, std::span<const double> w) {
    size_t out_len = in.size() + w.size() - 1;
    size_t m = 1;
    while (m < out_len) m <<= 1;

    static std::mutex plan_mutex; // FFTW planning is not thread-safe
    std::vector<double> a(m, 0.0), b(m, 0.0);
    std::copy(in.begin(), in.end(), a.begin());
    std::copy(w.begin(), w.end(), b.begin());

    std::vector<std::complex<double>> fa(m / 2 + 1), fb(m / 2 + 1);
    fftw_plan pa, pb, pc;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        pa = fftw_plan_dft_r2c_1d(static_cast<int>(m), a.data(),
                                  reinterpret_cast<fftw_complex*>(fa.data()), FFTW_ESTIMATE);
        pb = fftw_plan_dft_r2c_1d(static_cast<int>(m), b.data(),
                                  reinterpret_cast<fftw_complex*>(fb.data()), FFTW_ESTIMATE);
        pc = fftw_plan_dft_c2r_1d(static_cast<int>(m),
                                  reinterpret_cast<fftw_complex*>(fa.data()), a.data(),
                                  FFTW_ESTIMATE);
    }
    fftw_execute(pa);
    fftw_execute(pb);
    for (size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
    fftw_execute(pc);
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(pa);
        fftw_destroy_plan(pb);
        fftw_destroy_plan(pc);
    }

    std::vector<double> out(out_len);
    double inv = 1.0 / static_cast<double>(m);
    for (size_t i = 0; i < out_len; ++i) out[i] = a[i] * inv;
    return out;
}

double sum_ordered(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
}

} // namespace kernels
} // namespace ladder
