#ifndef LADDER_KERNELS_HPP
#define LADDER_KERNELS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace ladder {
namespace kernels {

// Windowed convolution: out[j] = sum_k w[k] * in[j - k - w_off] for
// j in [out_off, out_off + out_len), with `in` indexed from in_off.
// Entries of `in` outside [in_off, in_off + in.size()) count as zero.
//
// The omp variant parallelizes over output indices; each out[j] is an
// independent fixed-order sum, so results are bitwise identical to the
// serial reference for any thread count.
void conv_window_serial(std::span<const double> in, long in_off,
                        std::span<const double> w, long w_off,
                        std::span<double> out, long out_off);

void conv_window_omp(std::span<const double> in, long in_off,
                     std::span<const double> w, long w_off,
                     std::span<double> out, long out_off);

// Dispatches to the omp kernel above a size threshold.
void conv_window(std::span<const double> in, long in_off,
                 std::span<const double> w, long w_off,
                 std::span<double> out, long out_off);

// Full linear convolution via FFT (FFTW); used when the step pmf support is
// too wide for the direct kernel. Result has size in.size() + w.size() - 1
// and is accurate to ~1e-15 relative, not bit-exact against the direct path.
std::vector<double> conv_full_fft(std::span<const double> in, std::span<const double> w);

// Fixed-order sum (serial left fold); the reduction everyone must agree on.
double sum_ordered(std::span<const double> v);

} // namespace kernels
} // namespace ladder

#endif
