#pragma once

#include <cstddef>
#include <string_view>

namespace snapff::kernels {

// dot_reverse(a, b, n) = sum_{i=0}^{n-1} a[i] * b[n-1-i].
// This is the inner product needed for causal convolution and for the
// forward-substitution solve of lower-triangular Toeplitz systems.
using dot_reverse_fn = double (*)(const double*, const double*, std::size_t);

double dot_reverse_scalar(const double* a, const double* b, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_reverse_avx2(const double* a, const double* b, std::size_t n);
bool avx2_available();
#endif
#if defined(__aarch64__)
double dot_reverse_neon(const double* a, const double* b, std::size_t n);
#endif

// Runtime-dispatched variant (selected once at startup) plus its name,
// one of "scalar", "avx2", "neon".
double dot_reverse(const double* a, const double* b, std::size_t n);
dot_reverse_fn active_dot_reverse();
std::string_view active_kernel_name();

}  // namespace snapff::kernels
