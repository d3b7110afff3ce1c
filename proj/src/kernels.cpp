#include "snapff/kernels.hpp"

namespace snapff::kernels {

double dot_reverse_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[n - 1 - i];
    return acc;
}

namespace {

struct selection {
    dot_reverse_fn fn;
    std::string_view name;
};

selection select_kernel() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_available()) return {dot_reverse_avx2, "avx2"};
#elif defined(__aarch64__)
    return {dot_reverse_neon, "neon"};
#endif
    return {dot_reverse_scalar, "scalar"};
}

const selection g_selected = select_kernel();

}  // namespace

double dot_reverse(const double* a, const double* b, std::size_t n) {
    return g_selected.fn(a, b, n);
}

dot_reverse_fn active_dot_reverse() { return g_selected.fn; }

std::string_view active_kernel_name() { return g_selected.name; }

}  // namespace snapff::kernels
