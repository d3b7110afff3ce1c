#include "snapff/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace snapff::kernels {

double dot_reverse_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t va = vld1q_f64(a + i);
        float64x2_t vb = vld1q_f64(b + (n - 2 - i));
        vb = vextq_f64(vb, vb, 1);  // swap the two lanes
        acc = vfmaq_f64(acc, va, vb);
    }
    double sum = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) sum += a[i] * b[n - 1 - i];
    return sum;
}

}  // namespace snapff::kernels

#endif
