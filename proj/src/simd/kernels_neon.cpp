#if defined(__aarch64__)
#include <arm_neon.h>

#include "agentkit/simd/similarity_kernels.hpp"

namespace agentkit::simd {

double dot_neon(std::span<const double> a, std::span<const double> b) noexcept {
    const std::size_t n = a.size();
    const double* pa = a.data();
    const double* pb = b.data();
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(pa + i), vld1q_f64(pb + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(pa + i + 2), vld1q_f64(pb + i + 2));
    }
    double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) sum += pa[i] * pb[i];
    return sum;
}

void dot_rows_neon(std::span<const double> query, std::span<const double> rows, std::span<double> out) noexcept {
    const std::size_t dim = query.size();
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = dot_neon(query, rows.subspan(r * dim, dim));
}

}  // namespace agentkit::simd
#endif
