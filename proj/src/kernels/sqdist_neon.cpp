#include "strata_audit/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace strata_audit::kernels {

double sqdist_neon(const double* a, const double* b, std::size_t d) {
    // Two 2-lane accumulators emulate the scalar kernel's four lanes:
    // acc02 carries lanes 0,2 and acc13 carries lanes 1,3 is not possible with
    // contiguous loads, so acc_lo carries lanes 0,1 and acc_hi lanes 2,3.
    float64x2_t acc_lo = vdupq_n_f64(0.0);
    float64x2_t acc_hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= d; i += 4) {
        const float64x2_t d_lo = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d_hi = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc_lo = vaddq_f64(acc_lo, vmulq_f64(d_lo, d_lo));
        acc_hi = vaddq_f64(acc_hi, vmulq_f64(d_hi, d_hi));
    }
    // (acc0+acc2) + (acc1+acc3), matching sqdist_scalar's reduction order.
    const float64x2_t pair = vaddq_f64(acc_lo, acc_hi);
    double sum = vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
    for (; i < d; ++i) {
        const double di = a[i] - b[i];
        sum += di * di;
    }
    return sum;
}

} // namespace strata_audit::kernels

#endif
