#include "strata_audit/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace strata_audit::kernels {

bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") != 0;
}

double sqdist_avx2(const double* a, const double* b, std::size_t d) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= d; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        const __m256d diff = _mm256_sub_pd(va, vb);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    // (acc0+acc2) + (acc1+acc3), matching sqdist_scalar's reduction order.
    const __m128d lo = _mm256_castpd256_pd128(acc);    // lanes 0,1
    const __m128d hi = _mm256_extractf128_pd(acc, 1);  // lanes 2,3
    const __m128d pair = _mm_add_pd(lo, hi);           // (0+2, 1+3)
    double sum = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
    for (; i < d; ++i) {
        const double di = a[i] - b[i];
        sum += di * di;
    }
    return sum;
}

} // namespace strata_audit::kernels

#endif
