#include "strata_audit/kernels.hpp"

namespace strata_audit::kernels {

double sqdist_scalar(const double* a, const double* b, std::size_t d) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= d; i += 4) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        acc0 += d0 * d0;
        acc1 += d1 * d1;
        acc2 += d2 * d2;
        acc3 += d3 * d3;
    }
    double sum = (acc0 + acc2) + (acc1 + acc3);
    for (; i < d; ++i) {
        const double di = a[i] - b[i];
        sum += di * di;
    }
    return sum;
}

double sqdist_naive(const double* a, const double* b, std::size_t d) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double di = a[i] - b[i];
        sum += di * di;
    }
    return sum;
}

} // namespace strata_audit::kernels
