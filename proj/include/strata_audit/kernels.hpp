#pragma once

#include <cstddef>
#include <string>

// Squared-distance kernels for the brute-force metric layer.
//
// All variants share one summation contract: four independent partial
// accumulators over lanes i%4, reduced as (acc0+acc2)+(acc1+acc3), then the
// tail (d%4 elements) added sequentially. The scalar kernel is the reference;
// the SIMD variants reproduce its result bit for bit, so runtime dispatch
// never changes output bytes. Kernel translation units are built with
// -ffp-contract=off to keep mul/add from fusing into FMA.

namespace strata_audit::kernels {

using SqDistFn = double (*)(const double*, const double*, std::size_t);

// Reference kernel, 4-lane blocked summation.
double sqdist_scalar(const double* a, const double* b, std::size_t d);

// Plain sequential accumulation. Test oracle only; not bit-compatible with
// the blocked kernels.
double sqdist_naive(const double* a, const double* b, std::size_t d);

#if defined(__x86_64__) || defined(_M_X64)
double sqdist_avx2(const double* a, const double* b, std::size_t d);
bool cpu_has_avx2();
#endif
#if defined(__aarch64__)
double sqdist_neon(const double* a, const double* b, std::size_t d);
#endif

// Best kernel for this CPU. STRATA_AUDIT_KERNEL=scalar|avx2|neon forces a
// specific variant (unsupported choices fall back to scalar).
SqDistFn active_sqdist();
std::string active_kernel_name();

// Squared distances from one row to n rows of a row-major matrix.
void sqdist_one_to_many(const double* anchor, const double* rows, std::size_t n,
                        std::size_t d, double* out);

} // namespace strata_audit::kernels
