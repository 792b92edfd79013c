#include "strata_audit/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace strata_audit::kernels {

namespace {

struct Selected {
    SqDistFn fn;
    const char* name;
};

Selected select() {
    const char* forced = std::getenv("STRATA_AUDIT_KERNEL");
    if (forced != nullptr) {
        if (std::strcmp(forced, "scalar") == 0) return {sqdist_scalar, "scalar"};
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(forced, "avx2") == 0 && cpu_has_avx2()) return {sqdist_avx2, "avx2"};
#endif
#if defined(__aarch64__)
        if (std::strcmp(forced, "neon") == 0) return {sqdist_neon, "neon"};
#endif
        return {sqdist_scalar, "scalar"};
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) return {sqdist_avx2, "avx2"};
#endif
#if defined(__aarch64__)
    return {sqdist_neon, "neon"};
#endif
    return {sqdist_scalar, "scalar"};
}

const Selected& selected() {
    static const Selected s = select();
    return s;
}

} // namespace

SqDistFn active_sqdist() { return selected().fn; }

std::string active_kernel_name() { return selected().name; }

void sqdist_one_to_many(const double* anchor, const double* rows, std::size_t n,
                        std::size_t d, double* out) {
    const SqDistFn fn = active_sqdist();
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = fn(anchor, rows + j * d, d);
    }
}

} // namespace strata_audit::kernels
