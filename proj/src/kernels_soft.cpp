#include <cstring>

#include "kernels.hpp"
#include "precis/half.hpp"

namespace precis::kern {

static void round_buf_soft(float* dst, const float* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = round16(src[i]);
}

static void gemm16_soft(const float* A, const float* B, float* C, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        float* c = C + std::size_t(i) * n;
        std::memset(c, 0, sizeof(float) * std::size_t(n));
        const float* a = A + std::size_t(i) * k;
        for (int t = 0; t < k; ++t) {
            const float at = a[t];
            const float* b = B + std::size_t(t) * n;
            for (int j = 0; j < n; ++j)
                c[j] = round16(c[j] + round16(at * b[j]));
        }
    }
}

#if PRECIS_BUILD_F16C
void round_buf_f16c(float*, const float*, std::size_t);
void gemm16_f16c(const float*, const float*, float*, int, int, int);
#endif

static Kernels make_table() {
    Kernels k;
    k.round_buf = round_buf_soft;
    k.gemm16 = gemm16_soft;
#if PRECIS_BUILD_F16C
    if (__builtin_cpu_supports("f16c") && __builtin_cpu_supports("avx2")) {
        k.f16c = true;
        k.round_buf = round_buf_f16c;
        k.gemm16 = gemm16_f16c;
    }
#endif
    return k;
}

const Kernels& table() {
    static const Kernels k = make_table();
    return k;
}

}  // namespace precis::kern
