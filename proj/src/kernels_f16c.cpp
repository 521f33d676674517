#include <immintrin.h>

#include <cstring>

#include "kernels.hpp"

namespace precis::kern {

static inline __m256 r16x8(__m256 v) {
    return _mm256_cvtph_ps(_mm256_cvtps_ph(v, _MM_FROUND_TO_NEAREST_INT));
}

static inline float r16s(float x) {
    return _cvtsh_ss(_cvtss_sh(x, _MM_FROUND_TO_NEAREST_INT));
}

void round_buf_f16c(float* dst, const float* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(dst + i, r16x8(_mm256_loadu_ps(src + i)));
    for (; i < n; ++i) dst[i] = r16s(src[i]);
}

void gemm16_f16c(const float* A, const float* B, float* C, int m, int k, int n) {
    const int n8 = n & ~7;
    for (int i = 0; i < m; ++i) {
        float* c = C + std::size_t(i) * n;
        std::memset(c, 0, sizeof(float) * std::size_t(n));
        const float* a = A + std::size_t(i) * k;
        for (int t = 0; t < k; ++t) {
            const float* b = B + std::size_t(t) * n;
            const __m256 va = _mm256_set1_ps(a[t]);
            int j = 0;
            for (; j < n8; j += 8) {
                const __m256 prod = r16x8(_mm256_mul_ps(va, _mm256_loadu_ps(b + j)));
                const __m256 acc = r16x8(_mm256_add_ps(_mm256_loadu_ps(c + j), prod));
                _mm256_storeu_ps(c + j, acc);
            }
            const float at = a[t];
            for (; j < n; ++j) c[j] = r16s(c[j] + r16s(at * b[j]));
        }
    }
}

}  // namespace precis::kern
