#pragma once

#include <cstddef>

namespace precis::kern {

// Hot-loop entry points, resolved once at startup. The F16C build is used
// when both the compiler and the running CPU support it; the software build
// is the semantic reference and is always available.
struct Kernels {
    bool f16c = false;
    void (*round_buf)(float* dst, const float* src, std::size_t n);
    // C = A (m x k) * B (k x n), row-major, with binary16 rounding applied
    // after every product and every accumulation, k-index ascending.
    void (*gemm16)(const float* A, const float* B, float* C, int m, int k, int n);
};

const Kernels& table();

}  // namespace precis::kern
