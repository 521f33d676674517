#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace precis {

// IEEE-754 binary16: 1 sign bit, 5 exponent bits, 10 significand bits.
// Stored as the raw bit pattern; arithmetic is emulated in binary32 and
// rounded back (round-to-nearest, ties to even).
struct Half {
    std::uint16_t bits = 0;
    friend bool operator==(Half a, Half b) { return a.bits == b.bits; }
};

inline constexpr float  kHalfMaxFinite     = 65504.0f;
inline constexpr float  kHalfOverflowEdge  = 65520.0f;  // |x| >= this rounds to Inf
inline constexpr double kHalfUnitRoundoff  = 0x1p-11;
inline constexpr double kHalfMinNormal     = 0x1p-14;
inline constexpr double kHalfMinSubnormal  = 0x1p-24;

std::uint16_t float_to_half_bits(float x);
float half_bits_to_float(std::uint16_t h);

inline Half  round_to_half(float x) { return Half{float_to_half_bits(x)}; }
inline float decode(Half h) { return half_bits_to_float(h.bits); }

// binary32 -> nearest binary16 -> binary32. The workhorse of every
// Binary16 tensor kernel.
inline float round16(float x) { return half_bits_to_float(float_to_half_bits(x)); }

enum class HalfOp { Add, Sub, Mul, Div, Neg, Sqrt, Exp, Tanh, Sin, Cos, Max };

// op evaluated in binary32 on the decoded operands, then rounded. Unary ops
// ignore b. Overflow yields Inf and invalid operations yield NaN; neither is
// an error.
Half half_op(HalfOp op, Half a, Half b = Half{0});

// |round16(x) - x| / |x|; requires |x| in the binary16 normal range.
// Guaranteed <= 2^-11 there. Throws std::domain_error outside it.
double relative_rounding_error(float x);

// Bulk conversion, dispatched to F16C hardware when the CPU supports it.
// Bit-identical to round16 applied elementwise.
void round16_buf(float* dst, const float* src, std::size_t n);
bool f16c_active();

}  // namespace precis
