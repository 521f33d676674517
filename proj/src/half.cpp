#include "precis/half.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "kernels.hpp"

namespace precis {

std::uint16_t float_to_half_bits(float x) {
    std::uint32_t f;
    std::memcpy(&f, &x, sizeof f);
    const std::uint32_t sign = (f >> 16) & 0x8000u;
    const std::uint32_t abs = f & 0x7FFFFFFFu;

    if (abs >= 0x7F800000u) {  // Inf or NaN
        if (abs == 0x7F800000u) return std::uint16_t(sign | 0x7C00u);
        return std::uint16_t(sign | 0x7E00u | ((abs & 0x7FFFFFu) >> 13));
    }
    if (abs >= 0x47800000u)  // |x| >= 65536
        return std::uint16_t(sign | 0x7C00u);
    if (abs >= 0x38800000u) {  // normal range; carry may round up to Inf
        const std::uint32_t exph = ((abs >> 23) - 112u) << 10;
        const std::uint32_t manh = (abs >> 13) & 0x3FFu;
        const std::uint32_t rest = abs & 0x1FFFu;
        std::uint16_t h = std::uint16_t(sign | exph | manh);
        if (rest > 0x1000u || (rest == 0x1000u && (h & 1u))) ++h;
        return h;
    }
    if (abs > 0x33000000u) {  // subnormal: 2^-25 < |x| < 2^-14
        const int e = int(abs >> 23) - 127;
        const std::uint32_t sig = (abs & 0x7FFFFFu) | 0x800000u;
        const int s = -e - 1;  // 14..24
        std::uint32_t q = sig >> s;
        const std::uint32_t rem = sig & ((1u << s) - 1u);
        const std::uint32_t halfway = 1u << (s - 1);
        if (rem > halfway || (rem == halfway && (q & 1u))) ++q;
        return std::uint16_t(sign | q);
    }
    return std::uint16_t(sign);  // |x| <= 2^-25: signed zero
}

float half_bits_to_float(std::uint16_t h) {
    const std::uint32_t sign = std::uint32_t(h & 0x8000u) << 16;
    std::uint32_t exp = (h >> 10) & 0x1Fu;
    std::uint32_t man = h & 0x3FFu;
    std::uint32_t f;
    if (exp == 0) {
        if (man == 0) {
            f = sign;
        } else {  // subnormal: normalize into binary32
            int shift = 0;
            while (!(man & 0x400u)) {
                man <<= 1;
                ++shift;
            }
            f = sign | (std::uint32_t(113 - shift) << 23) | ((man & 0x3FFu) << 13);
        }
    } else if (exp == 31) {
        f = sign | 0x7F800000u | (man << 13);
    } else {
        f = sign | ((exp + 112u) << 23) | (man << 13);
    }
    float out;
    std::memcpy(&out, &f, sizeof out);
    return out;
}

Half half_op(HalfOp op, Half a, Half b) {
    const float x = decode(a);
    const float y = decode(b);
    float r = 0.0f;
    switch (op) {
        case HalfOp::Add:  r = x + y; break;
        case HalfOp::Sub:  r = x - y; break;
        case HalfOp::Mul:  r = x * y; break;
        case HalfOp::Div:  r = x / y; break;
        case HalfOp::Neg:  r = -x; break;
        case HalfOp::Sqrt: r = std::sqrt(x); break;
        case HalfOp::Exp:  r = std::exp(x); break;
        case HalfOp::Tanh: r = std::tanh(x); break;
        case HalfOp::Sin:  r = std::sin(x); break;
        case HalfOp::Cos:  r = std::cos(x); break;
        case HalfOp::Max:  r = std::fmax(x, y); break;
    }
    return round_to_half(r);
}

double relative_rounding_error(float x) {
    const double ax = std::fabs(double(x));
    if (!(ax >= kHalfMinNormal && ax <= double(kHalfMaxFinite)))
        throw std::domain_error("relative_rounding_error: |x| outside binary16 normal range");
    return std::fabs(double(round16(x)) - double(x)) / ax;
}

void round16_buf(float* dst, const float* src, std::size_t n) {
    kern::table().round_buf(dst, src, n);
}

bool f16c_active() { return kern::table().f16c; }

}  // namespace precis
