#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace precis {

enum class Format : std::uint8_t { Binary16 = 0, Binary32 = 1, Binary64 = 2 };

constexpr std::size_t format_bytes(Format f) {
    return f == Format::Binary16 ? 2u : f == Format::Binary32 ? 4u : 8u;
}
const char* format_name(Format f);
Format parse_format(const std::string& name);

// Cumulative allocation counters, split by role and storage format. This is
// the deterministic replacement for device memory measurements: every tensor
// the engine materializes charges size * format width once, at allocation.
struct ByteLedger {
    enum Category { kParam = 0, kActivation = 1, kGradient = 2 };

    std::array<std::array<std::uint64_t, 3>, 3> bytes{};  // [category][format]

    void charge(Category c, Format f, std::size_t elems) {
        bytes[std::size_t(c)][std::size_t(f)] += std::uint64_t(elems) * format_bytes(f);
    }
    std::uint64_t by_format(Format f) const {
        std::uint64_t s = 0;
        for (const auto& row : bytes) s += row[std::size_t(f)];
        return s;
    }
    std::uint64_t by_category(Category c) const {
        std::uint64_t s = 0;
        for (const auto& b : bytes[std::size_t(c)]) s += b;
        return s;
    }
    std::uint64_t total() const {
        return by_format(Format::Binary16) + by_format(Format::Binary32) + by_format(Format::Binary64);
    }
    // same allocations repriced at 4 bytes per element
    std::uint64_t total_f32_equiv() const {
        std::uint64_t s = 0;
        for (const auto& row : bytes) {
            s += row[0] * 2;  // binary16 elements
            s += row[1];
            s += row[2] / 2;
        }
        return s;
    }
    double ratio_vs_f32() const {
        const std::uint64_t eq = total_f32_equiv();
        return eq ? double(total()) / double(eq) : 1.0;
    }
};

// Dense row-major 2-D tensor. Scalars are 1x1, vectors 1xN or Nx1.
// Binary16 and Binary32 values live widened in `f` (every Binary16 element is
// exactly binary16-representable); Binary64 lives in `d`.
class Tensor {
public:
    Format format = Format::Binary32;
    int rows = 0, cols = 0;
    std::vector<float> f;
    std::vector<double> d;

    Tensor() = default;

    static Tensor zeros(int rows, int cols, Format fmt);
    static Tensor full(int rows, int cols, Format fmt, double value);
    static Tensor scalar(double value, Format fmt) { return full(1, 1, fmt, value); }
    static Tensor from_flat(int rows, int cols, Format fmt, const std::vector<double>& vals);

    std::size_t size() const { return std::size_t(rows) * std::size_t(cols); }
    bool is_scalar() const { return rows == 1 && cols == 1; }

    double get(std::size_t i) const { return format == Format::Binary64 ? d[i] : double(f[i]); }
    double get(int r, int c) const { return get(std::size_t(r) * cols + c); }
    void set(std::size_t i, double v);  // rounds v into the storage format
    void set(int r, int c, double v) { set(std::size_t(r) * cols + c, v); }

    std::vector<double> to_doubles() const;
    bool all_finite() const;
    std::size_t count_nonfinite() const;
};

Tensor cast(const Tensor& t, Format fmt);
Tensor transpose(const Tensor& t);
bool same_shape(const Tensor& a, const Tensor& b);

// Frobenius norm and dot product evaluated in Binary64 regardless of storage
// format (metric-side helpers; not tape operations).
double norm64(const Tensor& t);
double dot64(const Tensor& a, const Tensor& b);

}  // namespace precis
