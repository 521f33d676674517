#include "precis/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include "precis/half.hpp"

namespace precis {

const char* format_name(Format f) {
    switch (f) {
        case Format::Binary16: return "binary16";
        case Format::Binary32: return "binary32";
        case Format::Binary64: return "binary64";
    }
    return "?";
}

Format parse_format(const std::string& name) {
    if (name == "binary16" || name == "b16" || name == "float16") return Format::Binary16;
    if (name == "binary32" || name == "b32" || name == "float32") return Format::Binary32;
    if (name == "binary64" || name == "b64" || name == "float64") return Format::Binary64;
    throw std::invalid_argument("unknown format: " + name);
}

Tensor Tensor::zeros(int rows, int cols, Format fmt) {
    Tensor t;
    t.format = fmt;
    t.rows = rows;
    t.cols = cols;
    if (fmt == Format::Binary64)
        t.d.assign(t.size(), 0.0);
    else
        t.f.assign(t.size(), 0.0f);
    return t;
}

Tensor Tensor::full(int rows, int cols, Format fmt, double value) {
    Tensor t = zeros(rows, cols, fmt);
    for (std::size_t i = 0; i < t.size(); ++i) t.set(i, value);
    return t;
}

Tensor Tensor::from_flat(int rows, int cols, Format fmt, const std::vector<double>& vals) {
    if (vals.size() != std::size_t(rows) * std::size_t(cols))
        throw std::invalid_argument("from_flat: size mismatch");
    Tensor t = zeros(rows, cols, fmt);
    for (std::size_t i = 0; i < t.size(); ++i) t.set(i, vals[i]);
    return t;
}

void Tensor::set(std::size_t i, double v) {
    switch (format) {
        case Format::Binary64: d[i] = v; break;
        case Format::Binary32: f[i] = float(v); break;
        case Format::Binary16: f[i] = round16(float(v)); break;
    }
}

std::vector<double> Tensor::to_doubles() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = get(i);
    return out;
}

bool Tensor::all_finite() const {
    for (std::size_t i = 0; i < size(); ++i)
        if (!std::isfinite(get(i))) return false;
    return true;
}

std::size_t Tensor::count_nonfinite() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < size(); ++i)
        if (!std::isfinite(get(i))) ++n;
    return n;
}

Tensor cast(const Tensor& t, Format fmt) {
    Tensor out = Tensor::zeros(t.rows, t.cols, fmt);
    if (fmt == Format::Binary16 && t.format != Format::Binary64) {
        round16_buf(out.f.data(), t.f.data(), t.size());
        return out;
    }
    for (std::size_t i = 0; i < t.size(); ++i) out.set(i, t.get(i));
    return out;
}

Tensor transpose(const Tensor& t) {
    Tensor out = Tensor::zeros(t.cols, t.rows, t.format);
    for (int r = 0; r < t.rows; ++r)
        for (int c = 0; c < t.cols; ++c) {
            if (t.format == Format::Binary64)
                out.d[std::size_t(c) * t.rows + r] = t.d[std::size_t(r) * t.cols + c];
            else
                out.f[std::size_t(c) * t.rows + r] = t.f[std::size_t(r) * t.cols + c];
        }
    return out;
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.rows == b.rows && a.cols == b.cols; }

double norm64(const Tensor& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double v = t.get(i);
        s += v * v;
    }
    return std::sqrt(s);
}

double dot64(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot64: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.get(i) * b.get(i);
    return s;
}

}  // namespace precis
