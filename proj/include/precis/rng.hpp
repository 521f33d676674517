#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace precis {

// Deterministic random stream: mt19937 (bit-stable engine) plus explicit
// transforms, so sequences do not depend on libstdc++ distribution details.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::seed_seq sq{std::uint32_t(seed), std::uint32_t(seed >> 32), 0x9E3779B9u};
        eng_.seed(sq);
    }

    // independent stream derived from this seed and a stream id
    Rng derive(std::uint64_t stream) const { return Rng(mix(seed_ ^ mix(stream + 1))); }

    std::uint32_t u32() { return eng_(); }
    std::uint64_t u64() { return (std::uint64_t(eng_()) << 32) | eng_(); }

    double uniform() {  // [0, 1), 53-bit resolution
        const double a = double(eng_() >> 5);
        const double b = double(eng_() >> 6);
        return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {  // standard normal, Box-Muller
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.28318530717958647692 * uniform();
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    std::int64_t randint(std::int64_t lo, std::int64_t hi) {  // [lo, hi)
        const std::uint64_t span = std::uint64_t(hi - lo);
        const std::uint64_t limit = span * (UINT64_MAX / span);
        std::uint64_t r = u64();
        while (r >= limit) r = u64();
        return lo + std::int64_t(r % span);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[std::size_t(randint(0, std::int64_t(i)))]);
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t z) {  // splitmix64 finalizer
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::mt19937 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace precis
