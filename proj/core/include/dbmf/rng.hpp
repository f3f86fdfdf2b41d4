#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dbmf {

// Deterministic RNG used everywhere seeds appear. mt19937_64 raw output is
// fully specified by the standard, and the derived draws below avoid
// std::*_distribution (whose sequences are implementation-defined), so
// results are bit-reproducible across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one value per call, the spare is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::vector<double> normal_vec(std::size_t n, double mean = 0.0, double std = 1.0) {
        std::vector<double> out(n);
        for (auto& v : out) v = mean + std * normal();
        return out;
    }

    // Bounded integer in [0, n). Modulo bias is negligible for n << 2^64.
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

    // Fisher-Yates; hand-rolled because std::shuffle's draw sequence is
    // implementation-defined.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Stable 64-bit string hash (FNV-1a), used to derive per-prompt seeds.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace dbmf
