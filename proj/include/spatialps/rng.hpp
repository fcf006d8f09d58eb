#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace spatialps {

// Counter-based generator built on the SplitMix64 mixing function.
//
// Every consumer derives its own stream from (base seed, tag, index), so
// results never depend on the order in which other components draw numbers.
// std::mt19937 + std::normal_distribution would tie output to library
// internals that differ across standard libraries; this generator is fully
// specified here and therefore byte-reproducible anywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Independent stream for a named purpose. `tag` is a short ASCII label
    // ("eps", "del", ...) packed into an integer; `index` distinguishes
    // replications or grid points within the purpose.
    static Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
        std::uint64_t s = mix(seed ^ mix(tag));
        return Rng(mix(s ^ mix(index)));
    }

    static constexpr std::uint64_t tag(const char* name) {
        std::uint64_t t = 0;
        for (int i = 0; name[i] != '\0' && i < 8; ++i)
            t = (t << 8) | static_cast<unsigned char>(name[i]);
        return t;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix_final(state_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer on [0, bound) without modulo bias (rejection sampling).
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
        for (;;) {
            std::uint64_t v = next_u64();
            if (v < limit) return v % bound;
        }
    }

    // Standard normal via Box-Muller. The spare value is cached, so a stream
    // yields a deterministic sequence independent of call grouping.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double(), u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::vector<double> normal_vector(std::size_t n) {
        std::vector<double> out(n);
        for (auto& v : out) v = next_normal();
        return out;
    }

    // Fisher-Yates draw of `k` distinct indices from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        return mix_final(z);
    }
    static constexpr std::uint64_t mix_final(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace spatialps
