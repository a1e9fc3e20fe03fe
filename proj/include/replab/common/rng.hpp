#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace replab {

// Counter-based seed splitting. Each component of a run derives its own
// stream from (master seed, component name, index) so that changing the
// RNG consumption of one component never perturbs the others.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t master, std::string_view component,
                                   std::uint64_t index = 0) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the component tag
    for (unsigned char c : component) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::uint64_t state = master ^ h;
    state ^= 0x517cc1b727220a95ULL * (index + 1);
    splitmix64_next(state);
    return splitmix64_next(state);
}

// mt19937_64 engine with hand-rolled draw helpers. The standard
// distributions are implementation-defined, these are not, which keeps
// trained runs reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // integer in [0, n)
    int randint(int n) { return static_cast<int>(uniform() * n); }

    // standard normal via Box-Muller, cached second draw
    double normal() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cache_ = r * std::sin(a);
        has_cache_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 engine_;
    double cache_ = 0.0;
    bool has_cache_ = false;
};

}  // namespace replab
