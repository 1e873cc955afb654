#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace mqs {

// splitmix64: used to derive independent per-trajectory seeds from
// (master seed, stream index) so parallel ensembles are reproducible
// regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x51ed2701a7b5f3e9ULL));
}

// Deterministic uniform generator. mt19937_64 output is fully specified by
// the standard and the (x >> 11) * 2^-53 mapping involves no
// implementation-defined distribution code, so identical seeds give
// bit-identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1): rejects the (probability 2^-53) exact zero
    double uniform_pos() {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return u;
    }

    double exponential() { return -std::log1p(-uniform()); }

    std::uint64_t raw() { return eng_(); }

    // Exact Poisson sampling by sequential CDF inversion. Means are split
    // into chunks <= 500 so the running pmf never underflows double range
    // (e^-500 ~ 7e-218); a Poisson sum of Poissons is Poisson.
    long poisson(double mean);

private:
    long poisson_small_(double mean);
    std::mt19937_64 eng_;
};

inline long Rng::poisson_small_(double mean) {
    double p = std::exp(-mean);
    double cdf = p;
    double u = uniform();
    long k = 0;
    // mean <= 500: loop length ~ mean + O(sqrt(mean)); cap guards the
    // pathological u ~ 1 tail where accumulated rounding stalls the cdf.
    long cap = static_cast<long>(mean + 60.0 * std::sqrt(mean + 1.0) + 60.0);
    while (u > cdf && k < cap) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

inline long Rng::poisson(double mean) {
    long total = 0;
    while (mean > 500.0) {
        total += poisson_small_(500.0);
        mean -= 500.0;
    }
    return total + poisson_small_(mean);
}

}  // namespace mqs
