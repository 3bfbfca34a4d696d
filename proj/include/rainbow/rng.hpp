#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace rainbow {

// Deterministic RNG wrapper. All randomized operations in the library take an
// Rng& so that a fixed master seed reproduces every structure bit-exactly.
// Child streams are derived by hashing (seed, tag) so parallel trials can run
// on independent streams without sharing state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix(seed)) {}

    // Independent stream for trial `index` under a master seed.
    static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(splitmix(master_seed + 0x9e3779b97f4a7c15ULL * (index + 1)));
    }

    Rng split(std::uint64_t tag) {
        return Rng(splitmix(engine_() ^ splitmix(tag)));
    }

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, n). Rejection sampling keeps the stream reproducible and
    // unbiased independent of std::uniform_int_distribution internals.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    int index(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    // Uniform double in [0, 1) with 53 random bits.
    double real01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return real01() < p;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values from {0, .., n-1}, sorted.
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        for (int i = 0; i < k; ++i) {
            int j = i + index(n - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace rainbow
