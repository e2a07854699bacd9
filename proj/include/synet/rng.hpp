#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace synet {

// Deterministic 64-bit generator (splitmix64 core). We avoid the standard
// <random> distributions because their outputs are implementation-defined;
// every draw here is specified bit-for-bit so artifacts reproduce across
// toolchains.
class Rng {
 public:
    explicit Rng(uint64_t seed = 0) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound). bound must be > 0.
    uint64_t next_below(uint64_t bound) {
        // Rejection sampling keeps the distribution exact.
        uint64_t threshold = (~bound + 1) % bound;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    int next_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool next_bool(double p_true) { return next_double() < p_true; }

    // Standard normal via Box-Muller; second value cached.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = next_double();
        double u2 = next_double();
        double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(6.283185307179586476925286766559 * u2);
        has_spare_ = true;
        return mag * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Sample k distinct values from [0, n) without replacement, in draw order.
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
        if (k > n) k = n;
        std::vector<int> out;
        out.reserve(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i) {
            size_t j = static_cast<size_t>(next_below(pool.size()));
            out.push_back(pool[j]);
            pool[j] = pool.back();
            pool.pop_back();
        }
        return out;
    }

    // Derive an independent stream; `salt` separates purposes.
    Rng fork(uint64_t salt) {
        uint64_t s = next_u64();
        return Rng(s ^ (salt * 0x9e3779b97f4a7c15ull + 0x7f4a7c15ull));
    }

 private:
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stable seed derivation for named sub-streams.
inline uint64_t derive_seed(uint64_t base, uint64_t salt) {
    Rng r(base ^ (salt * 0xd1342543de82ef95ull));
    return r.next_u64();
}

}  // namespace synet
