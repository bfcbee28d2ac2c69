#pragma once

#include <cmath>
#include <cstdint>

namespace qbsde {

// Counter-based generator: every variate is a pure function of
// (seed, path, step, coordinate, stream), so results do not depend on
// evaluation order or worker count.

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t counter_key(std::uint64_t seed, std::uint64_t path,
                                 std::uint64_t step, std::uint64_t coord,
                                 std::uint64_t stream) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (path + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (step + 0x9e6c63d0a9a4c1a5ULL));
    h = mix64(h ^ (coord + 0xd1b54a32d192ed03ULL));
    h = mix64(h ^ (stream + 0x8cb92ba72f3d8dd7ULL));
    return h;
}

// uniform in (0, 1]
inline double counter_uniform(std::uint64_t seed, std::uint64_t path,
                              std::uint64_t step, std::uint64_t coord,
                              std::uint64_t stream) {
    const std::uint64_t bits = counter_key(seed, path, step, coord, stream);
    return ((bits >> 11) + 1.0) * 0x1.0p-53;
}

// standard normal via Box-Muller on two counter substreams
inline double counter_gaussian(std::uint64_t seed, std::uint64_t path,
                               std::uint64_t step, std::uint64_t coord) {
    const double u1 = counter_uniform(seed, path, step, coord, 0);
    const double u2 = counter_uniform(seed, path, step, coord, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Small sequential helper for test/sample draws (not used on the path-parallel
/// hot path); still a counter generator underneath.
class SampleRng {
  public:
    explicit SampleRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    double uniform() { return counter_uniform(seed_, n_++, 0, 0, stream_ + 2); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double gaussian() {
        const double u1 = counter_uniform(seed_, n_, 0, 0, stream_ + 2);
        const double u2 = counter_uniform(seed_, n_, 1, 0, stream_ + 2);
        ++n_;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }
    std::uint64_t next_u64() { return counter_key(seed_, n_++, 0, 0, stream_ + 2); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t n_ = 0;
};

}  // namespace qbsde
