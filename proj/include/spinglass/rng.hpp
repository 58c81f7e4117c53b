#pragma once

// Deterministic, splittable random streams.  Every stochastic object in the
// project is regenerable bit-exactly from (seed, stream tags); distinct tags
// give statistically independent substreams.  Generator id recorded in
// persisted files: "xoshiro256pp/polar-v1".

#include <cmath>
#include <cstdint>

namespace spinglass {

inline constexpr const char* kGeneratorId = "xoshiro256pp/polar-v1";

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Substream key derivation: fold tags into the master seed one by one.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL + tag * 0xd1b54a32d192ed03ULL);
    return splitmix64(s);
}
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t t1, std::uint64_t t2) {
    return derive_seed(derive_seed(master, t1), t2);
}
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t t1, std::uint64_t t2,
                                 std::uint64_t t3) {
    return derive_seed(derive_seed(master, t1, t2), t3);
}

class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t seed = 1) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on (0,1); never returns 0 exactly.
    double uniform() {
        return (double(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform on [0,n).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Standard normals via Marsaglia polar; fully specified so streams are
// portable across platforms.
class NormalStream {
  public:
    explicit NormalStream(std::uint64_t seed = 1) : eng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * eng_.uniform() - 1.0;
            v = 2.0 * eng_.uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    Xoshiro256pp& engine() { return eng_; }

  private:
    Xoshiro256pp eng_;
    bool have_spare_ = false;
    double spare_ = 0;
};

}  // namespace spinglass
