#pragma once

// Spheres, bands, overlaps and exact band volumes.  A band is the set of
// outer-sphere points whose normalized projection onto the center direction
// is within delta of the center's radius:
//   |<s/sqrt(N), s0/|s0|> - |s0|/sqrt(N)| <= delta.

#include <cstdint>
#include <optional>

#include "spinglass/common.hpp"
#include "spinglass/hamiltonian.hpp"

namespace spinglass {

struct BandSpec {
    Configuration center;  // radius_sq = q in (0,1)
    double delta = 0;      // half-width, in (0,1]

    BandSpec() = default;
    BandSpec(Configuration c, double d) : center(std::move(c)), delta(d) {
        if (!(center.radius_sq > 0 && center.radius_sq < 1))
            throw std::invalid_argument("band: center radius_sq must be in (0,1)");
        if (!(delta > 0 && delta <= 1)) throw std::invalid_argument("band: delta must be in (0,1]");
    }
    double q() const { return center.radius_sq; }
};

// Default band half-width schedule delta_N = N^(-1/4); slow polynomial decay.
inline double default_band_width(int n) { return std::pow(double(n), -0.25); }
inline double default_pair_width(int n) { return std::pow(double(n), -0.125); }
inline int default_replica_count(int n) {
    return int(std::ceil(std::log2(double(n < 2 ? 2 : n))));
}

double overlap(const Configuration& a, const Configuration& b);

bool in_band(const Configuration& s, const BandSpec& b);

// log of the normalized mass of {t in [lo,hi]} under the projection marginal
// density (1-t^2)^((N-3)/2); quadrature in log space, abs tolerance ~1e-10.
double segment_log_mass(double lo, double hi, int n);

// (1/N) log Vol(Band) under normalized surface measure.  Tends to
// (1/2) log(1-q) as N grows.
double band_log_volume(double q, double delta, int n);

struct SampleSet;  // defined in sampler.hpp

// i.i.d. points uniform on the band under surface measure: the projection t
// is drawn from the truncated marginal by inverse CDF on a quadrature grid,
// the orthogonal direction uniformly.
SampleSet sample_uniform_band(const BandSpec& b, std::uint64_t seed, int count);

// Uniform point on the sphere of radius sqrt(N*radius_sq).
Vec uniform_sphere_point(int n, double radius_sq, std::uint64_t seed);

}  // namespace spinglass
