#pragma once

// MCMC sampling from Gibbs measures on spheres and bands, free-energy
// estimation by thermodynamic integration from the exact beta=0 anchor, and
// the constrained multi-replica overlap probability.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinglass/geometry.hpp"
#include "spinglass/hamiltonian.hpp"

namespace spinglass {

struct SampleMeta {
    double beta = 0;
    double radius_sq = 1;
    std::optional<BandSpec> band;
    std::vector<int> chain_ids;  // per point
    int thin = 1;
    int burn_in = 0;
    std::uint64_t seed = 0;
    double step_size = 0;   // frozen step after burn-in tuning
    double acceptance = 0;  // post-burn-in acceptance rate
};

struct SampleSet {
    std::vector<Configuration> points;
    SampleMeta meta;
};

struct FreeEnergyEstimate {
    double value = 0;
    double std_error = 0;
    std::string method;        // "ti" | "band-ti" | "conditional-count"
    std::vector<double> grid;  // beta grid used (strictly increasing from 0)
    std::vector<std::string> flags;
    bool flagged() const { return !flags.empty(); }
};

struct McmcOptions {
    int n_chains = 4;
    int n_steps = 4000;   // post burn-in steps per chain
    int burn_in = 1500;
    int thin = 8;
    double step_size = 0;  // 0: auto-tune to the acceptance window below
    double accept_lo = 0.30;
    double accept_hi = 0.50;
    bool tempering = false;      // replica exchange across a geometric ladder
    double ladder_ratio = 1.25;  // geometric spacing of the ladder
    int swap_interval = 20;      // steps between even/odd swap sweeps
    std::uint64_t seed = 1;
};

// Reversible kernel targeting exp(-beta H) on the sphere of radius
// sqrt(N * radius_sq), optionally restricted to a band by rejection.
SampleSet mcmc_chain(const Disorder& d, double beta, double radius_sq,
                     const std::optional<BandSpec>& band, const McmcOptions& opts);

// Per-node mean energies for a family of inverse temperatures sharing one
// kernel configuration; used by the integrators below.  When
// opts.tempering is set the nodes exchange replicas.
struct NodeStats {
    double beta = 0;
    double mean_energy_per_site = 0;  // <H>/N
    double std_error = 0;
    double rhat = 1;
};
std::vector<NodeStats> grid_mean_energies(const Disorder& d, const std::vector<double>& betas,
                                          double radius_sq, const std::optional<BandSpec>& band,
                                          const McmcOptions& opts);

// F(beta) = integral_0^beta <-H/N> dbeta', trapezoidal over a uniform grid
// with grid_size nodes (including 0 and beta).  beta = 0 returns 0 exactly.
FreeEnergyEstimate free_energy_ti(const Disorder& d, double beta, int grid_size,
                                  const McmcOptions& opts);

// Band landscape value: exact band log-volume at beta=0 plus thermodynamic
// integration over band-restricted chains.
FreeEnergyEstimate band_free_energy(const Disorder& d, double beta, const BandSpec& band,
                                    int grid_size, const McmcOptions& opts);

struct CountOptions {
    int pool_target = 512;  // equilibrium draws to pool
    int trials = 20000;     // random m-subsets tested
    std::uint64_t seed = 1;
};

// (1/(mN)) log of the probability that m independent band-conditioned
// samples are pairwise within rho of overlap q.  rho >= 1 returns 0 exactly.
// Zero hits over the budget yields a one-sided upper bound flagged
// "censored".
FreeEnergyEstimate conditional_overlap_prob(const Disorder& d, double beta, const BandSpec& band,
                                            int m, double rho, double q, const McmcOptions& mcmc,
                                            const CountOptions& count);

// Counting core behind conditional_overlap_prob: random m-subsets of the
// pooled draws, pairwise |R - q| < rho, log frequency per (mN).
FreeEnergyEstimate count_constrained_logprob(const std::vector<Configuration>& pool, int m,
                                             double rho, double q, int dim,
                                             const CountOptions& count);

struct ConstrainedFe {
    FreeEnergyEstimate band_fe;       // F(s0)
    FreeEnergyEstimate conditional;   // pair-constraint log-probability term
    double energy_term = 0;           // (beta/N) H(s0), exact
    FreeEnergyEstimate constrained;   // F(s0, m, rho)
    FreeEnergyEstimate centered;      // F^c = F(s0,m,rho) + (beta/N) H(s0)
};

ConstrainedFe centered_constrained_fe(const Disorder& d, double beta, const BandSpec& band, int m,
                                      double rho, double q, int grid_size,
                                      const McmcOptions& mcmc, const CountOptions& count);

// Split-chain potential scale reduction of per-chain traces.
double split_rhat(const std::vector<std::vector<double>>& chains);

}  // namespace spinglass
