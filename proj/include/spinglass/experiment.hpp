#pragma once

// Config-driven batch experiments: one process per experiment, a manifest
// with every resolved option and seed, CSV/JSON results, and a summary with
// pass/fail of requested checks.  Re-running a manifest reproduces the
// output bytes.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spinglass/mixture.hpp"
#include "spinglass/sampler.hpp"

namespace spinglass {

struct ExperimentConfig {
    std::string kind;  // simulate | free-energy | ground-state | parisi | tap | states | landscape
    Mixture mixture = Mixture::pure(2);
    int n = 64;
    double beta = 0.5;
    std::uint64_t seed = 1;
    std::string out_dir;
    std::string format = "csv";  // csv | json
    int threads = 1;

    // schedules; zero means the default (delta = N^-1/4, rho = N^-1/8,
    // m = ceil(log2 N))
    double delta = 0;
    double rho = 0;
    int m_replicas = 0;

    std::optional<double> band_q;  // band center radius for banded runs

    McmcOptions mcmc;
    CountOptions count;
    int grid_size = 6;

    // parisi / tap
    int parisi_k = 3;
    std::vector<double> beta_ladder;

    // ground state
    int restarts = 4;

    // states
    double q_star = 0;  // 0: auto from the overlap histogram
    double cluster_eps = 0.1;
    std::vector<double> tree_levels;
    double tree_theta = 0;  // 0: data-driven suggestion
    int histogram_bins = 41;

    // landscape
    int centers_per_kind = 2;

    int sample_dump = 0;  // write this many samples as binary
    bool dump_raw_tensors = false;

    double resolved_delta() const { return delta > 0 ? delta : default_band_width(n); }
    double resolved_rho() const { return rho > 0 ? rho : default_pair_width(n); }
    int resolved_m() const { return m_replicas > 0 ? m_replicas : default_replica_count(n); }
};

// Parse / serialize; parsing reports offending field paths.
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);

struct RunOutcome {
    bool numerical_flags = false;  // results written but flagged
    std::vector<std::string> artifacts;
};

RunOutcome run_experiment(const ExperimentConfig& cfg);

// Landscape table: centers drawn at several energy levels on the sphere of
// radius sqrt(N q); per center the band and constrained values, plus the
// rank correlation between -H(center)/N and the band value.
struct LandscapeRow {
    std::string center_kind;  // uniform | tempered | near-ground
    double h_per_site = 0;
    double band_fe = 0;
    double band_fe_se = 0;
    double constrained_fe = 0;
    double centered_fe = 0;
    std::string flags;
};

struct LandscapeResult {
    std::vector<LandscapeRow> rows;
    double rank_correlation = 0;  // between -H/N and the band value
};

LandscapeResult landscape_scan(const ExperimentConfig& cfg);

}  // namespace spinglass
