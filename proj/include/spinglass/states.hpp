#pragma once

// Overlap-matrix analytics: empirical overlap distribution, pure-state
// clustering with magnetization centers, ultrametricity and replica-identity
// defects, the nested tree of cluster centers, and overlap-support reports.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinglass/common.hpp"
#include "spinglass/sampler.hpp"

namespace spinglass {

struct OverlapMatrix {
    Mat m;  // symmetric, unit diagonal, entries in [-1,1]
    int n() const { return int(m.rows()); }
};

OverlapMatrix overlap_matrix(const SampleSet& s);

struct Histogram {
    std::vector<double> edges;  // size bins+1 over [-1,1]
    std::vector<double> pmf;    // normalized mass per bin
};

Histogram overlap_histogram(const OverlapMatrix& M, int bins);

struct StateDecomposition {
    std::vector<std::vector<int>> clusters;            // ordered by weight, descending
    std::vector<double> weights;                       // empirical masses
    std::vector<std::optional<Configuration>> centers; // rescaled to sqrt(N q_star)
    double q_star = 0;
    double epsilon = 0;
    double pair_defect = 0;  // fraction of pairs violating the symmetric difference
    int undefined_centers = 0;
};

// Single linkage on the graph {R_ij > q_star - epsilon}; centers are the
// cluster means rescaled to the sphere of radius sqrt(N q_star).
StateDecomposition cluster_states(const SampleSet& s, double q_star, double epsilon);

// Fraction of triples whose smallest overlap lies more than epsilon below
// the second smallest; exact enumeration up to n = 200, uniform triple
// subsampling above.
double ultrametricity_defect(const OverlapMatrix& M, double epsilon, std::uint64_t seed = 1);

struct GgOptions {
    int tuples_per_draw = 2000;
    int bootstrap = 200;
    std::uint64_t seed = 1;
};

struct GgResult {
    double defect = 0;
    double std_error = 0;  // bootstrap over draws
    int draws = 0;
};

// Replica-identity defect
//   | n E<f psi(R_{1,n+1})> - E<f> E<psi(R_{1,2})> - sum_{k=2}^n E<f psi(R_{1,k})> |
// estimated over independent draws; psi_id and f_id name entries of a small
// monomial dictionary ("one", "r", "r2", "r3" / "one", "r12", "r12sq",
// "r12r13").  All terms reuse the same sampled replica tuples, so identities
// that cancel algebraically cancel in floating point too.
GgResult gg_defect(const std::vector<OverlapMatrix>& draws, int n, const std::string& psi_id,
                   const std::string& f_id, const GgOptions& opts = {});

struct UltraLevel {
    double q = 0;
    double theta = 0;
    std::vector<std::vector<int>> classes;   // indices into the decomposition centers
    std::vector<Configuration> class_centers;  // on the sphere of radius sqrt(N q)
    std::vector<int> parent;                 // class index in the previous level
    int nontransitive_pairs = 0;             // connected pairs lacking a direct edge
    bool nested_in_previous = true;
};

struct UltraTree {
    std::vector<double> levels_q;        // increasing, ends at q_star (leaf level)
    std::vector<UltraLevel> levels;
    double orthogonality_residual_max = 0;  // children of a common parent
    double mass_escape_max = -1;            // set when sample masses supplied
    std::string to_json() const;
};

// theta default used by the pipeline: max(0.02, 2 MAD of within-cluster
// overlaps of the decomposition).
double suggest_theta(const OverlapMatrix& M, const StateDecomposition& dec);

struct UltraTreeOptions {
    std::optional<const SampleSet*> masses;  // for the band mass-escape report
    double band_delta = 0.1;                 // around leaf centers
    double band_delta_inner = 0.2;           // around class centers
};

UltraTree build_ultratree(const StateDecomposition& dec, const std::vector<double>& q_levels,
                          double theta, const UltraTreeOptions& opts = {});

struct SupportRow {
    double q = 0;
    double gibbs_freq = 0;    // draws whose near-q mass clears the threshold
    double ground_freq = 0;   // draws with a near-q ground pair
    bool in_parisi_support = false;
    bool inclusion_checked = false;
    bool inclusion_pass = false;
    double margin = 0;
};

struct SupportReport {
    std::vector<SupportRow> rows;
    bool low_power = false;  // fewer than 10 disorder draws
    std::string to_json() const;
};

struct SupportOptions {
    std::vector<double> q_grid;      // default: 41 nodes on [-1,1]
    double eps = 0.05;
    double mass_delta = 0.01;        // threshold exp(-N mass_delta)
    std::vector<double> parisi_support;  // restrict inclusion rows to these
    double majority = 0.5;
};

// Gibbs side: one overlap matrix per disorder draw.  Ground side (optional):
// per draw, two lists of near-ground configurations; a pair across the lists
// near q marks the draw.
SupportReport overlap_support(const std::vector<OverlapMatrix>& gibbs_draws,
                              const std::vector<std::pair<std::vector<Configuration>,
                                                          std::vector<Configuration>>>& ground_draws,
                              int dim, const SupportOptions& opts = {});

}  // namespace spinglass
