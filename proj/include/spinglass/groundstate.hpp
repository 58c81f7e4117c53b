#pragma once

// Empirical ground-state search on inner spheres: best-of-restarts projected
// gradient descent with backtracking line search and tangential-gradient
// stopping.

#include <cstdint>

#include "spinglass/hamiltonian.hpp"

namespace spinglass {

struct GroundStateResult {
    Configuration minimizer;
    double value_per_site = 0;
    int restarts_used = 0;
    bool converged = false;
    double tangential_grad_norm = 0;  // |P_perp grad| / sqrt(N) at the minimizer
};

struct MinimizeOptions {
    int max_iters = 20000;
    double grad_tol = 1e-8;      // stop when |P_perp grad|/sqrt(N) < grad_tol
    double armijo_factor = 0.5;  // backtracking shrink
    double armijo_c = 1e-4;
    std::uint64_t seed = 1;      // master seed; restart r uses substream r
};

// Best of `restarts` descent runs from independent uniform starts on the
// sphere of radius sqrt(N q).
GroundStateResult minimize_on_sphere(const Disorder& d, double q, int restarts,
                                     const MinimizeOptions& opts = {});

// Threshold predicate for membership in the near-ground set at level tau:
// H(s)/N < -E_star(q) + tau, with s required on the sphere of radius
// sqrt(N q) to 1e-8.
bool near_ground_set_membership(const Disorder& d, const Configuration& s, double q, double tau,
                                double e_star_q);

}  // namespace spinglass
