#pragma once

// Landscape decomposition of the free energy over the center radius q:
//   total(q) = beta E_star(q) + (1/2) log(1-q) + F_limit(nu_{q,2}, beta),
// with E_star from the zero-temperature solver on the inner-sphere mixture
// and F_limit from the solver on the once-restricted mixture.  The sup over
// q must reproduce the full solver value, with every positive support atom
// of the full model landing in the argmax set.

#include <string>
#include <vector>

#include "spinglass/mixture.hpp"
#include "spinglass/parisi.hpp"

namespace spinglass {

struct TapOptions {
    int k = 3;                       // atoms for the per-node solves
    double argmax_tol = 5e-3;        // nodes within this of the sup are argmax
    SolveOptions solve_opts{};
    ZeroTemperatureOptions zero_t{};
};

struct TapProfile {
    std::vector<double> q;
    std::vector<double> e_star;
    std::vector<double> entropy;   // (1/2) log(1-q)
    std::vector<double> f_limit;
    std::vector<double> total;
    std::vector<bool> node_flagged;  // zero-temperature fit flag per node
    double sup_total = 0;
    double arg_sup = 0;
    std::vector<double> argmax_set;  // q nodes within argmax_tol of the sup
};

// Default grid: 64 Chebyshev-spaced nodes on [0.01, 0.99]; callers inject
// solver atoms before profiling when cross-checking.
std::vector<double> default_tap_grid(int nodes = 64, double lo = 0.01, double hi = 0.99);

TapProfile tap_profile(const Mixture& m, double beta, const std::vector<double>& q_grid,
                       const TapOptions& opts = {});

// Closed form (1/2) beta^2 (nu(1) - nu(q_P) - (1-q_P) nu'(q_P)).
double tap_rs_value(const Mixture& m, double beta, double q_p);

// Same value assembled from the restricted coefficients:
// (1/2) beta^2 sum_{k>=2} a2_k(q_P); agrees with tap_rs_value identically.
double tap_rs_value_alpha_form(const Mixture& m, double beta, double q_p);

struct TapReport {
    double solve_value = 0;
    double sup_profile = 0;
    double value_gap = 0;  // |sup_profile - solve_value|
    bool value_ok = false;
    std::vector<double> solver_atoms;
    bool atoms_in_argmax_ok = false;
    double q_p = 0;
    bool rs_condition_holds = false;
    double f_limit_at_qp = 0;
    double rs_value_at_qp = 0;
    bool rs_value_ok = false;  // contingent on rs_condition_holds
    double tol = 0;
    std::string to_json() const;
};

TapReport tap_consistency(const Mixture& m, double beta, const TapOptions& opts = {});

}  // namespace spinglass
