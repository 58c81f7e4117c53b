#pragma once

// Finite-RSB variational solver for the spherical free-energy formula.
// Measures are finite atomic probability measures on [0,1); the functional
// is evaluated in closed form per segment of the step distribution function,
// so the optimization landscape carries no quadrature error.
//
//   P(x) = 1/2 [ b^2 int_0^1 nu'(q) x(q) dq
//                + int_0^qhat dq / xhat(q) + log(1 - qhat) ],
//   xhat(q) = int_q^1 x(s) ds,  qhat = largest atom.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinglass/mixture.hpp"

namespace spinglass {

class ParisiMeasure {
  public:
    // atoms strictly increasing in [0,1), weights positive summing to 1.
    ParisiMeasure(std::vector<double> atoms, std::vector<double> weights);

    static ParisiMeasure replica_symmetric() { return ParisiMeasure({0.0}, {1.0}); }

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }
    int k() const { return int(atoms_.size()); }
    double q_max() const { return atoms_.back(); }

    // Right-continuous distribution function x(q).
    double x(double q) const;

    // xhat(q) = int_q^1 x.
    double xhat(double q) const;

    // Merge atoms closer than 1e-8, drop weights below 1e-10, renormalize.
    ParisiMeasure canonical() const;

    std::string to_json() const;
    static ParisiMeasure from_json(const std::string& text);

  private:
    std::vector<double> atoms_;
    std::vector<double> weights_;
};

// Closed-form functional value; rejects q_max = 1.
double cs_functional(const ParisiMeasure& x, const Mixture& m, double beta);

struct SolveOptions {
    int multistarts = 4;
    int max_iters = 400;
    std::uint64_t seed = 7;
    std::optional<ParisiMeasure> warm_start;
};

struct SolveResult {
    ParisiMeasure measure = ParisiMeasure::replica_symmetric();
    double value = 0;
    bool converged = true;
};

// Minimize over measures with at most k atoms (an atom pinned at 0 is part
// of the family; its weight may optimize to zero and be merged away).
// Cascades k' = 1..k with warm starts, so the value is non-increasing in k.
SolveResult solve(const Mixture& m, double beta, int k, const SolveOptions& opts = {});

struct AtomCheck {
    double q = 0;
    double w = 0;
    double f = 0;        // f(q) = int_0^q [ b^2 nu'(s) - int_0^s du/xhat^2(u) ] ds
    double fprime = 0;   // f'(q)
    double gamma = 0;    // Gamma(q) from the ground-state first-order system
};

struct StationarityReport {
    std::vector<AtomCheck> atom_checks;
    double sup_f_grid = 0;      // sup of f over a dense grid on [0,1)
    double argsup_f = 0;
    double b = 0;               // boundary parameter of the first-order system
    bool b_root_bracketed = true;
    double gamma_bar_margin = 0;  // min_grid GammaBar - int GammaBar dmu
    bool max_condition_ok = false;        // every atom attains sup f within tol
    bool stationary_condition_ok = false; // f' vanishes at interior atoms
    bool gamma_condition_ok = false;      // Gamma vanishes on the support
    double tol = 0;
    std::string to_json() const;
};

StationarityReport validate(const ParisiMeasure& x, const Mixture& m, double beta, double tol);

// The stationarity pair (f(q), f'(q)) for a given measure, evaluated from
// the same closed forms validate uses; exposed for diagnostics.
std::pair<double, double> stationarity_f(const ParisiMeasure& x, const Mixture& m, double beta,
                                         double q);

struct RsConditionResult {
    bool holds = false;
    double worst_t = 0;
    double margin = 0;  // max over t of b^2 nu_{q,2}(t) + log(1-t) + t
};

// Scans the replica-symmetric criterion for the once-restricted model
// nu_{q_P,2}: holds iff the scan stays nonpositive on (0,1).
RsConditionResult rs_condition(const Mixture& m, double beta, double q_p);

struct ZeroTemperatureOptions {
    std::vector<double> beta_ladder = {8, 16, 32, 64, 128, 256, 512};
    int k = 3;
    double residual_tol = 5e-4;
    SolveOptions solve_opts{};
};

struct ZeroTemperatureResult {
    double e_star = 0;
    double fit_residual = 0;
    bool flagged = false;
    std::vector<double> betas;
    std::vector<double> values;
};

// Ground-state energy from the large-beta slope of the solved values,
// fitting value = E beta + a + b log(beta) on the top half of the ladder.
ZeroTemperatureResult zero_temperature(const Mixture& m, const ZeroTemperatureOptions& opts = {});

}  // namespace spinglass
