#include "spinglass/tap.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "spinglass/parallel.hpp"

namespace spinglass {

std::vector<double> default_tap_grid(int nodes, double lo, double hi) {
    std::vector<double> q(nodes);
    for (int i = 0; i < nodes; ++i) {
        double c = std::cos(M_PI * (double(i) + 0.5) / double(nodes));
        q[nodes - 1 - i] = lo + 0.5 * (hi - lo) * (1.0 + c);
    }
    std::sort(q.begin(), q.end());
    return q;
}

TapProfile tap_profile(const Mixture& m, double beta, const std::vector<double>& q_grid,
                       const TapOptions& opts) {
    const int n = int(q_grid.size());
    for (double q : q_grid)
        if (!(q > 0 && q < 1)) throw std::invalid_argument("tap_profile: grid must be in (0,1)");
    TapProfile p;
    p.q = q_grid;
    p.e_star.assign(n, 0.0);
    p.entropy.assign(n, 0.0);
    p.f_limit.assign(n, 0.0);
    p.total.assign(n, 0.0);
    p.node_flagged.assign(n, false);

    parallel_for(std::size_t(n), [&](std::size_t i) {
        double q = q_grid[i];
        ZeroTemperatureOptions zt = opts.zero_t;
        zt.k = opts.k;
        ZeroTemperatureResult zr = zero_temperature(inner_sphere(m, q), zt);
        SolveOptions so = opts.solve_opts;
        SolveResult fr = solve(drop_one_spin(restrict_mixture(m, q)), beta, opts.k, so);
        p.e_star[i] = zr.e_star;
        p.entropy[i] = 0.5 * std::log1p(-q);
        p.f_limit[i] = fr.value;
        p.total[i] = beta * zr.e_star + p.entropy[i] + fr.value;
        p.node_flagged[i] = zr.flagged || !fr.converged;
    });

    p.sup_total = -1e300;
    for (int i = 0; i < n; ++i)
        if (p.total[i] > p.sup_total) {
            p.sup_total = p.total[i];
            p.arg_sup = p.q[i];
        }
    for (int i = 0; i < n; ++i)
        if (p.total[i] >= p.sup_total - opts.argmax_tol) p.argmax_set.push_back(p.q[i]);
    return p;
}

double tap_rs_value(const Mixture& m, double beta, double q_p) {
    if (!(q_p >= 0 && q_p < 1)) throw std::invalid_argument("tap_rs_value: q_P must be in [0,1)");
    return 0.5 * beta * beta *
           (m.eval(1.0, 0) - m.eval(q_p, 0) - (1.0 - q_p) * m.eval(q_p, 1));
}

double tap_rs_value_alpha_form(const Mixture& m, double beta, double q_p) {
    double s = 0;
    for (int k = 2; k <= m.p_max(); ++k) s += restricted_coefficient(m, q_p, k);
    return 0.5 * beta * beta * s;
}

TapReport tap_consistency(const Mixture& m, double beta, const TapOptions& opts) {
    TapReport r;
    r.tol = opts.argmax_tol;
    SolveResult full = solve(m, beta, std::max(opts.k, 3), opts.solve_opts);
    r.solve_value = full.value;
    for (int i = 0; i < full.measure.k(); ++i)
        if (full.measure.atoms()[i] > 1e-9) r.solver_atoms.push_back(full.measure.atoms()[i]);
    r.q_p = full.measure.q_max();

    std::vector<double> grid = default_tap_grid();
    for (double a : r.solver_atoms)
        if (a > 0.005 && a < 0.995) grid.push_back(a);
    std::sort(grid.begin(), grid.end());
    TapProfile prof = tap_profile(m, beta, grid, opts);

    r.sup_profile = prof.sup_total;
    r.value_gap = std::abs(prof.sup_total - full.value);
    r.value_ok = r.value_gap <= opts.argmax_tol;

    // every positive solver atom must land within grid resolution of the
    // argmax set
    bool atoms_ok = true;
    for (double a : r.solver_atoms) {
        double best = 1e300;
        for (double qa : prof.argmax_set) best = std::min(best, std::abs(qa - a));
        // local grid spacing near a
        double spacing = 1e300;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            if (a >= grid[i] && a <= grid[i + 1]) spacing = grid[i + 1] - grid[i];
        if (spacing == 1e300) spacing = 0.02;
        if (best > std::max(spacing, 1e-3)) atoms_ok = false;
    }
    r.atoms_in_argmax_ok = atoms_ok;

    RsConditionResult rs = rs_condition(m, beta, r.q_p);
    r.rs_condition_holds = rs.holds;
    Mixture nu2 = r.q_p > 1e-9 ? drop_one_spin(restrict_mixture(m, r.q_p)) : drop_one_spin(m);
    r.f_limit_at_qp = solve(nu2, beta, opts.k, opts.solve_opts).value;
    r.rs_value_at_qp = tap_rs_value(m, beta, r.q_p);
    r.rs_value_ok =
        !rs.holds || std::abs(r.f_limit_at_qp - r.rs_value_at_qp) <= opts.argmax_tol;
    return r;
}

std::string TapReport::to_json() const {
    nlohmann::ordered_json j;
    j["solve_value"] = solve_value;
    j["sup_profile"] = sup_profile;
    j["value_gap"] = value_gap;
    j["value_ok"] = value_ok;
    j["solver_atoms"] = solver_atoms;
    j["atoms_in_argmax_ok"] = atoms_in_argmax_ok;
    j["q_p"] = q_p;
    j["rs_condition_holds"] = rs_condition_holds;
    j["f_limit_at_qp"] = f_limit_at_qp;
    j["rs_value_at_qp"] = rs_value_at_qp;
    j["rs_value_ok"] = rs_value_ok;
    j["tol"] = tol;
    return j.dump(2);
}

}  // namespace spinglass
