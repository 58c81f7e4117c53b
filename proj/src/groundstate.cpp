#include "spinglass/groundstate.hpp"

#include <cmath>

#include "spinglass/geometry.hpp"
#include "spinglass/parallel.hpp"
#include "spinglass/rng.hpp"

namespace spinglass {

namespace {

struct RunResult {
    Vec x;
    double h;
    bool converged;
    double gnorm;
};

RunResult descend(const Disorder& d, double q, std::uint64_t seed, const MinimizeOptions& opts) {
    const int n = d.dim();
    const double radius = std::sqrt(double(n) * q);
    Vec x = uniform_sphere_point(n, q, seed);
    double h = d.energy(Configuration(x));
    double step = 1.0 / std::sqrt(double(n));
    bool converged = false;
    double gnorm = 0;
    for (int it = 0; it < opts.max_iters; ++it) {
        Vec g = d.gradient(Configuration(x));
        Vec gt = g - (g.dot(x) / x.squaredNorm()) * x;  // tangential part
        gnorm = gt.norm() / std::sqrt(double(n));
        if (gnorm < opts.grad_tol) {
            converged = true;
            break;
        }
        // Backtracking Armijo on the retracted step; previous accepted step
        // seeds the next trial (doubled) so progress is not throttled.
        double t = step * 2.0;
        double gsq = gt.squaredNorm();
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            Vec cand = x - t * gt;
            cand *= radius / cand.norm();
            double hc = d.energy(Configuration(cand));
            if (hc <= h - opts.armijo_c * t * gsq) {
                x = std::move(cand);
                h = hc;
                step = t;
                moved = true;
                break;
            }
            t *= opts.armijo_factor;
        }
        if (!moved) {
            converged = gnorm < 10 * opts.grad_tol;
            break;
        }
    }
    return {std::move(x), h, converged, gnorm};
}

}  // namespace

GroundStateResult minimize_on_sphere(const Disorder& d, double q, int restarts,
                                     const MinimizeOptions& opts) {
    if (!(q > 0 && q <= 1)) throw std::invalid_argument("minimize_on_sphere: q must be in (0,1]");
    restarts = std::max(1, restarts);
    std::vector<RunResult> runs(restarts);
    parallel_for(std::size_t(restarts), [&](std::size_t r) {
        runs[r] = descend(d, q, derive_seed(opts.seed, 0x95u, std::uint64_t(r)), opts);
    });
    int best = 0;
    for (int r = 1; r < restarts; ++r)
        if (runs[r].h < runs[best].h) best = r;
    GroundStateResult out;
    out.minimizer = Configuration(runs[best].x);
    out.value_per_site = runs[best].h / double(d.dim());
    out.restarts_used = restarts;
    out.converged = runs[best].converged;
    out.tangential_grad_norm = runs[best].gnorm;
    return out;
}

bool near_ground_set_membership(const Disorder& d, const Configuration& s, double q, double tau,
                                double e_star_q) {
    if (std::abs(s.radius_sq - q) > 1e-8)
        throw std::invalid_argument("near_ground_set_membership: radius mismatch");
    return d.energy(s) / double(d.dim()) < -e_star_q + tau;
}

}  // namespace spinglass
