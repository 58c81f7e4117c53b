#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinglass/tap.hpp"
#include "spinglass/rng.hpp"

using namespace spinglass;

TEST_CASE("closed-form value and the two displayed forms") {
    Mixture m2 = Mixture::pure(2);
    // q_P = 0 without a degree-1 term: (1/2) beta^2 nu(1)
    CHECK(tap_rs_value(m2, 0.8, 0.0) == doctest::Approx(0.5 * 0.64).epsilon(1e-14));
    // square mixture simplifies to (1/2) beta^2 (1-q)^2
    for (double q : {0.1, 0.4, 0.7}) {
        CHECK(tap_rs_value(m2, 1.3, q) ==
              doctest::Approx(0.5 * 1.69 * (1 - q) * (1 - q)).epsilon(1e-12));
    }
    // the coefficient form agrees identically on random mixtures
    Xoshiro256pp rng(77);
    for (int t = 0; t < 200; ++t) {
        std::map<int, double> c;
        int terms = 1 + int(rng.below(3));
        for (int i = 0; i < terms; ++i) c[1 + int(rng.below(6))] = 0.1 + rng.uniform();
        Mixture m(c);
        double q = 0.98 * rng.uniform();
        double beta = 0.2 + 2 * rng.uniform();
        CHECK(std::abs(tap_rs_value(m, beta, q) - tap_rs_value_alpha_form(m, beta, q)) <=
              1e-12 * std::max(1.0, std::abs(tap_rs_value(m, beta, q))));
    }
}

TEST_CASE("profile components and divergence near q -> 1") {
    Mixture m3 = Mixture::pure(3);
    TapOptions opts;
    opts.k = 2;
    TapProfile p = tap_profile(m3, 1.0, {0.2, 0.5, 0.9, 0.99}, opts);
    // bookkeeping: total recomputes from parts
    for (std::size_t i = 0; i < p.q.size(); ++i)
        CHECK(p.total[i] ==
              doctest::Approx(1.0 * p.e_star[i] + p.entropy[i] + p.f_limit[i]).epsilon(1e-12));
    // entropy term dominates at the right edge
    CHECK(p.total.back() < p.total[1]);
    CHECK(p.entropy.back() < -2.0);
    CHECK_THROWS(tap_profile(m3, 1.0, {0.0, 0.5}, opts));
}

TEST_CASE("replica-symmetric regime: profile sup approaches the free energy"
          * doctest::timeout(600)) {
    Mixture m2 = Mixture::pure(2);
    TapOptions opts;
    opts.k = 2;
    // near the left edge the profile recovers the RS value 0.125
    std::vector<double> grid;
    for (double q = 0.005; q < 0.2; q += 0.01) grid.push_back(q);
    TapProfile p = tap_profile(m2, 0.5, grid, opts);
    CHECK(std::abs(p.sup_total - 0.125) < 2e-3);
    CHECK(p.arg_sup < 0.03);  // boundary maximizer reported
}

TEST_CASE("consistency report for the cubic model at beta 2" * doctest::timeout(900)) {
    Mixture m3 = Mixture::pure(3);
    TapOptions opts;
    opts.k = 3;
    TapReport r = tap_consistency(m3, 2.0, opts);
    CHECK(r.value_ok);
    CHECK(r.value_gap <= 5e-3);
    CHECK(r.atoms_in_argmax_ok);
    CHECK(r.rs_condition_holds);
    CHECK(r.rs_value_ok);
    CHECK(std::abs(r.f_limit_at_qp - r.rs_value_at_qp) <= 5e-3);
}
