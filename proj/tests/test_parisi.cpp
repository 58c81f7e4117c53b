#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinglass/parisi.hpp"
#include "spinglass/rng.hpp"

using namespace spinglass;

TEST_CASE("functional: replica-symmetric collapse") {
    ParisiMeasure rs = ParisiMeasure::replica_symmetric();
    Mixture m2 = Mixture::pure(2);
    CHECK(cs_functional(rs, m2, 0.5) == doctest::Approx(0.125).epsilon(1e-14));

    // beta -> 0 limit vanishes
    CHECK(cs_functional(rs, m2, 1e-8) == doctest::Approx(0.0).epsilon(1e-12));

    Mixture m3({{2, 0.5}, {3, 0.5}});
    CHECK(cs_functional(rs, m3, 0.5) ==
          doctest::Approx(0.5 * 0.25 * m3.eval(1.0, 0)).epsilon(1e-14));
}

TEST_CASE("functional: single positive atom closed form") {
    // one atom at q with weight 1: P = (1/2)[b^2(nu(1)-nu(q)) + q/(1-q) + log(1-q)]
    Mixture m2 = Mixture::pure(2);
    double beta = 1.0, q = 0.29289321881345254;  // 1 - 1/sqrt(2)
    ParisiMeasure one({q}, {1.0});
    double expect = 0.5 * ((1 - q * q) + q / (1 - q) + std::log(1 - q));
    CHECK(cs_functional(one, m2, beta) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(expect < 0.5);  // strictly below the replica-symmetric value
}

TEST_CASE("measure validation and canonical form") {
    CHECK_THROWS(ParisiMeasure({0.2, 0.1}, {0.5, 0.5}));
    CHECK_THROWS(ParisiMeasure({0.2}, {0.5}));
    CHECK_THROWS(ParisiMeasure({1.0}, {1.0}));

    ParisiMeasure messy({0.0, 1e-9, 0.5}, {0.3, 0.2, 0.5});
    ParisiMeasure canon = messy.canonical();
    CHECK(canon.k() == 2);
    CHECK(canon.weights()[0] == doctest::Approx(0.5));

    ParisiMeasure tiny_w({0.0, 0.5}, {1.0 - 1e-11, 1e-11});
    CHECK(tiny_w.canonical().k() == 1);
}

TEST_CASE("xhat piecewise values") {
    ParisiMeasure x({0.0, 0.4}, {0.3, 0.7});
    // x = 0.3 on [0, 0.4), 1 on [0.4, 1]
    CHECK(x.xhat(0.4) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(x.xhat(0.0) == doctest::Approx(0.6 + 0.3 * 0.4).epsilon(1e-14));
    CHECK(x.xhat(0.7) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("convexity of the functional in the distribution function") {
    // blend of two step functions evaluated against the blended value
    Mixture m({{2, 0.6}, {4, 0.4}});
    Xoshiro256pp rng(9);
    for (int trial = 0; trial < 40; ++trial) {
        double qa = 0.1 + 0.5 * rng.uniform(), qb = qa + 0.3 * rng.uniform();
        double wa = 0.2 + 0.6 * rng.uniform();
        ParisiMeasure x0({0.0, qa}, {wa, 1 - wa});
        ParisiMeasure x1({0.0, qb}, {1 - wa, wa});
        double lam = rng.uniform();
        // pointwise blend of the distribution functions: atoms at the union
        ParisiMeasure blend({0.0, qa, qb},
                            {lam * (1 - wa) + (1 - lam) * wa, (1 - lam) * (1 - wa),
                             lam * wa});
        double beta = 0.5 + rng.uniform();
        double lhs = cs_functional(blend, m, beta);
        double rhs = lam * cs_functional(x1, m, beta) +
                     (1 - lam) * cs_functional(x0, m, beta);
        CHECK(lhs <= rhs + 1e-10);
    }
}

TEST_CASE("solve: replica-symmetric regime returns the exact closed form") {
    Mixture m2 = Mixture::pure(2);
    SolveResult r = solve(m2, 0.5, 3);
    CHECK(std::abs(r.value - 0.125) <= 1e-8);
    CHECK(r.measure.q_max() < 1e-6);
}

TEST_CASE("solve: symmetry breaking for the square mixture at beta 1") {
    Mixture m2 = Mixture::pure(2);
    SolveResult r = solve(m2, 1.0, 3);
    CHECK(r.value < 0.5 - 1e-4);
    // known one-atom solution at q = 1 - 1/(beta sqrt(2))
    double q = 1 - 1 / std::sqrt(2.0);
    double expect = 0.5 * ((1 - q * q) + q / (1 - q) + std::log(1 - q));
    CHECK(r.value == doctest::Approx(expect).epsilon(1e-7));
}

TEST_CASE("solve: k-monotonicity and k-refinement agreement") {
    Mixture m3 = Mixture::pure(3);
    SolveResult r2 = solve(m3, 2.0, 2);
    SolveResult r4 = solve(m3, 2.0, 4);
    CHECK(r4.value <= r2.value + 1e-9);
    CHECK(std::abs(r4.value - r2.value) < 1e-6);  // one-step breaking suffices
    SolveResult r1 = solve(m3, 2.0, 1);
    CHECK(r2.value <= r1.value + 1e-9);
}

TEST_CASE("solve: zero atom present once a degree >= 3 component exists") {
    // holds whenever nu'' is non-constant; the pure square mixture is the
    // known exception (single positive atom, see the symmetry-breaking case)
    struct Case {
        Mixture m;
        double beta;
    };
    std::vector<Case> cases = {{Mixture::pure(3), 2.0},
                               {Mixture({{2, 0.5}, {4, 0.5}}), 1.5},
                               {Mixture({{2, 0.5}, {3, 0.5}}), 1.7}};
    for (auto& c : cases) {
        SolveResult r = solve(c.m, c.beta, 3);
        CHECK(r.measure.atoms()[0] < 1e-6);
        CHECK(r.measure.k() >= 2);
        CHECK(r.measure.weights()[0] > 0.01);
    }
}

TEST_CASE("validate: solver output passes, off-optimum input fails") {
    Mixture m2 = Mixture::pure(2);
    SolveResult r = solve(m2, 0.5, 3);
    StationarityReport rep = validate(r.measure, m2, 0.5, 1e-6);
    CHECK(rep.max_condition_ok);
    CHECK(rep.stationary_condition_ok);
    CHECK(rep.gamma_condition_ok);

    // replica-symmetric input above the threshold: the sup is exceeded off
    // the support
    StationarityReport bad = validate(ParisiMeasure::replica_symmetric(), m2, 1.0, 1e-6);
    CHECK(!bad.max_condition_ok);

    // arbitrary uniform-weight measure on a mixed model: fails generically
    ParisiMeasure arb({0.1, 0.3, 0.6}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    StationarityReport arb_rep = validate(arb, Mixture({{2, 0.5}, {3, 0.5}}), 1.3, 1e-6);
    CHECK((!arb_rep.max_condition_ok || !arb_rep.stationary_condition_ok));
}

TEST_CASE("validate: derivative consistency of the stationarity function") {
    Mixture m({{2, 0.5}, {3, 0.5}});
    SolveResult r = solve(m, 1.7, 3);
    StationarityReport rep = validate(r.measure, m, 1.7, 1e-5);
    CHECK(rep.max_condition_ok);
    CHECK(rep.stationary_condition_ok);
    CHECK(rep.gamma_condition_ok);
    for (auto& c : rep.atom_checks)
        if (c.q > 1e-9) CHECK(std::abs(c.fprime) < 1e-5);

    // f' from the closed forms matches central differences of f
    const double h = 1e-6;
    for (double q : {0.05, 0.2, 0.45, 0.7, 0.9}) {
        double f_minus = stationarity_f(r.measure, m, 1.7, q - h).first;
        double f_plus = stationarity_f(r.measure, m, 1.7, q + h).first;
        double fprime = stationarity_f(r.measure, m, 1.7, q).second;
        double fd = (f_plus - f_minus) / (2 * h);
        CHECK(std::abs(fprime - fd) < 1e-6);
    }
}

TEST_CASE("validate: positive top atom determines the boundary parameter") {
    Mixture m2 = Mixture::pure(2);
    SolveResult r = solve(m2, 1.0, 3);
    REQUIRE(r.measure.q_max() > 0.2);
    StationarityReport rep = validate(r.measure, m2, 1.0, 1e-5);
    CHECK(rep.b_root_bracketed);
    CHECK(rep.max_condition_ok);
    CHECK(rep.stationary_condition_ok);
    CHECK(rep.gamma_condition_ok);
    CHECK(rep.gamma_bar_margin > -1e-5);
    CHECK(rep.b > 1.0);
}

TEST_CASE("rs_condition thresholds for the square mixture") {
    Mixture m2 = Mixture::pure(2);
    RsConditionResult ok = rs_condition(m2, 0.5, 0.0);
    CHECK(ok.holds);

    RsConditionResult bad = rs_condition(m2, 1.0, 0.0);
    CHECK(!bad.holds);
    CHECK(bad.worst_t < 0.2);  // violation sets in near t -> 0

    // beta -> 0: log(1-t) + t <= 0 for any q_P
    RsConditionResult tiny = rs_condition(m2, 1e-6, 0.3);
    CHECK(tiny.holds);
}

TEST_CASE("zero_temperature: square mixture hits the spectral-edge constant") {
    ZeroTemperatureResult r = zero_temperature(Mixture::pure(2));
    CHECK(std::abs(r.e_star - std::sqrt(2.0)) < 1e-3);
    CHECK(!r.flagged);
}

TEST_CASE("zero_temperature: amplitude linearity across inner spheres") {
    Mixture m2 = Mixture::pure(2);
    ZeroTemperatureResult full = zero_temperature(m2);
    ZeroTemperatureResult inner = zero_temperature(inner_sphere(m2, 0.6));
    CHECK(std::abs(inner.e_star - 0.6 * full.e_star) < 1e-3);

    ZeroTemperatureResult faint = zero_temperature(Mixture({{2, 1e-12}}));
    CHECK(std::abs(faint.e_star) < 1e-5);
}

TEST_CASE("measure json round trip") {
    ParisiMeasure x({0.0, 0.4}, {0.3, 0.7});
    ParisiMeasure back = ParisiMeasure::from_json(x.to_json());
    CHECK(back.atoms()[1] == doctest::Approx(0.4));
    CHECK(back.weights()[1] == doctest::Approx(0.7));
}
