#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinglass/mixture.hpp"
#include "spinglass/rng.hpp"

using namespace spinglass;

TEST_CASE("eval: values and derivatives") {
    Mixture cubic = Mixture::pure(3);
    CHECK(cubic.eval(1.0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    Mixture square = Mixture::pure(2);
    CHECK(square.eval(0.3, 1) == doctest::Approx(0.6).epsilon(1e-15));

    Mixture mixed({{2, 0.5}, {4, 0.5}});
    CHECK(mixed.eval(0.5, 0) == doctest::Approx(0.15625).epsilon(1e-15));

    CHECK_THROWS(mixed.eval(0.5, 4));
}

TEST_CASE("eval derivative matches central differences") {
    Mixture m({{1, 0.2}, {2, 0.5}, {3, 0.3}, {5, 0.1}});
    const double h = 1e-5;
    for (double x : {-0.9, -0.3, 0.0, 0.4, 0.8}) {
        double fd = (m.eval(x + h, 0) - m.eval(x - h, 0)) / (2 * h);
        CHECK(std::abs(m.eval(x, 1) - fd) < 1e-8);
    }
}

TEST_CASE("restrict: hand-expanded coefficients for the square mixture") {
    Mixture m = Mixture::pure(2);
    Mixture r = restrict_mixture(m, 0.5);
    // a2_1 = (1-q) * 2 q g2, a2_2 = (1-q)^2 g2
    CHECK(r.coeff(1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.coeff(2) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.eval(1.0, 0) == doctest::Approx(m.eval(1.0, 0) - m.eval(0.5, 0)).epsilon(1e-14));
    CHECK_THROWS(restrict_mixture(m, 0.0));
    CHECK_THROWS(restrict_mixture(m, 1.0));
}

TEST_CASE("restrict at vanishing q returns the original coefficients") {
    Mixture m({{2, 0.5}, {3, 0.3}, {4, 0.2}});
    Mixture r = restrict_mixture(m, 1e-12);
    for (int p = 2; p <= 4; ++p) CHECK(std::abs(r.coeff(p) - m.coeff(p)) < 1e-9);
}

TEST_CASE("resummation identity over random instances") {
    Xoshiro256pp rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        std::map<int, double> c;
        int terms = 1 + int(rng.below(4));
        for (int t = 0; t < terms; ++t) c[1 + int(rng.below(6))] = rng.uniform();
        Mixture m(c);
        double q = 0.02 + 0.96 * rng.uniform();
        double x = 2.0 * rng.uniform() - 1.0;
        Mixture r = restrict_mixture(m, q);
        double lhs = r.eval(x, 0);
        double rhs = m.eval(q + (1 - q) * x, 0) - m.eval(q, 0);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("variance split at x = 1") {
    Mixture m({{2, 0.7}, {3, 0.2}, {6, 0.4}});
    for (double q : {0.1, 0.5, 0.9}) {
        Mixture r = restrict_mixture(m, q);
        CHECK(m.eval(1.0, 0) ==
              doctest::Approx(m.eval(q, 0) + r.eval(1.0, 0)).epsilon(1e-13));
    }
}

TEST_CASE("drop_one_spin") {
    Mixture m({{1, 0.5}, {2, 0.25}});
    Mixture d = drop_one_spin(m);
    CHECK(!d.has_degree(1));
    CHECK(d.coeff(2) == doctest::Approx(0.25));

    Mixture only2 = Mixture::pure(2);
    Mixture d2 = drop_one_spin(only2);
    CHECK(d2.coeff(2) == doctest::Approx(1.0));

    CHECK_THROWS(drop_one_spin(Mixture({{1, 0.3}})));
}

TEST_CASE("inner_sphere") {
    Mixture cubic = Mixture::pure(3);
    CHECK(inner_sphere(cubic, 0.5).coeff(3) == doctest::Approx(0.125).epsilon(1e-15));

    Mixture m({{2, 0.5}, {3, 0.5}});
    Mixture same = inner_sphere(m, 1.0);
    CHECK(same.coeff(2) == doctest::Approx(0.5));
    CHECK(same.coeff(3) == doctest::Approx(0.5));

    Mixture scaled = inner_sphere(m, 0.25);
    CHECK(scaled.coeff(2) == doctest::Approx(0.03125).epsilon(1e-15));
    CHECK(scaled.coeff(3) == doctest::Approx(0.0078125).epsilon(1e-15));

    CHECK_THROWS(inner_sphere(m, 0.0));
    CHECK_THROWS(inner_sphere(m, -0.5));
}

TEST_CASE("genericity report by parity") {
    GenericityReport r1 = genericity_report(Mixture({{2, 0.5}, {3, 0.5}}));
    CHECK(r1.odd_represented);
    CHECK(r1.even_represented);
    CHECK(!r1.generic);

    GenericityReport r2 = genericity_report(Mixture({{2, 0.5}, {4, 0.5}}));
    CHECK(!r2.odd_represented);

    GenericityReport r3 = genericity_report(Mixture::pure(3));
    CHECK(!r3.even_represented);
}

TEST_CASE("json literal round trip") {
    Mixture m({{2, 0.5}, {3, 0.5}});
    Mixture back = Mixture::from_json(m.to_json());
    CHECK(back.coeff(2) == doctest::Approx(0.5));
    CHECK(back.coeff(3) == doctest::Approx(0.5));
    CHECK_THROWS(Mixture::from_json("{\"2\": -1}"));
}

TEST_CASE("constructor rejections") {
    CHECK_THROWS(Mixture({{2, -0.1}}));
    CHECK_THROWS(Mixture({{0, 0.5}}));
    CHECK_THROWS(Mixture({{2, 0.0}}));
}
