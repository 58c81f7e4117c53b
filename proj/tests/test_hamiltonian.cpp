#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinglass/geometry.hpp"
#include "spinglass/hamiltonian.hpp"
#include "spinglass/rng.hpp"

using namespace spinglass;

namespace {

Configuration sphere_point(int n, double radius_sq, std::uint64_t seed) {
    return Configuration(uniform_sphere_point(n, radius_sq, seed));
}

}  // namespace

TEST_CASE("determinism of sampled tensors") {
    Mixture m = Mixture::pure(2);
    Disorder a = sample_disorder(m, 4, 7);
    Disorder b = sample_disorder(m, 4, 7);
    CHECK((a.tensor(2) - b.tensor(2)).cwiseAbs().maxCoeff() == 0.0);

    Disorder c = sample_disorder(m, 4, 8);
    CHECK((a.tensor(2) - c.tensor(2)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("capacity error names the offending degree") {
    Mixture m = Mixture::pure(5);
    try {
        Disorder d(m, 64, 1, std::size_t(1) << 30);  // 64^5 doubles > 1 GiB
        d.tensor(5);
        FAIL("expected capacity error");
    } catch (const capacity_error& e) {
        CHECK(e.degree == 5);
    }
}

TEST_CASE("energy parity under sign flip") {
    Configuration s = sphere_point(12, 1.0, 3);
    Configuration neg(Vec(-s.coords));

    Disorder even = sample_disorder(Mixture::pure(2), 12, 5);
    CHECK(even.energy(s) == doctest::Approx(even.energy(neg)).epsilon(1e-12));

    Disorder odd = sample_disorder(Mixture::pure(3), 12, 5);
    CHECK(odd.energy(s) == doctest::Approx(-odd.energy(neg)).epsilon(1e-12));
}

TEST_CASE("energy dimension mismatch") {
    Disorder d = sample_disorder(Mixture::pure(2), 8, 1);
    CHECK_THROWS(d.energy(sphere_point(9, 1.0, 2)));
}

TEST_CASE("gradient: Euler identity for homogeneous terms") {
    for (int p : {2, 3}) {
        Disorder d = sample_disorder(Mixture::pure(p), 10, 11);
        Configuration s = sphere_point(10, 0.8, 4);
        double lhs = d.gradient(s).dot(s.coords);
        CHECK(lhs == doctest::Approx(double(p) * d.energy(s)).epsilon(1e-10));
    }
}

TEST_CASE("gradient matches directional finite differences") {
    Mixture m({{1, 0.2}, {2, 0.5}, {3, 0.3}});
    Disorder d = sample_disorder(m, 14, 9);
    Configuration s = sphere_point(14, 0.9, 6);
    Vec dir = uniform_sphere_point(14, 1.0, 77);
    dir /= dir.norm();
    const double h = 1e-6;
    Configuration plus(Vec(s.coords + h * dir)), minus(Vec(s.coords - h * dir));
    double fd = (d.energy(plus) - d.energy(minus)) / (2 * h);
    double an = d.gradient(s).dot(dir);
    CHECK(std::abs(an - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
}

TEST_CASE("theoretical covariance closed form") {
    Mixture m = Mixture::pure(2);
    int n = 10;
    Vec a = Vec::Zero(n), b = Vec::Zero(n);
    a(0) = std::sqrt(10.0);
    b(0) = 0.5 * std::sqrt(10.0);
    b(1) = std::sqrt(10.0 - 2.5);
    Configuration ca(a), cb(b);
    // <a,b> = 5, so N nu(0.5) = 10 * 0.25
    CHECK(theoretical_covariance(m, ca, cb) == doctest::Approx(2.5).epsilon(1e-12));

    Configuration s = sphere_point(n, 1.0, 1);
    CHECK(theoretical_covariance(m, s, s) == doctest::Approx(10.0 * m.eval(1.0, 0)));
}

TEST_CASE("homogeneous scaling of energy in the radius") {
    Disorder d = sample_disorder(Mixture::pure(3), 9, 2);
    Configuration s = sphere_point(9, 0.5, 8);
    Configuration half(Vec(0.5 * s.coords));
    CHECK(d.energy(half) == doctest::Approx(std::pow(0.5, 3) * d.energy(s)).epsilon(1e-12));
}

TEST_CASE("section decomposition is an exact regrouping") {
    Mixture m({{2, 0.5}, {3, 0.5}});
    const int n = 12;
    Disorder d = sample_disorder(m, n, 21);
    const double q = 0.37;
    SectionField sec = restrict_to_section(d, q);

    Xoshiro256pp rng(55);
    for (int t = 0; t < 100; ++t) {
        Vec bar = uniform_sphere_point(n - 1, 1.0, derive_seed(99, t));
        bar *= std::sqrt(double(n - 1)) / bar.norm();
        Vec full = sec.ambient_point(bar);
        double direct = d.energy(Configuration(full));
        double split = sec.h0() + sec.energy_embedded(bar);
        CHECK(std::abs(direct - split) <= 1e-9 * std::max(1.0, std::abs(direct)));
    }
    CHECK_THROWS(restrict_to_section(d, 0.0));
    CHECK_THROWS(restrict_to_section(d, 1.0));
}

TEST_CASE("restriction of the square model carries degrees one and two") {
    // per-degree variances over disorder draws equal N a2_k(q)
    Mixture m = Mixture::pure(2);
    const int n = 16;
    const double q = 0.5;
    const int draws = 4000;
    Vec bar = uniform_sphere_point(n - 1, 1.0, 808);
    bar *= std::sqrt(double(n - 1)) / bar.norm();
    std::vector<double> d1(draws), d2(draws);
    for (int t = 0; t < draws; ++t) {
        Disorder d = sample_disorder(m, n, 40000 + t);
        SectionField sec = restrict_to_section(d, q);
        CHECK(sec.max_degree() == 2);
        d1[t] = sec.energy_embedded_degree(1, bar);
        d2[t] = sec.energy_embedded_degree(2, bar);
        if (t == 0)
            CHECK(sec.energy_embedded(bar) == doctest::Approx(d1[t] + d2[t]).epsilon(1e-12));
    }
    for (int k = 1; k <= 2; ++k) {
        double target = double(n) * restricted_coefficient(m, q, k);
        double var = variance_of(k == 1 ? d1 : d2);
        double se = target * std::sqrt(2.0 / double(draws - 1));
        CHECK(std::abs(var - target) < 5 * se);
    }
}

TEST_CASE("restricted field variance matches the restricted mixture"
          * doctest::timeout(120)) {
    // Monte Carlo oracle: at a fixed chart point the field variance over
    // disorder draws is N nu_q(1); covariance at two points follows
    // N nu_q(<a,b>/(N-1)).
    Mixture m({{2, 0.5}, {3, 0.5}});
    const int n = 16;
    const double q = 0.5;
    const int draws = 4000;

    Vec a = uniform_sphere_point(n - 1, 1.0, 123);
    a *= std::sqrt(double(n - 1)) / a.norm();
    Vec b = uniform_sphere_point(n - 1, 1.0, 321);
    b -= (b.dot(a) / a.squaredNorm()) * a;  // orthogonal chart point
    b *= std::sqrt(double(n - 1)) / b.norm();

    std::vector<double> va, vb;
    for (int t = 0; t < draws; ++t) {
        Disorder d = sample_disorder(m, n, 1000 + t);
        SectionField sec = restrict_to_section(d, q);
        va.push_back(sec.energy_embedded(a));
        vb.push_back(sec.energy_embedded(b));
    }
    Mixture nu_q = restrict_mixture(m, q);
    double target_var = double(n) * nu_q.eval(1.0, 0);
    double var = variance_of(va);
    double se = target_var * std::sqrt(2.0 / double(draws - 1));
    CHECK(std::abs(var - target_var) < 5 * se);

    // covariance at orthogonal chart points: N nu_q(0) = 0
    double ma = mean_of(va), mb = mean_of(vb);
    double cov = 0;
    for (int t = 0; t < draws; ++t) cov += (va[t] - ma) * (vb[t] - mb);
    cov /= double(draws - 1);
    double cov_se = target_var / std::sqrt(double(draws));
    CHECK(std::abs(cov) < 5 * cov_se);
}

TEST_CASE("amplitude scaling: doubling every amplitude doubles the energy std") {
    Mixture base({{2, 0.5}, {3, 0.5}});
    Mixture scaled({{2, 2.0}, {3, 2.0}});  // gamma^2 scaled by 4, std by 2
    const int n = 12, draws = 3000;
    Configuration s = sphere_point(n, 1.0, 7);
    std::vector<double> e1(draws), e2(draws);
    for (int t = 0; t < draws; ++t) {
        e1[t] = sample_disorder(base, n, 600 + t).energy(s);
        e2[t] = sample_disorder(scaled, n, 600 + t).energy(s);
    }
    double ratio = std::sqrt(variance_of(e2) / variance_of(e1));
    // identical seeds give identical coefficient draws, so the ratio is
    // exact up to rounding
    CHECK(ratio == doctest::Approx(2.0).epsilon(1e-12));
    // distributional check on independent draws at 5 sigma
    std::vector<double> e3(draws);
    for (int t = 0; t < draws; ++t)
        e3[t] = sample_disorder(scaled, n, 9600 + t).energy(s);
    double v_target = 4.0 * double(n) * base.eval(1.0, 0);
    double se = v_target * std::sqrt(2.0 / double(draws - 1));
    CHECK(std::abs(variance_of(e3) - v_target) < 5 * se);
}

TEST_CASE("gradient of zero mixture amplitude is zero") {
    Mixture tiny({{2, 1e-30}});
    Disorder d = sample_disorder(tiny, 6, 1);
    Configuration s = sphere_point(6, 1.0, 5);
    CHECK(std::abs(d.energy(s)) < 1e-12);
    CHECK(d.gradient(s).norm() < 1e-12);
}
