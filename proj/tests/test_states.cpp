#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinglass/states.hpp"
#include "spinglass/rng.hpp"

using namespace spinglass;

namespace {

SampleSet from_points(std::vector<Vec> pts) {
    SampleSet s;
    for (auto& p : pts) {
        s.points.emplace_back(p);
        s.meta.chain_ids.push_back(0);
    }
    return s;
}

// Exact two-level planted hierarchy on orthonormal coordinate axes: leaf
// centers sit at sqrt(N q1) v_super + sqrt(N (q_star - q1)) w_leaf, and each
// sample adds sqrt(N (1 - q_star)) along its own private axis, so every
// pairwise overlap equals its tree value exactly.
struct Planted {
    std::vector<Configuration> leaf_centers;
    std::vector<int> super_of;
    SampleSet samples;
};

Planted planted_exact(int n, int supers, int leaves_per, double q1, double q_star,
                      int samples_per_leaf) {
    int need = supers + supers * leaves_per * (1 + samples_per_leaf);
    if (need > n) throw std::invalid_argument("planted_exact: not enough dimensions");
    Planted out;
    int dir = 0;
    auto axis = [&](int i) {
        Vec v = Vec::Zero(n);
        v(i) = 1.0;
        return v;
    };
    for (int s = 0; s < supers; ++s) {
        Vec vs = axis(dir++);
        for (int l = 0; l < leaves_per; ++l) {
            Vec wl = axis(dir++);
            Vec center =
                std::sqrt(double(n) * q1) * vs + std::sqrt(double(n) * (q_star - q1)) * wl;
            out.leaf_centers.emplace_back(center);
            out.super_of.push_back(s);
            for (int t = 0; t < samples_per_leaf; ++t) {
                Vec p = center + std::sqrt(double(n) * (1.0 - q_star)) * axis(dir++);
                out.samples.points.emplace_back(p);
                out.samples.meta.chain_ids.push_back(int(out.leaf_centers.size()) - 1);
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("overlap matrix basics") {
    SampleSet one = from_points({uniform_sphere_point(8, 1.0, 1)});
    OverlapMatrix M1 = overlap_matrix(one);
    CHECK(M1.n() == 1);
    CHECK(M1.m(0, 0) == 1.0);

    Vec a = Vec::Zero(8), b = Vec::Zero(8);
    a(0) = std::sqrt(8.0);
    b(1) = std::sqrt(8.0);
    OverlapMatrix M2 = overlap_matrix(from_points({a, b}));
    CHECK(M2.m(0, 1) == doctest::Approx(0.0));

    OverlapMatrix M3 = overlap_matrix(from_points({a, a}));
    CHECK(M3.m(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("overlap histogram") {
    Vec a = Vec::Zero(8), b = Vec::Zero(8);
    a(0) = std::sqrt(8.0);
    b(1) = std::sqrt(8.0);
    Histogram h = overlap_histogram(overlap_matrix(from_points({a, b})), 20);
    double total = 0;
    for (double v : h.pmf) total += v;
    CHECK(total == doctest::Approx(1.0));
    CHECK(h.pmf[10] == doctest::Approx(1.0));

    // uniform sphere samples concentrate near zero overlap
    const int n = 64;
    std::vector<Vec> pts;
    for (int i = 0; i < 60; ++i) pts.push_back(uniform_sphere_point(n, 1.0, derive_seed(5, i)));
    Histogram hu = overlap_histogram(overlap_matrix(from_points(std::move(pts))), 8);
    double inner = hu.pmf[2] + hu.pmf[3] + hu.pmf[4] + hu.pmf[5];
    CHECK(inner > 0.99);

    // planted two-cluster set: bimodal at the within and cross overlaps
    Planted two = planted_exact(128, 2, 1, 1e-9, 0.6, 10);
    Histogram hb = overlap_histogram(overlap_matrix(two.samples), 40);
    int bin_within = int((0.6 + 1.0) / 2.0 * 40);  // within-cluster overlap 0.6
    int bin_cross = 20;                            // cross overlap 0
    CHECK(hb.pmf[bin_within] > 0.2);
    CHECK(hb.pmf[bin_cross] > 0.4);
}

TEST_CASE("planted two-cluster recovery") {
    const int n = 96;
    const double q = 0.5;
    Vec c = uniform_sphere_point(n, q, 3);
    std::vector<Vec> pts;
    NormalStream g(17);
    for (int i = 0; i < 80; ++i) {
        Vec xi(n);
        for (int j = 0; j < n; ++j) xi(j) = g.next();
        xi -= (xi.dot(c) / c.squaredNorm()) * c;
        xi *= std::sqrt(double(n) * (1 - q)) / xi.norm();
        Vec p = (i % 2 ? 1.0 : -1.0) * c + xi;
        p *= std::sqrt(double(n)) / p.norm();
        pts.push_back(p);
    }
    StateDecomposition dec = cluster_states(from_points(std::move(pts)), q, 0.2);
    REQUIRE(dec.clusters.size() == 2);
    CHECK(dec.weights[0] == doctest::Approx(0.5));
    REQUIRE(dec.centers[0]);
    REQUIRE(dec.centers[1]);
    double r0 = std::abs(overlap(*dec.centers[0], Configuration(c)));
    double r1 = std::abs(overlap(*dec.centers[1], Configuration(c)));
    CHECK(r0 > 0.98);
    CHECK(r1 > 0.98);
    CHECK(dec.pair_defect < 0.02);
    // exact membership recovery: each cluster holds one parity class
    for (auto& cl : dec.clusters) {
        int par = cl[0] % 2;
        for (int idx : cl) CHECK(idx % 2 == par);
    }

    // small-noise variant: centers land within 1e-2 of the planted center
    std::vector<Vec> tight;
    NormalStream g2(29);
    for (int i = 0; i < 40; ++i) {
        Vec xi(n);
        for (int j = 0; j < n; ++j) xi(j) = g2.next();
        xi -= (xi.dot(c) / c.squaredNorm()) * c;
        xi *= 0.03 * std::sqrt(double(n)) / xi.norm();
        tight.push_back((i % 2 ? 1.0 : -1.0) * c + xi);
    }
    StateDecomposition tdec = cluster_states(from_points(std::move(tight)), q, 0.2);
    REQUIRE(tdec.clusters.size() == 2);
    for (int k = 0; k < 2; ++k) {
        Vec diff0 = tdec.centers[k]->coords - c;
        Vec diff1 = tdec.centers[k]->coords + c;
        double rel = std::min(diff0.norm(), diff1.norm()) / c.norm();
        CHECK(rel < 1e-2);
    }

    // all points identical: one cluster of weight one
    Vec p0 = uniform_sphere_point(n, 1.0, 9);
    StateDecomposition solo = cluster_states(from_points({p0, p0, p0}), 0.9, 0.3);
    CHECK(solo.clusters.size() == 1);
    CHECK(solo.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("zero-norm cluster mean flags an undefined center") {
    // eight points around a planar cycle: adjacent overlaps exceed the
    // linkage threshold so the cycle is one cluster, and its mean vanishes
    const int n = 16;
    SampleSet set;
    for (int k = 0; k < 8; ++k) {
        Vec p = Vec::Zero(n);
        double th = 2 * M_PI * k / 8.0;
        p(0) = std::sqrt(double(n)) * std::cos(th);
        p(1) = std::sqrt(double(n)) * std::sin(th);
        set.points.emplace_back(p);
        set.meta.chain_ids.push_back(0);
    }
    StateDecomposition dec = cluster_states(set, 0.8, 0.2);  // threshold 0.6 < cos(45)
    REQUIRE(dec.clusters.size() == 1);
    CHECK(dec.undefined_centers == 1);
    CHECK(!dec.centers[0].has_value());
}

TEST_CASE("non-transitive linkage pairs are counted") {
    // chain a-b-c where the a-c overlap misses the threshold
    const int n = 32;
    StateDecomposition dec;
    dec.q_star = 0.9;
    Vec a = Vec::Zero(n), b = Vec::Zero(n), c = Vec::Zero(n);
    double r = std::sqrt(double(n) * dec.q_star);
    a(0) = r;
    b(0) = r * std::cos(M_PI / 4);
    b(1) = r * std::sin(M_PI / 4);
    c(1) = r;  // R(a,b) = R(b,c) = 0.707, R(a,c) = 0
    dec.clusters = {{0}, {1}, {2}};
    dec.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    dec.centers.emplace_back(Configuration(a));
    dec.centers.emplace_back(Configuration(b));
    dec.centers.emplace_back(Configuration(c));
    // level threshold q/q_star - theta = 0.5: a-b and b-c edges only
    UltraTree tree = build_ultratree(dec, {0.9 * 0.5 + 0.05 * 0.9}, 0.05);
    REQUIRE(tree.levels[0].classes.size() == 1);
    CHECK(tree.levels[0].nontransitive_pairs == 1);
}

TEST_CASE("uniform samples produce singletons") {
    const int n = 128;
    std::vector<Vec> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(uniform_sphere_point(n, 1.0, derive_seed(7, i)));
    StateDecomposition dec = cluster_states(from_points(std::move(pts)), 0.5, 0.1);
    CHECK(int(dec.clusters.size()) == 50);
}

TEST_CASE("re-clustering cluster members is idempotent") {
    Planted pl = planted_exact(96, 2, 2, 0.3, 0.6, 8);
    StateDecomposition dec = cluster_states(pl.samples, 0.6, 0.15);
    REQUIRE(dec.clusters.size() == 4);
    SampleSet sub;
    for (int idx : dec.clusters[0]) {
        sub.points.push_back(pl.samples.points[idx]);
        sub.meta.chain_ids.push_back(0);
    }
    StateDecomposition again = cluster_states(sub, 0.6, 0.15);
    CHECK(again.clusters.size() == 1);
    CHECK(again.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("ultrametricity defect") {
    // explicit violating triple: designated pair (0,2) strictly below
    OverlapMatrix M;
    M.m = Mat::Identity(3, 3);
    M.m(0, 1) = M.m(1, 0) = 0.8;
    M.m(1, 2) = M.m(2, 1) = 0.8;
    M.m(0, 2) = M.m(2, 0) = 0.1;
    CHECK(ultrametricity_defect(M, 0.05) == doctest::Approx(1.0));

    // exact planted hierarchy: zero defect by construction
    Planted pl = planted_exact(128, 2, 2, 0.2, 0.5, 12);
    OverlapMatrix Mp = overlap_matrix(pl.samples);
    CHECK(ultrametricity_defect(Mp, 0.05) == doctest::Approx(0.0));

    // i.i.d. uniform samples: overlaps are ~N(0, 1/N), so the defect at
    // eps = 1.13 sigma is the Gaussian triple integral ~ 0.09, not small;
    // it becomes small once eps covers several sigma
    std::vector<Vec> pts;
    for (int i = 0; i < 80; ++i)
        pts.push_back(uniform_sphere_point(128, 1.0, derive_seed(11, i)));
    OverlapMatrix Mu = overlap_matrix(from_points(std::move(pts)));
    double d_tight = ultrametricity_defect(Mu, 0.1);
    CHECK(d_tight > 0.05);
    CHECK(d_tight < 0.14);
    CHECK(ultrametricity_defect(Mu, 0.35) < 0.01);

    // monotone in epsilon
    CHECK(ultrametricity_defect(Mu, 0.05) >= ultrametricity_defect(Mu, 0.15));

    OverlapMatrix tiny;
    tiny.m = Mat::Identity(2, 2);
    CHECK_THROWS(ultrametricity_defect(tiny, 0.1));
}

TEST_CASE("replica identity defects") {
    std::vector<OverlapMatrix> draws;
    for (int d = 0; d < 6; ++d) {
        std::vector<Vec> pts;
        for (int i = 0; i < 24; ++i)
            pts.push_back(uniform_sphere_point(48, 1.0, derive_seed(100 + d, i)));
        draws.push_back(overlap_matrix(from_points(std::move(pts))));
    }
    GgOptions opts;
    opts.tuples_per_draw = 500;

    // n = 1 with f constant: exact algebraic zero
    GgResult r1 = gg_defect(draws, 1, "r2", "one", opts);
    CHECK(r1.defect == 0.0);

    // constant psi: cancellation up to rounding for any f
    GgResult rc = gg_defect(draws, 3, "one", "r12", opts);
    CHECK(std::abs(rc.defect) < 1e-13);

    // planted non-exchangeable draws: even replicas hug a center, odd ones
    // are uniform, so replica labels carry information and the identity
    // fails by a definite margin
    std::vector<OverlapMatrix> biased;
    for (int d = 0; d < 6; ++d) {
        const int n = 48, reps = 24;
        Vec c = uniform_sphere_point(n, 0.49, derive_seed(55, d));
        std::vector<Vec> pts;
        for (int i = 0; i < reps; ++i) {
            if (i % 2 == 0) {
                Vec xi = uniform_sphere_point(n, 1.0, derive_seed(56, d, i));
                xi -= (xi.dot(c) / c.squaredNorm()) * c;
                xi *= std::sqrt(double(n) * 0.51) / xi.norm();
                Vec p = c + xi;
                pts.push_back(p * std::sqrt(double(n)) / p.norm());
            } else {
                pts.push_back(uniform_sphere_point(n, 1.0, derive_seed(57, d, i)));
            }
        }
        biased.push_back(overlap_matrix(from_points(std::move(pts))));
    }
    GgResult rb = gg_defect(biased, 2, "r", "r12", opts);
    CHECK(rb.defect > 3 * rb.std_error);

    CHECK_THROWS(gg_defect(draws, 30, "r", "one", opts));
}

TEST_CASE("ultrametric tree: exact planted decomposition and residual law") {
    const int n = 256;
    const double q1 = 0.25, qs = 0.5;

    // wide tree: 2 supers x 40 exact leaf centers; the mean-offset residual
    // is (qs - q1)/L deterministically
    {
        Planted pl = planted_exact(n, 2, 40, q1, qs, 0);
        StateDecomposition dec;
        dec.q_star = qs;
        for (std::size_t k = 0; k < pl.leaf_centers.size(); ++k) {
            dec.clusters.push_back({int(k)});
            dec.weights.push_back(1.0 / double(pl.leaf_centers.size()));
            dec.centers.emplace_back(pl.leaf_centers[k]);
        }
        UltraTree tree = build_ultratree(dec, {q1}, 0.05);
        REQUIRE(tree.levels.size() == 2);
        CHECK(tree.levels[0].classes.size() == 2);
        CHECK(tree.levels[1].classes.size() == 80);
        for (auto& lvl : tree.levels) CHECK(lvl.nested_in_previous);
        CHECK(tree.levels[0].nontransitive_pairs == 0);
        CHECK(tree.orthogonality_residual_max < 1e-2);
        // recovered super membership matches the planted one
        for (std::size_t cc = 0; cc < tree.levels[0].classes.size(); ++cc) {
            int s0 = pl.super_of[tree.levels[0].classes[cc][0]];
            for (int li : tree.levels[0].classes[cc]) CHECK(pl.super_of[li] == s0);
        }
    }

    // narrow tree (2 leaves per super): the residual equals the closed-form
    // finite-class offset 2 q1 - 2 sqrt(q1 (q1+qs)/2)
    {
        Planted pl = planted_exact(n, 2, 2, q1, qs, 20);
        StateDecomposition dec = cluster_states(pl.samples, qs, 0.15);
        REQUIRE(dec.clusters.size() == 4);
        OverlapMatrix M = overlap_matrix(pl.samples);
        double theta = suggest_theta(M, dec);
        UltraTreeOptions topt;
        topt.masses = &pl.samples;
        UltraTree tree = build_ultratree(dec, {q1}, std::max(theta, 0.1), topt);
        REQUIRE(tree.levels.size() == 2);
        CHECK(tree.levels[0].classes.size() == 2);
        CHECK(tree.levels[1].classes.size() == 4);
        double offset = std::abs(2 * q1 - 2 * std::sqrt(q1 * (q1 + qs) / 2));
        CHECK(std::abs(tree.orthogonality_residual_max - offset) < 0.03);
        CHECK(tree.mass_escape_max >= 0);
        CHECK(tree.mass_escape_max < 0.05);
        // class centers carry the right radius
        for (std::size_t L = 0; L < tree.levels.size(); ++L)
            for (auto& c : tree.levels[L].class_centers)
                CHECK(std::abs(c.radius_sq - tree.levels_q[L]) < 1e-8);
    }

    // single center: chain of singletons
    SampleSet solo;
    Vec p0 = uniform_sphere_point(n, 1.0, 2);
    for (int i = 0; i < 4; ++i) {
        solo.points.emplace_back(p0);
        solo.meta.chain_ids.push_back(0);
    }
    StateDecomposition dsolo = cluster_states(solo, 0.8, 0.2);
    UltraTree tsolo = build_ultratree(dsolo, {0.2, 0.5}, 0.05);
    for (auto& lvl : tsolo.levels) CHECK(lvl.classes.size() == 1);

    // two orthogonal centers split at any positive level
    Vec e1 = Vec::Zero(n), e2 = Vec::Zero(n);
    e1(0) = std::sqrt(n * 0.6);
    e2(1) = std::sqrt(n * 0.6);
    StateDecomposition two;
    two.q_star = 0.6;
    two.clusters = {{0}, {1}};
    two.weights = {0.5, 0.5};
    two.centers.emplace_back(Configuration(e1));
    two.centers.emplace_back(Configuration(e2));
    UltraTree ttwo = build_ultratree(two, {0.3}, 0.05);
    CHECK(ttwo.levels[0].classes.size() == 2);
}

TEST_CASE("overlap support report") {
    const int n = 128;
    // planted support at {0, 0.6}
    std::vector<OverlapMatrix> gibbs;
    for (int d = 0; d < 12; ++d) {
        Planted pl = planted_exact(n, 2, 1, 1e-9, 0.6, 10);
        gibbs.push_back(overlap_matrix(pl.samples));
    }
    std::vector<std::pair<std::vector<Configuration>, std::vector<Configuration>>> ground;
    for (int d = 0; d < 12; ++d) {
        Vec c = uniform_sphere_point(n, 1.0, derive_seed(80, d));
        std::vector<Configuration> A{Configuration(c)}, B{Configuration(c)};
        ground.emplace_back(A, B);
    }
    SupportOptions opts;
    opts.eps = 0.05;
    opts.mass_delta = 0.05;  // threshold e^{-N delta} ~ 1.7e-3 at N = 128
    SupportReport rep = overlap_support(gibbs, ground, n, opts);
    CHECK(!rep.low_power);
    bool found0 = false, found6 = false, inclusion_at_1 = false;
    for (auto& row : rep.rows) {
        if (std::abs(row.q - 0.6) < 0.03 && row.gibbs_freq > 0.9) found6 = true;
        if (std::abs(row.q) < 0.03 && row.gibbs_freq > 0.9) found0 = true;
        if (std::abs(row.q - 1.0) < 0.03 && row.inclusion_checked) inclusion_at_1 = true;
    }
    CHECK(found0);
    CHECK(found6);
    CHECK(inclusion_at_1);

    // identical sets on both sides: inclusion passes wherever checked
    std::vector<OverlapMatrix> same_side;
    for (int d = 0; d < 12; ++d) {
        std::vector<Vec> pts;
        Vec c = uniform_sphere_point(n, 1.0, derive_seed(80, d));
        pts.push_back(c);
        pts.push_back(c);
        same_side.push_back(overlap_matrix(from_points(std::move(pts))));
    }
    SupportReport rep2 = overlap_support(same_side, ground, n, opts);
    for (auto& row : rep2.rows)
        if (row.inclusion_checked) CHECK(row.inclusion_pass);

    SupportReport weak = overlap_support({gibbs[0]}, {}, n, opts);
    CHECK(weak.low_power);
}

TEST_CASE("overlap support: inclusion restricted to the stated support points") {
    // replica-symmetric-style situation: concentrated overlap mass at zero
    // on the measure side, opposite near-ground pairs (overlaps +-1) on the
    // ground side.  The inclusion check runs only where the support list
    // says it applies, so the +-1 rows are reported but not judged.
    const int n = 64;
    std::vector<OverlapMatrix> gibbs;
    for (int d = 0; d < 12; ++d) {
        SampleSet set;
        for (int i = 0; i < 16; ++i) {
            set.points.emplace_back(uniform_sphere_point(n, 1.0, derive_seed(500 + d, i)));
            set.meta.chain_ids.push_back(0);
        }
        gibbs.push_back(overlap_matrix(set));
    }
    std::vector<std::pair<std::vector<Configuration>, std::vector<Configuration>>> ground;
    for (int d = 0; d < 12; ++d) {
        Vec v = uniform_sphere_point(n, 1.0, derive_seed(600, d));
        std::vector<Configuration> A{Configuration(v), Configuration(Vec(-v))};
        ground.emplace_back(A, A);
    }
    SupportOptions opts;
    opts.eps = 0.06;
    opts.mass_delta = 0.05;
    opts.parisi_support = {0.0};
    SupportReport rep = overlap_support(gibbs, ground, n, opts);
    bool minus_one_reported = false;
    for (auto& row : rep.rows) {
        if (std::abs(row.q + 1.0) < 0.03) {
            minus_one_reported = row.ground_freq > 0.99;
            CHECK(!row.inclusion_checked);  // outside the support list
        }
        if (std::abs(row.q) < 0.03 && row.inclusion_checked) CHECK(row.inclusion_pass);
    }
    CHECK(minus_one_reported);
}
