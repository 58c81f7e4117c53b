#include "spinglass/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "spinglass/rng.hpp"
#include "spinglass/sampler.hpp"

namespace spinglass {

namespace {

// Gauss-Kronrod 15/7 nodes and weights on [-1,1].
const double kGK15Nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
const double kGK15Weights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
const double kG7Weights[7] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                              0.417959183673469, 0.381830050505119, 0.279705391489277,
                              0.129484966168870};

double log_density(double t, double c) {
    // c * log(1-t^2), split to stay accurate near the endpoints
    if (t <= -1.0 || t >= 1.0) return c > 0 ? -1e300 : 0.0;
    return c * (std::log1p(-t) + std::log1p(t));
}

struct LogPanel {
    double log_integral;
    double rel_err;
};

LogPanel gk15_log(double a, double b, double c) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double g[15];
    double gmax = -1e300;
    for (int i = 0; i < 15; ++i) {
        g[i] = log_density(mid + half * kGK15Nodes[i], c);
        gmax = std::max(gmax, g[i]);
    }
    double s15 = 0, s7 = 0;
    for (int i = 0; i < 15; ++i) {
        double e = std::exp(g[i] - gmax);
        s15 += kGK15Weights[i] * e;
        if (i % 2 == 1) s7 += kG7Weights[i / 2] * e;
    }
    LogPanel p;
    p.log_integral = gmax + std::log(s15 * half);
    p.rel_err = std::abs(s15 - s7) / (s15 > 0 ? s15 : 1);
    return p;
}

double logsumexp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b < -1e290) return a;
    return a + std::log1p(std::exp(b - a));
}

void adaptive_log_quad(double a, double b, double c, double tol, int depth, double& acc,
                       bool& acc_set) {
    LogPanel p = gk15_log(a, b, c);
    if (p.rel_err < tol || depth > 48) {
        acc = acc_set ? logsumexp(acc, p.log_integral) : p.log_integral;
        acc_set = true;
        return;
    }
    double mid = 0.5 * (a + b);
    adaptive_log_quad(a, mid, c, tol, depth + 1, acc, acc_set);
    adaptive_log_quad(mid, b, c, tol, depth + 1, acc, acc_set);
}

}  // namespace

double overlap(const Configuration& a, const Configuration& b) {
    double na = a.coords.norm(), nb = b.coords.norm();
    if (na == 0 || nb == 0) throw std::invalid_argument("overlap: zero vector");
    return std::clamp(a.coords.dot(b.coords) / (na * nb), -1.0, 1.0);
}

bool in_band(const Configuration& s, const BandSpec& b) {
    if (std::abs(s.radius_sq - 1.0) > 1e-8)
        throw std::invalid_argument("in_band: point not on the outer sphere");
    double n = double(s.dim());
    double t = s.coords.dot(b.center.coords) / (std::sqrt(n) * b.center.coords.norm());
    return std::abs(t - b.center.coords.norm() / std::sqrt(n)) <= b.delta;
}

double segment_log_mass(double lo, double hi, int n) {
    if (n < 3) throw std::invalid_argument("segment_log_mass: need N >= 3");
    double a = std::max(lo, -1.0), b = std::min(hi, 1.0);
    if (!(a < b)) throw std::invalid_argument("segment_log_mass: empty interval");
    if (lo <= -1.0 && hi >= 1.0) return 0.0;
    const double c = 0.5 * double(n - 3);
    double acc = 0;
    bool acc_set = false;
    // Split at the density peak (t = 0) when it is interior.
    if (a < 0 && b > 0) {
        adaptive_log_quad(a, 0.0, c, 1e-11, 0, acc, acc_set);
        adaptive_log_quad(0.0, b, c, 1e-11, 0, acc, acc_set);
    } else {
        adaptive_log_quad(a, b, c, 1e-11, 0, acc, acc_set);
    }
    // Normalizer: int_{-1}^{1} (1-t^2)^c dt = B(1/2, c+1) = sqrt(pi) G(c+1)/G(c+3/2)
    double log_norm = 0.5 * std::log(M_PI) + std::lgamma(c + 1.0) - std::lgamma(c + 1.5);
    return acc - log_norm;
}

double band_log_volume(double q, double delta, int n) {
    if (!(q > 0 && q < 1)) throw std::invalid_argument("band_log_volume: q must be in (0,1)");
    if (!(delta > 0 && delta <= 1))
        throw std::invalid_argument("band_log_volume: delta must be in (0,1]");
    double r = std::sqrt(q);
    if (r - delta <= -1.0 && r + delta >= 1.0) return 0.0;
    return segment_log_mass(r - delta, r + delta, n) / double(n);
}

Vec uniform_sphere_point(int n, double radius_sq, std::uint64_t seed) {
    NormalStream g(seed);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = g.next();
    v *= std::sqrt(double(n) * radius_sq) / v.norm();
    return v;
}

SampleSet sample_uniform_band(const BandSpec& b, std::uint64_t seed, int count) {
    const int n = int(b.center.dim());
    const double c = 0.5 * double(n - 3);
    const double r = std::sqrt(b.q());
    const double lo = std::max(r - b.delta, -1.0), hi = std::min(r + b.delta, 1.0);
    if (!(lo < hi)) throw std::invalid_argument("sample_uniform_band: degenerate interval");

    // Inverse-CDF table for the truncated projection marginal.
    const int G = 4096;
    std::vector<double> logm(G), cum(G + 1, 0.0);
    const double h = (hi - lo) / G;
    double gmax = -1e300;
    for (int i = 0; i < G; ++i) {
        double t0 = lo + i * h, t1 = t0 + h, tm = t0 + 0.5 * h;
        double g0 = log_density(t0, c), g1 = log_density(t1, c), gm = log_density(tm, c);
        double off = std::max({g0, g1, gm});
        logm[i] = off + std::log((std::exp(g0 - off) + 4 * std::exp(gm - off) +
                                  std::exp(g1 - off)) * h / 6.0);
        gmax = std::max(gmax, logm[i]);
    }
    for (int i = 0; i < G; ++i) cum[i + 1] = cum[i] + std::exp(logm[i] - gmax);
    const double total = cum[G];

    Vec nhat = b.center.coords / b.center.coords.norm();
    NormalStream gauss(derive_seed(seed, 0x6a11ced5u));
    Xoshiro256pp uni(derive_seed(seed, 0x704c41cfu));

    SampleSet out;
    out.points.reserve(count);
    for (int k = 0; k < count; ++k) {
        double u = uni.uniform() * total;
        int i = int(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin()) - 1;
        i = std::clamp(i, 0, G - 1);
        // Exponential-linear interpolation of the density inside the panel.
        double t0 = lo + i * h;
        double frac = std::clamp((u - cum[i]) / (cum[i + 1] - cum[i]), 0.0, 1.0 - 1e-12);
        double dg = std::clamp(log_density(t0 + h, c) - log_density(t0, c), -700.0, 700.0);
        double t;
        if (std::abs(dg) < 1e-9)
            t = t0 + frac * h;
        else
            t = t0 + h * std::log1p(frac * std::expm1(dg)) / dg;
        t = std::clamp(t, t0, t0 + h);
        // Orthogonal direction, uniform.
        Vec xi(n);
        for (int j = 0; j < n; ++j) xi(j) = gauss.next();
        xi -= xi.dot(nhat) * nhat;
        xi /= xi.norm();
        Vec s = std::sqrt(double(n)) * (t * nhat + std::sqrt(std::max(0.0, 1 - t * t)) * xi);
        s *= std::sqrt(double(n)) / s.norm();
        out.points.emplace_back(s);
        out.meta.chain_ids.push_back(k);
    }
    out.meta.beta = 0;
    out.meta.radius_sq = 1;
    out.meta.band = b;
    out.meta.seed = seed;
    return out;
}

}  // namespace spinglass
