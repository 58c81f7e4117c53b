#include "spinglass/parisi.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <json.hpp>

#include "spinglass/rng.hpp"

namespace spinglass {

namespace {

// -log(1-u)/u, stable for small u.
double neglog1m_over(double u) {
    if (std::abs(u) < 1e-9) return 1.0 + 0.5 * u;
    return -std::log1p(-u) / u;
}

}  // namespace

ParisiMeasure::ParisiMeasure(std::vector<double> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    if (atoms_.empty() || atoms_.size() != weights_.size())
        throw std::invalid_argument("measure: atoms/weights size mismatch");
    double sum = 0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!(atoms_[i] >= 0 && atoms_[i] < 1))
            throw std::invalid_argument("measure: atoms must lie in [0,1)");
        if (i > 0 && !(atoms_[i] > atoms_[i - 1]))
            throw std::invalid_argument("measure: atoms must be strictly increasing");
        if (!(weights_[i] > 0)) throw std::invalid_argument("measure: weights must be positive");
        sum += weights_[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("measure: weights must sum to 1");
}

double ParisiMeasure::x(double q) const {
    double s = 0;
    for (std::size_t i = 0; i < atoms_.size() && atoms_[i] <= q; ++i) s += weights_[i];
    return s;
}

double ParisiMeasure::xhat(double q) const {
    if (q >= atoms_.back()) return 1.0 - q;
    // accumulate segments backwards from the top atom
    double xh = 1.0 - atoms_.back();
    double cum = 1.0;
    for (int j = int(atoms_.size()) - 1; j >= 1; --j) {
        cum -= weights_[j];  // x on [atoms_{j-1}, atoms_j)
        double lo = atoms_[j - 1], hi = atoms_[j];
        if (q >= lo) return xh + cum * (hi - q);
        xh += cum * (hi - lo);
    }
    return xh;  // q < smallest atom: x = 0 below it
}

ParisiMeasure ParisiMeasure::canonical() const {
    std::vector<double> a, w;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!a.empty() && atoms_[i] - a.back() < 1e-8) {
            // merge into the previous atom at the weighted midpoint
            double tw = w.back() + weights_[i];
            a.back() = (a.back() * w.back() + atoms_[i] * weights_[i]) / tw;
            w.back() = tw;
        } else {
            a.push_back(atoms_[i]);
            w.push_back(weights_[i]);
        }
    }
    std::vector<double> a2, w2;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (w[i] >= 1e-10) {
            a2.push_back(a[i]);
            w2.push_back(w[i]);
        }
    if (a2.empty()) {
        a2 = {a[0]};
        w2 = {1.0};
    }
    double sum = 0;
    for (double v : w2) sum += v;
    for (double& v : w2) v /= sum;
    return ParisiMeasure(a2, w2);
}

std::string ParisiMeasure::to_json() const {
    nlohmann::ordered_json j;
    j["atoms"] = atoms_;
    j["weights"] = weights_;
    return j.dump();
}

ParisiMeasure ParisiMeasure::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    return ParisiMeasure(j.at("atoms").get<std::vector<double>>(),
                         j.at("weights").get<std::vector<double>>());
}

double cs_functional(const ParisiMeasure& x, const Mixture& m, double beta) {
    if (!(beta > 0)) throw std::invalid_argument("cs_functional: beta must be > 0");
    const auto& a = x.atoms();
    const auto& w = x.weights();
    const int k = int(a.size());
    if (a.back() >= 1.0) throw std::invalid_argument("cs_functional: q_max = 1 is singular");

    // Segment boundaries 0 = s_0 <= s_1 < ... < s_k = q_max, s_{k+1} = 1;
    // x = X_j on [s_j, s_{j+1}).
    std::vector<double> s(std::size_t(k) + 2), X(std::size_t(k) + 1);
    s[0] = 0;
    for (int i = 0; i < k; ++i) s[i + 1] = a[i];
    s[std::size_t(k) + 1] = 1.0;
    // X_j = x on [s_j, s_{j+1}) = total weight of atoms <= s_j.
    for (int j = 0; j <= k; ++j) {
        double cum = 0;
        for (int i = 0; i < k; ++i)
            if (a[i] <= s[j] + 1e-18) cum += w[i];
        X[j] = cum;
    }

    // A = beta^2 int nu' x
    double A = 0;
    for (int j = 0; j <= k; ++j) A += X[j] * (m.eval(s[j + 1], 0) - m.eval(s[j], 0));
    A *= beta * beta;

    // xhat at segment boundaries, backwards from q_max
    std::vector<double> xh(std::size_t(k) + 1);
    xh[k] = 1.0 - s[k];
    for (int j = k - 1; j >= 0; --j) xh[j] = xh[j + 1] + X[j] * (s[j + 1] - s[j]);

    // B = int_0^qmax dq / xhat
    double B = 0;
    for (int j = 0; j < k; ++j) {
        double len = s[j + 1] - s[j];
        if (len <= 0) continue;
        double u = X[j] * len / xh[j];
        B += len / xh[j] * neglog1m_over(u);
    }
    double C = std::log1p(-s[k]);
    return 0.5 * (A + B + C);
}

namespace {

// ---- closed-form pieces for the stationarity functions ----

struct Segments {
    std::vector<double> s;   // boundaries s_0=0 .. s_k=q_max, s_{k+1}=1
    std::vector<double> X;   // x value on [s_j, s_{j+1})
    std::vector<double> xh;  // xhat at boundaries (for j <= k)
};

Segments make_segments(const ParisiMeasure& x) {
    const auto& a = x.atoms();
    const auto& w = x.weights();
    const int k = int(a.size());
    Segments g;
    g.s.resize(std::size_t(k) + 2);
    g.X.resize(std::size_t(k) + 1);
    g.s[0] = 0;
    for (int i = 0; i < k; ++i) g.s[i + 1] = a[i];
    g.s[std::size_t(k) + 1] = 1.0;
    for (int j = 0; j <= k; ++j) {
        double cum = 0;
        for (int i = 0; i < k; ++i)
            if (a[i] <= g.s[j] + 1e-18) cum += w[i];
        g.X[j] = cum;
    }
    g.xh.resize(std::size_t(k) + 1);
    g.xh[k] = 1.0 - g.s[k];
    for (int j = k - 1; j >= 0; --j) g.xh[j] = g.xh[j + 1] + g.X[j] * (g.s[j + 1] - g.s[j]);
    return g;
}

// G(q) = int_0^q ds / xhat^2(s) and I(q) = int_0^q G, evaluated by
// accumulating exact per-segment increments.
struct GTables {
    std::vector<double> sG;  // G at boundaries
    std::vector<double> sI;  // I at boundaries
};

// On a segment with xhat(q) = xh0 - X (q - s0):
//  dG(t)  = t / (xh0 (xh0 - X t))                           [exact all X]
//  dI(t)  = int_0^t G(s0+v) dv - G(s0) t  (the local part)
double seg_dG(double xh0, double X, double t) {
    double xh1 = xh0 - X * t;
    return t / (xh0 * xh1);
}
double seg_dI_local(double xh0, double X, double t) {
    // int_0^t (1/X)(1/xhat - 1/xh0) dv with xhat = xh0 - X v
    double u = X * t / xh0;
    if (std::abs(u) < 1e-6) {
        double t2 = t * t / (xh0 * xh0);
        return t2 * (0.5 + u / 3.0 + u * u / 4.0);
    }
    return (1.0 / X) * ((1.0 / X) * (-std::log1p(-u)) - t / xh0);
}

GTables make_gtables(const Segments& g) {
    const int k = int(g.X.size()) - 1;
    GTables t;
    t.sG.assign(std::size_t(k) + 1, 0.0);
    t.sI.assign(std::size_t(k) + 1, 0.0);
    for (int j = 1; j <= k; ++j) {
        double len = g.s[j] - g.s[j - 1];
        t.sG[j] = t.sG[j - 1] + seg_dG(g.xh[j - 1], g.X[j - 1], len);
        t.sI[j] = t.sI[j - 1] + t.sG[j - 1] * len + seg_dI_local(g.xh[j - 1], g.X[j - 1], len);
    }
    return t;
}

// locate the segment index j with s_j <= q < s_{j+1} (j in 0..k)
int segment_of(const Segments& g, double q) {
    int k = int(g.X.size()) - 1;
    int j = k;
    for (int i = 0; i < k; ++i)
        if (q < g.s[i + 1]) {
            j = i;
            break;
        }
    return j;
}

double eval_G(const Segments& g, const GTables& t, double q) {
    int k = int(g.X.size()) - 1;
    int j = segment_of(g, q);
    if (j >= k) {
        // beyond the top atom: xhat = 1 - q
        double dq = q - g.s[k];
        return t.sG[k] + seg_dG(g.xh[k], 1.0, dq);
    }
    return t.sG[j] + seg_dG(g.xh[j], g.X[j], q - g.s[j]);
}

double eval_I(const Segments& g, const GTables& t, double q) {
    int k = int(g.X.size()) - 1;
    int j = segment_of(g, q);
    if (j >= k) {
        double dq = q - g.s[k];
        return t.sI[k] + t.sG[k] * dq + seg_dI_local(g.xh[k], 1.0, dq);
    }
    double dq = q - g.s[j];
    return t.sI[j] + t.sG[j] * dq + seg_dI_local(g.xh[j], g.X[j], dq);
}

// d(s) = beta^2 int_s^1 nu''(q) x(q) dq, piecewise exact.
double eval_d(const Segments& g, const Mixture& m, double beta, double s) {
    int k = int(g.X.size()) - 1;
    double acc = 0;
    for (int j = 0; j <= k; ++j) {
        double lo = std::max(s, g.s[j]);
        double hi = g.s[j + 1];
        if (lo < hi) acc += g.X[j] * (m.eval(hi, 1) - m.eval(lo, 1));
    }
    return beta * beta * acc;
}

// Gamma(q; b) = int_0^q beta^2 nu''(s) / (b - d(s))^2 ds - q  by composite
// Gauss-Legendre on each measure segment (the integrand is smooth there).
const double kGL8Nodes[8] = {-0.960289856497536, -0.796666477413627, -0.525532409916329,
                             -0.183434642495650, 0.183434642495650,  0.525532409916329,
                             0.796666477413627,  0.960289856497536};
const double kGL8Weights[8] = {0.101228536290376, 0.222381034453374, 0.313706645877887,
                               0.362683783378362, 0.362683783378362, 0.313706645877887,
                               0.222381034453374, 0.101228536290376};

double eval_gamma(const Segments& g, const Mixture& m, double beta, double b, double q) {
    double acc = 0;
    int k = int(g.X.size()) - 1;
    std::vector<double> cuts;
    cuts.push_back(0.0);
    for (int j = 1; j <= k + 1; ++j)
        if (g.s[j] < q) cuts.push_back(g.s[j]);
    cuts.push_back(q);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double lo = cuts[c], hi = cuts[c + 1];
        if (hi <= lo) continue;
        int panels = std::max(1, int(std::ceil((hi - lo) / 0.05)));
        double h = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            double a0 = lo + p * h, mid = a0 + 0.5 * h, half = 0.5 * h;
            for (int i = 0; i < 8; ++i) {
                double t = mid + half * kGL8Nodes[i];
                double den = b - eval_d(g, m, beta, t);
                acc += half * kGL8Weights[i] * beta * beta * m.eval(t, 2) / (den * den);
            }
        }
    }
    return acc - q;
}

}  // namespace

std::pair<double, double> stationarity_f(const ParisiMeasure& xm, const Mixture& m, double beta,
                                         double q) {
    ParisiMeasure x = xm.canonical();
    Segments g = make_segments(x);
    GTables t = make_gtables(g);
    const double b2 = beta * beta;
    return {b2 * m.eval(q, 0) - eval_I(g, t, q), b2 * m.eval(q, 1) - eval_G(g, t, q)};
}

StationarityReport validate(const ParisiMeasure& xm, const Mixture& m, double beta, double tol) {
    ParisiMeasure x = xm.canonical();
    Segments g = make_segments(x);
    GTables t = make_gtables(g);
    const double b2 = beta * beta;

    auto f_of = [&](double q) { return b2 * m.eval(q, 0) - eval_I(g, t, q); };
    auto fp_of = [&](double q) { return b2 * m.eval(q, 1) - eval_G(g, t, q); };

    StationarityReport rep;
    rep.tol = tol;

    // dense grid plus the atoms
    std::vector<double> grid;
    const int G = 2000;
    for (int i = 0; i <= G; ++i) grid.push_back(0.999999 * double(i) / G);
    for (double a : x.atoms()) grid.push_back(a);
    std::sort(grid.begin(), grid.end());
    rep.sup_f_grid = -1e300;
    for (double q : grid) {
        double v = f_of(q);
        if (v > rep.sup_f_grid) {
            rep.sup_f_grid = v;
            rep.argsup_f = q;
        }
    }

    // Boundary parameter of the ground-state first-order system: root of
    // Gamma(q_top) = 0 in b when the support has a positive top atom,
    // continuity closed form otherwise.
    double q_top = x.q_max();
    double d0 = eval_d(g, m, beta, 0.0);
    double b_closed = b2 * (m.eval(1.0, 1) - m.eval(q_top, 1)) + 1.0 / (1.0 - q_top);
    double b = b_closed;
    rep.b_root_bracketed = true;
    if (q_top > 1e-12) {
        double lo = std::max(1.0, d0) + 1e-9;
        double hi = std::max(lo * 2, b_closed * 4) + 10.0;
        auto gam = [&](double bb) { return eval_gamma(g, m, beta, bb, q_top); };
        double glo = gam(lo), ghi = gam(hi);
        int grow = 0;
        while (ghi > 0 && grow++ < 60) {
            hi *= 2;
            ghi = gam(hi);
        }
        if (glo < 0 || ghi > 0) {
            rep.b_root_bracketed = false;  // fall back to the closed form
        } else {
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                if (gam(mid) > 0)
                    lo = mid;
                else
                    hi = mid;
            }
            b = 0.5 * (lo + hi);
        }
    }
    rep.b = b;

    bool max_ok = true, stat_ok = true, gamma_ok = true;
    for (int i = 0; i < x.k(); ++i) {
        AtomCheck c;
        c.q = x.atoms()[i];
        c.w = x.weights()[i];
        c.f = f_of(c.q);
        c.fprime = fp_of(c.q);
        c.gamma = eval_gamma(g, m, beta, b, c.q);
        rep.atom_checks.push_back(c);
        if (c.f < rep.sup_f_grid - tol) max_ok = false;
        if (c.q > 1e-12 && c.q < 1.0 - 1e-12 && std::abs(c.fprime) > tol) stat_ok = false;
        if (std::abs(c.gamma) > tol) gamma_ok = false;
    }
    rep.max_condition_ok = max_ok;
    rep.stationary_condition_ok = stat_ok;
    rep.gamma_condition_ok = gamma_ok;

    // Global optimality margin of GammaBar(r) = int_r^1 Gamma b^2 nu'' dq:
    // compute on a modest grid by cumulative Simpson from 1 downward.
    {
        const int GB = 400;
        std::vector<double> qs(GB + 1), gam(GB + 1);
        for (int i = 0; i <= GB; ++i) {
            qs[i] = double(i) / GB;
            double qq = std::min(qs[i], 0.999999);
            gam[i] = eval_gamma(g, m, beta, b, qq) * b2 * m.eval(qq, 2);
        }
        std::vector<double> gbar(GB + 1, 0.0);
        for (int i = GB - 1; i >= 0; --i)
            gbar[i] = gbar[i + 1] + 0.5 * (gam[i] + gam[i + 1]) * (qs[i + 1] - qs[i]);
        double mu_int = 0;
        for (int i = 0; i < x.k(); ++i) {
            double q = x.atoms()[i];
            int j = std::min(GB - 1, int(q * GB));
            double fr = q * GB - j;
            mu_int += x.weights()[i] * ((1 - fr) * gbar[j] + fr * gbar[j + 1]);
        }
        double mn = 1e300;
        for (double v : gbar) mn = std::min(mn, v);
        rep.gamma_bar_margin = mn - mu_int;
    }
    return rep;
}

std::string StationarityReport::to_json() const {
    nlohmann::ordered_json j;
    j["atoms"] = nlohmann::json::array();
    for (auto& c : atom_checks) {
        nlohmann::ordered_json a;
        a["q"] = c.q;
        a["w"] = c.w;
        a["f"] = c.f;
        a["f_prime"] = c.fprime;
        a["gamma"] = c.gamma;
        j["atoms"].push_back(a);
    }
    j["sup_f_grid"] = sup_f_grid;
    j["argsup_f"] = argsup_f;
    j["b"] = b;
    j["b_root_bracketed"] = b_root_bracketed;
    j["gamma_bar_margin"] = gamma_bar_margin;
    j["max_condition_ok"] = max_condition_ok;
    j["stationary_condition_ok"] = stationary_condition_ok;
    j["gamma_condition_ok"] = gamma_condition_ok;
    j["tol"] = tol;
    return j.dump(2);
}

// ---------------- solver ----------------

namespace {

// theta layout: first k raws -> k-1 ordered free atoms via cumulative
// softmax; last k raws -> k weights via softmax (weight 0 belongs to the
// pinned atom at q = 0).
ParisiMeasure decode(const std::vector<double>& theta, int k) {
    std::vector<double> atoms{0.0};
    if (k > 1) {
        double mx = -1e300;
        for (int i = 0; i < k; ++i) mx = std::max(mx, theta[i]);
        double Z = 0;
        std::vector<double> e(k);
        for (int i = 0; i < k; ++i) {
            e[i] = std::exp(theta[i] - mx);
            Z += e[i];
        }
        double cum = 0;
        for (int i = 0; i < k - 1; ++i) {
            cum += e[i];
            // the terminal gap can underflow; keep atoms strictly below 1
            atoms.push_back(std::min(cum / Z, 1.0 - 1e-10));
        }
    }
    double mx = -1e300;
    for (int i = 0; i < k; ++i) mx = std::max(mx, theta[k + i]);
    double Z = 0;
    std::vector<double> w(k);
    for (int i = 0; i < k; ++i) {
        w[i] = std::exp(theta[k + i] - mx);
        Z += w[i];
    }
    for (double& v : w) v /= Z;
    // guard degenerate duplicates from softmax underflow
    std::vector<double> a2, w2;
    for (int i = 0; i < k; ++i) {
        if (!a2.empty() && atoms[i] - a2.back() < 1e-14)
            w2.back() += w[i];
        else {
            a2.push_back(atoms[i]);
            w2.push_back(std::max(w[i], 1e-300));
        }
    }
    double sum = 0;
    for (double v : w2) sum += v;
    for (double& v : w2) v /= sum;
    return ParisiMeasure(a2, w2);
}

double objective(const std::vector<double>& theta, int k, const Mixture& m, double beta) {
    return cs_functional(decode(theta, k), m, beta);
}

// Small dense BFGS with backtracking line search and central-difference
// gradients; the objective is cheap and smooth in the raw coordinates.
struct BfgsOut {
    std::vector<double> theta;
    double value;
    bool converged;
};

BfgsOut bfgs(std::vector<double> theta, int k, const Mixture& m, double beta, int max_iters) {
    const int n = int(theta.size());
    auto fval = [&](const std::vector<double>& th) { return objective(th, k, m, beta); };
    auto grad = [&](const std::vector<double>& th, std::vector<double>& g) {
        std::vector<double> tp = th;
        for (int i = 0; i < n; ++i) {
            double h = 1e-6 * (1.0 + std::abs(th[i]));
            tp[i] = th[i] + h;
            double fp = fval(tp);
            tp[i] = th[i] - h;
            double fm = fval(tp);
            tp[i] = th[i];
            g[i] = (fp - fm) / (2 * h);
        }
    };
    std::vector<double> g(n), gn(n), p(n), s(n), y(n);
    std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) H[i][i] = 1.0;
    double f = fval(theta);
    grad(theta, g);
    bool converged = false;
    for (int it = 0; it < max_iters; ++it) {
        double gmax = 0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (gmax < 1e-10) {
            converged = true;
            break;
        }
        for (int i = 0; i < n; ++i) {
            p[i] = 0;
            for (int j = 0; j < n; ++j) p[i] -= H[i][j] * g[j];
        }
        double gp = 0;
        for (int i = 0; i < n; ++i) gp += g[i] * p[i];
        if (gp >= 0) {  // reset to steepest descent
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) H[i][j] = i == j ? 1.0 : 0.0;
                p[i] = -g[i];
            }
            gp = 0;
            for (int i = 0; i < n; ++i) gp += g[i] * p[i];
        }
        double t = 1.0, fn = f;
        std::vector<double> tn(n);
        bool moved = false;
        for (int bt = 0; bt < 50; ++bt) {
            for (int i = 0; i < n; ++i) tn[i] = theta[i] + t * p[i];
            fn = fval(tn);
            if (fn <= f + 1e-4 * t * gp) {
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved || !(f - fn > 1e-16 * (std::abs(f) + 1))) {
            converged = true;  // no measurable progress: treat as stationary
            break;
        }
        grad(tn, gn);
        double sy = 0;
        for (int i = 0; i < n; ++i) {
            s[i] = tn[i] - theta[i];
            y[i] = gn[i] - g[i];
            sy += s[i] * y[i];
        }
        if (sy > 1e-14) {
            // BFGS inverse update
            std::vector<double> Hy(n, 0.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) Hy[i] += H[i][j] * y[j];
            double yHy = 0;
            for (int i = 0; i < n; ++i) yHy += y[i] * Hy[i];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    H[i][j] += ((sy + yHy) * s[i] * s[j]) / (sy * sy) -
                               (Hy[i] * s[j] + s[i] * Hy[j]) / sy;
        }
        theta = tn;
        f = fn;
        g = gn;
    }
    return {theta, f, converged};
}

std::vector<double> encode_start(const ParisiMeasure& meas, int k, Xoshiro256pp& rng) {
    // Approximate inverse of decode for a warm start: place the k-1 free
    // atoms at the warm measure's positive atoms, padding with fresh draws.
    std::vector<double> theta(std::size_t(2) * k, 0.0);
    std::vector<double> pos_atoms, pos_w;
    double zero_w = 1e-6;
    for (int i = 0; i < meas.k(); ++i) {
        if (meas.atoms()[i] < 1e-12)
            zero_w = meas.weights()[i];
        else {
            pos_atoms.push_back(meas.atoms()[i]);
            pos_w.push_back(meas.weights()[i]);
        }
    }
    std::vector<double> targets = pos_atoms, tw = pos_w;
    while (int(targets.size()) < k - 1) {
        targets.push_back(0.05 + 0.9 * rng.uniform());
        tw.push_back(1e-4);
    }
    targets.resize(std::size_t(k) - 1);
    tw.resize(std::size_t(k) - 1);
    // keep pairing after sorting
    std::vector<std::size_t> order(targets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t l, std::size_t r) { return targets[l] < targets[r]; });
    double prev = 0;
    for (int i = 0; i < k - 1; ++i) {
        double q = std::min(0.999, std::max(1e-5, targets[order[i]]));
        theta[i] = std::log(std::max(1e-7, q - prev));
        prev = std::max(prev, q);
    }
    theta[k - 1] = std::log(std::max(1e-7, 1.0 - prev));
    theta[k] = std::log(std::max(zero_w, 1e-9));
    for (int i = 0; i < k - 1; ++i)
        theta[std::size_t(k) + 1 + i] = std::log(std::max(tw[order[i]], 1e-9));
    return theta;
}

}  // namespace

SolveResult solve(const Mixture& m, double beta, int k, const SolveOptions& opts) {
    if (k < 1) throw std::invalid_argument("solve: k must be >= 1");
    if (!(beta > 0)) throw std::invalid_argument("solve: beta must be > 0");

    SolveResult best;
    best.measure = ParisiMeasure::replica_symmetric();
    best.value = cs_functional(best.measure, m, beta);  // exact RS candidate
    best.converged = true;

    Xoshiro256pp rng(derive_seed(opts.seed, 0x9917u));
    ParisiMeasure prev = best.measure;
    for (int kk = 2; kk <= k; ++kk) {
        std::vector<std::vector<double>> starts;
        starts.push_back(encode_start(prev, kk, rng));  // cascade warm start
        if (opts.warm_start) starts.push_back(encode_start(*opts.warm_start, kk, rng));
        for (int s = 0; s < opts.multistarts; ++s) {
            std::vector<double> th(std::size_t(2) * kk);
            for (auto& v : th) v = 2.0 * rng.uniform() - 1.0;
            starts.push_back(th);
        }
        double best_k = 1e300;
        ParisiMeasure best_meas = prev;
        bool conv = false;
        for (auto& th : starts) {
            BfgsOut out = bfgs(th, kk, m, beta, opts.max_iters);
            if (out.value < best_k) {
                best_k = out.value;
                best_meas = decode(out.theta, kk);
                conv = out.converged;
            }
        }
        ParisiMeasure canon = best_meas.canonical();
        double canon_val = cs_functional(canon, m, beta);
        if (canon_val < best.value) {
            best.value = canon_val;
            best.measure = canon;
            best.converged = conv;
        }
        prev = best.measure;
    }
    return best;
}

RsConditionResult rs_condition(const Mixture& m, double beta, double q_p) {
    if (!(q_p >= 0 && q_p < 1)) throw std::invalid_argument("rs_condition: q_P must be in [0,1)");
    Mixture nu2 = q_p == 0.0 ? drop_one_spin(m) : drop_one_spin(restrict_mixture(m, q_p));
    const double b2 = beta * beta;
    RsConditionResult r;
    r.margin = -1e300;
    // dense scan with log-spaced refinement near both endpoints
    auto probe = [&](double t) {
        double v = b2 * nu2.eval(t, 0) + std::log1p(-t) + t;
        if (v > r.margin) {
            r.margin = v;
            r.worst_t = t;
        }
    };
    for (int i = 1; i < 2000; ++i) probe(double(i) / 2000.0);
    for (int i = 1; i <= 200; ++i) {
        probe(std::pow(10.0, -8.0 + 8.0 * double(i) / 200.0));          // t -> 0
        probe(1.0 - std::pow(10.0, -12.0 + 9.0 * double(i) / 200.0));   // t -> 1
    }
    // endpoint asymptotics at t -> 0: leading quadratic coefficient
    double a2 = nu2.coeff(2);
    double quad = b2 * a2 - 0.5;
    if (quad > 0 && quad > r.margin) {
        // the violation onset is quadratic; report a representative small t
        r.margin = std::max(r.margin, quad * 1e-8);
        r.worst_t = std::min(r.worst_t == 0 ? 1e-4 : r.worst_t, 1e-4);
    }
    r.holds = r.margin <= 1e-12;
    return r;
}

ZeroTemperatureResult zero_temperature(const Mixture& m, const ZeroTemperatureOptions& opts) {
    ZeroTemperatureResult r;
    r.betas = opts.beta_ladder;
    SolveOptions so = opts.solve_opts;
    std::optional<ParisiMeasure> warm;
    for (double beta : r.betas) {
        so.warm_start = warm;
        SolveResult s = solve(m, beta, opts.k, so);
        r.values.push_back(s.value);
        warm = s.measure;
    }
    // Fit value = E beta + a + b log(beta) on the top half of the ladder.
    std::size_t L = r.betas.size();
    std::size_t lo = L >= 6 ? L - (L / 2 + 1) : 0;
    std::vector<std::array<double, 3>> rows;
    std::vector<double> rhs;
    for (std::size_t i = lo; i < L; ++i) {
        rows.push_back({r.betas[i], 1.0, std::log(r.betas[i])});
        rhs.push_back(r.values[i]);
    }
    // normal equations, 3x3
    double A[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}, bvec[3] = {0, 0, 0};
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int a = 0; a < 3; ++a) {
            bvec[a] += rows[i][a] * rhs[i];
            for (int c = 0; c < 3; ++c) A[a][c] += rows[i][a] * rows[i][c];
        }
    // solve by Gaussian elimination
    double x[3] = {0, 0, 0};
    {
        double M[3][4];
        for (int a = 0; a < 3; ++a) {
            for (int c = 0; c < 3; ++c) M[a][c] = A[a][c];
            M[a][3] = bvec[a];
        }
        for (int c = 0; c < 3; ++c) {
            int piv = c;
            for (int a = c + 1; a < 3; ++a)
                if (std::abs(M[a][c]) > std::abs(M[piv][c])) piv = a;
            for (int j = 0; j < 4; ++j) std::swap(M[c][j], M[piv][j]);
            for (int a = 0; a < 3; ++a) {
                if (a == c) continue;
                double f = M[a][c] / M[c][c];
                for (int j = c; j < 4; ++j) M[a][j] -= f * M[c][j];
            }
        }
        for (int c = 0; c < 3; ++c) x[c] = M[c][3] / M[c][c];
    }
    r.e_star = x[0];
    double resid = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double pred = x[0] * rows[i][0] + x[1] * rows[i][1] + x[2] * rows[i][2];
        resid = std::max(resid, std::abs(pred - rhs[i]));
    }
    r.fit_residual = resid;
    r.flagged = resid > opts.residual_tol;
    return r;
}

}  // namespace spinglass
