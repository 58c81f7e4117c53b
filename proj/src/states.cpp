#include "spinglass/states.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "spinglass/parallel.hpp"
#include "spinglass/rng.hpp"

namespace spinglass {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::vector<std::vector<int>> components(UnionFind& uf, int n) {
    std::vector<std::vector<int>> by_root(n);
    for (int i = 0; i < n; ++i) by_root[uf.find(i)].push_back(i);
    std::vector<std::vector<int>> out;
    for (auto& c : by_root)
        if (!c.empty()) out.push_back(std::move(c));
    return out;
}

}  // namespace

OverlapMatrix overlap_matrix(const SampleSet& s) {
    const int n = int(s.points.size());
    if (n == 0) throw std::invalid_argument("overlap_matrix: empty sample set");
    OverlapMatrix M;
    M.m.resize(n, n);
    for (int i = 0; i < n; ++i) {
        M.m(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            double r = overlap(s.points[i], s.points[j]);
            M.m(i, j) = r;
            M.m(j, i) = r;
        }
    }
    return M;
}

Histogram overlap_histogram(const OverlapMatrix& M, int bins) {
    if (M.n() < 2) throw std::invalid_argument("overlap_histogram: need at least two points");
    Histogram h;
    h.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) h.edges[i] = -1.0 + 2.0 * double(i) / bins;
    h.pmf.assign(bins, 0.0);
    long count = 0;
    for (int i = 0; i < M.n(); ++i)
        for (int j = i + 1; j < M.n(); ++j) {
            double r = M.m(i, j);
            int b = std::clamp(int((r + 1.0) / 2.0 * bins), 0, bins - 1);
            h.pmf[b] += 1;
            ++count;
        }
    for (double& v : h.pmf) v /= double(count);
    return h;
}

StateDecomposition cluster_states(const SampleSet& s, double q_star, double epsilon) {
    if (!(epsilon > 0 && epsilon < q_star))
        throw std::invalid_argument("cluster_states: need 0 < epsilon < q_star");
    const int n = int(s.points.size());
    OverlapMatrix M = overlap_matrix(s);
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (M.m(i, j) > q_star - epsilon) uf.unite(i, j);
    auto comps = components(uf, n);
    std::sort(comps.begin(), comps.end(),
              [](const auto& a, const auto& b) { return a.size() > b.size(); });

    StateDecomposition dec;
    dec.q_star = q_star;
    dec.epsilon = epsilon;
    const int dim = int(s.points[0].dim());
    for (auto& c : comps) {
        dec.clusters.push_back(c);
        dec.weights.push_back(double(c.size()) / double(n));
        Vec mean = Vec::Zero(dim);
        for (int idx : c) mean += s.points[idx].coords;
        mean /= double(c.size());
        double norm = mean.norm();
        if (norm < 1e-12 * std::sqrt(double(dim))) {
            dec.centers.emplace_back(std::nullopt);
            ++dec.undefined_centers;
        } else {
            Vec center = mean * (std::sqrt(double(dim) * q_star) / norm);
            dec.centers.emplace_back(Configuration(center));
        }
    }
    // symmetric-difference defect: same-cluster XOR |R - q_star| < epsilon
    std::vector<int> cluster_of(n);
    for (std::size_t c = 0; c < dec.clusters.size(); ++c)
        for (int idx : dec.clusters[c]) cluster_of[idx] = int(c);
    long bad = 0, pairs = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            bool same = cluster_of[i] == cluster_of[j];
            bool close = std::abs(M.m(i, j) - q_star) < epsilon;
            bad += (same != close) ? 1 : 0;
            ++pairs;
        }
    dec.pair_defect = pairs > 0 ? double(bad) / double(pairs) : 0.0;
    return dec;
}

double ultrametricity_defect(const OverlapMatrix& M, double epsilon, std::uint64_t seed) {
    const int n = M.n();
    if (n < 3) throw std::invalid_argument("ultrametricity_defect: need at least three points");
    // A triple (i, j, k), i < j < k, violates when the designated pair (i,k)
    // falls more than epsilon below the other two overlaps.
    auto violates = [&](int i, int j, int k) {
        return M.m(i, k) < std::min(M.m(i, j), M.m(j, k)) - epsilon;
    };
    if (n <= 200) {
        long bad = 0, total = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = j + 1; k < n; ++k) {
                    bad += violates(i, j, k) ? 1 : 0;
                    ++total;
                }
        return double(bad) / double(total);
    }
    const long total = 1000000;
    const int blocks = 64;
    std::vector<long> bad_per(blocks, 0);
    parallel_for(std::size_t(blocks), [&](std::size_t b) {
        Xoshiro256pp rng(derive_seed(seed, 0x3717u, b));
        long cnt = total / blocks;
        long bad = 0;
        int idx[3];
        for (long t = 0; t < cnt; ++t) {
            idx[0] = int(rng.below(n));
            do idx[1] = int(rng.below(n));
            while (idx[1] == idx[0]);
            do idx[2] = int(rng.below(n));
            while (idx[2] == idx[0] || idx[2] == idx[1]);
            std::sort(idx, idx + 3);
            bad += violates(idx[0], idx[1], idx[2]) ? 1 : 0;
        }
        bad_per[b] = bad;
    });
    long bad = 0;
    for (long v : bad_per) bad += v;
    return double(bad) / double((total / blocks) * blocks);
}

namespace {

double psi_eval(const std::string& id, double r) {
    if (id == "one") return 1.0;
    if (id == "r") return r;
    if (id == "r2") return r * r;
    if (id == "r3") return r * r * r;
    throw std::invalid_argument("gg_defect: unknown psi id " + id);
}

double f_eval(const std::string& id, const OverlapMatrix& M, const std::vector<int>& tuple,
              int n) {
    if (id == "one") return 1.0;
    if (n < 2) return 1.0;  // R^1 is the unit diagonal; only constants remain
    double r12 = M.m(tuple[0], tuple[1]);
    if (id == "r12") return r12;
    if (id == "r12sq") return r12 * r12;
    if (id == "r12r13") {
        if (n < 3) return r12;
        return r12 * M.m(tuple[0], tuple[2]);
    }
    throw std::invalid_argument("gg_defect: unknown f id " + id);
}

}  // namespace

GgResult gg_defect(const std::vector<OverlapMatrix>& draws, int n, const std::string& psi_id,
                   const std::string& f_id, const GgOptions& opts) {
    if (draws.empty()) throw std::invalid_argument("gg_defect: no draws");
    for (auto& d : draws)
        if (d.n() < n + 1)
            throw std::invalid_argument("gg_defect: a draw has fewer than n+1 replicas");

    // Per-draw estimates of each term, all from the same sampled tuples.
    struct Terms {
        double a = 0;               // <f psi(R_{1,n+1})>
        double f = 0;               // <f>
        double psi12 = 0;           // <psi(R_{1,2})>
        std::vector<double> mid;    // <f psi(R_{1,k})>, k = 2..n
    };
    std::vector<Terms> per(draws.size());
    for (std::size_t dI = 0; dI < draws.size(); ++dI) {
        const OverlapMatrix& M = draws[dI];
        Xoshiro256pp rng(derive_seed(opts.seed, 0x66u, dI));
        Terms t;
        t.mid.assign(std::size_t(std::max(0, n - 1)), 0.0);
        std::vector<int> tuple(n + 1);
        const int T = opts.tuples_per_draw;
        for (int s = 0; s < T; ++s) {
            for (int a = 0; a <= n; ++a) {
                bool fresh;
                do {
                    tuple[a] = int(rng.below(std::uint64_t(M.n())));
                    fresh = true;
                    for (int b = 0; b < a; ++b) fresh = fresh && tuple[b] != tuple[a];
                } while (!fresh);
            }
            double fv = f_eval(f_id, M, tuple, n);
            t.a += fv * psi_eval(psi_id, M.m(tuple[0], tuple[n]));
            t.f += fv;
            t.psi12 += psi_eval(psi_id, n >= 2 ? M.m(tuple[0], tuple[1])
                                               : M.m(tuple[0], tuple[n]));
            for (int k = 2; k <= n; ++k)
                t.mid[k - 2] += fv * psi_eval(psi_id, M.m(tuple[0], tuple[k - 1]));
        }
        t.a /= T;
        t.f /= T;
        t.psi12 /= T;
        for (double& v : t.mid) v /= T;
        per[dI] = std::move(t);
    }

    auto defect_of = [&](const std::vector<std::size_t>& idx) {
        double a = 0, f = 0, psi = 0;
        std::vector<double> mid(std::size_t(std::max(0, n - 1)), 0.0);
        for (std::size_t i : idx) {
            a += per[i].a;
            f += per[i].f;
            psi += per[i].psi12;
            for (std::size_t k = 0; k < mid.size(); ++k) mid[k] += per[i].mid[k];
        }
        double c = 1.0 / double(idx.size());
        a *= c;
        f *= c;
        psi *= c;
        double s = double(n) * a - f * psi;
        for (std::size_t k = 0; k < mid.size(); ++k) s -= mid[k] * c;
        return std::abs(s);
    };

    std::vector<std::size_t> all(draws.size());
    std::iota(all.begin(), all.end(), std::size_t(0));
    GgResult r;
    r.draws = int(draws.size());
    r.defect = defect_of(all);
    if (draws.size() >= 2 && opts.bootstrap > 0) {
        Xoshiro256pp boot(derive_seed(opts.seed, 0x67u));
        std::vector<double> vals(opts.bootstrap);
        std::vector<std::size_t> idx(draws.size());
        for (int b = 0; b < opts.bootstrap; ++b) {
            for (auto& i : idx) i = std::size_t(boot.below(draws.size()));
            vals[b] = defect_of(idx);
        }
        r.std_error = std::sqrt(variance_of(vals));
    }
    return r;
}

double suggest_theta(const OverlapMatrix& M, const StateDecomposition& dec) {
    std::vector<double> within;
    for (auto& c : dec.clusters)
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j) within.push_back(M.m(c[i], c[j]));
    if (within.size() < 2) return 0.02;
    std::sort(within.begin(), within.end());
    double med = within[within.size() / 2];
    std::vector<double> dev;
    for (double v : within) dev.push_back(std::abs(v - med));
    std::sort(dev.begin(), dev.end());
    return std::max(0.02, 2.0 * dev[dev.size() / 2]);
}

UltraTree build_ultratree(const StateDecomposition& dec, const std::vector<double>& q_levels,
                          double theta, const UltraTreeOptions& opts) {
    std::vector<int> usable;
    for (std::size_t i = 0; i < dec.centers.size(); ++i)
        if (dec.centers[i]) usable.push_back(int(i));
    if (usable.empty()) throw std::invalid_argument("build_ultratree: no defined centers");
    for (std::size_t i = 1; i < q_levels.size(); ++i)
        if (!(q_levels[i] > q_levels[i - 1]))
            throw std::invalid_argument("build_ultratree: levels must be strictly increasing");
    for (double q : q_levels)
        if (!(q > 0 && q < dec.q_star))
            throw std::invalid_argument("build_ultratree: levels must lie inside (0, q_star)");

    const int K = int(usable.size());
    const int dim = int(dec.centers[usable[0]]->dim());
    Mat R(K, K);
    for (int i = 0; i < K; ++i) {
        R(i, i) = 1.0;
        for (int j = i + 1; j < K; ++j) {
            double r = overlap(*dec.centers[usable[i]], *dec.centers[usable[j]]);
            R(i, j) = r;
            R(j, i) = r;
        }
    }

    UltraTree tree;
    std::vector<double> levels = q_levels;
    levels.push_back(dec.q_star);  // leaf level: singleton classes
    tree.levels_q = levels;

    std::vector<std::vector<int>> prev_classes;  // over local indices 0..K-1
    for (std::size_t L = 0; L < levels.size(); ++L) {
        double q = levels[L];
        bool leaf = L + 1 == levels.size();
        UltraLevel lvl;
        lvl.q = q;
        lvl.theta = theta;
        if (leaf) {
            for (int i = 0; i < K; ++i) lvl.classes.push_back({i});
        } else {
            double thr = q / dec.q_star - theta;
            UnionFind uf(K);
            for (int i = 0; i < K; ++i)
                for (int j = i + 1; j < K; ++j)
                    if (R(i, j) > thr) uf.unite(i, j);
            lvl.classes = components(uf, K);
            // non-transitivity: connected pairs lacking a direct edge
            for (auto& c : lvl.classes)
                for (std::size_t i = 0; i < c.size(); ++i)
                    for (std::size_t j = i + 1; j < c.size(); ++j)
                        if (!(R(c[i], c[j]) > thr)) ++lvl.nontransitive_pairs;
        }
        // class centers: rescaled means of member centers
        for (auto& c : lvl.classes) {
            Vec mean = Vec::Zero(dim);
            for (int li : c) mean += dec.centers[usable[li]]->coords;
            mean /= double(c.size());
            double norm = mean.norm();
            if (norm < 1e-12) norm = 1;
            lvl.class_centers.emplace_back(
                Configuration(mean * (std::sqrt(double(dim) * q) / norm)));
        }
        // parenting and nesting check
        if (L > 0) {
            std::vector<int> member_to_prev(K, -1);
            for (std::size_t pc = 0; pc < prev_classes.size(); ++pc)
                for (int li : prev_classes[pc]) member_to_prev[li] = int(pc);
            for (auto& c : lvl.classes) {
                int p = member_to_prev[c[0]];
                bool same = true;
                for (int li : c) same = same && member_to_prev[li] == p;
                lvl.parent.push_back(p);
                if (!same) lvl.nested_in_previous = false;
            }
        } else {
            lvl.parent.assign(lvl.classes.size(), -1);
        }
        prev_classes = lvl.classes;
        tree.levels.push_back(std::move(lvl));
    }

    // Orthogonality: children of a common parent, plus the virtual root at 0.
    const double n = double(dim);
    double worst = 0;
    for (std::size_t L = 0; L < tree.levels.size(); ++L) {
        const auto& lvl = tree.levels[L];
        for (std::size_t i = 0; i < lvl.classes.size(); ++i)
            for (std::size_t j = i + 1; j < lvl.classes.size(); ++j) {
                int pi = L == 0 ? -1 : lvl.parent[i];
                int pj = L == 0 ? -1 : lvl.parent[j];
                if (pi != pj) continue;
                Vec par = Vec::Zero(dim);
                if (L > 0) par = tree.levels[L - 1].class_centers[pi].coords;
                double ip = std::abs((lvl.class_centers[i].coords - par)
                                         .dot(lvl.class_centers[j].coords - par)) /
                            n;
                worst = std::max(worst, ip);
            }
    }
    tree.orthogonality_residual_max = worst;

    // Mass nesting: for each leaf center, the fraction of its band mass that
    // escapes the band of its class center at each level.
    if (opts.masses && *opts.masses) {
        const SampleSet& s = **opts.masses;
        double worst_escape = 0;
        for (std::size_t L = 0; L + 1 < tree.levels.size(); ++L) {
            const auto& lvl = tree.levels[L];
            for (std::size_t ci = 0; ci < lvl.classes.size(); ++ci) {
                BandSpec inner(lvl.class_centers[ci], opts.band_delta_inner);
                for (int li : lvl.classes[ci]) {
                    BandSpec leaf_band(*dec.centers[usable[li]], opts.band_delta);
                    long in_leaf = 0, escaped = 0;
                    for (auto& p : s.points) {
                        if (!in_band(p, leaf_band)) continue;
                        ++in_leaf;
                        if (!in_band(p, inner)) ++escaped;
                    }
                    if (in_leaf > 0)
                        worst_escape =
                            std::max(worst_escape, double(escaped) / double(in_leaf));
                }
            }
        }
        tree.mass_escape_max = worst_escape;
    }
    return tree;
}

namespace {

// nested node: {q, center (coordinates), members, children: [...]}
nlohmann::ordered_json tree_node(const UltraTree& t, std::size_t level, int cls) {
    const UltraLevel& lvl = t.levels[level];
    nlohmann::ordered_json node;
    node["q"] = lvl.q;
    node["members"] = lvl.classes[cls];
    const Vec& c = lvl.class_centers[cls].coords;
    node["center"] = std::vector<double>(c.data(), c.data() + c.size());
    node["children"] = nlohmann::json::array();
    if (level + 1 < t.levels.size()) {
        const UltraLevel& next = t.levels[level + 1];
        for (std::size_t k = 0; k < next.classes.size(); ++k)
            if (next.parent[k] == cls) node["children"].push_back(tree_node(t, level + 1, k));
    }
    return node;
}

}  // namespace

std::string UltraTree::to_json() const {
    nlohmann::ordered_json j;
    j["roots"] = nlohmann::json::array();
    if (!levels.empty())
        for (std::size_t k = 0; k < levels[0].classes.size(); ++k)
            j["roots"].push_back(tree_node(*this, 0, int(k)));
    j["levels"] = nlohmann::json::array();
    for (auto& lvl : levels) {
        nlohmann::ordered_json l;
        l["q"] = lvl.q;
        l["theta"] = lvl.theta;
        l["classes"] = lvl.classes;
        l["parent"] = lvl.parent;
        l["nontransitive_pairs"] = lvl.nontransitive_pairs;
        l["nested_in_previous"] = lvl.nested_in_previous;
        j["levels"].push_back(l);
    }
    j["orthogonality_residual_max"] = orthogonality_residual_max;
    if (mass_escape_max >= 0) j["mass_escape_max"] = mass_escape_max;
    return j.dump(2);
}

SupportReport overlap_support(const std::vector<OverlapMatrix>& gibbs_draws,
                              const std::vector<std::pair<std::vector<Configuration>,
                                                          std::vector<Configuration>>>& ground_draws,
                              int dim, const SupportOptions& opts) {
    SupportReport rep;
    std::vector<double> grid = opts.q_grid;
    if (grid.empty())
        for (int i = 0; i <= 40; ++i) grid.push_back(-1.0 + 2.0 * double(i) / 40.0);
    std::size_t draws = std::max(gibbs_draws.size(), ground_draws.size());
    rep.low_power = draws < 10;

    const double threshold = std::exp(-double(dim) * opts.mass_delta);
    for (double q : grid) {
        SupportRow row;
        row.q = q;
        if (!gibbs_draws.empty()) {
            int hit = 0;
            for (auto& M : gibbs_draws) {
                long near = 0, total = 0;
                for (int i = 0; i < M.n(); ++i)
                    for (int j = i + 1; j < M.n(); ++j) {
                        near += std::abs(M.m(i, j) - q) < opts.eps ? 1 : 0;
                        ++total;
                    }
                double mass = total > 0 ? double(near) / double(total) : 0.0;
                hit += mass > threshold ? 1 : 0;
            }
            row.gibbs_freq = double(hit) / double(gibbs_draws.size());
        }
        if (!ground_draws.empty()) {
            int hit = 0;
            for (auto& [A, B] : ground_draws) {
                bool found = false;
                for (auto& a : A) {
                    for (auto& b : B) {
                        if (std::abs(a.coords.dot(b.coords) / double(dim) - q) < opts.eps) {
                            found = true;
                            break;
                        }
                    }
                    if (found) break;
                }
                hit += found ? 1 : 0;
            }
            row.ground_freq = double(hit) / double(ground_draws.size());
        }
        for (double p : opts.parisi_support)
            if (std::abs(p - q) <= opts.eps) row.in_parisi_support = true;
        // inclusion: ground support (all draws found a pair) must appear on
        // the Gibbs side; only evaluated where the hypotheses apply
        if (!ground_draws.empty() && !gibbs_draws.empty() &&
            (opts.parisi_support.empty() || row.in_parisi_support)) {
            if (row.ground_freq >= 1.0 - 1e-12) {
                row.inclusion_checked = true;
                row.margin = row.gibbs_freq - opts.majority;
                row.inclusion_pass = row.margin > 0;
            }
        }
        rep.rows.push_back(row);
    }
    return rep;
}

std::string SupportReport::to_json() const {
    nlohmann::ordered_json j;
    j["low_power"] = low_power;
    j["rows"] = nlohmann::json::array();
    for (auto& r : rows) {
        nlohmann::ordered_json x;
        x["q"] = r.q;
        x["gibbs_freq"] = r.gibbs_freq;
        x["ground_freq"] = r.ground_freq;
        x["in_parisi_support"] = r.in_parisi_support;
        x["inclusion_checked"] = r.inclusion_checked;
        x["inclusion_pass"] = r.inclusion_pass;
        x["margin"] = r.margin;
        j["rows"].push_back(x);
    }
    return j.dump(2);
}

}  // namespace spinglass
