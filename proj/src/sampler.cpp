#include "spinglass/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "spinglass/parallel.hpp"
#include "spinglass/rng.hpp"

namespace spinglass {

namespace {

// One Metropolis walker on the sphere of radius sqrt(N * radius_sq):
// tangent Gaussian step of size eta, reprojected, optional band rejection.
struct Walker {
    const Disorder* d = nullptr;
    double beta = 0;
    double sphere_radius = 0;
    const BandSpec* band = nullptr;
    double eta = 0.5;
    NormalStream gauss{1};
    Xoshiro256pp uni{1};
    Vec cur;
    double cur_h = 0;
    long accepts = 0, proposals = 0, band_rejects = 0;
    Vec cand, xi;

    void init(const Vec& start) {
        cur = start;
        cur_h = d->energy(Configuration(cur));
    }

    void step() {
        const int n = int(cur.size());
        xi.resize(n);
        for (int i = 0; i < n; ++i) xi(i) = gauss.next();
        xi -= (xi.dot(cur) / cur.squaredNorm()) * cur;
        cand = cur + eta * xi;
        cand *= sphere_radius / cand.norm();
        ++proposals;
        if (band) {
            double nn = double(n);
            double t = cand.dot(band->center.coords) /
                       (std::sqrt(nn) * band->center.coords.norm());
            if (std::abs(t - band->center.coords.norm() / std::sqrt(nn)) > band->delta) {
                ++band_rejects;
                return;
            }
        }
        double h = d->energy(Configuration(cand));
        double logr = -beta * (h - cur_h);
        if (logr >= 0 || std::log(uni.uniform()) < logr) {
            cur.swap(cand);
            cur_h = h;
            ++accepts;
        }
    }
};

struct NodeAccumulator {
    std::vector<std::vector<double>> traces;  // per chain, thinned H/N
    std::vector<double> chain_means;          // per chain mean of H/N
};

Vec start_point(const Disorder& d, double radius_sq, const std::optional<BandSpec>& band,
                std::uint64_t seed) {
    if (band) {
        SampleSet s = sample_uniform_band(*band, seed, 1);
        return s.points[0].coords;
    }
    return uniform_sphere_point(d.dim(), radius_sq, seed);
}

struct ColumnStats {
    double step_size = 0;
    double acceptance = 0;
};

// Runs one "column": a ladder of walkers at the given betas sharing a chain
// index, with periodic replica exchange between adjacent nodes.  Serial and
// fully determined by (seed, chain).
ColumnStats run_column(const Disorder& d, const std::vector<double>& betas, double radius_sq,
                       const std::optional<BandSpec>& band, const McmcOptions& opts, int chain,
                       std::vector<NodeAccumulator>& nodes, bool collect_samples,
                       int sample_node, std::vector<Vec>* samples_out) {
    const int K = int(betas.size());
    const double n = double(d.dim());
    std::vector<Walker> w(K);
    for (int k = 0; k < K; ++k) {
        w[k].d = &d;
        w[k].beta = betas[k];
        w[k].sphere_radius = std::sqrt(n * radius_sq);
        w[k].band = band ? &*band : nullptr;
        w[k].eta = opts.step_size > 0 ? opts.step_size : 0.5;
        w[k].gauss = NormalStream(derive_seed(opts.seed, 0xa1u, std::uint64_t(k), chain));
        w[k].uni = Xoshiro256pp(derive_seed(opts.seed, 0xa2u, std::uint64_t(k), chain));
        w[k].init(start_point(d, radius_sq, band,
                              derive_seed(opts.seed, 0xa3u, std::uint64_t(k), chain)));
    }
    Xoshiro256pp swap_rng(derive_seed(opts.seed, 0xa4u, chain));

    const bool temper = opts.tempering && K > 1;
    const int swap_every = std::max(1, opts.swap_interval);

    // Burn-in with step-size tuning on 100-proposal windows.
    std::vector<long> win_prop(K, 0), win_acc(K, 0);
    for (int t = 0; t < opts.burn_in; ++t) {
        for (int k = 0; k < K; ++k) {
            long a0 = w[k].accepts, p0 = w[k].proposals;
            w[k].step();
            win_acc[k] += w[k].accepts - a0;
            win_prop[k] += w[k].proposals - p0;
            if (opts.step_size <= 0 && win_prop[k] >= 100) {
                double r = double(win_acc[k]) / double(win_prop[k]);
                if (r > opts.accept_hi) w[k].eta *= 1.25;
                if (r < opts.accept_lo) w[k].eta /= 1.25;
                win_acc[k] = win_prop[k] = 0;
            }
        }
        if (band && t == opts.burn_in / 2) {
            for (int k = 0; k < K; ++k) {
                if (w[k].proposals >= 500 &&
                    double(w[k].band_rejects) / double(w[k].proposals) > 0.999) {
                    double sugg = 0.3 * band->delta * std::sqrt(n);
                    throw tuning_error(sugg,
                                       "band rejection rate above 99.9%; step size too large "
                                       "for the band width, try eta near " +
                                           format_double(sugg));
                }
            }
        }
        if (temper && (t + 1) % swap_every == 0) {
            int parity = ((t + 1) / swap_every) % 2;
            for (int k = parity; k + 1 < K; k += 2) {
                double delta = (betas[k] - betas[k + 1]) * (w[k].cur_h - w[k + 1].cur_h);
                if (delta >= 0 || std::log(swap_rng.uniform()) < delta) {
                    w[k].cur.swap(w[k + 1].cur);
                    std::swap(w[k].cur_h, w[k + 1].cur_h);
                }
            }
        }
    }
    for (int k = 0; k < K; ++k) w[k].accepts = w[k].proposals = 0;

    // Measurement phase.
    std::vector<double> sums(K, 0.0);
    std::vector<std::vector<double>> traces(K);
    const int thin = std::max(1, opts.thin);
    for (int t = 0; t < opts.n_steps; ++t) {
        for (int k = 0; k < K; ++k) {
            w[k].step();
            sums[k] += w[k].cur_h;
            if ((t + 1) % thin == 0) {
                traces[k].push_back(w[k].cur_h / n);
                if (collect_samples && k == sample_node) samples_out->push_back(w[k].cur);
            }
        }
        if (temper && (t + 1) % swap_every == 0) {
            int parity = ((t + 1) / swap_every) % 2;
            for (int k = parity; k + 1 < K; k += 2) {
                double delta = (betas[k] - betas[k + 1]) * (w[k].cur_h - w[k + 1].cur_h);
                if (delta >= 0 || std::log(swap_rng.uniform()) < delta) {
                    w[k].cur.swap(w[k + 1].cur);
                    std::swap(w[k].cur_h, w[k + 1].cur_h);
                }
            }
        }
    }
    for (int k = 0; k < K; ++k) {
        nodes[k].chain_means[chain] = sums[k] / (double(opts.n_steps) * n);
        nodes[k].traces[chain] = std::move(traces[k]);
    }
    ColumnStats st;
    int node = sample_node >= 0 ? sample_node : K - 1;
    st.step_size = w[node].eta;
    st.acceptance =
        w[node].proposals > 0 ? double(w[node].accepts) / double(w[node].proposals) : 0.0;
    return st;
}

// Direct i.i.d. sampling at beta = 0 (uniform on sphere or band).
void exact_beta0_node(const Disorder& d, double radius_sq, const std::optional<BandSpec>& band,
                      const McmcOptions& opts, NodeAccumulator& node) {
    const double n = double(d.dim());
    int per_chain = std::max(20, opts.n_steps / std::max(1, opts.thin));
    for (int c = 0; c < opts.n_chains; ++c) {
        std::vector<double> tr;
        tr.reserve(per_chain);
        double sum = 0;
        if (band) {
            SampleSet s = sample_uniform_band(*band, derive_seed(opts.seed, 0xb0u, c), per_chain);
            for (auto& p : s.points) {
                double h = d.energy(p) / n;
                tr.push_back(h);
                sum += h;
            }
        } else {
            for (int i = 0; i < per_chain; ++i) {
                Vec v = uniform_sphere_point(d.dim(), radius_sq,
                                             derive_seed(opts.seed, 0xb1u, c, i));
                double h = d.energy(Configuration(v)) / n;
                tr.push_back(h);
                sum += h;
            }
        }
        node.chain_means[c] = sum / double(per_chain);
        node.traces[c] = std::move(tr);
    }
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
    std::vector<std::vector<double>> halves;
    for (auto& c : chains) {
        if (c.size() < 4) continue;
        std::size_t h = c.size() / 2;
        halves.emplace_back(c.begin(), c.begin() + h);
        halves.emplace_back(c.begin() + h, c.begin() + 2 * h);
    }
    if (halves.size() < 2) return 1.0;
    std::size_t len = halves[0].size();
    for (auto& h : halves) len = std::min(len, h.size());
    std::vector<double> means;
    double w = 0;
    for (auto& h : halves) {
        std::vector<double> trimmed(h.begin(), h.begin() + len);
        means.push_back(mean_of(trimmed));
        w += variance_of(trimmed);
    }
    w /= double(halves.size());
    double b = double(len) * variance_of(means);
    if (w <= 0) return 1.0;
    double var_plus = (double(len) - 1) / double(len) * w + b / double(len);
    return std::sqrt(var_plus / w);
}

std::vector<NodeStats> grid_mean_energies(const Disorder& d, const std::vector<double>& betas,
                                          double radius_sq, const std::optional<BandSpec>& band,
                                          const McmcOptions& opts) {
    const int K = int(betas.size());
    std::vector<NodeAccumulator> nodes(K);
    for (auto& nd : nodes) {
        nd.chain_means.assign(opts.n_chains, 0.0);
        nd.traces.assign(opts.n_chains, {});
    }
    // beta = 0 nodes are sampled exactly (i.i.d.), never by Markov chain.
    std::vector<int> mcmc_nodes;
    for (int k = 0; k < K; ++k) {
        if (betas[k] == 0.0)
            exact_beta0_node(d, radius_sq, band, opts, nodes[k]);
        else
            mcmc_nodes.push_back(k);
    }
    if (!mcmc_nodes.empty()) {
        std::vector<double> sub_betas;
        for (int k : mcmc_nodes) sub_betas.push_back(betas[k]);
        std::vector<NodeAccumulator> sub(mcmc_nodes.size());
        for (auto& nd : sub) {
            nd.chain_means.assign(opts.n_chains, 0.0);
            nd.traces.assign(opts.n_chains, {});
        }
        parallel_for(std::size_t(opts.n_chains), [&](std::size_t c) {
            run_column(d, sub_betas, radius_sq, band, opts, int(c), sub, false, -1, nullptr);
        });
        for (std::size_t i = 0; i < mcmc_nodes.size(); ++i) nodes[mcmc_nodes[i]] = std::move(sub[i]);
    }
    std::vector<NodeStats> out(K);
    for (int k = 0; k < K; ++k) {
        NodeStats st;
        st.beta = betas[k];
        st.mean_energy_per_site = mean_of(nodes[k].chain_means);
        st.std_error = opts.n_chains > 1
                           ? std::sqrt(variance_of(nodes[k].chain_means) / double(opts.n_chains))
                           : 0.0;
        st.rhat = split_rhat(nodes[k].traces);
        out[k] = st;
    }
    return out;
}

SampleSet mcmc_chain(const Disorder& d, double beta, double radius_sq,
                     const std::optional<BandSpec>& band, const McmcOptions& opts) {
    if (band && std::abs(radius_sq - 1.0) > 1e-12)
        throw std::invalid_argument("mcmc_chain: band constraint requires the outer sphere");
    std::vector<double> betas;
    if (opts.tempering && beta > 0) {
        double b = beta;
        while (b > 0.1 * beta && b > 0.05) {
            betas.push_back(b);
            b /= opts.ladder_ratio;
        }
        betas.push_back(0.0);
        std::sort(betas.begin(), betas.end());
    } else {
        betas = {beta};
    }
    int target = int(betas.size()) - 1;  // largest beta
    for (std::size_t i = 0; i < betas.size(); ++i)
        if (betas[i] == beta) target = int(i);

    SampleSet out;
    out.meta.beta = beta;
    out.meta.radius_sq = radius_sq;
    out.meta.band = band;
    out.meta.thin = opts.thin;
    out.meta.burn_in = opts.burn_in;
    out.meta.seed = opts.seed;

    if (beta == 0.0 && !opts.tempering) {
        // Exact i.i.d. sampling; no Markov kernel needed.
        int per_chain = std::max(1, opts.n_steps / std::max(1, opts.thin));
        for (int c = 0; c < opts.n_chains; ++c) {
            if (band) {
                SampleSet s =
                    sample_uniform_band(*band, derive_seed(opts.seed, 0xc0u, c), per_chain);
                for (auto& p : s.points) {
                    out.points.push_back(p);
                    out.meta.chain_ids.push_back(c);
                }
            } else {
                for (int i = 0; i < per_chain; ++i) {
                    out.points.emplace_back(uniform_sphere_point(
                        d.dim(), radius_sq, derive_seed(opts.seed, 0xc1u, c, i)));
                    out.meta.chain_ids.push_back(c);
                }
            }
        }
        out.meta.acceptance = 1.0;
        return out;
    }

    std::vector<NodeAccumulator> nodes(betas.size());
    for (auto& nd : nodes) {
        nd.chain_means.assign(opts.n_chains, 0.0);
        nd.traces.assign(opts.n_chains, {});
    }
    std::vector<std::vector<Vec>> per_chain_samples(opts.n_chains);
    std::vector<ColumnStats> stats(opts.n_chains);
    parallel_for(std::size_t(opts.n_chains), [&](std::size_t c) {
        stats[c] = run_column(d, betas, radius_sq, band, opts, int(c), nodes, true, target,
                              &per_chain_samples[c]);
    });
    for (int c = 0; c < opts.n_chains; ++c) {
        for (auto& v : per_chain_samples[c]) {
            out.points.emplace_back(v);
            out.meta.chain_ids.push_back(c);
        }
        out.meta.step_size += stats[c].step_size / double(opts.n_chains);
        out.meta.acceptance += stats[c].acceptance / double(opts.n_chains);
    }
    return out;
}

namespace {

struct TiResult {
    double value;
    double se;
    std::vector<double> grid;
    std::vector<std::string> flags;
};

TiResult integrate_grid(const Disorder& d, double beta, int grid_size, double radius_sq,
                        const std::optional<BandSpec>& band, const McmcOptions& opts) {
    TiResult r;
    int nodes_n = std::max(2, grid_size);
    for (int i = 0; i < nodes_n; ++i) r.grid.push_back(beta * double(i) / double(nodes_n - 1));
    auto stats = grid_mean_energies(d, r.grid, radius_sq, band, opts);

    auto trapz = [&](const std::vector<int>& idx, double& val, double& var) {
        val = 0;
        var = 0;
        for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
            double h = r.grid[idx[j + 1]] - r.grid[idx[j]];
            val += -0.5 * h *
                   (stats[idx[j]].mean_energy_per_site + stats[idx[j + 1]].mean_energy_per_site);
        }
        // node weights for error propagation
        std::vector<double> w(idx.size(), 0.0);
        for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
            double h = r.grid[idx[j + 1]] - r.grid[idx[j]];
            w[j] += 0.5 * h;
            w[j + 1] += 0.5 * h;
        }
        for (std::size_t j = 0; j < idx.size(); ++j) {
            double se = stats[idx[j]].std_error;
            var += w[j] * w[j] * se * se;
        }
    };
    std::vector<int> all(nodes_n);
    for (int i = 0; i < nodes_n; ++i) all[i] = i;
    double val, var;
    trapz(all, val, var);
    double refine = 0;
    if (nodes_n >= 3) {
        std::vector<int> coarse;
        for (int i = 0; i < nodes_n; i += 2) coarse.push_back(i);
        if (coarse.back() != nodes_n - 1) coarse.push_back(nodes_n - 1);
        double cval, cvar;
        trapz(coarse, cval, cvar);
        refine = std::abs(val - cval);
    }
    r.value = val;
    r.se = std::sqrt(var) + refine;
    for (auto& st : stats)
        if (st.rhat > 1.1) {
            r.flags.push_back("rhat");
            break;
        }
    return r;
}

}  // namespace

FreeEnergyEstimate free_energy_ti(const Disorder& d, double beta, int grid_size,
                                  const McmcOptions& opts) {
    if (beta < 0) throw std::invalid_argument("free_energy_ti: beta must be >= 0");
    FreeEnergyEstimate e;
    e.method = "ti";
    if (beta == 0.0) {
        e.value = 0.0;  // exact: F(0) = 0 under the normalized reference measure
        e.grid = {0.0};
        return e;
    }
    TiResult r = integrate_grid(d, beta, grid_size, 1.0, std::nullopt, opts);
    e.value = r.value;
    e.std_error = r.se;
    e.grid = r.grid;
    e.flags = r.flags;
    return e;
}

FreeEnergyEstimate band_free_energy(const Disorder& d, double beta, const BandSpec& band,
                                    int grid_size, const McmcOptions& opts) {
    FreeEnergyEstimate e;
    e.method = "band-ti";
    double vol = band_log_volume(band.q(), band.delta, d.dim());
    if (beta == 0.0) {
        e.value = vol;  // exact geometric anchor
        e.grid = {0.0};
        return e;
    }
    TiResult r = integrate_grid(d, beta, grid_size, 1.0, band, opts);
    e.value = vol + r.value;
    e.std_error = r.se;
    e.grid = r.grid;
    e.flags = r.flags;
    return e;
}

FreeEnergyEstimate count_constrained_logprob(const std::vector<Configuration>& pool, int m,
                                             double rho, double q, int dim,
                                             const CountOptions& count) {
    const int K = int(pool.size());
    if (K < m + 1) throw std::invalid_argument("count_constrained_logprob: pool too small");
    const double n = double(dim);
    FreeEnergyEstimate e;
    e.method = "conditional-count";
    e.grid = {0.0};

    std::vector<char> ok(std::size_t(K) * K, 0);
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j) {
            double r = overlap(pool[i], pool[j]);
            char v = std::abs(r - q) < rho ? 1 : 0;
            ok[std::size_t(i) * K + j] = v;
            ok[std::size_t(j) * K + i] = v;
        }

    Xoshiro256pp rng(derive_seed(count.seed, 0xccu));
    long hits = 0;
    std::vector<int> pick(m);
    for (int t = 0; t < count.trials; ++t) {
        for (int a = 0; a < m; ++a) {
            bool fresh;
            do {
                pick[a] = int(rng.below(std::uint64_t(K)));
                fresh = true;
                for (int b = 0; b < a; ++b) fresh = fresh && pick[b] != pick[a];
            } while (!fresh);
        }
        bool good = true;
        for (int a = 0; a < m && good; ++a)
            for (int b = a + 1; b < m && good; ++b)
                good = ok[std::size_t(pick[a]) * K + pick[b]] != 0;
        hits += good ? 1 : 0;
    }
    const double mn = double(m) * n;
    if (hits == 0) {
        // one-sided 95% bound on the subset probability
        e.value = std::log(3.0 / double(count.trials)) / mn;
        e.std_error = std::abs(e.value);
        e.flags.push_back("censored");
        return e;
    }
    double p = double(hits) / double(count.trials);
    e.value = std::log(p) / mn;
    e.std_error = std::sqrt(p * (1 - p) / double(count.trials)) / (p * mn);
    return e;
}

FreeEnergyEstimate conditional_overlap_prob(const Disorder& d, double beta, const BandSpec& band,
                                            int m, double rho, double q, const McmcOptions& mcmc,
                                            const CountOptions& count) {
    if (m < 2) throw std::invalid_argument("conditional_overlap_prob: m must be >= 2");
    if (!(rho > 0 && rho <= 1))
        throw std::invalid_argument("conditional_overlap_prob: rho must be in (0,1]");
    FreeEnergyEstimate e;
    e.method = "conditional-count";
    e.grid = beta > 0 ? std::vector<double>{0.0, beta} : std::vector<double>{0.0};
    if (rho >= 1.0) {
        e.value = 0.0;  // constraint vacuous
        return e;
    }
    McmcOptions mo = mcmc;
    // Thin so the pooled draws are roughly the requested count.
    mo.thin = std::max(1, mo.n_chains * mo.n_steps / std::max(1, count.pool_target));
    SampleSet pool = mcmc_chain(d, beta, 1.0, band, mo);
    FreeEnergyEstimate out = count_constrained_logprob(pool.points, m, rho, q, d.dim(), count);
    out.grid = e.grid;
    return out;
}

ConstrainedFe centered_constrained_fe(const Disorder& d, double beta, const BandSpec& band, int m,
                                      double rho, double q, int grid_size,
                                      const McmcOptions& mcmc, const CountOptions& count) {
    ConstrainedFe r;
    r.band_fe = band_free_energy(d, beta, band, grid_size, mcmc);
    if (m <= 1) {
        // no pair constraints: the conditional term is exactly zero
        r.conditional.method = "conditional-count";
        r.conditional.grid = {0.0};
    } else {
        r.conditional = conditional_overlap_prob(d, beta, band, m, rho, q, mcmc, count);
    }
    r.energy_term = beta / double(d.dim()) * d.energy(band.center);

    r.constrained.method = "band-ti+conditional-count";
    r.constrained.value = r.band_fe.value + r.conditional.value;
    r.constrained.std_error = std::sqrt(r.band_fe.std_error * r.band_fe.std_error +
                                        r.conditional.std_error * r.conditional.std_error);
    r.constrained.grid = r.band_fe.grid;
    r.constrained.flags = r.band_fe.flags;
    for (auto& f : r.conditional.flags) r.constrained.flags.push_back(f);

    r.centered = r.constrained;
    r.centered.value += r.energy_term;
    return r;
}

}  // namespace spinglass
