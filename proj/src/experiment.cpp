#include "spinglass/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "spinglass/groundstate.hpp"
#include "spinglass/io.hpp"
#include "spinglass/parallel.hpp"
#include "spinglass/parisi.hpp"
#include "spinglass/rng.hpp"
#include "spinglass/states.hpp"
#include "spinglass/tap.hpp"

namespace spinglass {

namespace {

const std::vector<std::string> kKinds = {"simulate",    "free-energy", "ground-state",
                                         "parisi",      "tap",         "states",
                                         "landscape"};

template <typename T>
T field_or(const nlohmann::json& j, const std::string& key, T fallback,
           const std::string& path) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        throw config_error(path + key, "config: bad value at " + path + key);
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw config_error("", std::string("config: invalid json: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.kind = field_or<std::string>(j, "kind", "", "");
    if (std::find(kKinds.begin(), kKinds.end(), cfg.kind) == kKinds.end())
        throw config_error("kind", "config: kind must be one of simulate|free-energy|"
                                   "ground-state|parisi|tap|states|landscape");
    if (!j.contains("mixture")) throw config_error("mixture", "config: mixture required");
    {
        const auto& jm = j.at("mixture");
        std::map<int, double> c;
        for (auto it = jm.begin(); it != jm.end(); ++it) {
            int p;
            try {
                p = std::stoi(it.key());
            } catch (...) {
                throw config_error("mixture.coeffs." + it.key(),
                                   "config: mixture degree keys must be integers");
            }
            double g2 = it.value().get<double>();
            if (g2 < 0)
                throw config_error("mixture.coeffs." + it.key(),
                                   "config: mixture coefficient at degree " + it.key() +
                                       " must be nonnegative");
            c[p] = g2;
        }
        try {
            cfg.mixture = Mixture(c);
        } catch (const std::exception& e) {
            throw config_error("mixture.coeffs", std::string("config: ") + e.what());
        }
    }
    cfg.n = field_or<int>(j, "n", 64, "");
    if (cfg.n < 2) throw config_error("n", "config: n must be >= 2");
    cfg.beta = field_or<double>(j, "beta", 0.5, "");
    if (cfg.beta < 0) throw config_error("beta", "config: beta must be >= 0");
    cfg.seed = field_or<std::uint64_t>(j, "seed", 1, "");
    cfg.out_dir = field_or<std::string>(j, "out", "", "");
    cfg.format = field_or<std::string>(j, "format", "csv", "");
    if (cfg.format != "csv" && cfg.format != "json")
        throw config_error("format", "config: format must be csv or json");
    cfg.threads = field_or<int>(j, "threads", 1, "");
    if (j.contains("schedules")) {
        const auto& s = j.at("schedules");
        cfg.delta = field_or<double>(s, "delta", 0.0, "schedules.");
        cfg.rho = field_or<double>(s, "rho", 0.0, "schedules.");
        cfg.m_replicas = field_or<int>(s, "m", 0, "schedules.");
    }
    if (j.contains("band")) {
        double q = field_or<double>(j.at("band"), "q", 0.5, "band.");
        if (!(q > 0 && q < 1)) throw config_error("band.q", "config: band.q must be in (0,1)");
        cfg.band_q = q;
        double d = field_or<double>(j.at("band"), "delta", 0.0, "band.");
        if (d > 0) cfg.delta = d;
    }
    if (j.contains("mcmc")) {
        const auto& m = j.at("mcmc");
        cfg.mcmc.n_chains = field_or<int>(m, "chains", cfg.mcmc.n_chains, "mcmc.");
        cfg.mcmc.n_steps = field_or<int>(m, "steps", cfg.mcmc.n_steps, "mcmc.");
        cfg.mcmc.burn_in = field_or<int>(m, "burn_in", cfg.mcmc.burn_in, "mcmc.");
        cfg.mcmc.thin = field_or<int>(m, "thin", cfg.mcmc.thin, "mcmc.");
        cfg.mcmc.step_size = field_or<double>(m, "step_size", 0.0, "mcmc.");
        cfg.mcmc.tempering = field_or<bool>(m, "tempering", false, "mcmc.");
        cfg.mcmc.ladder_ratio = field_or<double>(m, "ladder_ratio", 1.25, "mcmc.");
        cfg.mcmc.swap_interval = field_or<int>(m, "swap_interval", 20, "mcmc.");
    }
    if (j.contains("count")) {
        cfg.count.pool_target = field_or<int>(j.at("count"), "pool", 512, "count.");
        cfg.count.trials = field_or<int>(j.at("count"), "trials", 20000, "count.");
    }
    cfg.grid_size = field_or<int>(j, "grid_size", 6, "");
    if (j.contains("parisi")) {
        cfg.parisi_k = field_or<int>(j.at("parisi"), "k", 3, "parisi.");
        if (j.at("parisi").contains("beta_ladder"))
            cfg.beta_ladder = j.at("parisi").at("beta_ladder").get<std::vector<double>>();
    }
    cfg.restarts = field_or<int>(j, "restarts", 4, "");
    if (j.contains("states")) {
        const auto& s = j.at("states");
        cfg.q_star = field_or<double>(s, "q_star", 0.0, "states.");
        cfg.cluster_eps = field_or<double>(s, "epsilon", 0.1, "states.");
        cfg.tree_theta = field_or<double>(s, "theta", 0.0, "states.");
        cfg.histogram_bins = field_or<int>(s, "bins", 41, "states.");
        if (s.contains("tree_levels"))
            cfg.tree_levels = s.at("tree_levels").get<std::vector<double>>();
    }
    if (j.contains("landscape"))
        cfg.centers_per_kind =
            field_or<int>(j.at("landscape"), "centers_per_kind", 2, "landscape.");
    cfg.sample_dump = field_or<int>(j, "samples", 0, "");
    cfg.dump_raw_tensors = field_or<bool>(j, "dump_raw_tensors", false, "");
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["kind"] = cfg.kind;
    j["mixture"] = nlohmann::json::parse(cfg.mixture.to_json());
    j["n"] = cfg.n;
    j["beta"] = cfg.beta;
    j["seed"] = cfg.seed;
    j["out"] = cfg.out_dir;
    j["format"] = cfg.format;
    j["threads"] = cfg.threads;
    j["schedules"] = {{"delta", cfg.delta}, {"rho", cfg.rho}, {"m", cfg.m_replicas}};
    if (cfg.band_q) j["band"] = {{"q", *cfg.band_q}, {"delta", cfg.delta}};
    j["mcmc"] = {{"chains", cfg.mcmc.n_chains},     {"steps", cfg.mcmc.n_steps},
                 {"burn_in", cfg.mcmc.burn_in},     {"thin", cfg.mcmc.thin},
                 {"step_size", cfg.mcmc.step_size}, {"tempering", cfg.mcmc.tempering},
                 {"ladder_ratio", cfg.mcmc.ladder_ratio},
                 {"swap_interval", cfg.mcmc.swap_interval}};
    j["count"] = {{"pool", cfg.count.pool_target}, {"trials", cfg.count.trials}};
    j["grid_size"] = cfg.grid_size;
    j["parisi"] = {{"k", cfg.parisi_k}, {"beta_ladder", cfg.beta_ladder}};
    j["restarts"] = cfg.restarts;
    j["states"] = {{"q_star", cfg.q_star},
                   {"epsilon", cfg.cluster_eps},
                   {"theta", cfg.tree_theta},
                   {"bins", cfg.histogram_bins},
                   {"tree_levels", cfg.tree_levels}};
    j["landscape"] = {{"centers_per_kind", cfg.centers_per_kind}};
    j["samples"] = cfg.sample_dump;
    j["dump_raw_tensors"] = cfg.dump_raw_tensors;
    return j.dump(2);
}

namespace {

namespace fs = std::filesystem;

void write_manifest(const ExperimentConfig& cfg, const fs::path& dir) {
    nlohmann::ordered_json j = nlohmann::json::parse(serialize_config(cfg));
    j["generator_id"] = kGeneratorId;
    j["format_version"] = 1;
    write_text(dir / "manifest.json", j.dump(2) + "\n");
}

void write_summary(const fs::path& dir, const nlohmann::ordered_json& body) {
    write_text(dir / "summary.json", body.dump(2) + "\n");
}

void write_rows(const ExperimentConfig& cfg, const fs::path& dir,
                const std::vector<EstimateRow>& rows) {
    if (cfg.format == "json")
        write_estimates_json(dir / "estimates.json", rows);
    else
        write_estimates_csv(dir / "estimates.csv", rows);
}

std::optional<BandSpec> make_band(const ExperimentConfig& cfg, const Disorder& d) {
    if (!cfg.band_q) return std::nullopt;
    Vec c = uniform_sphere_point(d.dim(), *cfg.band_q, derive_seed(cfg.seed, 0xbad5eedu));
    return BandSpec(Configuration(c), cfg.resolved_delta());
}

RunOutcome run_simulate(const ExperimentConfig& cfg, const fs::path& dir) {
    Disorder d = sample_disorder(cfg.mixture, cfg.n, cfg.seed);
    std::optional<BandSpec> band = make_band(cfg, d);
    McmcOptions mo = cfg.mcmc;
    mo.seed = derive_seed(cfg.seed, 1);
    SampleSet s = mcmc_chain(d, cfg.beta, 1.0, band, mo);
    OverlapMatrix M = overlap_matrix(s);
    Histogram h = overlap_histogram(M, cfg.histogram_bins);

    std::vector<double> e;
    for (auto& p : s.points) e.push_back(d.energy(p) / double(cfg.n));
    std::vector<EstimateRow> rows;
    rows.push_back({"mean_energy_per_site", mean_of(e),
                    std::sqrt(variance_of(e) / double(std::max<std::size_t>(1, e.size()))),
                    "mcmc", ""});
    write_rows(cfg, dir, rows);

    std::string hist = "bin_lo,bin_hi,pmf\n";
    for (std::size_t b = 0; b < h.pmf.size(); ++b)
        hist += format_double(h.edges[b]) + "," + format_double(h.edges[b + 1]) + "," +
                format_double(h.pmf[b]) + "\n";
    write_text(dir / "histogram.csv", hist);

    RunOutcome out;
    out.artifacts = {cfg.format == "json" ? "estimates.json" : "estimates.csv", "histogram.csv"};
    if (cfg.sample_dump > 0) {
        SampleSet dump = s;
        if (int(dump.points.size()) > cfg.sample_dump) dump.points.resize(cfg.sample_dump);
        write_samples(dir / "samples.bin", dump);
        out.artifacts.push_back("samples.bin");
    }
    save_disorder(d, dir / "disorder.json",
                  cfg.dump_raw_tensors ? dir / "disorder.raw" : fs::path{});
    nlohmann::ordered_json sum;
    sum["kind"] = cfg.kind;
    sum["mean_energy_per_site"] = mean_of(e);
    sum["acceptance"] = s.meta.acceptance;
    write_summary(dir, sum);
    return out;
}

RunOutcome run_free_energy(const ExperimentConfig& cfg, const fs::path& dir) {
    Disorder d = sample_disorder(cfg.mixture, cfg.n, cfg.seed);
    McmcOptions mo = cfg.mcmc;
    mo.seed = derive_seed(cfg.seed, 2);
    std::vector<EstimateRow> rows;
    RunOutcome out;
    FreeEnergyEstimate fe;
    if (cfg.band_q) {
        std::optional<BandSpec> band = make_band(cfg, d);
        fe = band_free_energy(d, cfg.beta, *band, cfg.grid_size, mo);
        rows.push_back({"band_free_energy", fe.value, fe.std_error, fe.method,
                        flags_to_string(fe.flags)});
        // the constrained family alongside
        ConstrainedFe c = centered_constrained_fe(d, cfg.beta, *band, cfg.resolved_m(),
                                                  cfg.resolved_rho(), *cfg.band_q,
                                                  cfg.grid_size, mo, cfg.count);
        rows.push_back({"constrained_free_energy", c.constrained.value,
                        c.constrained.std_error, c.constrained.method,
                        flags_to_string(c.constrained.flags)});
        rows.push_back({"centered_constrained_free_energy", c.centered.value,
                        c.centered.std_error, c.centered.method,
                        flags_to_string(c.centered.flags)});
        out.numerical_flags = fe.flagged() || c.constrained.flagged();
    } else {
        fe = free_energy_ti(d, cfg.beta, cfg.grid_size, mo);
        rows.push_back({"free_energy", fe.value, fe.std_error, fe.method,
                        flags_to_string(fe.flags)});
        out.numerical_flags = fe.flagged();
    }
    write_rows(cfg, dir, rows);
    nlohmann::ordered_json sum;
    sum["kind"] = cfg.kind;
    sum["value"] = fe.value;
    sum["std_error"] = fe.std_error;
    sum["grid"] = fe.grid;
    sum["flags"] = fe.flags;
    write_summary(dir, sum);
    out.artifacts = {cfg.format == "json" ? "estimates.json" : "estimates.csv"};
    return out;
}

RunOutcome run_ground_state(const ExperimentConfig& cfg, const fs::path& dir) {
    Disorder d = sample_disorder(cfg.mixture, cfg.n, cfg.seed);
    double q = cfg.band_q ? *cfg.band_q : 1.0;
    MinimizeOptions opts;
    opts.seed = derive_seed(cfg.seed, 3);
    GroundStateResult r = minimize_on_sphere(d, q, cfg.restarts, opts);
    std::string csv = "q,restarts,value_per_site,converged\n";
    csv += format_double(q) + "," + std::to_string(cfg.restarts) + "," +
           format_double(r.value_per_site) + "," + (r.converged ? "1" : "0") + "\n";
    write_text(dir / "ground_state.csv", csv);
    nlohmann::ordered_json sum;
    sum["kind"] = cfg.kind;
    sum["q"] = q;
    sum["value_per_site"] = r.value_per_site;
    sum["converged"] = r.converged;
    sum["tangential_grad_norm"] = r.tangential_grad_norm;
    write_summary(dir, sum);
    RunOutcome out;
    out.artifacts = {"ground_state.csv"};
    out.numerical_flags = !r.converged;
    return out;
}

RunOutcome run_parisi(const ExperimentConfig& cfg, const fs::path& dir) {
    SolveOptions so;
    so.seed = derive_seed(cfg.seed, 4);
    SolveResult r = solve(cfg.mixture, cfg.beta, cfg.parisi_k, so);
    StationarityReport rep = validate(r.measure, cfg.mixture, cfg.beta, 1e-6);
    write_text(dir / "measure.json", r.measure.to_json() + "\n");
    write_text(dir / "stationarity.json", rep.to_json() + "\n");
    std::vector<EstimateRow> rows;
    rows.push_back({"variational_value", r.value, 0.0, "cs-solver",
                    r.converged ? "" : "nonconverged"});
    RsConditionResult rs = rs_condition(cfg.mixture, cfg.beta, r.measure.q_max());
    rows.push_back({"rs_condition_margin", rs.margin, 0.0, "grid-scan",
                    rs.holds ? "holds" : "fails"});
    if (!cfg.beta_ladder.empty() || cfg.kind == "parisi") {
        ZeroTemperatureOptions zt;
        if (!cfg.beta_ladder.empty()) zt.beta_ladder = cfg.beta_ladder;
        zt.k = cfg.parisi_k;
        zt.solve_opts = so;
        ZeroTemperatureResult z = zero_temperature(cfg.mixture, zt);
        rows.push_back({"ground_state_energy", z.e_star, z.fit_residual, "beta-ladder-fit",
                        z.flagged ? "fit-residual" : ""});
    }
    write_rows(cfg, dir, rows);
    nlohmann::ordered_json sum;
    sum["kind"] = cfg.kind;
    sum["value"] = r.value;
    sum["q_p"] = r.measure.q_max();
    sum["atoms"] = r.measure.atoms();
    sum["weights"] = r.measure.weights();
    sum["validate_ok"] =
        rep.max_condition_ok && rep.stationary_condition_ok && rep.gamma_condition_ok;
    write_summary(dir, sum);
    RunOutcome out;
    out.artifacts = {"measure.json", "stationarity.json", cfg.format == "json" ? "estimates.json" : "estimates.csv"};
    out.numerical_flags = !r.converged;
    return out;
}

RunOutcome run_tap(const ExperimentConfig& cfg, const fs::path& dir) {
    TapOptions topt;
    topt.k = cfg.parisi_k;
    topt.solve_opts.seed = derive_seed(cfg.seed, 5);
    if (!cfg.beta_ladder.empty()) topt.zero_t.beta_ladder = cfg.beta_ladder;
    TapReport rep = tap_consistency(cfg.mixture, cfg.beta, topt);
    std::vector<double> grid = default_tap_grid();
    for (double a : rep.solver_atoms)
        if (a > 0.005 && a < 0.995) grid.push_back(a);
    std::sort(grid.begin(), grid.end());
    TapProfile prof = tap_profile(cfg.mixture, cfg.beta, grid, topt);

    std::string csv = "q,e_star,entropy,f_limit,total\n";
    for (std::size_t i = 0; i < prof.q.size(); ++i)
        csv += format_double(prof.q[i]) + "," + format_double(prof.e_star[i]) + "," +
               format_double(prof.entropy[i]) + "," + format_double(prof.f_limit[i]) + "," +
               format_double(prof.total[i]) + "\n";
    write_text(dir / "tap_profile.csv", csv);
    write_text(dir / "tap_report.json", rep.to_json() + "\n");
    nlohmann::ordered_json sum;
    sum["kind"] = cfg.kind;
    sum["sup_profile"] = rep.sup_profile;
    sum["solve_value"] = rep.solve_value;
    sum["value_ok"] = rep.value_ok;
    sum["atoms_in_argmax_ok"] = rep.atoms_in_argmax_ok;
    sum["rs_value_ok"] = rep.rs_value_ok;
    write_summary(dir, sum);
    RunOutcome out;
    out.artifacts = {"tap_profile.csv", "tap_report.json"};
    out.numerical_flags = !(rep.value_ok && rep.atoms_in_argmax_ok && rep.rs_value_ok);
    return out;
}

RunOutcome run_states(const ExperimentConfig& cfg, const fs::path& dir) {
    Disorder d = sample_disorder(cfg.mixture, cfg.n, cfg.seed);
    McmcOptions mo = cfg.mcmc;
    mo.seed = derive_seed(cfg.seed, 6);
    SampleSet s = mcmc_chain(d, cfg.beta, 1.0, std::nullopt, mo);
    OverlapMatrix M = overlap_matrix(s);
    Histogram h = overlap_histogram(M, cfg.histogram_bins);
    std::string hist = "bin_lo,bin_hi,pmf\n";
    for (std::size_t b = 0; b < h.pmf.size(); ++b)
        hist += format_double(h.edges[b]) + "," + format_double(h.edges[b + 1]) + "," +
                format_double(h.pmf[b]) + "\n";
    write_text(dir / "histogram.csv", hist);

    // auto q_star: high quantile of off-diagonal overlaps
    double q_star = cfg.q_star;
    if (q_star <= 0) {
        std::vector<double> off;
        for (int i = 0; i < M.n(); ++i)
            for (int j = i + 1; j < M.n(); ++j) off.push_back(M.m(i, j));
        std::sort(off.begin(), off.end());
        q_star = std::max(0.2, off[std::size_t(0.995 * double(off.size() - 1))]);
    }
    StateDecomposition dec = cluster_states(s, q_star, std::min(cfg.cluster_eps, q_star / 2));

    std::string defects = "quantity,value\n";
    defects += "pair_defect," + format_double(dec.pair_defect) + "\n";
    for (double eps : {0.05, 0.1, 0.2})
        defects += "ultrametricity_defect_eps" + format_double(eps) + "," +
                   format_double(ultrametricity_defect(M, eps, derive_seed(cfg.seed, 7))) + "\n";
    std::vector<OverlapMatrix> draws = {M};
    GgOptions ggo;
    ggo.seed = derive_seed(cfg.seed, 8);
    if (M.n() >= 4) {
        GgResult gg = gg_defect(draws, 2, "r", "one", ggo);
        defects += "gg_defect_n2_r_one," + format_double(gg.defect) + "\n";
    }
    write_text(dir / "defects.csv", defects);

    nlohmann::ordered_json sum;
    sum["kind"] = cfg.kind;
    sum["q_star"] = q_star;
    sum["clusters"] = dec.clusters.size();
    sum["weights"] = dec.weights;
    sum["pair_defect"] = dec.pair_defect;
    RunOutcome out;
    out.artifacts = {"histogram.csv", "defects.csv"};
    if (!cfg.tree_levels.empty() && !dec.clusters.empty() && dec.undefined_centers == 0) {
        double theta = cfg.tree_theta > 0 ? cfg.tree_theta : suggest_theta(M, dec);
        UltraTreeOptions uopt;
        uopt.masses = &s;
        UltraTree tree = build_ultratree(dec, cfg.tree_levels, theta, uopt);
        write_text(dir / "tree.json", tree.to_json() + "\n");
        sum["orthogonality_residual_max"] = tree.orthogonality_residual_max;
        out.artifacts.push_back("tree.json");
    }
    write_summary(dir, sum);
    return out;
}

RunOutcome run_landscape(const ExperimentConfig& cfg, const fs::path& dir) {
    LandscapeResult r = landscape_scan(cfg);
    std::string csv = "center_kind,h_per_site,band_fe,band_fe_se,constrained_fe,centered_fe,flags\n";
    for (auto& row : r.rows)
        csv += row.center_kind + "," + format_double(row.h_per_site) + "," +
               format_double(row.band_fe) + "," + format_double(row.band_fe_se) + "," +
               format_double(row.constrained_fe) + "," + format_double(row.centered_fe) + "," +
               row.flags + "\n";
    write_text(dir / "landscape.csv", csv);
    nlohmann::ordered_json sum;
    sum["kind"] = cfg.kind;
    sum["rank_correlation"] = r.rank_correlation;
    write_summary(dir, sum);
    RunOutcome out;
    out.artifacts = {"landscape.csv"};
    return out;
}

}  // namespace

LandscapeResult landscape_scan(const ExperimentConfig& cfg) {
    Disorder d = sample_disorder(cfg.mixture, cfg.n, cfg.seed);
    const double q = cfg.band_q ? *cfg.band_q : 0.5;
    const double delta = cfg.resolved_delta();
    const int m = cfg.resolved_m();
    const double rho = cfg.resolved_rho();

    struct Center {
        std::string kind;
        Vec point;
    };
    std::vector<Center> centers;
    for (int i = 0; i < cfg.centers_per_kind; ++i)
        centers.push_back({"uniform", uniform_sphere_point(cfg.n, q,
                                                           derive_seed(cfg.seed, 0x11u, i))});
    // tempered centers: states sampled at a moderate inverse temperature on
    // the inner sphere, rescaled
    for (int i = 0; i < cfg.centers_per_kind; ++i) {
        McmcOptions mo = cfg.mcmc;
        mo.seed = derive_seed(cfg.seed, 0x12u, i);
        mo.n_chains = 1;
        SampleSet s = mcmc_chain(d, cfg.beta / 2, q, std::nullopt, mo);
        centers.push_back({"tempered", s.points.back().coords});
    }
    {
        MinimizeOptions opts;
        opts.seed = derive_seed(cfg.seed, 0x13u);
        GroundStateResult g = minimize_on_sphere(d, q, cfg.restarts, opts);
        centers.push_back({"near-ground", g.minimizer.coords});
    }

    LandscapeResult out;
    std::vector<double> minus_h, fvals;
    for (auto& c : centers) {
        BandSpec band(Configuration(c.point), delta);
        McmcOptions mo = cfg.mcmc;
        mo.seed = derive_seed(cfg.seed, 0x14u);
        ConstrainedFe cf = centered_constrained_fe(d, cfg.beta, band, m, rho, q, cfg.grid_size,
                                                   mo, cfg.count);
        LandscapeRow row;
        row.center_kind = c.kind;
        row.h_per_site = d.energy(band.center) / double(cfg.n);
        row.band_fe = cf.band_fe.value;
        row.band_fe_se = cf.band_fe.std_error;
        row.constrained_fe = cf.constrained.value;
        row.centered_fe = cf.centered.value;
        row.flags = flags_to_string(cf.constrained.flags);
        out.rows.push_back(row);
        minus_h.push_back(-row.h_per_site);
        fvals.push_back(row.band_fe);
    }
    // Spearman rank correlation between -H/N and the band value
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = double(i);
        return r;
    };
    std::vector<double> ra = ranks(minus_h), rb = ranks(fvals);
    double ma = mean_of(ra), mb = mean_of(rb), num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    out.rank_correlation = da > 0 && db > 0 ? num / std::sqrt(da * db) : 0.0;
    return out;
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.out_dir.empty()) throw config_error("out", "config: output directory required");
    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw config_error("out", "config: cannot create output directory " + cfg.out_dir);
    set_worker_count(cfg.threads);
    write_manifest(cfg, dir);
    if (cfg.kind == "simulate") return run_simulate(cfg, dir);
    if (cfg.kind == "free-energy") return run_free_energy(cfg, dir);
    if (cfg.kind == "ground-state") return run_ground_state(cfg, dir);
    if (cfg.kind == "parisi") return run_parisi(cfg, dir);
    if (cfg.kind == "tap") return run_tap(cfg, dir);
    if (cfg.kind == "states") return run_states(cfg, dir);
    if (cfg.kind == "landscape") return run_landscape(cfg, dir);
    throw config_error("kind", "config: unknown kind " + cfg.kind);
}

}  // namespace spinglass
