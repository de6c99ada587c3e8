// mbdl: bounds, Green's function verification, disorder-averaged simulations
// and fits for the disordered XYZ model. All runs are driven by a JSON config.

#include "config.hpp"

#include "mbdl/bounds.hpp"
#include "mbdl/dynamics.hpp"
#include "mbdl/greens.hpp"
#include "mbdl/observables.hpp"
#include "mbdl/record_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mbdl;
using namespace mbdl::tools;

namespace {

/// Exit code 1: a verification or statistical check failed.
class CheckFailure : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
};

// ---------------------------------------------------------------------------
// Shared schema pieces

const Schema kLatticeSchema = {
    {"kind", Type::string, true},
    {"n_sites", Type::integer, true},
    {"width", Type::integer},
    {"edges", Type::edges},
    {"site_cap", Type::integer},
};
const Schema kCouplingSchema = {
    {"jx", Type::number, true},
    {"jy", Type::number, true},
    {"delta", Type::number, true},
};
const Schema kIntervalSchema = {
    {"lo", Type::number},
    {"hi", Type::number},
    {"fixed", Type::boolean},
};
const Schema kGridSchema = {
    {"min", Type::number, true},
    {"max", Type::number, true},
    {"points", Type::integer, true},
};

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

std::string short_fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

SpinLattice lattice_from(const json& j) {
    std::vector<std::pair<int, int>> edges;
    if (j.contains("edges"))
        for (const auto& e : j["edges"]) edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    return build_lattice(parse_lattice_kind(j["kind"].get<std::string>()), j["n_sites"].get<int>(), edges,
                         j.value("width", 0), j.value("site_cap", kDefaultSiteCap));
}

CouplingParams couplings_from(const json& j) {
    return {j["jx"].get<double>(), j["jy"].get<double>(), j["delta"].get<double>()};
}

std::uint64_t seed_from(const json& cfg, const Globals& g) {
    if (g.seed) return *g.seed;
    return cfg.value("seed", std::uint64_t{0});
}

std::vector<double> grid_from(const json& cfg, const std::string& list_key, const std::string& grid_key) {
    if (cfg.contains(list_key)) return cfg[list_key].get<std::vector<double>>();
    if (!cfg.contains(grid_key)) throw ConfigError("/" + list_key, "one of '" + list_key + "' or '" + grid_key + "' is required");
    const auto& g = cfg[grid_key];
    const double lo = g["min"].get<double>(), hi = g["max"].get<double>();
    const int n = g["points"].get<int>();
    if (!(lo > 0.0 && hi >= lo) || n < 1) throw ConfigError("/" + grid_key, "need 0 < min <= max and points >= 1");
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
    return out;
}

void write_json(const fs::path& path, const json& j) { atomic_write(path, j.dump(2) + "\n"); }

json provenance(const json& cfg, const Globals& g) {
    return {{"version", version_string()}, {"config", cfg}, {"config_path", g.config_path}};
}

// ---------------------------------------------------------------------------
// bounds

const Schema kBoundsSchema = {
    {"s", Type::number, true},
    {"s1", Type::number, true},
    {"sprime_size", Type::integer, true},
    {"total_size", Type::integer, true},
    {"j_eff", Type::number},
    {"couplings", Type::object, false, kCouplingSchema},
    {"sigma_b", Type::number, true},
    {"interval_measure", Type::number, true},
    {"k_universal", Type::number},
    {"distance", Type::integer},
    {"distances", Type::integers},
};

int cmd_bounds(const json& cfg, const Globals& g) {
    validate(cfg, kBoundsSchema);
    BoundInputs in;
    in.s = cfg["s"];
    in.s1 = cfg["s1"];
    in.sprime_size = cfg["sprime_size"];
    in.total_size = cfg["total_size"];
    if (cfg.contains("j_eff"))
        in.j_eff = cfg["j_eff"];
    else if (cfg.contains("couplings"))
        in.j_eff = couplings_from(cfg["couplings"]).j_eff();
    else
        throw ConfigError("/j_eff", "one of 'j_eff' or 'couplings' is required");
    in.sigma_b = cfg["sigma_b"];
    in.interval_measure = cfg["interval_measure"];
    in.k_universal = cfg.value("k_universal", 1.0);
    std::vector<int> distances;
    if (cfg.contains("distances")) distances = cfg["distances"].get<std::vector<int>>();
    if (cfg.contains("distance")) distances.push_back(cfg["distance"].get<int>());
    if (distances.empty()) throw ConfigError("/distances", "one of 'distance' or 'distances' is required");

    json reports = json::array();
    std::cout << std::setprecision(10);
    bool header = false;
    for (int d : distances) {
        in.distance = d;
        const auto r = theorem1_rhs(in);
        if (!header) {
            std::cout << "inputs: s = " << in.s << ", s1 = " << in.s1 << ", |S'| = " << in.sprime_size
                      << ", |system| = " << in.total_size << ", D = " << in.d_total() << ", J = " << in.j_eff
                      << ", sigma_b = " << in.sigma_b << ", |I| = " << in.interval_measure
                      << ", k_universal = " << in.k_universal << "\n"
                      << "sigma_b_min = " << r.sigma_b_min << "\n"
                      << "zeta = " << r.zeta << "\n"
                      << "zeta_positive = " << (r.zeta_positive ? "true" : "false") << "\n"
                      << "c[s1] = " << r.c_of_s1 << "\n"
                      << "lemma1_factor = " << r.lemma1_factor << "\n"
                      << "regime = " << to_string(r.regime) << "\n";
            header = true;
        }
        std::cout << "d = " << d << ": prefactor = " << r.prefactor << ", exponential = " << r.exponential
                  << ", full_rhs = " << r.full_rhs << "\n";
        reports.push_back(to_json(r));
    }
    json out = provenance(cfg, g);
    out["reports"] = reports;
    write_json(fs::path(g.out_dir) / "bounds.json", out);
    return 0;
}

// ---------------------------------------------------------------------------
// verify-greens

const Schema kVerifySchema = {
    {"min_sites", Type::integer},
    {"max_sites", Type::integer},
    {"max_sprime", Type::integer},
    {"draws", Type::integer},
    {"seed", Type::unsigned_integer},
    {"sigma_b", Type::number},
    {"eta", Type::number},
    {"tolerance", Type::number},
    {"sprime_cap", Type::integer},
    {"allow_override", Type::boolean},
    {"instances", Type::objects, false,
     {{"n_sites", Type::integer, true}, {"sprime_size", Type::integer, true}, {"seed", Type::unsigned_integer, true}}},
};

int cmd_verify_greens(const json& cfg, const Globals& g) {
    validate(cfg, kVerifySchema);
    const double sigma_b = cfg.value("sigma_b", 1.0);
    const double eta = cfg.value("eta", 0.1);
    const double tol = cfg.value("tolerance", 1e-9);
    PathSumOptions opts;
    opts.sprime_cap = cfg.value("sprime_cap", 4);
    opts.allow_override = cfg.value("allow_override", false);

    struct Job {
        int n_sites, sprime_size;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    if (cfg.contains("instances")) {
        for (const auto& i : cfg["instances"])
            jobs.push_back({i["n_sites"].get<int>(), i["sprime_size"].get<int>(), i["seed"].get<std::uint64_t>()});
    } else {
        const std::uint64_t base = seed_from(cfg, g);
        const int draws = cfg.value("draws", 20);
        for (int n = cfg.value("min_sites", 2); n <= cfg.value("max_sites", 6); ++n)
            for (int k = 1; k <= std::min(n, cfg.value("max_sprime", 4)); ++k)
                for (int r = 0; r < draws; ++r)
                    jobs.push_back({n, k, child_seed(child_seed(base, static_cast<std::uint64_t>(n * 64 + k)),
                                                     static_cast<std::uint64_t>(r))});
    }
    for (const auto& j : jobs)
        if (j.sprime_size > opts.sprime_cap && !opts.allow_override) {
            std::ostringstream msg;
            msg << "|S'| = " << j.sprime_size << " exceeds the path-sum cap of " << opts.sprime_cap
                << " (estimated cost " << pathsum_cost_estimate(j.sprime_size, j.n_sites - j.sprime_size)
                << " memoised block operations); set allow_override to run anyway";
            throw ConfigError("/max_sprime", msg.str());
        }

    std::vector<double> errors(jobs.size());
    parallel_for(jobs.size(), g.jobs, [&](std::size_t i) {
        const auto inst = random_greens_instance(jobs[i].n_sites, jobs[i].sprime_size, jobs[i].seed, sigma_b);
        errors[i] = check_greens_instance(inst, eta, opts).max_rel_error;
    });

    std::map<std::pair<int, int>, double> by_shape;
    json rows = json::array();
    std::vector<std::size_t> failing;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto& worst = by_shape[{jobs[i].n_sites, jobs[i].sprime_size}];
        worst = std::max(worst, errors[i]);
        rows.push_back({{"n_sites", jobs[i].n_sites},
                        {"sprime_size", jobs[i].sprime_size},
                        {"seed", jobs[i].seed},
                        {"max_rel_error", errors[i]}});
        if (!(errors[i] <= tol)) failing.push_back(i);
    }
    double overall = 0.0;
    std::cout << std::setprecision(3);
    for (const auto& [shape, worst] : by_shape) {
        std::cout << "n_sites = " << shape.first << ", |S'| = " << shape.second << ": max relative error " << worst
                  << "\n";
        overall = std::max(overall, worst);
    }
    std::cout << "overall max relative error " << overall << " (tolerance " << tol << ", " << jobs.size()
              << " instances)\n";
    json out = provenance(cfg, g);
    out["instances"] = rows;
    out["max_rel_error"] = overall;
    out["tolerance"] = tol;
    write_json(fs::path(g.out_dir) / "verify_greens.json", out);
    if (!failing.empty()) {
        std::cout << "FAIL: " << failing.size() << " instance(s) above tolerance:\n";
        for (std::size_t i : failing)
            std::cout << "  n_sites = " << jobs[i].n_sites << ", sprime_size = " << jobs[i].sprime_size
                      << ", seed = " << jobs[i].seed << ", error = " << errors[i] << "\n";
        throw CheckFailure("path-sum / oracle discrepancy above tolerance");
    }
    std::cout << "PASS\n";
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

const Schema kSimulateSchema = {
    {"experiment", Type::string, true},
    {"label", Type::string},
    {"lattice", Type::object, true, kLatticeSchema},
    {"sprime", Type::integers, true},
    {"enforce_nonadjacency", Type::boolean},
    {"couplings", Type::object, true, kCouplingSchema},
    {"sigma_b", Type::numbers, true},
    {"realisations", Type::unsigned_integer, true},
    {"seed", Type::unsigned_integer},
    {"interval", Type::object, false, kIntervalSchema},
    {"times", Type::numbers},
    {"t_grid", Type::object, false, {{"t_max", Type::number, true}, {"points", Type::integer, true}}},
    {"alpha", Type::string},
    {"initial", Type::string},
    {"sites", Type::integers},
    {"use_triangle", Type::boolean},
};

EnergyInterval interval_from(const json& cfg, const SpinLattice& lattice, const CouplingParams& params,
                             double sigma_b) {
    if (!cfg.contains("interval")) return {};
    const auto& iv = cfg["interval"];
    if (iv.value("fixed", false)) {
        if (iv.contains("lo") || iv.contains("hi")) throw ConfigError("/interval", "'fixed' excludes 'lo' and 'hi'");
        return default_fixed_interval(lattice, params, sigma_b);
    }
    EnergyInterval out;
    if (iv.contains("lo")) out.lo = iv["lo"].get<double>();
    if (iv.contains("hi")) out.hi = iv["hi"].get<double>();
    if (!(out.lo < out.hi)) throw ConfigError("/interval", "need lo < hi");
    return out;
}

int cmd_simulate(const json& cfg, const Globals& g) {
    validate(cfg, kSimulateSchema);
    const std::string kind = cfg["experiment"];
    if (kind != "decay" && kind != "magnetisation" && kind != "correlation")
        throw ConfigError("/experiment", "expected one of decay, magnetisation, correlation");
    const std::string label = cfg.value("label", kind);
    EnsembleConfig base;
    base.lattice = lattice_from(cfg["lattice"]);
    base.partition = make_partition(base.lattice, cfg["sprime"].get<std::vector<int>>(),
                                    cfg.value("enforce_nonadjacency", false));
    base.params = couplings_from(cfg["couplings"]);
    base.realisations = cfg["realisations"].get<std::size_t>();
    base.base_seed = seed_from(cfg, g);
    base.jobs = g.jobs;

    auto require = [&](const char* key) {
        if (!cfg.contains(key)) throw ConfigError(std::string("/") + key, "required for experiment '" + kind + "'");
    };
    const fs::path out_dir(g.out_dir);
    int written = 0, skipped = 0;
    for (double sigma : cfg["sigma_b"].get<std::vector<double>>()) {
        EnsembleConfig e = base;
        e.sigma_b = sigma;
        e.interval = interval_from(cfg, e.lattice, e.params, sigma);
        const std::string tag = "sigma_" + short_fmt(sigma);
        if (kind == "decay") {
            require("alpha");
            const fs::path path = out_dir / (label + "_" + tag + ".csv");
            if (record_complete(path)) {
                std::cout << "skip " << path.string() << " (complete)\n";
                ++skipped;
                continue;
            }
            DecayExperimentConfig c;
            static_cast<EnsembleConfig&>(c) = e;
            c.alpha = config_from_string(cfg["alpha"].get<std::string>());
            if (cfg["alpha"].get<std::string>().size() != e.partition.sprime_sites.size())
                throw ConfigError("/alpha", "length must equal |S'|");
            if (cfg.contains("t_grid")) {
                const double t_max = cfg["t_grid"]["t_max"].get<double>();
                const int points = cfg["t_grid"]["points"].get<int>();
                if (!(t_max > 0.0) || points < 2) throw ConfigError("/t_grid", "need t_max > 0 and points >= 2");
                for (int k = 0; k < points; ++k) c.t_grid.push_back(t_max * k / (points - 1));
            }
            c.use_triangle = cfg.value("use_triangle", false);
            auto rec = disorder_decay_experiment(c);
            rec.label = label;
            write_record(rec, path);
            std::cout << "wrote " << path.string() << "\n";
            ++written;
            continue;
        }
        require("initial");
        require("times");
        DynamicsConfig c;
        static_cast<EnsembleConfig&>(c) = e;
        const std::string init = cfg["initial"].get<std::string>();
        if (static_cast<int>(init.size()) != e.lattice.n_sites)
            throw ConfigError("/initial", "length must equal n_sites");
        c.initial = config_from_string(init);
        c.times = cfg["times"].get<std::vector<double>>();
        if (kind == "magnetisation") {
            const fs::path path = out_dir / (label + "_" + tag + ".csv");
            if (record_complete(path)) {
                std::cout << "skip " << path.string() << " (complete)\n";
                ++skipped;
                continue;
            }
            auto rec = simulate_magnetisation(c);
            rec.label = label;
            write_record(rec, path);
            std::cout << "wrote " << path.string() << "\n";
            ++written;
        } else {
            require("sites");
            const auto sites = cfg["sites"].get<std::vector<int>>();
            if (sites.size() != 2) throw ConfigError("/sites", "expected [i, j]");
            const fs::path tau_path = out_dir / (label + "_tau_" + tag + ".csv");
            const fs::path chi_path = out_dir / (label + "_ichi_" + tag + ".csv");
            if (record_complete(tau_path) && record_complete(chi_path)) {
                std::cout << "skip " << tau_path.string() << " (complete)\n";
                ++skipped;
                continue;
            }
            auto recs = simulate_correlation(c, sites[0], sites[1]);
            recs.tau.label = recs.i_chi.label = label;
            write_record(recs.tau, tau_path);
            write_record(recs.i_chi, chi_path);
            std::cout << "wrote " << tau_path.string() << " and " << chi_path.string() << "\n";
            ++written;
        }
    }
    std::cout << written << " record(s) written, " << skipped << " skipped\n";
    return 0;
}

// ---------------------------------------------------------------------------
// magnetisation and correlations bound curves

void write_curve(const fs::path& csv, const std::vector<double>& zetas,
                 const std::vector<std::pair<double, double>>& intervals, json meta) {
    std::ostringstream os;
    os << "zeta,lower,upper\n";
    for (std::size_t k = 0; k < zetas.size(); ++k)
        os << fmt(zetas[k]) << ',' << fmt(intervals[k].first) << ',' << fmt(intervals[k].second) << '\n';
    meta["columns"] = {"zeta", "lower", "upper"};
    write_json(sidecar_path(csv), meta);
    atomic_write(csv, os.str());
}

const Schema kMagnetisationSchema = {
    {"sprime_size", Type::integer},
    {"n0", Type::integer},
    {"weights", Type::weights},
    {"c", Type::number},
    {"zetas", Type::numbers},
    {"zeta_grid", Type::object, false, kGridSchema},
    {"clamp", Type::boolean},
    {"records", Type::strings},
    {"mode", Type::string},
    {"c_min", Type::number},
    {"c_max", Type::number},
};

int magnetisation_fit(const json& cfg, const Globals& g) {
    const std::string mode = cfg.value("mode", "joint");
    if (mode != "joint" && mode != "per-group") throw ConfigError("/mode", "expected 'joint' or 'per-group'");
    struct Obs {
        std::string path, group;
        double sigma_b, value, j_eff;
        int sprime_size, n0;
    };
    std::vector<Obs> obs;
    for (const auto& p : cfg["records"].get<std::vector<std::string>>()) {
        const auto rec = read_record(p);
        if (rec.kind != RecordKind::magnetisation_vs_time || !rec.initial)
            throw ConfigError("/records", p + " is not a magnetisation-vs-time record");
        if (rec.series.empty()) throw ConfigError("/records", p + " has no data");
        int n0 = 0;
        for (int s : rec.sprime_sites) n0 += bit(*rec.initial, s);
        std::string group;
        for (int s : rec.sprime_sites) group += std::to_string(s) + ",";
        obs.push_back({p, group, rec.sigma_b, rec.series.back().mean, rec.params.j_eff(),
                       static_cast<int>(rec.sprime_sites.size()), n0});
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < obs.size(); ++k) groups[mode == "joint" ? "all" : obs[k].group].push_back(k);

    json fits = json::array();
    bool all_found = true;
    for (const auto& [name, members] : groups) {
        std::vector<EnvelopePoint> pts;
        for (std::size_t k : members) {
            const auto& o = obs[k];
            pts.push_back({o.sigma_b, o.value, [o](double c, double zeta) {
                               const auto b = magnetisation_bounds(o.sprime_size, o.n0, c, zeta);
                               return std::make_pair(b.lower, b.upper);
                           }});
        }
        const auto fit = fit_envelope(pts, obs[members.front()].j_eff, cfg.value("c_min", 0.25), cfg.value("c_max", 4.0));
        json f = {{"group", name}, {"found", fit.found}};
        if (fit.found) {
            f["c_fit"] = fit.c_fit;
            f["zeta0"] = fit.zeta0;
            f["j_eff"] = fit.j_eff;
            json points = json::array();
            for (std::size_t i = 0; i < members.size(); ++i) {
                const auto& o = obs[members[i]];
                points.push_back({{"record", o.path},
                                  {"sigma_b", o.sigma_b},
                                  {"M", o.value},
                                  {"zeta", fit.zeta_at(o.sigma_b)},
                                  {"lower", fit.intervals[i].first},
                                  {"upper", fit.intervals[i].second}});
            }
            f["points"] = points;
            std::cout << "group " << name << ": C = " << fit.c_fit << ", zeta0 = " << fit.zeta0 << "\n";
        } else {
            all_found = false;
            std::cout << "group " << name << ": no enclosing (C, zeta) on the grid\n";
        }
        fits.push_back(f);
    }
    json out = provenance(cfg, g);
    out["model"] = "zeta(sigma_b) = zeta0 / ln(1 + sigma_b / J)";
    out["fits"] = fits;
    write_json(fs::path(g.out_dir) / "magnetisation_fit.json", out);
    if (!all_found) throw CheckFailure("envelope fit failed");
    return 0;
}

int cmd_magnetisation(const json& cfg, const Globals& g) {
    validate(cfg, kMagnetisationSchema);
    if (cfg.contains("records")) return magnetisation_fit(cfg, g);
    if (!cfg.contains("sprime_size")) throw ConfigError("/sprime_size", "missing required key");
    const int sp = cfg["sprime_size"];
    const double c = cfg.value("c", 1.0);
    const bool clamp = cfg.value("clamp", false);
    const auto zetas = grid_from(cfg, "zetas", "zeta_grid");
    std::map<Config, double> weights;
    if (cfg.contains("weights")) {
        for (const auto& [bits, w] : cfg["weights"].items()) {
            if (static_cast<int>(bits.size()) != sp) throw ConfigError("/weights/" + bits, "length must equal |S'|");
            weights[config_from_string(bits)] = w.get<double>();
        }
    } else if (!cfg.contains("n0")) {
        throw ConfigError("/n0", "one of 'n0' or 'weights' is required");
    }
    std::vector<std::pair<double, double>> rows;
    bool out_of_range = false;
    for (double z : zetas) {
        auto b = weights.empty() ? magnetisation_bounds(sp, cfg["n0"].get<int>(), c, z)
                                 : magnetisation_bounds_mixed(weights, sp, c, z);
        out_of_range = out_of_range || b.out_of_range;
        if (clamp) b = b.clamped();
        rows.emplace_back(b.lower, b.upper);
    }
    if (out_of_range) std::cout << "note: some endpoints lie outside [-1, 1]" << (clamp ? " (clamped)" : "") << "\n";
    const fs::path csv = fs::path(g.out_dir) / "magnetisation_bounds.csv";
    json meta = provenance(cfg, g);
    meta["out_of_range"] = out_of_range;
    write_curve(csv, zetas, rows, meta);
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
}

const Schema kCorrelationsSchema = {
    {"sprime_size", Type::integer, true},
    {"alpha", Type::string, true},
    {"i", Type::integer, true},
    {"j", Type::integer, true},
    {"c", Type::number},
    {"zetas", Type::numbers},
    {"zeta_grid", Type::object, false, kGridSchema},
};

int cmd_correlations(const json& cfg, const Globals& g) {
    validate(cfg, kCorrelationsSchema);
    const int sp = cfg["sprime_size"];
    const std::string bits = cfg["alpha"];
    if (static_cast<int>(bits.size()) != sp) throw ConfigError("/alpha", "length must equal |S'|");
    const Config alpha = config_from_string(bits);
    const int i = cfg["i"], j = cfg["j"];
    const double c = cfg.value("c", 1.0);
    const auto zetas = grid_from(cfg, "zetas", "zeta_grid");
    std::vector<std::pair<double, double>> tau, chi;
    for (double z : zetas) {
        const auto ij = correlation_bounds(sp, alpha, i, j, c, z);
        const auto ji = correlation_bounds(sp, alpha, j, i, c, z);
        tau.emplace_back(ij.tau_minus, ij.tau_plus);
        chi.push_back(susceptibility_bound(ij, ji));
    }
    const json meta = provenance(cfg, g);
    const fs::path tau_csv = fs::path(g.out_dir) / "correlations_tau.csv";
    const fs::path chi_csv = fs::path(g.out_dir) / "correlations_ichi.csv";
    write_curve(tau_csv, zetas, tau, meta);
    write_curve(chi_csv, zetas, chi, meta);
    std::cout << "wrote " << tau_csv.string() << " and " << chi_csv.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fit

const Schema kFitSchema = {
    {"inputs", Type::strings, true},
    {"mode", Type::string},
    {"min_distance", Type::number},
};

int cmd_fit(const json& cfg, const Globals& g) {
    validate(cfg, kFitSchema);
    const std::string mode = cfg.value("mode", "joint");
    if (mode != "joint" && mode != "per-record") throw ConfigError("/mode", "expected 'joint' or 'per-record'");
    const double min_d = cfg.value("min_distance", 1.0);
    const auto inputs = cfg["inputs"].get<std::vector<std::string>>();
    if (inputs.empty()) throw ConfigError("/inputs", "no input records");

    std::vector<ExperimentRecord> recs;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        recs.push_back(read_record(inputs[k]));
        if (recs.back().kind != RecordKind::decay_vs_distance)
            throw ConfigError("/inputs/" + std::to_string(k),
                              inputs[k] + " is a " + to_string(recs.back().kind) + " record, expected decay-vs-distance");
    }
    auto points_of = [&](const ExperimentRecord& r) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : r.series)
            if (p.abscissa >= min_d) pts.emplace_back(p.abscissa, p.mean);
        return pts;
    };
    auto describe = [&](std::size_t k) {
        return json{{"path", inputs[k]}, {"base_seed", recs[k].base_seed}, {"sigma_b", recs[k].sigma_b},
                    {"realisations", recs[k].realisations}, {"label", recs[k].label}};
    };
    json fits = json::array();
    if (mode == "joint") {
        std::vector<std::pair<double, double>> all;
        json sources = json::array();
        for (std::size_t k = 0; k < recs.size(); ++k) {
            const auto p = points_of(recs[k]);
            all.insert(all.end(), p.begin(), p.end());
            sources.push_back(describe(k));
        }
        json f = to_json(fit_decay(all));
        f["sources"] = sources;
        fits.push_back(f);
    } else {
        for (std::size_t k = 0; k < recs.size(); ++k) {
            json f = to_json(fit_decay(points_of(recs[k])));
            f["sources"] = json::array({describe(k)});
            fits.push_back(f);
        }
    }
    for (const auto& f : fits) {
        std::cout << "C = " << f["c_fit"] << ", zeta = " << f["zeta_fit"] << ", r^2 = " << f["r_squared"] << "\n";
        for (const auto& w : f["warnings"]) std::cout << "warning: " << w.get<std::string>() << "\n";
    }
    json out = provenance(cfg, g);
    out["mode"] = mode;
    out["fits"] = fits;
    write_json(fs::path(g.out_dir) / "fit.json", out);
    return 0;
}

// ---------------------------------------------------------------------------
// stats

const Schema kStatsSchema = {
    {"sprime_size", Type::integer},
    {"sigma_b", Type::number},
    {"draws", Type::unsigned_integer},
    {"seed", Type::unsigned_integer},
    {"conditional_max_sprime", Type::integer},
    {"condition", Type::objects, false, {{"target", Type::string, true}, {"given", Type::strings, true}}},
};

int cmd_stats(const json& cfg, const Globals& g) {
    validate(cfg, kStatsSchema);
    const int sp = cfg.value("sprime_size", 4);
    const double sigma = cfg.value("sigma_b", 1.0);
    const std::size_t draws = cfg.value("draws", std::size_t{100000});
    const int cond_max = cfg.value("conditional_max_sprime", sp);
    if (sp < 1 || sp > 10) throw ConfigError("/sprime_size", "expected 1..10");
    if (!(sigma > 0.0)) throw ConfigError("/sigma_b", "must be > 0");
    if (draws < 2) throw ConfigError("/draws", "need at least 2 draws");
    if (cond_max < 0 || cond_max > 20) throw ConfigError("/conditional_max_sprime", "expected 0..20");
    const std::uint64_t seed = seed_from(cfg, g);
    bool ok = true;
    json out = provenance(cfg, g);

    // Empirical covariance of all 2^|S'| potentials.
    const std::size_t nc = std::size_t{1} << sp;
    Eigen::MatrixXd coeff(static_cast<Eigen::Index>(nc), sp);
    for (Config a = 0; a < nc; ++a) coeff.row(static_cast<Eigen::Index>(a)) = coefficient_vector(a, sp);
    Eigen::MatrixXd y(static_cast<Eigen::Index>(draws), static_cast<Eigen::Index>(nc));
    parallel_for(draws, g.jobs, [&](std::size_t r) {
        GaussianSource src(child_seed(seed, r));
        Eigen::VectorXd b(sp);
        for (int k = 0; k < sp; ++k) b[k] = sigma * src.normal();
        y.row(static_cast<Eigen::Index>(r)) = (coeff * b).transpose();
    });
    const Eigen::RowVectorXd mean = y.colwise().mean();
    const Eigen::MatrixXd centred = y.rowwise() - mean;
    double worst_z = 0.0;
    json table = json::array();
    std::cout << std::setprecision(6);
    for (Config a = 0; a < nc; ++a)
        for (Config b = a; b < nc; ++b) {
            const Eigen::ArrayXd prod = centred.col(static_cast<Eigen::Index>(a)).array() *
                                        centred.col(static_cast<Eigen::Index>(b)).array();
            const double n = static_cast<double>(draws);
            const double emp = prod.sum() / (n - 1.0);
            const double se = std::sqrt((prod - prod.mean()).square().sum() / (n - 1.0) / n);
            const double analytic = (sp - 2 * hamming(a, b)) * sigma * sigma;
            const double z = std::abs(emp - analytic) / se;
            worst_z = std::max(worst_z, z);
            table.push_back({{"beta", config_to_string(a, sp)},
                             {"gamma", config_to_string(b, sp)},
                             {"empirical", emp},
                             {"analytic", analytic},
                             {"std_error", se},
                             {"z", z}});
        }
    std::cout << "covariance: " << table.size() << " pairs, " << draws << " draws, max |empirical - analytic| / se = "
              << worst_z << (worst_z <= 4.0 ? "  (within 4 se)" : "  (EXCEEDS 4 se)") << "\n";
    ok = ok && worst_z <= 4.0;
    out["covariance"] = table;
    out["covariance_max_z"] = worst_z;

    // Conditional variance given |S'| - 1 hypercube neighbours, for every alpha.
    json cond = json::array();
    for (int s = 1; s <= cond_max; ++s) {
        double min_var = std::numeric_limits<double>::infinity();
        Config argmin = 0;
        for (Config a = 0; a < (Config{1} << s); ++a) {
            const double v = conditional_variance(covariance_matrix(neighbour_conditioning_set(a, s), s, sigma), 0);
            if (v < min_var) {
                min_var = v;
                argmin = a;
            }
        }
        const bool pass = min_var >= sigma * sigma * (1.0 - 1e-9);
        ok = ok && pass;
        std::cout << "conditional variance, |S'| = " << s << ": min over alpha = " << min_var << " (sigma_b^2 = "
                  << sigma * sigma << ")" << (pass ? "" : "  BELOW sigma_b^2 at alpha = " + config_to_string(argmin, s))
                  << "\n";
        cond.push_back({{"sprime_size", s}, {"min_variance", min_var}, {"argmin", config_to_string(argmin, s)},
                        {"pass", pass}});
    }
    out["conditional_neighbours"] = cond;

    if (cfg.contains("condition")) {
        json extra = json::array();
        for (std::size_t k = 0; k < cfg["condition"].size(); ++k) {
            const auto& c = cfg["condition"][k];
            std::vector<Config> set{config_from_string(c["target"].get<std::string>())};
            for (const auto& gv : c["given"]) {
                if (gv.get<std::string>().size() != static_cast<std::size_t>(sp))
                    throw ConfigError("/condition/" + std::to_string(k), "configurations must have |S'| bits");
                set.push_back(config_from_string(gv.get<std::string>()));
            }
            try {
                const double v = conditional_variance(covariance_matrix(set, sp, sigma), 0);
                std::cout << "Var(Y_" << c["target"].get<std::string>() << " | given) = " << v << "\n";
                extra.push_back({{"target", c["target"]}, {"given", c["given"]}, {"variance", v}});
            } catch (const SingularityError& e) {
                throw ConfigError("/condition/" + std::to_string(k), e.what());
            }
        }
        out["conditional_requests"] = extra;
    }
    write_json(fs::path(g.out_dir) / "stats.json", out);
    if (!ok) throw CheckFailure("statistical check failed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Many-body dynamical localisation in the disordered XYZ model"};
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    g.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "base seed, overriding the config");
    app.add_option("--out", g.out_dir, "output directory");

    using Handler = int (*)(const json&, const Globals&);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
        {"bounds", "evaluate the localisation bound and its constants", cmd_bounds},
        {"verify-greens", "compare path-sums with the dense resolvent on random instances", cmd_verify_greens},
        {"simulate", "disorder-averaged decay, magnetisation or correlation experiments", cmd_simulate},
        {"magnetisation", "magnetisation bound curves, or an envelope fit to records", cmd_magnetisation},
        {"correlations", "correlation and susceptibility bound curves", cmd_correlations},
        {"fit", "fit C and zeta to decay-vs-distance records", cmd_fit},
        {"stats", "configuration-potential covariance and conditional variances", cmd_stats},
    };
    for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    if (*seed_opt) g.seed = seed;

    try {
        const json cfg = load_config(g.config_path);
        for (const auto& [name, help, fn] : commands)
            if (app.got_subcommand(name)) return fn(cfg, g);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 1;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return 1;
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const SizeError& e) {
        std::cerr << "size error: " << e.what() << "\n";
        return 2;
    } catch (const ConstructionError& e) {
        std::cerr << "construction error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
