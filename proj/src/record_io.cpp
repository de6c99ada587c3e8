#include "mbdl/record_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace mbdl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

double from_json_bound(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

std::string record_csv(const ExperimentRecord& rec) {
    std::ostringstream os;
    os << "abscissa,mean,stderr,n\n";
    for (const auto& p : rec.series)
        os << format_double(p.abscissa) << ',' << format_double(p.mean) << ',' << format_double(p.std_error) << ','
           << p.n << '\n';
    return os.str();
}

json to_json(const SpinLattice& lattice) {
    json edges = json::array();
    for (const auto& [a, b] : lattice.edges) edges.push_back({a, b});
    return {{"n_sites", lattice.n_sites}, {"label", lattice.label}, {"edges", edges}};
}

json to_json(const CouplingParams& params) {
    return {{"jx", params.jx}, {"jy", params.jy}, {"delta", params.delta}, {"j_eff", params.j_eff()}};
}

json to_json(const EnergyInterval& interval) {
    if (interval.is_full()) return {{"full", true}, {"lo", nullptr}, {"hi", nullptr}};
    return {{"full", false}, {"lo", interval.lo}, {"hi", interval.hi}};
}

json to_json(const BoundReport& r) {
    const auto& in = r.inputs;
    auto finite_or_null = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    return {{"inputs",
             {{"s", in.s},
              {"s1", in.s1},
              {"sprime_size", in.sprime_size},
              {"total_size", in.total_size},
              {"d_total", in.d_total()},
              {"j_eff", in.j_eff},
              {"sigma_b", in.sigma_b},
              {"interval_measure", in.interval_measure},
              {"k_universal", in.k_universal},
              {"distance", in.distance}}},
            {"zeta", finite_or_null(r.zeta)},
            {"sigma_b_min", r.sigma_b_min},
            {"c_of_s1", r.c_of_s1},
            {"lemma1_factor", r.lemma1_factor},
            {"phi_term", finite_or_null(r.phi_term)},
            {"prefactor", finite_or_null(r.prefactor)},
            {"exponential", r.exponential},
            {"full_rhs", finite_or_null(r.full_rhs)},
            {"zeta_positive", r.zeta_positive},
            {"regime", to_string(r.regime)}};
}

json to_json(const DecayFit& fit) {
    auto finite_or_null = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    return {{"c_fit", fit.c_fit},
            {"zeta_fit", finite_or_null(fit.zeta_fit)},
            {"slope", fit.slope},
            {"intercept", fit.intercept},
            {"r_squared", fit.r_squared},
            {"used", fit.used},
            {"excluded", fit.excluded},
            {"method", fit.method},
            {"warnings", fit.warnings}};
}

json record_metadata(const ExperimentRecord& rec) {
    json j = {{"kind", to_string(rec.kind)},
              {"label", rec.label},
              {"observable", rec.observable},
              {"version", version_string()},
              {"lattice", to_json(rec.lattice)},
              {"sprime_sites", rec.sprime_sites},
              {"couplings", to_json(rec.params)},
              {"sigma_b", rec.sigma_b},
              {"interval", to_json(rec.interval)},
              {"t_grid", rec.t_grid},
              {"realisations", rec.realisations},
              {"base_seed", rec.base_seed},
              {"seed_scheme", "child_seed(base_seed, r) = splitmix64 mix; MT19937-64; Box-Muller"},
              {"columns", {"abscissa", "mean", "stderr", "n"}}};
    if (rec.alpha) j["alpha"] = config_to_string(*rec.alpha, static_cast<int>(rec.sprime_sites.size()));
    if (rec.initial) j["initial"] = config_to_string(*rec.initial, rec.lattice.n_sites);
    if (!rec.sites.empty()) j["sites"] = rec.sites;
    return j;
}

void atomic_write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

fs::path sidecar_path(const fs::path& csv_path) {
    fs::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

void write_record(const ExperimentRecord& rec, const fs::path& csv_path) {
    // Sidecar first: a CSV is only considered complete once its metadata exists.
    atomic_write(sidecar_path(csv_path), record_metadata(rec).dump(2) + "\n");
    atomic_write(csv_path, record_csv(rec));
}

ExperimentRecord read_record(const fs::path& csv_path) {
    const json meta = json::parse(read_file(sidecar_path(csv_path)));
    ExperimentRecord rec;
    rec.kind = parse_record_kind(meta.at("kind").get<std::string>());
    rec.label = meta.value("label", "");
    rec.observable = meta.value("observable", "");
    const auto& lat = meta.at("lattice");
    rec.lattice.n_sites = lat.at("n_sites").get<int>();
    rec.lattice.label = lat.value("label", "");
    for (const auto& e : lat.at("edges")) rec.lattice.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    rec.sprime_sites = meta.at("sprime_sites").get<std::vector<int>>();
    const auto& cp = meta.at("couplings");
    rec.params = {cp.at("jx").get<double>(), cp.at("jy").get<double>(), cp.at("delta").get<double>()};
    rec.sigma_b = meta.at("sigma_b").get<double>();
    const auto& iv = meta.at("interval");
    rec.interval = {from_json_bound(iv.at("lo"), -std::numeric_limits<double>::infinity()),
                    from_json_bound(iv.at("hi"), std::numeric_limits<double>::infinity())};
    rec.t_grid = meta.at("t_grid").get<std::vector<double>>();
    rec.realisations = meta.at("realisations").get<std::size_t>();
    rec.base_seed = meta.at("base_seed").get<std::uint64_t>();
    if (meta.contains("alpha")) rec.alpha = config_from_string(meta["alpha"].get<std::string>());
    if (meta.contains("initial")) rec.initial = config_from_string(meta["initial"].get<std::string>());
    if (meta.contains("sites")) rec.sites = meta["sites"].get<std::vector<int>>();

    std::istringstream csv(read_file(csv_path));
    std::string line;
    if (!std::getline(csv, line) || line != "abscissa,mean,stderr,n")
        throw Error(csv_path.string() + ": unexpected CSV header");
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell[4];
        for (auto& c : cell)
            if (!std::getline(row, c, ',')) throw Error(csv_path.string() + ": malformed row '" + line + "'");
        rec.series.push_back({std::stod(cell[0]), std::stod(cell[1]), std::stod(cell[2]),
                              static_cast<std::size_t>(std::stoull(cell[3]))});
    }
    return rec;
}

bool record_complete(const fs::path& csv_path) {
    if (!fs::exists(csv_path) || !fs::exists(sidecar_path(csv_path))) return false;
    try {
        read_record(csv_path);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace mbdl
