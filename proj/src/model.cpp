#include "mbdl/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace mbdl {

bool SpinLattice::adjacent(int a, int b) const {
    const auto key = std::minmax(a, b);
    return std::binary_search(edges.begin(), edges.end(), std::pair<int, int>(key.first, key.second));
}

SpinLattice build_lattice(LatticeKind kind, int n_sites, const std::vector<std::pair<int, int>>& extra, int width,
                          int site_cap) {
    if (n_sites < 1) throw ParameterError("build_lattice: n_sites must be >= 1");
    if (n_sites > site_cap)
        throw SizeError("build_lattice: n_sites = " + std::to_string(n_sites) + " exceeds the cap of " +
                        std::to_string(site_cap));
    if (kind != LatticeKind::custom && !extra.empty())
        throw ParameterError("build_lattice: an explicit edge list is only accepted for custom lattices");

    SpinLattice lat;
    lat.n_sites = n_sites;
    std::vector<std::pair<int, int>> raw;
    switch (kind) {
        case LatticeKind::chain:
            for (int i = 0; i + 1 < n_sites; ++i) raw.emplace_back(i, i + 1);
            lat.label = "chain";
            break;
        case LatticeKind::ring:
            for (int i = 0; i + 1 < n_sites; ++i) raw.emplace_back(i, i + 1);
            if (n_sites > 2) raw.emplace_back(n_sites - 1, 0);
            lat.label = "ring";
            break;
        case LatticeKind::grid2d: {
            if (width < 1 || n_sites % width != 0)
                throw ParameterError("build_lattice: grid2d needs a width dividing n_sites");
            const int height = n_sites / width;
            for (int r = 0; r < height; ++r)
                for (int c = 0; c < width; ++c) {
                    const int site = r * width + c;
                    if (c + 1 < width) raw.emplace_back(site, site + 1);
                    if (r + 1 < height) raw.emplace_back(site, site + width);
                }
            lat.label = "grid2d " + std::to_string(width) + "x" + std::to_string(height);
            break;
        }
        case LatticeKind::custom:
            raw = extra;
            lat.label = "custom";
            break;
    }

    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : raw) {
        if (a < 0 || b < 0 || a >= n_sites || b >= n_sites)
            throw ConstructionError("build_lattice: edge (" + std::to_string(a) + "," + std::to_string(b) +
                                    ") references a site outside the lattice");
        if (a == b) throw ConstructionError("build_lattice: self-edge at site " + std::to_string(a));
        const auto key = std::minmax(a, b);
        if (!seen.emplace(key.first, key.second).second)
            throw ConstructionError("build_lattice: duplicate edge (" + std::to_string(key.first) + "," +
                                    std::to_string(key.second) + ")");
    }
    lat.edges.assign(seen.begin(), seen.end());
    return lat;
}

LatticeKind parse_lattice_kind(const std::string& name) {
    if (name == "chain") return LatticeKind::chain;
    if (name == "ring") return LatticeKind::ring;
    if (name == "grid2d") return LatticeKind::grid2d;
    if (name == "custom") return LatticeKind::custom;
    throw ParameterError("unknown lattice kind '" + name + "'");
}

DisorderRealization sample_disorder(double sigma_b, std::uint64_t seed, int n_sites) {
    if (!(sigma_b > 0.0)) throw ParameterError("sample_disorder: sigma_b must be > 0");
    if (n_sites < 0) throw ParameterError("sample_disorder: n_sites must be >= 0");
    DisorderRealization out;
    out.sigma_b = sigma_b;
    out.seed = seed;
    out.b_fields.resize(n_sites);
    GaussianSource rng(seed);
    for (int i = 0; i < n_sites; ++i) out.b_fields[i] = sigma_b * rng.normal();
    return out;
}

Config SystemPartition::embed(Config omega, Config s_config) const {
    Config full = 0;
    for (std::size_t k = 0; k < sprime_sites.size(); ++k)
        if (bit(omega, static_cast<int>(k))) full |= Config{1} << sprime_sites[k];
    for (std::size_t k = 0; k < s_sites.size(); ++k)
        if (bit(s_config, static_cast<int>(k))) full |= Config{1} << s_sites[k];
    return full;
}

Config SystemPartition::restrict_to_sprime(Config full) const {
    Config out = 0;
    for (std::size_t k = 0; k < sprime_sites.size(); ++k)
        if (bit(full, sprime_sites[k])) out |= Config{1} << k;
    return out;
}

SystemPartition make_partition(const SpinLattice& lattice, std::vector<int> sprime_sites, bool enforce_nonadjacency) {
    SystemPartition p;
    p.n_sites = lattice.n_sites;
    std::set<int> seen;
    for (int s : sprime_sites) {
        if (s < 0 || s >= lattice.n_sites)
            throw ParameterError("make_partition: site " + std::to_string(s) + " is outside the lattice");
        if (!seen.insert(s).second) throw ParameterError("make_partition: site " + std::to_string(s) + " repeated");
    }
    if (enforce_nonadjacency) {
        if (sprime_sites.empty()) throw ParameterError("make_partition: S' must contain at least one site");
        for (std::size_t a = 0; a < sprime_sites.size(); ++a)
            for (std::size_t b = a + 1; b < sprime_sites.size(); ++b)
                if (lattice.adjacent(sprime_sites[a], sprime_sites[b]))
                    throw ParameterError("make_partition: S' sites " + std::to_string(sprime_sites[a]) + " and " +
                                         std::to_string(sprime_sites[b]) + " are adjacent");
    }
    for (int i = 0; i < lattice.n_sites; ++i)
        if (!seen.count(i)) p.s_sites.push_back(i);
    p.sprime_sites = std::move(sprime_sites);
    p.nonadjacency_enforced = enforce_nonadjacency;
    return p;
}

std::vector<Eigen::Index> tensor_order(const SystemPartition& partition) {
    const std::size_t d = partition.block_dim();
    std::vector<Eigen::Index> order(partition.n_configs() * d);
    for (Config omega = 0; omega < partition.n_configs(); ++omega)
        for (Config a = 0; a < d; ++a)
            order[omega * d + a] = static_cast<Eigen::Index>(partition.embed(omega, a));
    return order;
}

template <typename Scalar>
Matrix<Scalar> build_full_hamiltonian(const SpinLattice& lattice, const CouplingParams& params,
                                      const Eigen::VectorXd& fields) {
    if (fields.size() != lattice.n_sites)
        throw ParameterError("build_full_hamiltonian: disorder length " + std::to_string(fields.size()) +
                             " != n_sites " + std::to_string(lattice.n_sites));
    const Eigen::Index dim = Eigen::Index{1} << lattice.n_sites;
    Matrix<Scalar> h = Matrix<Scalar>::Zero(dim, dim);
    const double exchange = params.jx + params.jy;  // up-down <-> down-up
    const double pairing = params.jx - params.jy;   // up-up <-> down-down
    for (Eigen::Index x = 0; x < dim; ++x) {
        const Config c = static_cast<Config>(x);
        double diag = 0.0;
        for (int i = 0; i < lattice.n_sites; ++i) diag += fields[i] * (bit(c, i) ? 1.0 : -1.0);
        for (auto [i, j] : lattice.edges) {
            const bool same = bit(c, i) == bit(c, j);
            diag += params.delta * (same ? 1.0 : -1.0);
            const double amp = same ? pairing : exchange;
            if (amp != 0.0) {
                const Config flipped = c ^ (Config{1} << i) ^ (Config{1} << j);
                h(static_cast<Eigen::Index>(flipped), x) += Scalar(amp);
            }
        }
        h(x, x) += Scalar(diag);
    }
    return h;
}

template Matrix<double> build_full_hamiltonian<double>(const SpinLattice&, const CouplingParams&,
                                                       const Eigen::VectorXd&);
template Matrix<cplx> build_full_hamiltonian<cplx>(const SpinLattice&, const CouplingParams&,
                                                   const Eigen::VectorXd&);

double configuration_potential(const SystemPartition& partition, Config alpha, const Eigen::VectorXd& fields) {
    double y = 0.0;
    for (int k = 0; k < partition.sprime_size(); ++k)
        y += fields[partition.sprime_sites[k]] * (bit(alpha, k) ? 1.0 : -1.0);
    return y;
}

Eigen::RowVectorXd coefficient_vector(Config alpha, int sprime_size) {
    Eigen::RowVectorXd v(sprime_size);
    for (int k = 0; k < sprime_size; ++k) v[k] = bit(alpha, k) ? 1.0 : -1.0;
    return v;
}

ConfigPotentialStats covariance_matrix(const std::vector<Config>& configs, int sprime_size, double sigma_b) {
    if (configs.empty()) throw ParameterError("covariance_matrix: empty configuration list");
    if (!(sigma_b > 0.0)) throw ParameterError("covariance_matrix: sigma_b must be > 0");
    if (sprime_size < 1 || sprime_size > 63) throw ParameterError("covariance_matrix: bad |S'|");
    std::set<Config> distinct;
    for (Config c : configs) {
        if (c >> sprime_size) throw ParameterError("covariance_matrix: configuration has bits beyond |S'|");
        if (!distinct.insert(c).second)
            throw ParameterError("covariance_matrix: configuration " + config_to_string(c, sprime_size) +
                                 " listed twice");
    }
    ConfigPotentialStats st;
    st.configs = configs;
    st.sprime_size = sprime_size;
    st.sigma_b = sigma_b;
    const auto n = static_cast<Eigen::Index>(configs.size());
    st.coefficient_matrix.resize(n, sprime_size);
    for (Eigen::Index r = 0; r < n; ++r) st.coefficient_matrix.row(r) = coefficient_vector(configs[r], sprime_size);
    st.covariance.resize(n, n);
    const double var = sigma_b * sigma_b;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            st.covariance(a, b) = (sprime_size - 2 * hamming(configs[a], configs[b])) * var;
    return st;
}

double conditional_variance(const ConfigPotentialStats& stats, int target_index) {
    const auto n = static_cast<Eigen::Index>(stats.configs.size());
    if (target_index < 0 || target_index >= n) throw ParameterError("conditional_variance: target index out of range");

    // Rows of C that add nothing to the span of the rows before them.
    std::vector<int> dependent;
    Eigen::MatrixXd basis(0, stats.sprime_size);
    for (Eigen::Index r = 0; r < n; ++r) {
        Eigen::MatrixXd trial(basis.rows() + 1, stats.sprime_size);
        trial << basis, stats.coefficient_matrix.row(r);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(trial);
        if (lu.rank() == trial.rows())
            basis = trial;
        else
            dependent.push_back(static_cast<int>(r));
    }
    if (!dependent.empty()) {
        std::ostringstream msg;
        msg << "conditional_variance: covariance matrix is singular; rows";
        for (int r : dependent) msg << ' ' << r << " (" << config_to_string(stats.configs[r], stats.sprime_size) << ')';
        msg << " are linear combinations of earlier rows";
        throw SingularityError(msg.str(), dependent);
    }

    Eigen::VectorXd unit = Eigen::VectorXd::Unit(n, target_index);
    Eigen::LLT<Eigen::MatrixXd> llt(stats.covariance);
    if (llt.info() != Eigen::Success)
        throw SingularityError("conditional_variance: covariance matrix is not positive definite", {});
    const double precision = unit.dot(llt.solve(unit));
    return 1.0 / precision;
}

std::vector<Config> neighbour_conditioning_set(Config alpha, int sprime_size) {
    if (sprime_size < 1 || sprime_size > 62 || alpha >> sprime_size)
        throw ParameterError("neighbour_conditioning_set: configuration out of range");
    std::vector<Config> out{alpha};
    for (int k = 0; k + 1 < sprime_size; ++k) out.push_back(alpha ^ (Config{1} << k));
    return out;
}

std::string config_to_string(Config c, int n_bits) {
    std::string s(static_cast<std::size_t>(n_bits), '0');
    for (int k = 0; k < n_bits; ++k)
        if (bit(c, k)) s[static_cast<std::size_t>(k)] = '1';
    return s;
}

Config config_from_string(const std::string& bits) {
    if (bits.size() > 63) throw ParameterError("configuration string too long");
    Config c = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] == '1' || bits[k] == 'u' || bits[k] == 'U')
            c |= Config{1} << k;
        else if (bits[k] != '0' && bits[k] != 'd' && bits[k] != 'D')
            throw ParameterError("configuration string '" + bits + "' must contain only 0/1 (or d/u)");
    }
    return c;
}

}  // namespace mbdl
