#include "mbdl/dynamics.hpp"

#include "mbdl/configgraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mbdl {

// ---------------------------------------------------------------------------
// Spectral data

std::size_t SpectralData::rank() const {
    std::size_t r = 0;
    for (const auto& c : components) r += static_cast<std::size_t>(c.eigenvalues.size());
    return r;
}

Eigen::VectorXd SpectralData::eigenvalues() const {
    std::vector<double> all;
    for (const auto& c : components) all.insert(all.end(), c.eigenvalues.begin(), c.eigenvalues.end());
    std::sort(all.begin(), all.end());
    return Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
}

Eigen::MatrixXd SpectralData::projector() const {
    if (!complete) throw ContractError("SpectralData::projector: decomposition is partial");
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& c : components) {
        const Eigen::MatrixXd local = c.eigenvectors * c.eigenvectors.transpose();
        for (std::size_t a = 0; a < c.basis.size(); ++a)
            for (std::size_t b = 0; b < c.basis.size(); ++b)
                p(c.basis[a], c.basis[b]) = local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    return p;
}

Eigen::VectorXcd SpectralData::evolve_basis_state(Eigen::Index index, double t) const {
    if (index < 0 || index >= dim) throw ParameterError("evolve_basis_state: index out of range");
    const int ci = component_of[index];
    if (ci < 0) throw ContractError("evolve_basis_state: component of the state was not diagonalised");
    const auto& c = components[ci];
    const Eigen::VectorXd overlap = c.eigenvectors.row(local_index[index]).transpose();
    Eigen::VectorXcd coeff(overlap.size());
    for (Eigen::Index k = 0; k < overlap.size(); ++k) coeff[k] = std::polar(overlap[k], -c.eigenvalues[k] * t);
    const Eigen::VectorXcd local = c.eigenvectors.cast<cplx>() * coeff;
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
    for (std::size_t a = 0; a < c.basis.size(); ++a) out[c.basis[a]] = local[static_cast<Eigen::Index>(a)];
    return out;
}

SpectralData spectral_projector(const Eigen::MatrixXd& full_h, EnergyInterval interval,
                                const std::vector<Eigen::Index>* needed) {
    const Eigen::Index n = full_h.rows();
    if (full_h.cols() != n) throw ParameterError("spectral_projector: matrix must be square");
    if (!(interval.lo <= interval.hi)) throw ParameterError("spectral_projector: empty interval");

    // Union-find over nonzero couplings.
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    auto find = [&](Eigen::Index x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < c; ++r)
            if (full_h(r, c) != 0.0 || full_h(c, r) != 0.0) {
                const Eigen::Index a = find(r), b = find(c);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }

    std::map<Eigen::Index, std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < n; ++i) groups[find(i)].push_back(i);
    std::vector<char> wanted;
    if (needed) {
        wanted.assign(static_cast<std::size_t>(n), 0);
        for (Eigen::Index i : *needed) {
            if (i < 0 || i >= n) throw ParameterError("spectral_projector: needed index out of range");
            wanted[find(i)] = 1;
        }
    }

    SpectralData out;
    out.dim = n;
    out.interval = interval;
    out.component_of.assign(static_cast<std::size_t>(n), -1);
    out.local_index.assign(static_cast<std::size_t>(n), -1);
    for (auto& [root, basis] : groups) {
        if (needed && !wanted[root]) {
            out.complete = false;
            continue;
        }
        const auto m = static_cast<Eigen::Index>(basis.size());
        Eigen::MatrixXd h(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b) h(a, b) = full_h(basis[a], basis[b]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        if (es.info() != Eigen::Success) throw NumericError("spectral_projector: eigensolver failed");
        std::vector<Eigen::Index> keep;
        for (Eigen::Index k = 0; k < m; ++k)
            if (interval.contains(es.eigenvalues()[k])) keep.push_back(k);
        SpectralComponent comp;
        comp.eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
        comp.eigenvectors.resize(m, static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            comp.eigenvalues[static_cast<Eigen::Index>(k)] = es.eigenvalues()[keep[k]];
            comp.eigenvectors.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
        }
        const int id = static_cast<int>(out.components.size());
        for (Eigen::Index a = 0; a < m; ++a) {
            out.component_of[basis[a]] = id;
            out.local_index[basis[a]] = a;
        }
        comp.basis = std::move(basis);
        out.components.push_back(std::move(comp));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Flip norms

FlipNormEvaluator::FlipNormEvaluator(const SpectralData& spectral, const SystemPartition& partition, Config alpha)
    : spectral_(spectral), n_configs_(partition.n_configs()) {
    if (alpha >= n_configs_) throw ParameterError("FlipNormEvaluator: configuration out of range");
    if (spectral.dim != (Eigen::Index{1} << partition.n_sites))
        throw ParameterError("FlipNormEvaluator: spectral data does not match the partition");
    for (std::size_t ci = 0; ci < spectral.components.size(); ++ci) {
        const auto& c = spectral.components[ci];
        std::vector<std::vector<Eigen::Index>> rows(n_configs_);
        for (std::size_t a = 0; a < c.basis.size(); ++a)
            rows[partition.restrict_to_sprime(static_cast<Config>(c.basis[a]))].push_back(
                static_cast<Eigen::Index>(a));
        if (rows[alpha].empty() || c.eigenvalues.size() == 0) continue;
        Piece p;
        p.component = static_cast<int>(ci);
        p.alpha_rows = c.eigenvectors(rows[alpha], Eigen::all).transpose();
        p.omega_rows.resize(n_configs_);
        for (std::size_t w = 0; w < n_configs_; ++w)
            if (!rows[w].empty()) p.omega_rows[w] = c.eigenvectors(rows[w], Eigen::all);
        pieces_.push_back(std::move(p));
    }
}

// The block over (omega, alpha) is a direct sum over components, so its norm
// is the largest of the per-component norms.
std::vector<double> FlipNormEvaluator::norms_at(double t) const {
    std::vector<double> out(n_configs_, 0.0);
    for (const auto& p : pieces_) {
        const Eigen::VectorXd& lambda = spectral_.components[p.component].eigenvalues;
        const Eigen::ArrayXd phase = -lambda.array() * t;
        const Eigen::MatrixXd re = phase.cos().matrix().asDiagonal() * p.alpha_rows;
        const Eigen::MatrixXd im = phase.sin().matrix().asDiagonal() * p.alpha_rows;
        for (std::size_t w = 0; w < n_configs_; ++w) {
            if (p.omega_rows[w].size() == 0) continue;
            MatrixXc block(p.omega_rows[w].rows(), re.cols());
            block.real() = p.omega_rows[w] * re;
            block.imag() = p.omega_rows[w] * im;
            out[w] = std::max(out[w], norm2(block));
        }
    }
    return out;
}

std::vector<double> FlipNormEvaluator::triangle_upper() const {
    struct Entry {
        double lambda;
        std::size_t piece;
        Eigen::Index col;
    };
    std::vector<Entry> entries;
    double scale = 1.0;
    for (std::size_t pi = 0; pi < pieces_.size(); ++pi) {
        const auto& lambda = spectral_.components[pieces_[pi].component].eigenvalues;
        for (Eigen::Index k = 0; k < lambda.size(); ++k) {
            entries.push_back({lambda[k], pi, k});
            scale = std::max(scale, std::abs(lambda[k]));
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.lambda < b.lambda; });
    const double tol = 1e-10 * scale;

    std::vector<CompensatedSum> sums(n_configs_);
    std::size_t start = 0;
    while (start < entries.size()) {
        std::size_t end = start + 1;
        while (end < entries.size() && entries[end].lambda - entries[end - 1].lambda <= tol) ++end;
        // P_lambda restricted to (omega, alpha), one direct summand per component.
        std::map<std::size_t, std::vector<Eigen::Index>> by_piece;
        for (std::size_t e = start; e < end; ++e) by_piece[entries[e].piece].push_back(entries[e].col);
        for (std::size_t w = 0; w < n_configs_; ++w) {
            double best = 0.0;
            for (const auto& [pi, cols] : by_piece) {
                const auto& p = pieces_[pi];
                if (p.omega_rows[w].size() == 0) continue;
                const Eigen::MatrixXd block = p.omega_rows[w](Eigen::all, cols) * p.alpha_rows(cols, Eigen::all);
                best = std::max(best, norm2(block));
            }
            sums[w].add(best);
        }
        start = end;
    }
    std::vector<double> out(n_configs_);
    for (std::size_t w = 0; w < n_configs_; ++w) out[w] = sums[w].value();
    return out;
}

double evolution_flip_norm(const SpectralData& spectral, const SystemPartition& partition, Config omega, Config alpha,
                           double t) {
    if (omega >= partition.n_configs()) throw ParameterError("evolution_flip_norm: configuration out of range");
    return FlipNormEvaluator(spectral, partition, alpha).norms_at(t)[omega];
}

SupNorm sup_t_norm(const SpectralData& spectral, const SystemPartition& partition, Config omega, Config alpha,
                   const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw ParameterError("sup_t_norm: empty time grid");
    if (omega >= partition.n_configs()) throw ParameterError("sup_t_norm: configuration out of range");
    FlipNormEvaluator ev(spectral, partition, alpha);
    SupNorm out;
    for (double t : t_grid) out.grid_max = std::max(out.grid_max, ev.norms_at(t)[omega]);
    out.triangle_upper = ev.triangle_upper()[omega];
    return out;
}

std::vector<double> default_time_grid(double j_eff, int points) {
    if (points < 2) throw ParameterError("default_time_grid: need at least two points");
    const double t_max = j_eff > 0.0 ? 20.0 / j_eff : 20.0;
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) grid[k] = t_max * k / (points - 1);
    return grid;
}

EnergyInterval default_fixed_interval(const SpinLattice& lattice, const CouplingParams& params, double sigma_b) {
    const double half = 4.0 * sigma_b * lattice.n_sites +
                        static_cast<double>(lattice.edges.size()) *
                            (std::abs(params.jx) + std::abs(params.jy) + std::abs(params.delta));
    return {-half, half};
}

// ---------------------------------------------------------------------------
// Records

const char* to_string(RecordKind k) {
    switch (k) {
        case RecordKind::decay_vs_distance: return "decay-vs-distance";
        case RecordKind::magnetisation_vs_time: return "magnetisation-vs-time";
        case RecordKind::correlation_vs_time: return "correlation-vs-time";
    }
    return "unknown";
}

RecordKind parse_record_kind(const std::string& s) {
    for (auto k : {RecordKind::decay_vs_distance, RecordKind::magnetisation_vs_time, RecordKind::correlation_vs_time})
        if (s == to_string(k)) return k;
    throw ParameterError("unknown record kind '" + s + "'");
}

namespace {

void validate_ensemble(const EnsembleConfig& c, std::size_t min_realisations, const char* who) {
    if (c.partition.n_sites != c.lattice.n_sites)
        throw ParameterError(std::string(who) + ": partition does not match the lattice");
    if (c.realisations < min_realisations)
        throw ParameterError(std::string(who) + ": need at least " + std::to_string(min_realisations) +
                             " realisations");
    if (!(c.sigma_b >= 0.0)) throw ParameterError(std::string(who) + ": sigma_b must be >= 0");
}

Eigen::VectorXd fields_for(const EnsembleConfig& c, std::size_t r) {
    if (c.sigma_b == 0.0) return Eigen::VectorXd::Zero(c.lattice.n_sites);
    return sample_disorder(c.sigma_b, child_seed(c.base_seed, r), c.lattice.n_sites).b_fields;
}

ExperimentRecord record_header(const EnsembleConfig& c, RecordKind kind) {
    ExperimentRecord rec;
    rec.kind = kind;
    rec.lattice = c.lattice;
    rec.sprime_sites = c.partition.sprime_sites;
    rec.params = c.params;
    rec.sigma_b = c.sigma_b;
    rec.interval = c.interval;
    rec.realisations = c.realisations;
    rec.base_seed = c.base_seed;
    return rec;
}

// samples[r][k] -> one SeriesPoint per k.
std::vector<SeriesPoint> aggregate(const std::vector<std::vector<double>>& samples,
                                   const std::vector<double>& abscissae) {
    std::vector<SeriesPoint> out;
    for (std::size_t k = 0; k < abscissae.size(); ++k) {
        std::vector<double> column(samples.size());
        for (std::size_t r = 0; r < samples.size(); ++r) column[r] = samples[r][k];
        const auto ms = mean_stderr(column);
        out.push_back({abscissae[k], ms.mean, ms.std_error, ms.n});
    }
    return out;
}

void validate_dynamics(const DynamicsConfig& c, const char* who) {
    validate_ensemble(c, 1, who);
    if (c.initial >> c.lattice.n_sites) throw ParameterError(std::string(who) + ": initial state out of range");
    if (c.times.empty()) throw ParameterError(std::string(who) + ": empty time list");
    for (double t : c.times)
        if (!(t >= 0.0)) throw ParameterError(std::string(who) + ": times must be >= 0");
}

}  // namespace

ExperimentRecord disorder_decay_experiment(const DecayExperimentConfig& config) {
    validate_ensemble(config, 2, "disorder_decay_experiment");
    const SystemPartition& part = config.partition;
    if (config.alpha >= part.n_configs()) throw ParameterError("disorder_decay_experiment: alpha out of range");
    const auto t_grid = config.t_grid.empty() ? default_time_grid(config.params.j_eff()) : config.t_grid;

    // The graph depends on the couplings only.
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(config.lattice.n_sites);
    auto op = std::make_shared<const PartitionedOperator<double>>(
        partition_operator(build_full_hamiltonian<double>(config.lattice, config.params, zero), part));
    const auto graph = build_config_graph<double>(op, zero);
    const auto dist = distances_from(graph, static_cast<int>(config.alpha));
    std::map<int, std::vector<Config>> classes;
    for (std::size_t w = 0; w < dist.size(); ++w)
        if (dist[w] != kInfiniteDistance) classes[dist[w]].push_back(static_cast<Config>(w));

    std::vector<Eigen::Index> needed;
    for (Config a = 0; a < part.block_dim(); ++a) needed.push_back(static_cast<Eigen::Index>(part.embed(config.alpha, a)));

    std::vector<std::vector<double>> samples(config.realisations);
    parallel_for(config.realisations, config.jobs, [&](std::size_t r) {
        const Eigen::MatrixXd h = build_full_hamiltonian<double>(config.lattice, config.params, fields_for(config, r));
        const auto spec = spectral_projector(h, config.interval, &needed);
        FlipNormEvaluator ev(spec, part, config.alpha);
        std::vector<double> per_omega(part.n_configs(), 0.0);
        if (config.use_triangle) {
            per_omega = ev.triangle_upper();
        } else {
            for (double t : t_grid) {
                const auto n = ev.norms_at(t);
                for (std::size_t w = 0; w < n.size(); ++w) per_omega[w] = std::max(per_omega[w], n[w]);
            }
        }
        for (const auto& [d, members] : classes) {
            CompensatedSum s;
            for (Config w : members) s.add(per_omega[w]);
            samples[r].push_back(s.value() / static_cast<double>(members.size()));
        }
    });

    std::vector<double> abscissae;
    for (const auto& [d, members] : classes) abscissae.push_back(d);
    ExperimentRecord rec = record_header(config, RecordKind::decay_vs_distance);
    rec.t_grid = t_grid;
    rec.alpha = config.alpha;
    rec.observable = config.use_triangle ? "triangle_upper" : "grid_max";
    rec.series = aggregate(samples, abscissae);
    return rec;
}

ExperimentRecord simulate_magnetisation(const DynamicsConfig& config) {
    validate_dynamics(config, "simulate_magnetisation");
    const SystemPartition& part = config.partition;
    if (part.sprime_size() == 0) throw ParameterError("simulate_magnetisation: S' is empty");
    const Eigen::Index dim = Eigen::Index{1} << config.lattice.n_sites;
    Eigen::VectorXd m_of(dim);
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        double m = 0.0;
        for (int site : part.sprime_sites) m += bit(static_cast<Config>(idx), site) ? 1.0 : -1.0;
        m_of[idx] = m / part.sprime_size();
    }
    const std::vector<Eigen::Index> needed{static_cast<Eigen::Index>(config.initial)};

    std::vector<std::vector<double>> samples(config.realisations);
    parallel_for(config.realisations, config.jobs, [&](std::size_t r) {
        const Eigen::MatrixXd h = build_full_hamiltonian<double>(config.lattice, config.params, fields_for(config, r));
        const auto spec = spectral_projector(h, config.interval, &needed);
        for (double t : config.times) {
            const Eigen::VectorXcd psi = spec.evolve_basis_state(needed[0], t);
            samples[r].push_back(psi.cwiseAbs2().dot(m_of));
        }
    });

    ExperimentRecord rec = record_header(config, RecordKind::magnetisation_vs_time);
    rec.t_grid = config.times;
    rec.initial = config.initial;
    rec.observable = "M";
    rec.series = aggregate(samples, config.times);
    return rec;
}

CorrelationRecords simulate_correlation(const DynamicsConfig& config, int site_i, int site_j) {
    validate_dynamics(config, "simulate_correlation");
    const auto& sp = config.partition.sprime_sites;
    auto in_sprime = [&](int s) { return std::find(sp.begin(), sp.end(), s) != sp.end(); };
    if (site_i == site_j || !in_sprime(site_i) || !in_sprime(site_j))
        throw ParameterError("simulate_correlation: i and j must be distinct sites of S'");
    const Eigen::Index dim = Eigen::Index{1} << config.lattice.n_sites;
    Eigen::VectorXd sz_i(dim), sz_j(dim);
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        sz_i[idx] = bit(static_cast<Config>(idx), site_i) ? 1.0 : -1.0;
        sz_j[idx] = bit(static_cast<Config>(idx), site_j) ? 1.0 : -1.0;
    }
    const auto init = static_cast<Eigen::Index>(config.initial);
    const double s_i = sz_i[init], s_j = sz_j[init];
    const std::vector<Eigen::Index> needed{init};

    std::vector<std::vector<double>> tau(config.realisations), chi(config.realisations);
    parallel_for(config.realisations, config.jobs, [&](std::size_t r) {
        const Eigen::MatrixXd h = build_full_hamiltonian<double>(config.lattice, config.params, fields_for(config, r));
        const auto spec = spectral_projector(h, config.interval, &needed);
        for (double t : config.times) {
            // sigma_z^j acts on the product state as the number s_j.
            const double forward = s_j * spec.evolve_basis_state(init, t).cwiseAbs2().dot(sz_i);
            const double backward = s_i * spec.evolve_basis_state(init, -t).cwiseAbs2().dot(sz_j);
            tau[r].push_back(forward);
            chi[r].push_back(forward - backward);
        }
    });

    CorrelationRecords out;
    out.tau = record_header(config, RecordKind::correlation_vs_time);
    out.tau.t_grid = config.times;
    out.tau.initial = config.initial;
    out.tau.sites = {site_i, site_j};
    out.i_chi = out.tau;
    out.tau.observable = "tau";
    out.i_chi.observable = "i_chi";
    out.tau.series = aggregate(tau, config.times);
    out.i_chi.series = aggregate(chi, config.times);
    return out;
}

// ---------------------------------------------------------------------------
// Fits

DecayFit fit_decay(const std::vector<std::pair<double, double>>& points) {
    DecayFit fit;
    std::vector<double> xs, ys;
    for (const auto& [x, y] : points) {
        if (y > 0.0 && std::isfinite(y) && std::isfinite(x)) {
            xs.push_back(x);
            ys.push_back(std::log(y));
        } else {
            ++fit.excluded;
            fit.warnings.push_back("excluded point at d = " + std::to_string(x) + " (nonpositive value)");
        }
    }
    fit.used = xs.size();
    const bool distinct = std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) != xs.end();
    if (xs.size() < 2 || !distinct) throw FitError("fit_decay: need at least two distinct distances with positive values");

    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double e = ys[k] - (fit.intercept + fit.slope * xs[k]);
        ss_res += e * e;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.c_fit = std::exp(fit.intercept);
    fit.zeta_fit = fit.slope == 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / fit.slope;
    return fit;
}

EnvelopeFit fit_envelope(const std::vector<EnvelopePoint>& points, double j_eff, double c_lo, double c_hi,
                         int c_steps) {
    if (points.empty()) throw FitError("fit_envelope: no points");
    if (!(j_eff > 0.0)) throw ParameterError("fit_envelope: J must be > 0");
    if (!(0.0 < c_lo && c_lo <= c_hi) || c_steps < 1) throw ParameterError("fit_envelope: bad C grid");
    for (const auto& p : points)
        if (!(p.sigma_b > 0.0)) throw ParameterError("fit_envelope: sigma_b must be > 0");

    EnvelopeFit best;
    best.j_eff = j_eff;
    auto intervals = [&](double c, double zeta0) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : points) out.push_back(p.interval(c, zeta0 / std::log1p(p.sigma_b / j_eff)));
        return out;
    };
    auto encloses = [&](double c, double zeta0) {
        const auto iv = intervals(c, zeta0);
        for (std::size_t k = 0; k < points.size(); ++k)
            if (points[k].value < iv[k].first || points[k].value > iv[k].second) return false;
        return true;
    };

    constexpr double kZetaLo = 1e-8, kZetaHi = 1e4;
    for (int step = 0; step < c_steps; ++step) {
        const double c = c_steps == 1 ? c_lo : c_lo * std::pow(c_hi / c_lo, static_cast<double>(step) / (c_steps - 1));
        if (!encloses(c, kZetaHi)) continue;
        double lo = kZetaLo, hi = kZetaHi;
        if (!encloses(c, lo)) {
            // Bound intervals grow with zeta, so enclosure is monotone: bisect in log space.
            for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
                const double mid = std::sqrt(lo * hi);
                (encloses(c, mid) ? hi : lo) = mid;
            }
        } else {
            hi = lo;
        }
        const auto iv = intervals(c, hi);
        double width = 0.0;
        for (const auto& [a, b] : iv) width += b - a;
        if (!best.found || width < best.total_width) {
            best.found = true;
            best.c_fit = c;
            best.zeta0 = hi;
            best.total_width = width;
            best.intervals = iv;
        }
    }
    return best;
}

}  // namespace mbdl
