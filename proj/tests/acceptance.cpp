// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "mbdl/bounds.hpp"
#include "mbdl/dynamics.hpp"
#include "mbdl/greens.hpp"
#include "mbdl/observables.hpp"
#include "mbdl/record_io.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mbdl;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string summary;
};

void detail(const std::string& line) { std::cout << "    " << line << '\n' << std::flush; }

std::string fmt(double x, int digits = 6) {
    std::ostringstream os;
    os << std::setprecision(digits) << x;
    return os.str();
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t instances = 0;
    for (int n = 2; n <= 6; ++n)
        for (int k = 1; k <= std::min(n, 4); ++k) {
            double shape_worst = 0.0;
            for (int r = 0; r < 20; ++r) {
                const auto inst = random_greens_instance(n, k, child_seed(child_seed(2024, n * 64 + k), r));
                shape_worst = std::max(shape_worst, check_greens_instance(inst).max_rel_error);
                ++instances;
            }
            detail("|S| = " + std::to_string(n) + ", |S'| = " + std::to_string(k) + ": worst error " + fmt(shape_worst));
            worst = std::max(worst, shape_worst);
        }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = worst <= 1e-9 && secs <= 120.0;
    o.summary = std::to_string(instances) + " instances, worst relative error " + fmt(worst) + ", " + fmt(secs, 3) + " s";
    return o;
}

Outcome criterion2() {
    std::size_t checked = 0, mismatches = 0;
    for (int sp = 0; sp <= 10; ++sp)
        for (int n = 0; n <= sp; ++n) {
            const Config ref = (Config{1} << n) - 1;
            std::vector<std::vector<std::uint64_t>> tally(sp + 1, std::vector<std::uint64_t>(sp + 1, 0));
            for (Config w = 0; w < (Config{1} << sp); ++w) ++tally[popcount(w)][hamming(ref, w)];
            std::uint64_t total = 0;
            for (int m = 0; m <= sp; ++m)
                for (int d = 0; d <= sp; ++d) {
                    const auto got = config_count_n(sp, n, m, d);
                    mismatches += got != tally[m][d];
                    total += got;
                    ++checked;
                }
            mismatches += total != (std::uint64_t{1} << sp);
        }
    return {mismatches == 0, std::to_string(checked) + " counts checked, " + std::to_string(mismatches) + " mismatches"};
}

Outcome criterion3() {
    Outcome o;
    // empirical covariance at |S'| = 4
    const int sp = 4, nc = 1 << sp;
    const double sb = 1.0;
    const std::size_t draws = 100000;
    const auto lat = build_lattice(LatticeKind::chain, 8);
    const auto part = make_partition(lat, {0, 2, 4, 6}, true);
    Eigen::MatrixXd y(static_cast<Eigen::Index>(draws), nc);
    for (std::size_t r = 0; r < draws; ++r) {
        const auto b = sample_disorder(sb, child_seed(4242, r), lat.n_sites).b_fields;
        for (int a = 0; a < nc; ++a) y(static_cast<Eigen::Index>(r), a) = configuration_potential(part, a, b);
    }
    const Eigen::MatrixXd c = y.rowwise() - y.colwise().mean();
    double worst_z = 0.0;
    for (int a = 0; a < nc; ++a)
        for (int b = a; b < nc; ++b) {
            const Eigen::ArrayXd prod = c.col(a).array() * c.col(b).array();
            const double emp = prod.mean();
            const double se = std::sqrt((prod - emp).square().mean() / static_cast<double>(draws));
            worst_z = std::max(worst_z, std::abs(emp - (sp - 2 * hamming(a, b)) * sb * sb) / se);
        }
    const bool cov_ok = worst_z <= 4.0;
    detail("covariance: worst |empirical - expected| = " + fmt(worst_z, 3) + " standard errors");

    // conditional variance on the neighbour conditioning set
    bool cond_ok = true;
    std::string first_violation;
    for (int k = 1; k <= 6; ++k) {
        double lowest = std::numeric_limits<double>::infinity();
        Config worst_alpha = 0;
        for (Config a = 0; a < (Config{1} << k); ++a) {
            const auto stats = covariance_matrix(neighbour_conditioning_set(a, k), k, sb);
            const double v = conditional_variance(stats, 0);
            if (v < lowest) {
                lowest = v;
                worst_alpha = a;
            }
        }
        const bool ok = lowest >= sb * sb - 1e-9;
        detail("conditional variance |S'| = " + std::to_string(k) + ": min " + fmt(lowest, 9) + " sigma^2" +
               (ok ? "" : "  (below sigma^2 at alpha = " + config_to_string(worst_alpha, k) + ")"));
        if (!ok && cond_ok) {
            cond_ok = false;
            first_violation = "|S'| = " + std::to_string(k) + " gives " + fmt(lowest, 9) + " sigma^2";
        }
    }
    o.pass = cov_ok && cond_ok;
    o.summary = std::string("covariance ") + (cov_ok ? "ok" : "FAILED") + ", conditional variance " +
                (cond_ok ? "ok" : "below sigma^2: " + first_violation);
    return o;
}

double series_oracle(double r, double s, int sp, int d) {
    long double sum = 0.0L;
    for (int l = d;; ++l) {
        const long double term = std::pow(static_cast<long double>(r), l + 1) / (1.0L - (l + 1) * s);
        sum += term;
        if (std::abs(term) < 1e-22L * std::abs(sum)) break;
    }
    return static_cast<double>(std::abs(sum) / sp);
}

/// Random unitary from the QR factorisation of a complex Gaussian matrix.
MatrixXc random_unitary(int n, std::mt19937_64& eng) {
    std::normal_distribution<double> g;
    MatrixXc m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(g(eng), g(eng));
    Eigen::HouseholderQR<MatrixXc> qr(m);
    return qr.householderQ() * MatrixXc::Identity(n, n);
}

Outcome criterion4() {
    std::mt19937_64 eng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto real = [&](double lo, double hi) { return lo + (hi - lo) * u(eng); };

    int iff_fail = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double s = real(0.05, 0.95);
        const int sp = 1 + static_cast<int>(eng() % 6);
        const double d = std::ldexp(1.0, sp + static_cast<int>(eng() % 8));
        const double j = real(0.1, 3.0);
        const double smin = sigma_b_min(s, d, j, sp);
        double sigma = smin * std::exp(real(-3.0, 3.0));
        if (trial % 10 == 0) sigma = std::nextafter(smin, trial % 20 == 0 ? 0.0 : 1e300);
        iff_fail += (localisation_length(s, sigma, d, j, sp) > 0.0) != (sigma > smin);
    }
    detail("zeta > 0 iff sigma_b > sigma_b_min: " + std::to_string(iff_fail) + " violations in 1000 draws");

    double beta_worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double z = real(0.0, 0.999), a = real(0.05, 6.0);
        const double b = incomplete_beta_b0(z, a);
        beta_worst = std::max(beta_worst, std::abs(b - std::pow(z, a) * hurwitz_lerch_phi(z, a)) / std::abs(b));
    }
    detail("incomplete beta identity: worst relative deviation " + fmt(beta_worst));

    double series_worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double s = real(0.1, 0.9);
        const int sp = 1 + static_cast<int>(eng() % 6);
        const int d = min_admissible_distance(s) + static_cast<int>(eng() % 7);
        const double r = real(0.01, 0.95);
        const double got = greens_series_bound(r, s, sp, d);
        series_worst = std::max(series_worst, std::abs(got - series_oracle(r, s, sp, d)) / got);
    }
    detail("series bound vs partial sums: worst relative deviation " + fmt(series_worst));

    // E ||(Y I + A)^-1||^s with Y ~ N(0, 1) and A normal; for normal A the
    // norm is 1 / min_k |Y + lambda_k|, cross-checked against the SVD.
    const double s = 0.5, rho = 1.0 / std::sqrt(2.0 * M_PI);
    std::normal_distribution<double> g;
    bool mc_ok = true;
    double svd_worst = 0.0;
    for (int n = 1; n <= 8; ++n) {
        for (int variant = 0; variant < 3; ++variant) {
            Eigen::VectorXcd lambda(n);
            for (int k = 0; k < n; ++k) {
                if (variant == 0) lambda[k] = cplx(g(eng), g(eng));  // complex spectrum
                else if (variant == 1) lambda[k] = cplx(g(eng), 0.0);  // Hermitian
                else lambda[k] = cplx(0.05 * g(eng), 0.0);             // clustered at zero
            }
            const MatrixXc uu = random_unitary(n, eng);
            const MatrixXc a = uu * lambda.asDiagonal() * uu.adjoint();
            const std::size_t samples = 1000000;
            double sum = 0.0, sum2 = 0.0;
            for (std::size_t r = 0; r < samples; ++r) {
                const double yv = g(eng);
                double m = std::numeric_limits<double>::infinity();
                for (int k = 0; k < n; ++k) m = std::min(m, std::abs(yv + lambda[k]));
                const double v = std::pow(m, -s);
                sum += v;
                sum2 += v * v;
                if (r < 200) {
                    const MatrixXc inv = (yv * MatrixXc::Identity(n, n) + a).inverse();
                    svd_worst = std::max(svd_worst, std::abs(norm2(inv) - 1.0 / m) * m);
                }
            }
            const double mean = sum / samples;
            const double ceiling = lemma2_ceiling(n, s, rho);
            if (!(mean <= ceiling)) {
                mc_ok = false;
                detail("ceiling violated: n = " + std::to_string(n) + ", variant " + std::to_string(variant) +
                       ", mean " + fmt(mean) + " > ceiling " + fmt(ceiling));
            }
            if (variant == 2)
                detail("ceiling n = " + std::to_string(n) + ": clustered-spectrum mean " + fmt(mean) + " <= ceiling " +
                       fmt(ceiling));
        }
    }
    detail("normal-matrix norm formula vs SVD: worst relative deviation " + fmt(svd_worst));
    mc_ok = mc_ok && svd_worst < 1e-8;

    Outcome o;
    o.pass = iff_fail == 0 && beta_worst <= 1e-12 && series_worst <= 1e-10 && mc_ok;
    o.summary = "iff violations " + std::to_string(iff_fail) + ", beta " + fmt(beta_worst, 3) + ", series " +
                fmt(series_worst, 3) + ", density ceiling " + (mc_ok ? "dominates" : "VIOLATED");
    return o;
}

DecayExperimentConfig decay_config() {
    DecayExperimentConfig c;
    c.lattice = build_lattice(LatticeKind::chain, 8);
    c.partition = make_partition(c.lattice, {1, 4, 6}, true);
    c.params = {1.0, 1.0, 0.5};
    c.sigma_b = 16.0;
    c.realisations = 200;
    c.base_seed = 7;
    c.alpha = 0b101;
    return c;
}

Outcome criterion5() {
    const auto t0 = Clock::now();
    const auto rec = disorder_decay_experiment(decay_config());
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : rec.series) {
        detail("d = " + fmt(p.abscissa) + ": mean " + fmt(p.mean) + " +- " + fmt(p.std_error));
        if (p.abscissa >= 1.0 && p.abscissa <= 3.0) pts.emplace_back(p.abscissa, p.mean);
    }
    Outcome o;
    if (pts.size() != 3) return {false, "distances 1..3 not all reachable"};
    const bool decreasing = pts[0].second > pts[1].second && pts[1].second > pts[2].second;
    const auto fit = fit_decay(pts);
    const double secs = seconds_since(t0);
    o.pass = decreasing && fit.slope < 0.0 && fit.r_squared >= 0.8 && secs <= 600.0;
    o.summary = std::string(decreasing ? "strictly decreasing" : "NOT decreasing") + ", slope " + fmt(fit.slope) +
                ", r^2 " + fmt(fit.r_squared) + ", zeta " + fmt(fit.zeta_fit) + ", " + fmt(secs, 3) + " s";
    return o;
}

DynamicsConfig magnetisation_config(double sigma_b) {
    DynamicsConfig c;
    c.lattice = build_lattice(LatticeKind::chain, 10);
    c.partition = make_partition(c.lattice, {2, 5, 8}, true);
    c.params = {1.0, 1.0, 0.5};
    c.sigma_b = sigma_b;
    c.realisations = 300;
    c.base_seed = 11;
    c.initial = config_from_string("1010101010");
    c.times = {5.0 / c.params.jx};
    return c;
}

Outcome criterion6() {
    const auto t0 = Clock::now();
    const std::vector<double> sigmas{1, 2, 4, 8, 16};
    std::vector<SeriesPoint> at_t;
    for (double sb : sigmas) at_t.push_back(simulate_magnetisation(magnetisation_config(sb)).series.front());

    const auto probe = magnetisation_config(1.0);
    const Config alpha = probe.partition.restrict_to_sprime(probe.initial);
    const int sp = probe.partition.sprime_size(), n0 = popcount(alpha);
    const double m0 = 2.0 * n0 / sp - 1.0;

    bool monotone = true;
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
        detail("sigma_b = " + fmt(sigmas[k]) + ": M(5) = " + fmt(at_t[k].mean) + " +- " + fmt(at_t[k].std_error) +
               ", |M - M0| = " + fmt(std::abs(at_t[k].mean - m0)));
        if (k + 1 < sigmas.size()) {
            const double tol = std::hypot(at_t[k].std_error, at_t[k + 1].std_error);
            if (std::abs(at_t[k + 1].mean - m0) > std::abs(at_t[k].mean - m0) + tol) monotone = false;
        }
    }

    std::vector<EnvelopePoint> pts;
    for (std::size_t k = 0; k < sigmas.size(); ++k)
        pts.push_back({sigmas[k], at_t[k].mean, [sp, n0](double c, double zeta) {
                           const auto b = magnetisation_bounds(sp, n0, c, zeta);
                           return std::make_pair(b.lower, b.upper);
                       }});
    const auto fit = fit_envelope(pts, probe.params.j_eff());
    if (fit.found)
        detail("joint fit: C = " + fmt(fit.c_fit) + ", zeta(sigma_b) = " + fmt(fit.zeta0) + " / ln(1 + sigma_b / J)");
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = monotone && fit.found && secs <= 1200.0;
    o.summary = std::string(monotone ? "monotone" : "NOT monotone") + " within 1 stderr, envelope " +
                (fit.found ? "encloses all points" : "NOT found") + ", " + fmt(secs, 3) + " s";
    return o;
}

Outcome criterion7() {
    double worst = 0.0;
    for (int sp = 1; sp <= 8; ++sp)
        for (Config a = 0; a < (Config{1} << sp); ++a) {
            const auto m = magnetisation_bounds(sp, popcount(a), 1.0, 1e-3);
            worst = std::max({worst, std::abs(m.lower - m.m0), std::abs(m.upper - m.m0)});
            for (int i = 0; i < sp; ++i)
                for (int j = 0; j < sp; ++j) {
                    if (i == j) continue;
                    const auto ij = correlation_bounds(sp, a, i, j, 1.0, 1e-3);
                    const auto ji = correlation_bounds(sp, a, j, i, 1.0, 1e-3);
                    const auto chi = susceptibility_bound(ij, ji);
                    worst = std::max({worst, std::abs(ij.tau_minus - ij.tau0), std::abs(ij.tau_plus - ij.tau0),
                                      std::abs(chi.first), std::abs(chi.second)});
                }
        }
    return {worst <= 1e-6, "worst deviation " + fmt(worst) + " over |S'| = 1..8"};
}

Outcome criterion8() {
    const auto t0 = Clock::now();
    DecayExperimentConfig c;
    c.lattice = build_lattice(LatticeKind::chain, 2);
    c.partition = make_partition(c.lattice, {0});
    c.params = {1.0, 1.0, 0.5};
    const double s = 0.9, s1 = 0.95;
    const double smin = sigma_b_min(s, 4.0, c.params.j_eff(), 1);
    c.sigma_b = 2.0 * smin;
    c.realisations = 500;
    c.base_seed = 3;
    c.alpha = 1;
    c.use_triangle = true;
    c.interval = default_fixed_interval(c.lattice, c.params, c.sigma_b);
    const auto rec = disorder_decay_experiment(c);

    Outcome o;
    int compared = 0;
    for (const auto& p : rec.series) {
        const int d = static_cast<int>(p.abscissa);
        if (d < min_admissible_distance(s)) continue;
        BoundInputs in;
        in.s = s;
        in.s1 = s1;
        in.sprime_size = 1;
        in.total_size = 2;
        in.j_eff = c.params.j_eff();
        in.sigma_b = c.sigma_b;
        in.interval_measure = c.interval.measure();
        in.distance = d;
        const auto r = theorem1_rhs(in);
        detail("d = " + std::to_string(d) + ": measured " + fmt(p.mean) + " +- " + fmt(p.std_error) + ", bound " +
               fmt(r.full_rhs));
        o.pass = o.pass && p.mean <= r.full_rhs;
        ++compared;
    }
    const double secs = seconds_since(t0);
    o.pass = o.pass && compared > 0 && secs <= 60.0;
    o.summary = std::to_string(compared) + " admissible distance(s) compared, sigma_b = " + fmt(c.sigma_b) + ", " +
                fmt(secs, 3) + " s";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome criterion9() {
    const fs::path dir = fs::temp_directory_path() / "mbdl_acceptance_determinism";
    fs::remove_all(dir);
    std::vector<std::pair<std::string, std::function<std::vector<ExperimentRecord>()>>> runs;
    runs.emplace_back("decay", [] {
        auto c = decay_config();
        c.realisations = 20;
        return std::vector<ExperimentRecord>{disorder_decay_experiment(c)};
    });
    runs.emplace_back("magnetisation", [] {
        auto c = magnetisation_config(4.0);
        c.realisations = 20;
        c.times = {0.0, 1.0, 5.0};
        return std::vector<ExperimentRecord>{simulate_magnetisation(c)};
    });
    runs.emplace_back("correlation", [] {
        auto c = magnetisation_config(4.0);
        c.realisations = 20;
        c.times = {0.0, 2.5};
        const auto r = simulate_correlation(c, 2, 5);
        return std::vector<ExperimentRecord>{r.tau, r.i_chi};
    });
    bool ok = true;
    std::size_t files = 0;
    for (const auto& [name, run] : runs) {
        std::vector<std::string> first;
        for (int pass = 0; pass < 2; ++pass) {
            const auto recs = run();
            for (std::size_t k = 0; k < recs.size(); ++k) {
                const fs::path csv = dir / (name + std::to_string(k) + "_" + std::to_string(pass) + ".csv");
                write_record(recs[k], csv);
                const std::string bytes = slurp(csv) + slurp(sidecar_path(csv));
                if (pass == 0) first.push_back(bytes);
                else if (bytes != first[k]) {
                    ok = false;
                    detail(name + ": rerun differs");
                }
                ++files;
            }
        }
    }
    fs::remove_all(dir);
    return {ok, std::to_string(files / 2) + " records rerun, CSV and sidecar bytes " + (ok ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 Green's function path-sums vs resolvent", criterion1},
        {"2 configuration counts vs enumeration", criterion2},
        {"3 potential covariance and conditional variance", criterion3},
        {"4 bound arithmetic", criterion4},
        {"5 flip-norm decay with distance", criterion5},
        {"6 magnetisation localisation", criterion6},
        {"7 observable limits at small zeta", criterion7},
        {"8 measured flip norms below the bound", criterion8},
        {"9 determinism", criterion9},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        std::cout << "criterion " << name << '\n' << std::flush;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.summary << "\n\n" << std::flush;
        failed += !o.pass;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion/criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}
