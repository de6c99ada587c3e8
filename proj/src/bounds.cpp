#include "mbdl/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mbdl {

namespace {

constexpr long double kTwoPi = 2.0L * std::numbers::pi_v<long double>;
constexpr long kMaxTerms = 10'000'000;

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

long double phi_ld(long double z, long double a) {
    if (z == 0.0L) return 1.0L / a;
    long double sum = 0.0L;
    long double comp = 0.0L;
    long double zk = 1.0L;
    for (long k = 0; k < kMaxTerms; ++k) {
        const long double term = zk / (static_cast<long double>(k) + a);
        const long double t = sum + term;
        comp += (sum - t) + term;  // terms are positive and decreasing, so |sum| >= |term|
        sum = t;
        zk *= z;
        // Remaining terms are below z^(k+1) / ((k+1+a)(1-z)).
        const long double tail = zk / ((static_cast<long double>(k + 1) + a) * (1.0L - z));
        if (tail < 1e-17L * (sum + comp)) return sum + comp;
    }
    // Term cap reached: add the midpoint of [0, tail bound].
    const long double tail = zk / ((static_cast<long double>(kMaxTerms) + a) * (1.0L - z));
    return sum + comp + 0.5L * tail;
}

long double beta_b0_ld(long double z, long double a) {
    if (z == 0.0L) return 0.0L;
    return std::pow(z, a) * phi_ld(z, a);
}

}  // namespace

double hurwitz_lerch_phi(double z, double a) {
    require(a > 0.0, "hurwitz_lerch_phi: a must be > 0 (got " + std::to_string(a) + ")");
    require(z >= 0.0 && z < 1.0, "hurwitz_lerch_phi: z must lie in [0, 1)");
    return static_cast<double>(phi_ld(z, a));
}

double incomplete_beta_b0(double z, double a) {
    require(a > 0.0, "incomplete_beta_b0: a must be > 0 (got " + std::to_string(a) + ")");
    require(z >= 0.0 && z < 1.0, "incomplete_beta_b0: z must lie in [0, 1)");
    return static_cast<double>(beta_b0_ld(z, a));
}

double sigma_b_min(double s, double d_total, double j_eff, int sprime_size) {
    require(s > 0.0 && s < 1.0, "sigma_b_min: s must lie in (0, 1)");
    require(d_total > 0.0 && sprime_size >= 1, "sigma_b_min: sizes must be positive");
    require(j_eff > 0.0, "sigma_b_min: J must be > 0");
    const long double v = static_cast<long double>(d_total) * j_eff *
                          std::pow(static_cast<long double>(sprime_size), 1.0L / s) / std::sqrt(kTwoPi);
    return static_cast<double>(v);
}

double localisation_length(double s, double sigma_b, double d_total, double j_eff, int sprime_size) {
    require(sigma_b > 0.0, "localisation_length: sigma_b must be > 0");
    const double smin = sigma_b_min(s, d_total, j_eff, sprime_size);
    // log1p of the exact-sign relative excess keeps sign(zeta) = sign(sigma_b - smin).
    const long double excess = (static_cast<long double>(sigma_b) - smin) / smin;
    const long double inv = s * std::log1p(excess);
    if (inv == 0.0L) return std::numeric_limits<double>::infinity();
    return static_cast<double>(1.0L / inv);
}

double c_of_s1(double s1, double k_universal) {
    require(s1 > 0.0 && s1 < 1.0, "c_of_s1: s1 must lie in (0, 1)");
    require(k_universal > 0.0, "c_of_s1: k must be > 0");
    return static_cast<double>(std::pow(4.0L, 1.0L - s1) * std::pow(static_cast<long double>(k_universal), s1) /
                               (1.0L - s1));
}

int min_admissible_distance(double s) {
    return static_cast<int>(std::floor(1.0 / s - 1.0)) + 1;
}

const char* to_string(BoundRegime r) {
    return r == BoundRegime::direct_series ? "direct_series" : "extension_lemma";
}

double BoundInputs::d_total() const { return std::ldexp(1.0, total_size); }

BoundReport theorem1_rhs(const BoundInputs& in) {
    require(in.s > 0.0 && in.s < in.s1 && in.s1 < 1.0, "theorem1_rhs: need 0 < s < s1 < 1");
    require(in.sprime_size >= 1 && in.total_size >= in.sprime_size, "theorem1_rhs: need 1 <= |S'| <= |system|");
    require(in.s1 > std::ldexp(1.0, -in.sprime_size), "theorem1_rhs: need s1 > 2^-|S'|");
    require(in.interval_measure > 0.0, "theorem1_rhs: |I| must be > 0");
    require(in.distance >= 0, "theorem1_rhs: distance must be >= 0");
    const double a = in.distance + 1.0 - 1.0 / in.s;
    if (!(a > 0.0))
        throw DomainError("theorem1_rhs: distance " + std::to_string(in.distance) + " must exceed 1/s - 1; " +
                          "minimal admissible distance is " + std::to_string(min_admissible_distance(in.s)));

    BoundReport r;
    r.inputs = in;
    r.sigma_b_min = sigma_b_min(in.s, in.d_total(), in.j_eff, in.sprime_size);
    r.zeta = localisation_length(in.s, in.sigma_b, in.d_total(), in.j_eff, in.sprime_size);
    r.zeta_positive = in.sigma_b > r.sigma_b_min;
    r.c_of_s1 = c_of_s1(in.s1, in.k_universal);
    r.regime = in.s < 1.0 / (std::ldexp(1.0, in.sprime_size) + 1.0) ? BoundRegime::direct_series
                                                                   : BoundRegime::extension_lemma;
    const long double s = in.s;
    const long double s1 = in.s1;
    r.lemma1_factor = static_cast<double>(std::pow(2.0L * in.interval_measure, 1.0L / (2.0L - s)) / kTwoPi);
    if (!r.zeta_positive || !std::isfinite(r.zeta)) {
        r.phi_term = std::numeric_limits<double>::infinity();
        r.prefactor = std::numeric_limits<double>::infinity();
        r.exponential = 1.0;
        r.full_rhs = std::numeric_limits<double>::infinity();
        return r;
    }
    const long double zeta = r.zeta;
    const long double phi = phi_ld(std::exp(-1.0L / zeta), a) / (s * in.sprime_size);
    r.phi_term = static_cast<double>(phi);
    const long double pref = r.lemma1_factor * std::pow(static_cast<long double>(r.c_of_s1), s / s1) *
                             std::pow(2.0L, in.s_size() * s) *
                             std::pow(static_cast<long double>(in.sigma_b) * std::sqrt(kTwoPi), -s) *
                             std::pow(phi, (s1 - s) / s1);
    const long double expo = std::exp(-(s1 - s) * in.distance / (s1 * (2.0L - s) * zeta));
    r.prefactor = static_cast<double>(pref);
    r.exponential = static_cast<double>(expo);
    r.full_rhs = static_cast<double>(pref * expo);
    return r;
}

double lemma1_transfer(double c_frac, double zeta, double s, double interval_measure, double distance) {
    require(c_frac > 0.0 && zeta > 0.0, "lemma1_transfer: c_frac and zeta must be > 0");
    require(s >= 0.0 && s < 1.0, "lemma1_transfer: s must lie in [0, 1)");
    require(interval_measure > 0.0, "lemma1_transfer: |I| must be > 0");
    const long double ls = s;
    return static_cast<double>(std::pow(2.0L * interval_measure, 1.0L / (2.0L - ls)) / kTwoPi * c_frac *
                               std::exp(-distance / ((2.0L - ls) * zeta)));
}

double lemma2_ceiling(double n, double s, double rho_inf) {
    require(s > 0.0 && s < 1.0, "lemma2_ceiling: s must lie in (0, 1)");
    require(n > 0.0 && rho_inf > 0.0, "lemma2_ceiling: n and rho_inf must be > 0");
    const long double ls = s;
    return static_cast<double>(std::pow(2.0L * n, ls) / (1.0L - ls) * std::pow(static_cast<long double>(rho_inf), ls));
}

double extension_constants(double s, double s1, int s_size, double sigma_b, double k_universal, double c_frac,
                           double zeta, double distance) {
    require(s > 0.0 && s < s1 && s1 < 1.0, "extension_constants: need 0 < s < s1 < 1");
    require(sigma_b > 0.0 && c_frac > 0.0 && zeta > 0.0, "extension_constants: sigma_b, c_frac, zeta must be > 0");
    const long double ls = s;
    const long double ls1 = s1;
    return static_cast<double>(std::pow(static_cast<long double>(c_of_s1(s1, k_universal)), ls / ls1) *
                               std::pow(2.0L, s_size * ls) *
                               std::pow(static_cast<long double>(sigma_b) * std::sqrt(kTwoPi), -ls) *
                               std::pow(static_cast<long double>(c_frac), (ls1 - ls) / ls1) *
                               std::exp(-(ls1 - ls) * distance / (ls1 * zeta)));
}

double greens_series_bound(double r, double s, int sprime_size, int distance) {
    require(s > 0.0 && s < 1.0, "greens_series_bound: s must lie in (0, 1)");
    require(sprime_size >= 1, "greens_series_bound: |S'| must be >= 1");
    require(r >= 0.0, "greens_series_bound: r must be >= 0");
    if (r >= 1.0) throw DomainError("greens_series_bound: series diverges for r >= 1 (zeta <= 0)");
    const long double a = distance + 1.0L - 1.0L / s;
    if (!(a > 0.0L))
        throw DomainError("greens_series_bound: distance must exceed 1/s - 1; minimal admissible distance is " +
                          std::to_string(min_admissible_distance(s)));
    const long double lr = r;
    return static_cast<double>(std::pow(lr, 1.0L / s) / s * beta_b0_ld(lr, a) / sprime_size);
}

}  // namespace mbdl
