#include "mbdl/observables.hpp"

#include <algorithm>
#include <cmath>

namespace mbdl {

namespace {

void check_zeta_c(double c_const, double zeta, const char* who) {
    if (!(zeta > 0.0)) throw DomainError(std::string(who) + ": zeta must be > 0");
    if (!(c_const > 0.0)) throw DomainError(std::string(who) + ": C must be > 0");
}

// e^{-2d/zeta} for d = 0..max_d.
std::vector<double> weights(double zeta, int max_d) {
    std::vector<double> w(static_cast<std::size_t>(max_d) + 1);
    for (int d = 0; d <= max_d; ++d) w[d] = std::exp(-2.0 * d / zeta);
    return w;
}

bool outside_unit(double x) { return x < -1.0 || x > 1.0; }

}  // namespace

std::uint64_t config_count_n(int sprime_size, int n, int m, int d) {
    if (sprime_size < 0 || n < 0 || m < 0 || d < 0 || n > sprime_size || m > sprime_size || d > sprime_size)
        return 0;
    // Parity first: the halves below are integers only when d + n - m is even.
    if ((d + n - m) % 2 != 0) return 0;
    const long flips_down = (d + n - m) / 2;  // up-spins of the reference turned down
    const long flips_up = (d - n + m) / 2;    // down-spins turned up
    return binom(n, flips_down) * binom(sprime_size - n, flips_up);
}

double up_fraction_bound(int sprime_size, int n, double c_const, double zeta) {
    if (sprime_size < 1 || n < 0 || n > sprime_size)
        throw ParameterError("up_fraction_bound: need 0 <= n <= |S'| and |S'| >= 1");
    check_zeta_c(c_const, zeta, "up_fraction_bound");
    const auto w = weights(zeta, sprime_size);
    CompensatedSum sum;
    for (int m = 1; m <= sprime_size; ++m)
        for (int d = 0; d <= sprime_size; ++d) {
            const auto count = config_count_n(sprime_size, n, m, d);
            if (count) sum.add(2.0 * m / sprime_size * static_cast<double>(count) * w[d]);
        }
    return c_const * c_const * sum.value();
}

MagnetisationBound MagnetisationBound::clamped() const {
    MagnetisationBound b = *this;
    b.lower = std::clamp(lower, -1.0, 1.0);
    b.upper = std::clamp(upper, -1.0, 1.0);
    return b;
}

MagnetisationBound magnetisation_bounds(int sprime_size, int n0, double c_const, double zeta) {
    if (sprime_size < 1 || n0 < 0 || n0 > sprime_size)
        throw ParameterError("magnetisation_bounds: need 0 <= n0 <= |S'| and |S'| >= 1");
    MagnetisationBound b;
    b.n_up = up_fraction_bound(sprime_size, n0, c_const, zeta);
    b.n_down = up_fraction_bound(sprime_size, sprime_size - n0, c_const, zeta);
    b.lower = 1.0 - b.n_down;
    b.upper = b.n_up - 1.0;
    b.m0 = 2.0 * n0 / sprime_size - 1.0;
    b.out_of_range = outside_unit(b.lower) || outside_unit(b.upper);
    return b;
}

MagnetisationBound magnetisation_bounds_mixed(const std::map<Config, double>& weights_by_config, int sprime_size,
                                              double c_const, double zeta) {
    if (sprime_size < 1 || sprime_size > 62) throw ParameterError("magnetisation_bounds_mixed: bad |S'|");
    if (weights_by_config.empty()) throw ParameterError("magnetisation_bounds_mixed: no weights");
    CompensatedSum total;
    for (const auto& [alpha, w] : weights_by_config) {
        if (alpha >> sprime_size) throw ParameterError("magnetisation_bounds_mixed: configuration out of range");
        if (!(w >= 0.0)) throw ParameterError("magnetisation_bounds_mixed: weights must be nonnegative");
        total.add(w);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
        throw ParameterError("magnetisation_bounds_mixed: weights sum to " + std::to_string(total.value()) +
                             ", not 1");

    // F depends on alpha only through |alpha|.
    std::vector<double> f_up(sprime_size + 1);
    for (int n = 0; n <= sprime_size; ++n) f_up[n] = up_fraction_bound(sprime_size, n, c_const, zeta);
    CompensatedSum up, down, m0;
    for (const auto& [alpha, w] : weights_by_config) {
        const int n = popcount(alpha);
        up.add(w * f_up[n]);
        down.add(w * f_up[sprime_size - n]);
        m0.add(w * (2.0 * n / sprime_size - 1.0));
    }
    MagnetisationBound b;
    b.n_up = up.value();
    b.n_down = down.value();
    b.lower = 1.0 - b.n_down;
    b.upper = b.n_up - 1.0;
    b.m0 = m0.value();
    b.out_of_range = outside_unit(b.lower) || outside_unit(b.upper);
    return b;
}

CorrelationBound correlation_bounds(int sprime_size, Config alpha, int i, int j, double c_const, double zeta) {
    if (sprime_size < 2 || sprime_size > 62) throw ParameterError("correlation_bounds: need |S'| >= 2");
    if (i == j || i < 0 || j < 0 || i >= sprime_size || j >= sprime_size)
        throw ParameterError("correlation_bounds: i and j must be distinct sites of S'");
    if (alpha >> sprime_size) throw ParameterError("correlation_bounds: configuration out of range");
    check_zeta_c(c_const, zeta, "correlation_bounds");

    CorrelationBound b;
    b.i_up = bit(alpha, i);
    b.j_up = bit(alpha, j);
    const int n = popcount(alpha);
    const int r = sprime_size - 1;  // the other sites
    const int n_rest = n - (b.i_up ? 1 : 0);
    const auto w = weights(zeta, sprime_size);

    // Sum over omega with site i fixed: the rest contributes N(r, n_rest, m', d'),
    // site i adds one to the distance when it differs from alpha.
    auto fixed_site_sum = [&](bool omega_i_up) {
        const int extra = omega_i_up == b.i_up ? 0 : 1;
        CompensatedSum s;
        for (int mp = 0; mp <= r; ++mp)
            for (int dp = 0; dp <= r; ++dp) {
                const auto count = config_count_n(r, n_rest, mp, dp);
                if (count) s.add(static_cast<double>(count) * w[dp + extra]);
            }
        return c_const * c_const * s.value();
    };
    b.k_val = fixed_site_sum(true);
    b.q_val = fixed_site_sum(false);

    if (b.j_up) {
        b.tau_plus = 2.0 * b.k_val - 1.0;
        b.tau_minus = 1.0 - 2.0 * b.q_val;
    } else {
        b.tau_minus = 1.0 - 2.0 * b.k_val;
        b.tau_plus = 2.0 * b.q_val - 1.0;
    }
    b.tau0 = (b.i_up ? 1.0 : -1.0) * (b.j_up ? 1.0 : -1.0);
    b.out_of_range = outside_unit(b.tau_minus) || outside_unit(b.tau_plus);
    return b;
}

std::pair<double, double> susceptibility_bound(const CorrelationBound& bound_ij, const CorrelationBound& bound_ji) {
    return {bound_ij.tau_minus - bound_ji.tau_plus, bound_ij.tau_plus - bound_ji.tau_minus};
}

}  // namespace mbdl
