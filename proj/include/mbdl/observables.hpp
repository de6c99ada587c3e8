#ifndef MBDL_OBSERVABLES_HPP
#define MBDL_OBSERVABLES_HPP

// Bounds on disorder-averaged sublattice magnetisation and two-site
// correlations, assuming E||<omega|P_I e^{-iHt}|alpha>|| = C e^{-d/zeta}.

#include "mbdl/core.hpp"

#include <map>
#include <utility>

namespace mbdl {

/// Number of configurations with m up-spins at hypercube distance d from a
/// fixed configuration with n up-spins, on |S'| = sprime_size sites.
std::uint64_t config_count_n(int sprime_size, int n, int m, int d);

/// F(|S'|, n) = C^2 sum_m (2m/|S'|) sum_d N(|S'|, n, m, d) e^{-2d/zeta}.
double up_fraction_bound(int sprime_size, int n, double c_const, double zeta);

struct MagnetisationBound {
    double n_up = 0.0;
    double n_down = 0.0;
    double lower = 0.0;  ///< 1 - n_down
    double upper = 0.0;  ///< n_up - 1
    double m0 = 0.0;     ///< initial magnetisation
    bool out_of_range = false;  ///< an endpoint lies outside [-1, 1]

    MagnetisationBound clamped() const;
    double width() const { return upper - lower; }
};

MagnetisationBound magnetisation_bounds(int sprime_size, int n0, double c_const, double zeta);

/// Incoherent mixture over S' configurations; weights must sum to 1 within 1e-12.
MagnetisationBound magnetisation_bounds_mixed(const std::map<Config, double>& weights, int sprime_size,
                                              double c_const, double zeta);

struct CorrelationBound {
    double k_val = 0.0;  ///< C^2 sum over omega with i up of e^{-2d/zeta}
    double q_val = 0.0;  ///< same over omega with i down
    double tau_minus = 0.0;
    double tau_plus = 0.0;
    double tau0 = 0.0;  ///< initial value s_i s_j
    bool i_up = false;
    bool j_up = false;
    bool out_of_range = false;

    double width() const { return tau_plus - tau_minus; }
};

/// i and j are positions in S' (bit indices of alpha).
CorrelationBound correlation_bounds(int sprime_size, Config alpha, int i, int j, double c_const, double zeta);

/// Interval for i chi_{i,j}(t) = tau_{i,j}(t) - tau_{j,i}(-t).
std::pair<double, double> susceptibility_bound(const CorrelationBound& bound_ij, const CorrelationBound& bound_ji);

}  // namespace mbdl

#endif  // MBDL_OBSERVABLES_HPP
