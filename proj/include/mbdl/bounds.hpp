#ifndef MBDL_BOUNDS_HPP
#define MBDL_BOUNDS_HPP

// Closed-form localisation bounds and the special functions they use.
// Everything is evaluated in long double and returned as double.

#include "mbdl/core.hpp"

#include <string>

namespace mbdl {

/// Phi(z, 1, a) = sum_{k>=0} z^k / (k + a) for 0 <= z < 1, a > 0.
double hurwitz_lerch_phi(double z, double a);

/// B_z(a, 0) = int_0^z t^(a-1) (1-t)^-1 dt = z^a Phi(z, 1, a).
double incomplete_beta_b0(double z, double a);

/// D J |S'|^(1/s) / sqrt(2 pi).
double sigma_b_min(double s, double d_total, double j_eff, int sprime_size);

/// zeta = [s ln(sigma_b / sigma_b_min)]^-1. Nonpositive below sigma_b_min,
/// +infinity exactly at it; the sign of the result tracks sigma_b - sigma_b_min exactly.
double localisation_length(double s, double sigma_b, double d_total, double j_eff, int sprime_size);

/// 4^(1 - s1) k^s1 / (1 - s1).
double c_of_s1(double s1, double k_universal);

/// Smallest integer distance d with d > 1/s - 1.
int min_admissible_distance(double s);

enum class BoundRegime {
    direct_series,  ///< s < 1 / (2^|S'| + 1): the fractional-moment series applies directly
    extension_lemma ///< larger s, reached through the extension lemma
};

const char* to_string(BoundRegime r);

struct BoundInputs {
    double s = 0.5;
    double s1 = 0.9;
    int sprime_size = 1;
    int total_size = 2;
    double j_eff = 1.0;
    double sigma_b = 1.0;
    double interval_measure = 1.0;  ///< |I|
    double k_universal = 1.0;
    int distance = 1;

    double d_total() const;  ///< 2^total_size
    int s_size() const { return total_size - sprime_size; }
};

struct BoundReport {
    BoundInputs inputs;
    double zeta = 0.0;
    double sigma_b_min = 0.0;
    double c_of_s1 = 0.0;
    double lemma1_factor = 0.0;  ///< (1/2pi)(2|I|)^(1/(2-s))
    double phi_term = 0.0;       ///< (1/(s|S'|)) Phi(e^(-1/zeta), 1, d + 1 - 1/s)
    double prefactor = 0.0;      ///< C(omega, alpha)
    double exponential = 0.0;
    double full_rhs = 0.0;
    bool zeta_positive = false;
    BoundRegime regime = BoundRegime::extension_lemma;
};

/// Localisation bound on E[sup_t ||(P_I e^{-iHt})_{omega x alpha}||]. When zeta <= 0 the
/// bound is vacuous: full_rhs = +inf and zeta_positive = false.
BoundReport theorem1_rhs(const BoundInputs& in);

/// (1/2pi)(2|I|)^(1/(2-s)) c_frac e^{-d/((2-s) zeta)}.
double lemma1_transfer(double c_frac, double zeta, double s, double interval_measure, double distance);

/// (2n)^s / (1 - s) rho_inf^s.
double lemma2_ceiling(double n, double s, double rho_inf);

/// c[s1]^(s/s1) 2^(|S| s) (sigma_b sqrt(2pi))^-s c_frac^((s1-s)/s1) e^{-(s1-s) d / (s1 zeta)}.
double extension_constants(double s, double s1, int s_size, double sigma_b, double k_universal, double c_frac,
                           double zeta, double distance);

/// |S'|^-1 (r^(1/s)/s) B_r(d + 1 - 1/s, 0), equal to |S'|^-1 |sum_{l>=d} r^(l+1) / (1 - (l+1) s)|.
double greens_series_bound(double r, double s, int sprime_size, int distance);

}  // namespace mbdl

#endif  // MBDL_BOUNDS_HPP
