#ifndef MBDL_DYNAMICS_HPP
#define MBDL_DYNAMICS_HPP

// Exact evolution restricted to an energy window, flip norms of the evolution
// operator, disorder-averaged experiments and decay fits.

#include "mbdl/model.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mbdl {

struct EnergyInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool is_full() const { return lo == -std::numeric_limits<double>::infinity() &&
                                  hi == std::numeric_limits<double>::infinity(); }
    bool contains(double e) const { return e >= lo && e <= hi; }
    double measure() const { return hi - lo; }
};

/// One invariant subspace of H: the basis states connected by nonzero matrix
/// elements. Only eigenpairs inside the interval are kept.
struct SpectralComponent {
    std::vector<Eigen::Index> basis;  ///< full-lattice indices, ascending
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;     ///< rows follow `basis`
};

struct SpectralData {
    Eigen::Index dim = 0;
    EnergyInterval interval;
    std::vector<SpectralComponent> components;
    std::vector<int> component_of;      ///< per basis index; -1 where the component was skipped
    std::vector<Eigen::Index> local_index;
    bool complete = true;               ///< every component diagonalised

    std::size_t rank() const;
    Eigen::VectorXd eigenvalues() const;  ///< kept eigenvalues, ascending
    /// Dense P_I. Requires a complete decomposition.
    Eigen::MatrixXd projector() const;
    /// P_I e^{-iHt} applied to a basis state.
    Eigen::VectorXcd evolve_basis_state(Eigen::Index index, double t) const;
};

/// Components of H; eigenpairs with eigenvalue in `interval` are kept. If
/// `needed` is given, only components containing one of those indices are
/// diagonalised.
SpectralData spectral_projector(const Eigen::MatrixXd& full_h, EnergyInterval interval = {},
                                const std::vector<Eigen::Index>* needed = nullptr);

/// Flip norms ||(<omega| x I) P_I e^{-iHt} (|alpha> x I)|| for one alpha and every omega.
class FlipNormEvaluator {
public:
    FlipNormEvaluator(const SpectralData& spectral, const SystemPartition& partition, Config alpha);

    std::vector<double> norms_at(double t) const;
    /// sum over distinct eigenvalues lambda in I of ||<omega|P_lambda|alpha>||, per omega.
    std::vector<double> triangle_upper() const;

private:
    struct Piece {
        int component;
        Eigen::MatrixXd alpha_rows;               ///< V restricted to alpha's rows, transposed (k x n_alpha)
        std::vector<Eigen::MatrixXd> omega_rows;  ///< V restricted to omega's rows (n_omega x k), per omega
    };
    const SpectralData& spectral_;
    std::size_t n_configs_;
    std::vector<Piece> pieces_;
};

double evolution_flip_norm(const SpectralData& spectral, const SystemPartition& partition, Config omega, Config alpha,
                           double t);

struct SupNorm {
    double grid_max = 0.0;
    double triangle_upper = 0.0;
};

SupNorm sup_t_norm(const SpectralData& spectral, const SystemPartition& partition, Config omega, Config alpha,
                   const std::vector<double>& t_grid);

/// `points` evenly spaced over [0, 20 / j_eff] (or [0, 20] when j_eff = 0).
std::vector<double> default_time_grid(double j_eff, int points = 512);

/// Symmetric window [-L, L] with L = 4 sigma_b n_sites + n_bonds (|Jx| + |Jy| + |Delta|),
/// containing the spectrum of all but a vanishing fraction of realisations.
EnergyInterval default_fixed_interval(const SpinLattice& lattice, const CouplingParams& params, double sigma_b);

enum class RecordKind { decay_vs_distance, magnetisation_vs_time, correlation_vs_time };

const char* to_string(RecordKind k);
RecordKind parse_record_kind(const std::string& s);

struct SeriesPoint {
    double abscissa = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

struct ExperimentRecord {
    RecordKind kind = RecordKind::decay_vs_distance;
    std::string label;
    SpinLattice lattice;
    std::vector<int> sprime_sites;
    CouplingParams params;
    double sigma_b = 0.0;
    EnergyInterval interval;
    std::vector<double> t_grid;
    std::size_t realisations = 0;
    std::uint64_t base_seed = 0;
    std::string observable;  ///< e.g. "grid_max", "M", "tau", "i_chi"
    std::optional<Config> alpha;    ///< S' configuration for decay runs
    std::optional<Config> initial;  ///< full-lattice product state
    std::vector<int> sites;         ///< i, j for correlation runs
    std::vector<SeriesPoint> series;
};

struct EnsembleConfig {
    SpinLattice lattice;
    SystemPartition partition;
    CouplingParams params;
    double sigma_b = 1.0;
    std::size_t realisations = 2;
    std::uint64_t base_seed = 0;
    EnergyInterval interval;
    int jobs = 1;
};

struct DecayExperimentConfig : EnsembleConfig {
    Config alpha = 0;
    std::vector<double> t_grid;   ///< empty: default_time_grid
    bool use_triangle = false;    ///< aggregate the triangle upper bound instead of the grid max
};

/// Mean over disorder of the per-realisation average sup_t flip norm over all
/// omega at each configuration-graph distance d from alpha (d = 0 included).
ExperimentRecord disorder_decay_experiment(const DecayExperimentConfig& config);

struct DynamicsConfig : EnsembleConfig {
    Config initial = 0;  ///< product state of the whole lattice
    std::vector<double> times;
};

/// M(t) = E[N_up - N_down] / |S'| on S'.
ExperimentRecord simulate_magnetisation(const DynamicsConfig& config);

struct CorrelationRecords {
    ExperimentRecord tau;    ///< tau_{i,j}(t)
    ExperimentRecord i_chi;  ///< tau_{i,j}(t) - tau_{j,i}(-t)
};

/// i and j are lattice sites in S'.
CorrelationRecords simulate_correlation(const DynamicsConfig& config, int site_i, int site_j);

struct DecayFit {
    double c_fit = 0.0;
    double zeta_fit = 0.0;  ///< -1 / slope; negative or infinite when the data do not decay
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;
    std::string method = "log-linear least squares";
    std::vector<std::string> warnings;

    bool decaying() const { return slope < 0.0; }
};

/// Least squares on (d, ln value). Nonpositive values are excluded with a warning.
DecayFit fit_decay(const std::vector<std::pair<double, double>>& points);

/// One observation to be enclosed by a (C, zeta) bound curve.
struct EnvelopePoint {
    double sigma_b = 0.0;
    double value = 0.0;
    /// Bound interval at (C, zeta) for this point.
    std::function<std::pair<double, double>(double c, double zeta)> interval;
};

struct EnvelopeFit {
    bool found = false;
    double c_fit = 0.0;
    double zeta0 = 0.0;  ///< zeta(sigma_b) = zeta0 / ln(1 + sigma_b / j_eff)
    double j_eff = 1.0;
    double total_width = 0.0;
    std::vector<std::pair<double, double>> intervals;

    double zeta_at(double sigma_b) const { return zeta0 / std::log1p(sigma_b / j_eff); }
};

/// Tightest enclosing bound family: for each C on a log grid over [c_lo, c_hi]
/// the smallest zeta0 that encloses every point, keeping the C with least total width.
EnvelopeFit fit_envelope(const std::vector<EnvelopePoint>& points, double j_eff, double c_lo = 0.25,
                         double c_hi = 4.0, int c_steps = 97);

}  // namespace mbdl

#endif  // MBDL_DYNAMICS_HPP
