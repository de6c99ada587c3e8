#ifndef MBDL_GREENS_HPP
#define MBDL_GREENS_HPP

// Generalised Green's functions G(omega, alpha; z) = (<omega| x I)(z - H)^-1(|alpha> x I),
// by dense resolvent (the oracle) and by path-sums over the configuration graph.

#include "mbdl/configgraph.hpp"

#include <memory>

namespace mbdl {

enum class Provenance { oracle, pathsum };

struct GreensBlock {
    cplx z;
    MatrixXc block;
    Provenance provenance = Provenance::oracle;
};

/// Minimum distance from a real z to the spectrum before the oracle refuses.
inline constexpr double kSpectralGap = 1e-8;

/// Dense resolvent (z - H)^-1 in tensor order; blocks are contiguous.
template <typename Derived>
MatrixXc resolvent_tensor_ordered(const Eigen::MatrixBase<Derived>& full_h, const SystemPartition& partition,
                                  cplx z);

template <typename Derived>
GreensBlock resolvent_oracle(const Eigen::MatrixBase<Derived>& full_h, const SystemPartition& partition,
                             Config omega, Config alpha, cplx z);

struct PathSumOptions {
    int sprime_cap = 4;
    /// Allow |S'| above sprime_cap (up to 6) after printing a cost warning.
    bool allow_override = false;
    double max_condition = 1e12;
    std::size_t cache_bytes = std::size_t{1} << 30;  ///< split evenly between the two caches
};

/// Estimated memoised work for a path-sum evaluation: number of (deleted set, vertex) keys.
double pathsum_cost_estimate(int sprime_size, int s_size);

namespace detail {

/// Block-size-specialised path-sum kernel over complex blocks.
class PathSumEngine {
public:
    virtual ~PathSumEngine() = default;
    virtual MatrixXc diagonal(int alpha, VertexMask deleted) = 0;
    virtual MatrixXc self_energy(int alpha, VertexMask deleted) = 0;
    virtual std::vector<MatrixXc> column(int alpha, VertexMask deleted) = 0;
    virtual std::size_t cache_entries() const = 0;
};

struct PathSumInput {
    int sprime_size = 0;
    std::vector<std::vector<int>> neighbours;
    std::vector<MatrixXc> statics;
    std::vector<MatrixXc> flips;  ///< flips[from * n + to] = H_{to <- from}; empty when no edge
};

std::unique_ptr<PathSumEngine> make_pathsum_engine(PathSumInput input, cplx z, const PathSumOptions& options);

}  // namespace detail

/// Path-sum evaluator at fixed z. Diagonal blocks on vertex-deleted subgraphs
/// are memoised on (deleted set, vertex), and partial cycle sums on
/// (root, visited set, vertex); when a cache is full the entries with the
/// largest sets go first. Not thread-safe: use one per worker.
template <typename Scalar>
class PathSumEvaluator {
public:
    PathSumEvaluator(const ConfigurationGraph<Scalar>& graph, cplx z, PathSumOptions options = {});

    cplx z() const { return z_; }

    /// [zI - H_alpha - Sigma(alpha; g \ deleted)]^-1
    MatrixXc diagonal(int alpha, VertexMask deleted = 0);
    /// Sum over simple cycles off alpha in g \ deleted.
    MatrixXc self_energy(int alpha, VertexMask deleted = 0);
    MatrixXc offdiagonal(int omega, int alpha);
    /// G(omega, alpha) for every omega, from one simple-path sweep rooted at alpha.
    std::vector<MatrixXc> column(int alpha, VertexMask deleted = 0);

    std::size_t cache_entries() const { return engine_->cache_entries(); }

private:
    void check_vertex(int alpha, VertexMask deleted) const;

    int n_;
    cplx z_;
    std::unique_ptr<detail::PathSumEngine> engine_;
};

template <typename Scalar>
GreensBlock diagonal_greens_pathsum(const ConfigurationGraph<Scalar>& g, int alpha, cplx z,
                                    VertexMask deleted = 0, PathSumOptions options = {}) {
    PathSumEvaluator<Scalar> ev(g, z, options);
    return {z, ev.diagonal(alpha, deleted), Provenance::pathsum};
}

template <typename Scalar>
MatrixXc self_energy(const ConfigurationGraph<Scalar>& g, int alpha, cplx z, VertexMask deleted = 0,
                     PathSumOptions options = {}) {
    PathSumEvaluator<Scalar> ev(g, z, options);
    return ev.self_energy(alpha, deleted);
}

template <typename Scalar>
GreensBlock offdiagonal_greens_pathsum(const ConfigurationGraph<Scalar>& g, int alpha, int omega, cplx z,
                                       PathSumOptions options = {}) {
    PathSumEvaluator<Scalar> ev(g, z, options);
    return {z, ev.offdiagonal(omega, alpha), Provenance::pathsum};
}

struct FractionalMomentSetup {
    SpinLattice lattice;
    SystemPartition partition;
    CouplingParams params;
    double sigma_b = 1.0;
};

/// Monte Carlo estimate of E ||G(omega, alpha; z)||^s over Gaussian disorder.
MeanStderr fractional_norm_mc(const FractionalMomentSetup& setup, Config omega, Config alpha, cplx z, double s,
                              std::size_t n_realisations, std::uint64_t base_seed, int jobs = 1);

/// Random oracle-comparison instance. With a nonempty S the lattice is a random
/// connected graph in which no bond joins two S' sites, so the configuration
/// graph is a subgraph of the |S'|-hypercube; with S empty it is a random tree.
struct GreensCheckInstance {
    SpinLattice lattice;
    SystemPartition partition;
    CouplingParams params;
    Eigen::VectorXd fields;
};

GreensCheckInstance random_greens_instance(int n_sites, int sprime_size, std::uint64_t seed, double sigma_b = 1.0);

struct GreensCheckResult {
    double max_rel_error = 0.0;  ///< max over blocks of ||G_pathsum - G_oracle||_F / ||G_oracle||_F
    cplx z;
    std::size_t blocks = 0;
};

/// Compares every block against the dense resolvent at z = mean(spectrum) + i eta_factor J.
GreensCheckResult check_greens_instance(const GreensCheckInstance& inst, double eta_factor = 0.1,
                                        PathSumOptions options = {});

// ---------------------------------------------------------------------------

namespace detail {
template <typename Derived>
void check_spectral_gap(const Eigen::MatrixBase<Derived>& h, cplx z) {
    if (std::abs(z.imag()) >= kSpectralGap) return;
    Eigen::SelfAdjointEigenSolver<Matrix<typename Derived::Scalar>> es(h, Eigen::EigenvaluesOnly);
    const double gap = (es.eigenvalues().array() - z.real()).abs().minCoeff();
    if (gap < kSpectralGap) throw ConditioningError("resolvent: z lies within 1e-8 of the spectrum", gap);
}
}  // namespace detail

template <typename Derived>
MatrixXc resolvent_tensor_ordered(const Eigen::MatrixBase<Derived>& full_h, const SystemPartition& partition,
                                  cplx z) {
    const Eigen::Index dim = Eigen::Index{1} << partition.n_sites;
    if (full_h.rows() != dim || full_h.cols() != dim)
        throw ParameterError("resolvent: matrix dimension does not match 2^n_sites");
    detail::check_spectral_gap(full_h, z);
    const auto order = tensor_order(partition);
    MatrixXc m(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c)
        for (Eigen::Index r = 0; r < dim; ++r) m(r, c) = -cplx(full_h(order[r], order[c]));
    m.diagonal().array() += z;
    return m.partialPivLu().inverse();
}

template <typename Derived>
GreensBlock resolvent_oracle(const Eigen::MatrixBase<Derived>& full_h, const SystemPartition& partition,
                             Config omega, Config alpha, cplx z) {
    if (omega >= partition.n_configs() || alpha >= partition.n_configs())
        throw ParameterError("resolvent_oracle: configuration out of range");
    const Eigen::Index dim = Eigen::Index{1} << partition.n_sites;
    if (full_h.rows() != dim || full_h.cols() != dim)
        throw ParameterError("resolvent: matrix dimension does not match 2^n_sites");
    detail::check_spectral_gap(full_h, z);
    const auto d = static_cast<Eigen::Index>(partition.block_dim());
    MatrixXc m = -full_h.template cast<cplx>();
    m.diagonal().array() += z;
    MatrixXc rhs = MatrixXc::Zero(dim, d);
    for (Eigen::Index a = 0; a < d; ++a) rhs(static_cast<Eigen::Index>(partition.embed(alpha, a)), a) = 1.0;
    const MatrixXc cols = m.partialPivLu().solve(rhs);
    GreensBlock out{z, MatrixXc(d, d), Provenance::oracle};
    for (Eigen::Index r = 0; r < d; ++r) out.block.row(r) = cols.row(static_cast<Eigen::Index>(partition.embed(omega, r)));
    return out;
}

}  // namespace mbdl

#endif  // MBDL_GREENS_HPP
