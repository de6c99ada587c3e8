#ifndef MBDL_MODEL_HPP
#define MBDL_MODEL_HPP

// Disordered XYZ spin-1/2 lattices, system partitions and the statics/flips
// decomposition of operators acting on them.
//
// Basis convention: a configuration of N sites is an N-bit integer, bit i set
// meaning spin up at site i, so the basis index is sum_i bit_i * 2^i.

#include "mbdl/core.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace mbdl {

enum class LatticeKind { chain, ring, grid2d, custom };

inline constexpr int kDefaultSiteCap = 14;

struct SpinLattice {
    int n_sites = 0;
    /// Nearest-neighbour bonds, each stored as (lo, hi) with lo < hi, sorted.
    std::vector<std::pair<int, int>> edges;
    std::string label;

    bool adjacent(int a, int b) const;
};

/// `extra` is the edge list for custom lattices; `width` is the row length for grid2d.
SpinLattice build_lattice(LatticeKind kind, int n_sites,
                          const std::vector<std::pair<int, int>>& extra = {}, int width = 0,
                          int site_cap = kDefaultSiteCap);

LatticeKind parse_lattice_kind(const std::string& name);

struct CouplingParams {
    double jx = 0.0;
    double jy = 0.0;
    double delta = 0.0;

    /// sqrt(jx^2 + jy^2).
    double j_eff() const { return std::hypot(jx, jy); }
    /// Jx == Jy: total up-spin number is conserved.
    bool conserves_magnetisation() const { return jx == jy; }
};

struct DisorderRealization {
    Eigen::VectorXd b_fields;
    double sigma_b = 0.0;
    std::uint64_t seed = 0;
};

/// Independent N(0, sigma_b^2) fields, deterministic in `seed`.
DisorderRealization sample_disorder(double sigma_b, std::uint64_t seed, int n_sites);

struct SystemPartition {
    int n_sites = 0;
    std::vector<int> sprime_sites;  ///< ordered; bit k of an S' configuration refers to sprime_sites[k]
    std::vector<int> s_sites;       ///< complement, ascending
    bool nonadjacency_enforced = false;

    int sprime_size() const { return static_cast<int>(sprime_sites.size()); }
    int s_size() const { return static_cast<int>(s_sites.size()); }
    std::size_t n_configs() const { return std::size_t{1} << sprime_sites.size(); }
    std::size_t block_dim() const { return std::size_t{1} << s_sites.size(); }

    /// Full-lattice basis index of S' in `omega` and S in `s_config`.
    Config embed(Config omega, Config s_config) const;
    /// S' configuration read off a full-lattice configuration.
    Config restrict_to_sprime(Config full) const;
};

/// An empty S' is accepted and yields the trivial one-block partition.
SystemPartition make_partition(const SpinLattice& lattice, std::vector<int> sprime_sites,
                               bool enforce_nonadjacency = false);

/// Tensor-ordered basis: entry k = omega * 2^|S| + a holds the full index embed(omega, a).
std::vector<Eigen::Index> tensor_order(const SystemPartition& partition);

/// H = sum_i B_i sz_i + sum_<ij> (Jx sx sx + Jy sy sy + Delta sz sz), real in the sz basis.
template <typename Scalar = double>
Matrix<Scalar> build_full_hamiltonian(const SpinLattice& lattice, const CouplingParams& params,
                                      const Eigen::VectorXd& fields);

template <typename Scalar = double>
Matrix<Scalar> build_full_hamiltonian(const SpinLattice& lattice, const CouplingParams& params,
                                      const DisorderRealization& disorder) {
    return build_full_hamiltonian<Scalar>(lattice, params, disorder.b_fields);
}

/// The blocks (<omega| x I_S) M (|alpha> x I_S) of an operator, stored as one
/// tensor-ordered dense matrix so blocks are contiguous sub-blocks.
template <typename Scalar>
class PartitionedOperator {
public:
    PartitionedOperator(Matrix<Scalar> tensor_ordered, SystemPartition partition)
        : m_(std::move(tensor_ordered)), partition_(std::move(partition)) {}

    const SystemPartition& partition() const { return partition_; }
    Eigen::Index block_dim() const { return static_cast<Eigen::Index>(partition_.block_dim()); }
    std::size_t n_configs() const { return partition_.n_configs(); }

    auto block(Config omega, Config alpha) const {
        const Eigen::Index d = block_dim();
        return m_.block(static_cast<Eigen::Index>(omega) * d, static_cast<Eigen::Index>(alpha) * d, d, d);
    }
    auto static_block(Config alpha) const { return block(alpha, alpha); }

    const Matrix<Scalar>& tensor_ordered() const { return m_; }

    /// sum_{omega,alpha} |omega><alpha| x block(omega, alpha), in the original basis.
    Matrix<Scalar> reassemble() const {
        const auto order = tensor_order(partition_);
        Matrix<Scalar> out(m_.rows(), m_.cols());
        for (Eigen::Index c = 0; c < m_.cols(); ++c)
            for (Eigen::Index r = 0; r < m_.rows(); ++r) out(order[r], order[c]) = m_(r, c);
        return out;
    }

private:
    Matrix<Scalar> m_;
    SystemPartition partition_;
};

template <typename Derived>
PartitionedOperator<typename Derived::Scalar> partition_operator(const Eigen::MatrixBase<Derived>& m,
                                                                 const SystemPartition& partition) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index dim = Eigen::Index{1} << partition.n_sites;
    if (m.rows() != dim || m.cols() != dim)
        throw ParameterError("partition_operator: matrix dimension does not match 2^n_sites");
    const auto order = tensor_order(partition);
    Matrix<Scalar> permuted(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c)
        for (Eigen::Index r = 0; r < dim; ++r) permuted(r, c) = m(order[r], order[c]);
    return PartitionedOperator<Scalar>(std::move(permuted), partition);
}

/// Y_alpha = sum_{k in S'} B_k (+1 if up in alpha, -1 if down).
double configuration_potential(const SystemPartition& partition, Config alpha, const Eigen::VectorXd& fields);

template <typename Scalar>
struct StaticSplit {
    double y_alpha = 0.0;
    Matrix<Scalar> h_tilde;  ///< H_alpha - y_alpha * I; independent of the S' fields
};

template <typename Scalar>
StaticSplit<Scalar> static_split(const PartitionedOperator<Scalar>& h, Config alpha,
                                 const Eigen::VectorXd& fields) {
    StaticSplit<Scalar> out;
    out.y_alpha = configuration_potential(h.partition(), alpha, fields);
    out.h_tilde = h.static_block(alpha);
    out.h_tilde.diagonal().array() -= Scalar(out.y_alpha);
    return out;
}

template <typename Scalar>
Matrix<Scalar> flip_block(const PartitionedOperator<Scalar>& h, Config omega, Config alpha) {
    if (omega == alpha) throw ContractError("flip_block: omega == alpha is a static, not a flip");
    return h.block(omega, alpha);
}

/// Covariance structure of a set of configuration potentials.
struct ConfigPotentialStats {
    std::vector<Config> configs;
    int sprime_size = 0;
    Eigen::MatrixXd coefficient_matrix;  ///< row beta = coefficient vector v_beta in {+1,-1}^|S'|
    Eigen::MatrixXd covariance;          ///< (|S'| - 2 Hamming(beta, gamma)) sigma_b^2
    double sigma_b = 0.0;
};

Eigen::RowVectorXd coefficient_vector(Config alpha, int sprime_size);

ConfigPotentialStats covariance_matrix(const std::vector<Config>& configs, int sprime_size, double sigma_b);

/// Var(Y_target | the other potentials) = 1 / (Sigma^-1)_{tt}.
/// Throws SingularityError naming the dependent rows when Sigma is singular.
double conditional_variance(const ConfigPotentialStats& stats, int target_index);

/// {alpha, alpha ^ 1, ..., alpha ^ 2^(|S'|-2)}: alpha followed by |S'| - 1 hypercube
/// neighbours, a linearly independent conditioning set.
std::vector<Config> neighbour_conditioning_set(Config alpha, int sprime_size);

std::string config_to_string(Config c, int n_bits);
Config config_from_string(const std::string& bits);

}  // namespace mbdl

#endif  // MBDL_MODEL_HPP
