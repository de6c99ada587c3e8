#ifndef MBDL_CONFIGGRAPH_HPP
#define MBDL_CONFIGGRAPH_HPP

// Configuration graph of a partitioned operator: one vertex per S'
// configuration, an edge alpha -> omega whenever the flip block
// (omega, alpha) is nonzero.

#include "mbdl/model.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <vector>

namespace mbdl {

inline constexpr int kInfiniteDistance = std::numeric_limits<int>::max();
inline constexpr double kEdgeThreshold = 1e-14;

/// Vertex subset of a graph with at most 64 vertices (|S'| <= 6).
using VertexMask = std::uint64_t;

template <typename Scalar>
class ConfigurationGraph {
public:
    ConfigurationGraph(std::shared_ptr<const PartitionedOperator<Scalar>> op, std::vector<double> potentials);

    int n_vertices() const { return static_cast<int>(out_.size()); }
    int sprime_size() const { return op_->partition().sprime_size(); }
    const PartitionedOperator<Scalar>& op() const { return *op_; }

    /// Sorted targets omega of edges alpha -> omega.
    const std::vector<int>& neighbours(int alpha) const { return out_[alpha]; }
    bool has_edge(int alpha, int omega) const;
    std::size_t n_edges() const;

    /// H_{omega <- alpha}; the flip block that carries alpha to omega.
    auto edge_weight(int alpha, int omega) const { return op_->block(omega, alpha); }
    auto vertex_static(int alpha) const { return op_->static_block(alpha); }
    double vertex_potential(int alpha) const { return potentials_[alpha]; }
    double edge_norm(int alpha, int omega) const;

private:
    std::shared_ptr<const PartitionedOperator<Scalar>> op_;
    std::vector<double> potentials_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<double>> out_norm_;
};

template <typename Scalar>
ConfigurationGraph<Scalar> build_config_graph(std::shared_ptr<const PartitionedOperator<Scalar>> op,
                                              const Eigen::VectorXd& fields);

template <typename Scalar>
ConfigurationGraph<Scalar> build_config_graph(const PartitionedOperator<Scalar>& op, const Eigen::VectorXd& fields) {
    return build_config_graph(std::make_shared<const PartitionedOperator<Scalar>>(op), fields);
}

/// Breadth-first shortest-walk length, kInfiniteDistance when unreachable.
template <typename Scalar>
int distance(const ConfigurationGraph<Scalar>& g, int alpha, int omega);

/// All distances from alpha.
template <typename Scalar>
std::vector<int> distances_from(const ConfigurationGraph<Scalar>& g, int alpha);

/// Callback receives the vertex sequence; returning false stops the stream.
using PathVisitor = std::function<bool(const std::vector<int>&)>;

/// Simple paths alpha -> omega with at most max_len edges, branches taken in
/// ascending vertex order.
template <typename Scalar>
void enumerate_simple_paths(const ConfigurationGraph<Scalar>& g, int alpha, int omega, int max_len,
                            const PathVisitor& visit);

/// Simple cycles alpha -> mu_2 -> ... -> mu_k -> alpha (k >= 2) in g minus `deleted`.
/// The visited sequence starts at alpha and does not repeat it at the end.
template <typename Scalar>
void enumerate_simple_cycles_off(const ConfigurationGraph<Scalar>& g, int alpha, VertexMask deleted,
                                 const PathVisitor& visit, int max_len = std::numeric_limits<int>::max());

template <typename Scalar>
std::vector<std::vector<int>> collect_simple_paths(const ConfigurationGraph<Scalar>& g, int alpha, int omega,
                                                   int max_len) {
    std::vector<std::vector<int>> out;
    enumerate_simple_paths(g, alpha, omega, max_len, [&](const std::vector<int>& p) {
        out.push_back(p);
        return true;
    });
    return out;
}

template <typename Scalar>
std::vector<std::vector<int>> collect_simple_cycles_off(const ConfigurationGraph<Scalar>& g, int alpha,
                                                        VertexMask deleted = 0) {
    std::vector<std::vector<int>> out;
    enumerate_simple_cycles_off(g, alpha, deleted, [&](const std::vector<int>& c) {
        out.push_back(c);
        return true;
    });
    return out;
}

/// Decides whether configuration beta joins the collapsed vertex of alpha.
using MergePredicate = std::function<bool(Config beta, Config alpha, int sprime_size)>;

/// v_beta = +v_alpha or v_beta = -v_alpha.
bool strict_pm_merge(Config beta, Config alpha, int sprime_size);

template <typename Scalar>
struct CollapsedGraph {
    const ConfigurationGraph<Scalar>* parent = nullptr;
    int alpha = 0;
    std::vector<int> merged;     ///< ascending; contains alpha
    std::vector<int> remaining;  ///< ascending
    /// [block(beta, gamma)] over merged configurations: statics on the diagonal, flips between them.
    Matrix<Scalar> collapsed_static;
    /// For each remaining vertex, the merged-to-remaining flips [block(rem, beta)] side by side.
    std::vector<Matrix<Scalar>> outgoing;

    Eigen::Index merged_dim() const { return collapsed_static.rows(); }
    /// Offset of alpha's own static inside collapsed_static.
    Eigen::Index alpha_offset() const;
};

template <typename Scalar>
CollapsedGraph<Scalar> y_collapse(const ConfigurationGraph<Scalar>& g, int alpha,
                                  const MergePredicate& merge = strict_pm_merge);

/// Block of (zI - H)^-1 on the merged vertex, via the Schur complement over the remaining vertices.
template <typename Scalar>
MatrixXc collapsed_greens(const CollapsedGraph<Scalar>& c, cplx z);

/// One line per directed edge: "alpha omega norm", configurations as bitstrings.
template <typename Scalar>
void write_edge_list(std::ostream& os, const ConfigurationGraph<Scalar>& g);

}  // namespace mbdl

#endif  // MBDL_CONFIGGRAPH_HPP
