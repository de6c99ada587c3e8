#include "mbdl/configgraph.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <ostream>

namespace mbdl {

template <typename Scalar>
ConfigurationGraph<Scalar>::ConfigurationGraph(std::shared_ptr<const PartitionedOperator<Scalar>> op,
                                               std::vector<double> potentials)
    : op_(std::move(op)), potentials_(std::move(potentials)) {
    const int n = static_cast<int>(op_->n_configs());
    if (static_cast<int>(potentials_.size()) != n)
        throw ParameterError("ConfigurationGraph: one potential per configuration required");
    out_.resize(n);
    out_norm_.resize(n);
    for (int a = 0; a < n; ++a)
        for (int w = 0; w < n; ++w) {
            if (w == a) continue;
            const double nrm = norm2(op_->block(w, a));
            if (nrm > kEdgeThreshold) {
                out_[a].push_back(w);
                out_norm_[a].push_back(nrm);
            }
        }
}

template <typename Scalar>
bool ConfigurationGraph<Scalar>::has_edge(int alpha, int omega) const {
    return std::binary_search(out_[alpha].begin(), out_[alpha].end(), omega);
}

template <typename Scalar>
std::size_t ConfigurationGraph<Scalar>::n_edges() const {
    std::size_t e = 0;
    for (const auto& v : out_) e += v.size();
    return e;
}

template <typename Scalar>
double ConfigurationGraph<Scalar>::edge_norm(int alpha, int omega) const {
    const auto& nb = out_[alpha];
    auto it = std::lower_bound(nb.begin(), nb.end(), omega);
    if (it == nb.end() || *it != omega) return 0.0;
    return out_norm_[alpha][static_cast<std::size_t>(it - nb.begin())];
}

template <typename Scalar>
ConfigurationGraph<Scalar> build_config_graph(std::shared_ptr<const PartitionedOperator<Scalar>> op,
                                              const Eigen::VectorXd& fields) {
    if (fields.size() != op->partition().n_sites)
        throw ParameterError("build_config_graph: field vector length does not match the lattice");
    std::vector<double> y(op->n_configs());
    for (std::size_t a = 0; a < y.size(); ++a) y[a] = configuration_potential(op->partition(), a, fields);
    return ConfigurationGraph<Scalar>(std::move(op), std::move(y));
}

template <typename Scalar>
std::vector<int> distances_from(const ConfigurationGraph<Scalar>& g, int alpha) {
    std::vector<int> dist(static_cast<std::size_t>(g.n_vertices()), kInfiniteDistance);
    std::deque<int> queue{alpha};
    dist[alpha] = 0;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int w : g.neighbours(v))
            if (dist[w] == kInfiniteDistance) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
    }
    return dist;
}

template <typename Scalar>
int distance(const ConfigurationGraph<Scalar>& g, int alpha, int omega) {
    if (alpha < 0 || omega < 0 || alpha >= g.n_vertices() || omega >= g.n_vertices())
        throw ParameterError("distance: vertex out of range");
    return distances_from(g, alpha)[omega];
}

namespace {

void check_small(int n_vertices, const char* who) {
    if (n_vertices > 64)
        throw SizeError(std::string(who) + ": enumeration supports at most 64 vertices (|S'| <= 6)");
}

template <typename Scalar>
struct PathWalker {
    const ConfigurationGraph<Scalar>& g;
    int target;
    int max_len;
    const PathVisitor& visit;
    std::vector<int> path;
    VertexMask used = 0;
    bool stopped = false;

    void step(int v) {
        if (v == target) {
            if (!visit(path)) stopped = true;
            return;
        }
        if (static_cast<int>(path.size()) - 1 >= max_len) return;
        for (int w : g.neighbours(v)) {
            if (used >> w & 1u) continue;
            path.push_back(w);
            used |= VertexMask{1} << w;
            step(w);
            used &= ~(VertexMask{1} << w);
            path.pop_back();
            if (stopped) return;
        }
    }
};

template <typename Scalar>
struct CycleWalker {
    const ConfigurationGraph<Scalar>& g;
    int root;
    int max_len;
    const PathVisitor& visit;
    std::vector<int> path;
    VertexMask blocked = 0;
    bool stopped = false;

    void step(int v) {
        const int len = static_cast<int>(path.size());  // edges so far plus one
        for (int w : g.neighbours(v)) {
            if (w == root) {
                if (len >= 2 && len <= max_len && !visit(path)) stopped = true;
            } else if (!(blocked >> w & 1u) && len < max_len) {
                path.push_back(w);
                blocked |= VertexMask{1} << w;
                step(w);
                blocked &= ~(VertexMask{1} << w);
                path.pop_back();
            }
            if (stopped) return;
        }
    }
};

}  // namespace

template <typename Scalar>
void enumerate_simple_paths(const ConfigurationGraph<Scalar>& g, int alpha, int omega, int max_len,
                            const PathVisitor& visit) {
    check_small(g.n_vertices(), "enumerate_simple_paths");
    if (max_len > g.n_vertices()) throw ParameterError("enumerate_simple_paths: max_len exceeds vertex count");
    PathWalker<Scalar> w{g, omega, max_len, visit, {alpha}, VertexMask{1} << alpha};
    w.step(alpha);
}

template <typename Scalar>
void enumerate_simple_cycles_off(const ConfigurationGraph<Scalar>& g, int alpha, VertexMask deleted,
                                 const PathVisitor& visit, int max_len) {
    check_small(g.n_vertices(), "enumerate_simple_cycles_off");
    if (deleted >> alpha & 1u) throw ParameterError("enumerate_simple_cycles_off: alpha is deleted");
    CycleWalker<Scalar> w{g, alpha, max_len, visit, {alpha}, deleted | (VertexMask{1} << alpha)};
    w.step(alpha);
}

bool strict_pm_merge(Config beta, Config alpha, int sprime_size) {
    const Config all = sprime_size >= 64 ? ~Config{0} : (Config{1} << sprime_size) - 1;
    return beta == alpha || beta == (alpha ^ all);
}

template <typename Scalar>
Eigen::Index CollapsedGraph<Scalar>::alpha_offset() const {
    const Eigen::Index d = parent->op().block_dim();
    const auto it = std::find(merged.begin(), merged.end(), alpha);
    return static_cast<Eigen::Index>(it - merged.begin()) * d;
}

template <typename Scalar>
CollapsedGraph<Scalar> y_collapse(const ConfigurationGraph<Scalar>& g, int alpha, const MergePredicate& merge) {
    if (alpha < 0 || alpha >= g.n_vertices()) throw ParameterError("y_collapse: vertex out of range");
    CollapsedGraph<Scalar> c;
    c.parent = &g;
    c.alpha = alpha;
    for (int b = 0; b < g.n_vertices(); ++b)
        (b == alpha || merge(b, alpha, g.sprime_size()) ? c.merged : c.remaining).push_back(b);

    const Eigen::Index d = g.op().block_dim();
    const auto m = static_cast<Eigen::Index>(c.merged.size());
    c.collapsed_static.resize(m * d, m * d);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            c.collapsed_static.block(i * d, j * d, d, d) = g.op().block(c.merged[i], c.merged[j]);
    for (int r : c.remaining) {
        Matrix<Scalar> row(d, m * d);
        for (Eigen::Index j = 0; j < m; ++j) row.block(0, j * d, d, d) = g.op().block(r, c.merged[j]);
        c.outgoing.push_back(std::move(row));
    }
    return c;
}

template <typename Scalar>
MatrixXc collapsed_greens(const CollapsedGraph<Scalar>& c, cplx z) {
    const auto& op = c.parent->op();
    const Eigen::Index d = op.block_dim();
    const auto m = static_cast<Eigen::Index>(c.merged.size());
    const auto r = static_cast<Eigen::Index>(c.remaining.size());

    MatrixXc bracket = -c.collapsed_static.template cast<cplx>();
    bracket.diagonal().array() += z;
    if (r > 0) {
        MatrixXc rest(r * d, r * d);
        MatrixXc coupling(r * d, m * d);  // H_{remaining <- merged}
        for (Eigen::Index i = 0; i < r; ++i) {
            for (Eigen::Index j = 0; j < r; ++j)
                rest.block(i * d, j * d, d, d) = -op.block(c.remaining[i], c.remaining[j]).template cast<cplx>();
            coupling.block(i * d, 0, d, m * d) = c.outgoing[i].template cast<cplx>();
        }
        rest.diagonal().array() += z;
        MatrixXc back(m * d, r * d);  // H_{merged <- remaining}
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < r; ++j)
                back.block(i * d, j * d, d, d) = op.block(c.merged[i], c.remaining[j]).template cast<cplx>();
        bracket -= back * rest.partialPivLu().solve(coupling);
    }
    return bracket.partialPivLu().inverse();
}

template <typename Scalar>
void write_edge_list(std::ostream& os, const ConfigurationGraph<Scalar>& g) {
    const int bits = g.sprime_size();
    os << std::setprecision(17);
    for (int a = 0; a < g.n_vertices(); ++a)
        for (int w : g.neighbours(a))
            os << config_to_string(a, bits) << ' ' << config_to_string(w, bits) << ' ' << g.edge_norm(a, w) << '\n';
}

#define MBDL_INSTANTIATE(S)                                                                                     \
    template class ConfigurationGraph<S>;                                                                       \
    template ConfigurationGraph<S> build_config_graph(std::shared_ptr<const PartitionedOperator<S>>,           \
                                                      const Eigen::VectorXd&);                                 \
    template int distance(const ConfigurationGraph<S>&, int, int);                                              \
    template std::vector<int> distances_from(const ConfigurationGraph<S>&, int);                                \
    template void enumerate_simple_paths(const ConfigurationGraph<S>&, int, int, int, const PathVisitor&);     \
    template void enumerate_simple_cycles_off(const ConfigurationGraph<S>&, int, VertexMask, const PathVisitor&, \
                                              int);                                                             \
    template struct CollapsedGraph<S>;                                                                          \
    template CollapsedGraph<S> y_collapse(const ConfigurationGraph<S>&, int, const MergePredicate&);           \
    template MatrixXc collapsed_greens(const CollapsedGraph<S>&, cplx);                                         \
    template void write_edge_list(std::ostream&, const ConfigurationGraph<S>&);

MBDL_INSTANTIATE(double)
MBDL_INSTANTIATE(cplx)

#undef MBDL_INSTANTIATE

}  // namespace mbdl
