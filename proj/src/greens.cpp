#include "mbdl/greens.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace mbdl {

double pathsum_cost_estimate(int sprime_size, int s_size) {
    const double n = std::ldexp(1.0, sprime_size);
    const double d = std::ldexp(1.0, s_size);
    return n * std::ldexp(1.0, static_cast<int>(n) - 1) * d * d * d;
}

namespace detail {
namespace {

// Cache of blocks keyed by (set, a, b). Graphs of up to 16 vertices index a
// flat table; larger ones fall back to hashing. Blocks live in a deque so
// references stay valid while the cache grows.
template <typename Block>
class Memo {
public:
    Memo(int n_vertices, int n_a, int n_b, std::size_t max_entries)
        : n_a_(n_a), n_b_(n_b), max_(std::max<std::size_t>(16, max_entries)) {
        if (n_vertices <= 16)
            table_.assign((std::size_t{1} << n_vertices) * static_cast<std::size_t>(n_a * n_b), 0);
    }

    const Block* find(VertexMask set, int a, int b) const {
        std::uint32_t slot = 0;
        if (!table_.empty()) {
            slot = table_[flat(set, a, b)];
        } else if (auto it = map_.find(Key{set, a, b}); it != map_.end()) {
            slot = it->second;
        }
        return slot ? &blocks_[slot - 1] : nullptr;
    }

    const Block& insert(VertexMask set, int a, int b, const Block& value) {
        if (size_ >= max_) evict_largest();
        std::uint32_t slot;
        if (!free_.empty()) {
            slot = free_.back();
            free_.pop_back();
            blocks_[slot - 1] = value;
            owners_[slot - 1] = Key{set, a, b};
        } else {
            blocks_.push_back(value);
            owners_.push_back(Key{set, a, b});
            slot = static_cast<std::uint32_t>(blocks_.size());
        }
        if (!table_.empty())
            table_[flat(set, a, b)] = slot;
        else
            map_[Key{set, a, b}] = slot;
        ++per_size_[popcount(set)];
        ++size_;
        return blocks_[slot - 1];
    }

    std::size_t size() const { return size_; }

private:
    struct Key {
        VertexMask set;
        int a;
        int b;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return static_cast<std::size_t>(
                splitmix64(k.set ^ static_cast<VertexMask>(k.a) << 52 ^ static_cast<VertexMask>(k.b) << 58 ^
                           static_cast<VertexMask>(k.b)));
        }
    };

    std::size_t flat(VertexMask set, int a, int b) const {
        return (static_cast<std::size_t>(set) * static_cast<std::size_t>(n_a_) + static_cast<std::size_t>(a)) *
                   static_cast<std::size_t>(n_b_) +
               static_cast<std::size_t>(b);
    }

    void evict_largest() {
        int top = 64;
        while (top > 0 && per_size_[top] == 0) --top;
        for (std::size_t i = 0; i < owners_.size(); ++i) {
            const Key& k = owners_[i];
            if (k.a < 0 || popcount(k.set) != top) continue;
            if (!table_.empty())
                table_[flat(k.set, k.a, k.b)] = 0;
            else
                map_.erase(k);
            owners_[i].a = -1;
            free_.push_back(static_cast<std::uint32_t>(i + 1));
            --size_;
        }
        per_size_[top] = 0;
    }

    int n_a_;
    int n_b_;
    std::size_t max_;
    std::size_t size_ = 0;
    std::vector<std::uint32_t> table_;  ///< slot + 1, zero when absent
    std::unordered_map<Key, std::uint32_t, KeyHash> map_;
    std::deque<Block> blocks_;
    std::vector<Key> owners_;
    std::vector<std::uint32_t> free_;
    std::array<std::size_t, 65> per_size_{};
};

template <int D>
class Engine final : public PathSumEngine {
public:
    using Block = Eigen::Matrix<cplx, D, D>;

    Engine(PathSumInput in, cplx z, const PathSumOptions& opt)
        : n_(static_cast<int>(in.neighbours.size())),
          d_(in.statics.empty() ? 0 : in.statics[0].rows()),
          z_(z),
          max_condition_(opt.max_condition),
          sprime_size_(in.sprime_size),
          neighbours_(std::move(in.neighbours)),
          diag_(n_, n_, 1, opt.cache_bytes / 2 / block_bytes(d_)),
          tail_(n_, n_, n_, opt.cache_bytes / 2 / block_bytes(d_)) {
        for (auto& m : in.statics) statics_.push_back(m);
        for (auto& m : in.flips) flips_.push_back(m.size() ? Block(m) : Block());
    }

    MatrixXc diagonal(int alpha, VertexMask deleted) override {
        Guard g(top_);
        return diag_ref(alpha, deleted);
    }

    MatrixXc self_energy(int alpha, VertexMask deleted) override {
        Guard g(top_);
        return tail_ref(alpha, deleted | VertexMask{1} << alpha, alpha);
    }

    std::vector<MatrixXc> column(int alpha, VertexMask deleted) override {
        Guard g(top_);
        std::vector<Block> acc(static_cast<std::size_t>(n_), Block::Zero(d_, d_));
        acc[alpha] = diag_ref(alpha, deleted);
        column_walk(alpha, acc[alpha], deleted | VertexMask{1} << alpha, acc);
        return {acc.begin(), acc.end()};
    }

    std::size_t cache_entries() const override { return diag_.size() + tail_.size(); }

private:
    // Restores the scratch stack when an evaluation unwinds on an exception.
    struct Guard {
        std::size_t& top;
        std::size_t saved;
        explicit Guard(std::size_t& t) : top(t), saved(t) {}
        ~Guard() { top = saved; }
    };

    static std::size_t block_bytes(Eigen::Index d) {
        return static_cast<std::size_t>(d * d) * sizeof(cplx) + 3 * sizeof(VertexMask);
    }

    const Block& flip(int from, int to) const { return flips_[static_cast<std::size_t>(from * n_ + to)]; }

    Block& acquire() {
        if (top_ == scratch_.size()) scratch_.emplace_back(d_, d_);
        return scratch_[top_++];
    }
    void release() { --top_; }

    Block invert_bracket(const Block& bracket, int v) const {
        Eigen::PartialPivLU<Matrix<cplx>> lu{Matrix<cplx>(bracket)};
        const double rc = lu.rcond();
        const double cond = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
        if (!(cond <= max_condition_))
            throw ConditioningError("path-sums: bracket at vertex " +
                                        config_to_string(static_cast<Config>(v), sprime_size_) +
                                        " is ill-conditioned",
                                    cond);
        return lu.inverse();
    }

    const Block& diag_ref(int v, VertexMask deleted) {
        if (const Block* hit = diag_.find(deleted, v, 0)) return *hit;
        Block& bracket = acquire();
        bracket = -statics_[v] - tail_ref(v, deleted | VertexMask{1} << v, v);
        bracket.diagonal().array() += z_;
        const Block inv = invert_bracket(bracket, v);
        release();
        return diag_.insert(deleted, v, 0, inv);
    }

    // Sum over continuations of a cycle off `root` that has visited `used` and
    // stands at `cur`; right-multiplying by the weight carried so far gives the
    // contribution to Sigma(root). Depends only on (root, used, cur).
    const Block& tail_ref(int root, VertexMask used, int cur) {
        if (const Block* hit = tail_.find(used, root, cur)) return *hit;
        Block& acc = acquire();
        acc.setZero(d_, d_);
        for (int nx : neighbours_[cur]) {
            if (nx == root) {
                if (cur != root) acc += flip(cur, root);
                continue;
            }
            if (used >> nx & 1u) continue;
            Block& step = acquire();
            step.noalias() = diag_ref(nx, used) * flip(cur, nx);
            acc.noalias() += tail_ref(root, used | VertexMask{1} << nx, nx) * step;
            release();
        }
        const Block& out = tail_.insert(used, root, cur, acc);
        release();
        return out;
    }

    // Simple paths from the column root; w is the summed weight of the current path.
    void column_walk(int cur, const Block& w, VertexMask used, std::vector<Block>& out) {
        for (int nx : neighbours_[cur]) {
            if (used >> nx & 1u) continue;
            Block& tmp = acquire();
            Block& next = acquire();
            tmp.noalias() = flip(cur, nx) * w;
            next.noalias() = diag_ref(nx, used) * tmp;
            out[nx] += next;
            column_walk(nx, next, used | VertexMask{1} << nx, out);
            release();
            release();
        }
    }

    int n_;
    Eigen::Index d_;
    cplx z_;
    double max_condition_;
    int sprime_size_;
    std::vector<std::vector<int>> neighbours_;
    std::vector<Block> statics_;
    std::vector<Block> flips_;
    Memo<Block> diag_;
    Memo<Block> tail_;
    std::deque<Block> scratch_;
    std::size_t top_ = 0;
};

}  // namespace

std::unique_ptr<PathSumEngine> make_pathsum_engine(PathSumInput input, cplx z, const PathSumOptions& options) {
    const Eigen::Index d = input.statics.empty() ? 0 : input.statics[0].rows();
    switch (d) {
        case 1: return std::make_unique<Engine<1>>(std::move(input), z, options);
        case 2: return std::make_unique<Engine<2>>(std::move(input), z, options);
        case 4: return std::make_unique<Engine<4>>(std::move(input), z, options);
        case 8: return std::make_unique<Engine<8>>(std::move(input), z, options);
        default: return std::make_unique<Engine<Eigen::Dynamic>>(std::move(input), z, options);
    }
}

}  // namespace detail

template <typename Scalar>
PathSumEvaluator<Scalar>::PathSumEvaluator(const ConfigurationGraph<Scalar>& graph, cplx z, PathSumOptions options)
    : n_(graph.n_vertices()), z_(z) {
    const int sp = graph.sprime_size();
    const int s = graph.op().partition().s_size();
    if (sp > 6) throw SizeError("path-sums: |S'| = " + std::to_string(sp) + " exceeds the hard limit of 6");
    if (sp > options.sprime_cap) {
        std::ostringstream msg;
        msg << "path-sums: |S'| = " << sp << " exceeds the cap of " << options.sprime_cap
            << "; estimated cost ~" << pathsum_cost_estimate(sp, s) << " flops";
        if (!options.allow_override) throw SizeError(msg.str());
        std::cerr << "warning: " << msg.str() << '\n';
    }
    detail::PathSumInput in;
    in.sprime_size = sp;
    in.flips.resize(static_cast<std::size_t>(n_ * n_));
    for (int v = 0; v < n_; ++v) {
        in.neighbours.push_back(graph.neighbours(v));
        in.statics.push_back(graph.vertex_static(v).template cast<cplx>());
        for (int w : graph.neighbours(v))
            in.flips[static_cast<std::size_t>(v * n_ + w)] = graph.edge_weight(v, w).template cast<cplx>();
    }
    engine_ = detail::make_pathsum_engine(std::move(in), z, options);
}

template <typename Scalar>
void PathSumEvaluator<Scalar>::check_vertex(int alpha, VertexMask deleted) const {
    if (alpha < 0 || alpha >= n_) throw ParameterError("path-sums: vertex out of range");
    if (deleted >> alpha & 1u) throw ParameterError("path-sums: vertex is in the deleted set");
}

template <typename Scalar>
MatrixXc PathSumEvaluator<Scalar>::diagonal(int alpha, VertexMask deleted) {
    check_vertex(alpha, deleted);
    return engine_->diagonal(alpha, deleted);
}

template <typename Scalar>
MatrixXc PathSumEvaluator<Scalar>::self_energy(int alpha, VertexMask deleted) {
    check_vertex(alpha, deleted);
    return engine_->self_energy(alpha, deleted);
}

template <typename Scalar>
std::vector<MatrixXc> PathSumEvaluator<Scalar>::column(int alpha, VertexMask deleted) {
    check_vertex(alpha, deleted);
    return engine_->column(alpha, deleted);
}

template <typename Scalar>
MatrixXc PathSumEvaluator<Scalar>::offdiagonal(int omega, int alpha) {
    check_vertex(omega, 0);
    if (omega == alpha) return diagonal(alpha);
    return column(alpha)[omega];
}

template class PathSumEvaluator<double>;
template class PathSumEvaluator<cplx>;

MeanStderr fractional_norm_mc(const FractionalMomentSetup& setup, Config omega, Config alpha, cplx z, double s,
                              std::size_t n_realisations, std::uint64_t base_seed, int jobs) {
    if (n_realisations < 2) throw ParameterError("fractional_norm_mc: need at least 2 realisations");
    if (!(s > 0.0 && s < 1.0)) throw ParameterError("fractional_norm_mc: s must lie in (0, 1)");
    const int n = setup.lattice.n_sites;

    // Flip blocks do not involve the fields, so connectivity is fixed across realisations.
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    const auto clean = partition_operator(build_full_hamiltonian<double>(setup.lattice, setup.params, zero),
                                          setup.partition);
    const auto graph = build_config_graph(clean, zero);
    if (distance(graph, static_cast<int>(alpha), static_cast<int>(omega)) == kInfiniteDistance)
        return {0.0, 0.0, n_realisations};

    std::vector<double> samples(n_realisations);
    parallel_for(n_realisations, jobs, [&](std::size_t r) {
        const auto dis = sample_disorder(setup.sigma_b, child_seed(base_seed, r), n);
        const auto h = build_full_hamiltonian<double>(setup.lattice, setup.params, dis);
        const auto g = resolvent_oracle(h, setup.partition, omega, alpha, z);
        samples[r] = std::pow(norm2(g.block), s);
    });
    return mean_stderr(samples);
}

}  // namespace mbdl

namespace mbdl {

namespace {

int pick(GaussianSource& rng, int k) { return std::min(k - 1, static_cast<int>(rng.uniform() * k)); }

}  // namespace

GreensCheckInstance random_greens_instance(int n_sites, int sprime_size, std::uint64_t seed, double sigma_b) {
    if (n_sites < 1 || sprime_size < 1 || sprime_size > n_sites)
        throw ParameterError("random_greens_instance: need 1 <= |S'| <= n_sites");
    GaussianSource rng(splitmix64(seed));
    std::vector<int> sites(static_cast<std::size_t>(n_sites));
    std::iota(sites.begin(), sites.end(), 0);
    for (int k = n_sites - 1; k > 0; --k) std::swap(sites[k], sites[pick(rng, k + 1)]);
    std::vector<int> sprime(sites.begin(), sites.begin() + sprime_size);
    std::vector<int> rest(sites.begin() + sprime_size, sites.end());

    std::vector<std::pair<int, int>> edges;
    auto add = [&](int a, int b) {
        const std::pair<int, int> e{std::min(a, b), std::max(a, b)};
        if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
    };
    if (rest.empty()) {
        for (int k = 1; k < n_sites; ++k) add(sites[k], sites[pick(rng, k)]);
    } else {
        for (std::size_t k = 1; k < rest.size(); ++k) add(rest[k], rest[pick(rng, static_cast<int>(k))]);
        for (int s : sprime) add(s, rest[pick(rng, static_cast<int>(rest.size()))]);
        // A few extra bonds, never between two S' sites.
        for (int a = 0; a < n_sites; ++a)
            for (int b = a + 1; b < n_sites; ++b) {
                const bool both = std::find(sprime.begin(), sprime.end(), a) != sprime.end() &&
                                  std::find(sprime.begin(), sprime.end(), b) != sprime.end();
                if (!both && rng.uniform() < 0.2) add(a, b);
            }
    }
    std::sort(sprime.begin(), sprime.end());

    GreensCheckInstance inst;
    inst.lattice = build_lattice(LatticeKind::custom, n_sites, edges);
    inst.partition = make_partition(inst.lattice, sprime, !rest.empty());
    inst.params.jx = 0.5 + rng.uniform();
    inst.params.jy = 0.5 + rng.uniform();
    inst.params.delta = 2.0 * rng.uniform() - 1.0;
    inst.fields.resize(n_sites);
    for (int k = 0; k < n_sites; ++k) inst.fields[k] = sigma_b * rng.normal();
    return inst;
}

GreensCheckResult check_greens_instance(const GreensCheckInstance& inst, double eta_factor, PathSumOptions options) {
    const Eigen::MatrixXd h = build_full_hamiltonian<double>(inst.lattice, inst.params, inst.fields);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    GreensCheckResult out;
    out.z = cplx(es.eigenvalues().mean(), eta_factor * inst.params.j_eff());
    const MatrixXc oracle = resolvent_tensor_ordered(h, inst.partition, out.z);
    const auto op = std::make_shared<const PartitionedOperator<double>>(partition_operator(h, inst.partition));
    const auto graph = build_config_graph<double>(op, inst.fields);
    PathSumEvaluator<double> ev(graph, out.z, options);
    const Eigen::Index d = op->block_dim();
    const double total = oracle.norm();
    for (int a = 0; a < graph.n_vertices(); ++a) {
        const auto col = ev.column(a);
        for (int w = 0; w < graph.n_vertices(); ++w) {
            const auto ref = oracle.block(static_cast<Eigen::Index>(w) * d, static_cast<Eigen::Index>(a) * d, d, d);
            const double scale = ref.norm();
            // Blocks between disconnected vertices are zero up to rounding; measure those against the whole.
            const double denom = scale > 1e-12 * total ? scale : total;
            out.max_rel_error = std::max(out.max_rel_error, (col[w] - ref).norm() / denom);
            ++out.blocks;
        }
    }
    return out;
}

}  // namespace mbdl
