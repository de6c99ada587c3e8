#include "mbdl/bounds.hpp"
#include "mbdl/greens.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace mbdl;
using mbdl::testing::Gen;

namespace {

struct Instance {
    SystemPartition partition;
    Eigen::MatrixXd h;
    ConfigurationGraph<double> graph;
};

Instance instance(const SpinLattice& lat, const std::vector<int>& sp, const CouplingParams& p,
                  const Eigen::VectorXd& b) {
    auto part = make_partition(lat, sp);
    Eigen::MatrixXd h = build_full_hamiltonian(lat, p, b);
    auto g = build_config_graph(partition_operator(h, part), b);
    return {part, h, std::move(g)};
}

double rel(const MatrixXc& a, const MatrixXc& b) {
    const double nb = b.norm();
    return nb == 0.0 ? a.norm() : (a - b).norm() / nb;
}

}  // namespace

TEST_SUITE("greens") {

TEST_CASE("resolvent oracle") {
    Eigen::VectorXd b(1);
    b << 0.4;
    const auto lat = build_lattice(LatticeKind::chain, 1);
    const auto part = make_partition(lat, {0});
    const Eigen::MatrixXd h = build_full_hamiltonian(lat, {}, b);
    const cplx z(0.1, 0.5);
    CHECK(std::abs(resolvent_oracle(h, part, 1, 1, z).block(0, 0) - 1.0 / (z - 0.4)) < 1e-15);
    CHECK(std::abs(resolvent_oracle(h, part, 0, 0, z).block(0, 0) - 1.0 / (z + 0.4)) < 1e-15);

    // z G -> I far up the imaginary axis
    Gen gen(1);
    const auto l3 = build_lattice(LatticeKind::chain, 3);
    const auto p3 = make_partition(l3, {1});
    const Eigen::MatrixXd h3 = build_full_hamiltonian(l3, {1.0, 0.5, 0.2}, gen.fields(3, 1.0));
    double prev = 1e300;
    for (double y : {1e2, 1e3, 1e4}) {
        const cplx zz(0.0, y);
        const double dev = norm2(MatrixXc(zz * resolvent_oracle(h3, p3, 0, 0, zz).block -
                                          MatrixXc::Identity(4, 4)));
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 1e-3);

    const Eigen::MatrixXd diag = build_full_hamiltonian(l3, {}, gen.fields(3, 1.0));
    CHECK(resolvent_oracle(diag, p3, 1, 0, cplx(0, 1)).block.isZero(0.0));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h3);
    CHECK_THROWS_AS(resolvent_oracle(h3, p3, 0, 0, cplx(es.eigenvalues()[2], 0.0)), ConditioningError);
    CHECK_THROWS_AS(resolvent_oracle(h3, p3, 2, 0, cplx(0, 1)), ParameterError);
}

TEST_CASE("path-sum edge cases") {
    Gen gen(2);
    const auto lat = build_lattice(LatticeKind::chain, 3);
    const auto in = instance(lat, {0, 2}, {1.0, 0.6, 0.3}, gen.fields(3, 1.0));
    const cplx z(0.2, 0.4);
    const auto op = partition_operator(in.h, in.partition);

    // all neighbours deleted: bare static resolvent
    const VertexMask nb = (VertexMask{1} << 0b01) | (VertexMask{1} << 0b10);
    const MatrixXc bare = (z * MatrixXc::Identity(2, 2) - op.static_block(0b00).cast<cplx>()).inverse();
    CHECK(rel(diagonal_greens_pathsum(in.graph, 0b00, z, nb).block, bare) < 1e-14);
    CHECK(self_energy(in.graph, 0b00, z, nb).isZero(0.0));

    // alpha == omega reduces to the diagonal
    CHECK(rel(offdiagonal_greens_pathsum(in.graph, 0b01, 0b01, z).block,
              diagonal_greens_pathsum(in.graph, 0b01, z).block) < 1e-14);

    // no path: zero block
    const auto xxz = instance(build_lattice(LatticeKind::chain, 2), {0, 1}, {1.0, 1.0, 0.2}, gen.fields(2, 1.0));
    CHECK(offdiagonal_greens_pathsum(xxz.graph, 0b00, 0b01, z).block.isZero(0.0));
    CHECK(offdiagonal_greens_pathsum(xxz.graph, 0b00, 0b01, z).provenance == Provenance::pathsum);
}

TEST_CASE("self-energy of a two-vertex graph") {
    Gen gen(3);
    const auto lat = build_lattice(LatticeKind::chain, 3);
    const auto in = instance(lat, {1}, {0.9, 0.4, 0.3}, gen.fields(3, 1.0));
    const auto op = partition_operator(in.h, in.partition);
    const cplx z(-0.3, 0.25);
    const MatrixXc hw = op.static_block(1).cast<cplx>();
    const MatrixXc expect = op.block(0, 1).cast<cplx>() * (z * MatrixXc::Identity(4, 4) - hw).inverse() *
                            op.block(1, 0).cast<cplx>();
    CHECK(rel(self_energy(in.graph, 0, z), expect) < 1e-13);
}

TEST_CASE("property: path-sums agree with the dense resolvent") {
    Gen gen(4);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = gen.integer(2, 5);
        const int k = gen.integer(1, std::min(n, 3));
        const auto lat = gen.lattice(n);
        const auto in = instance(lat, gen.sites(n, k), gen.couplings(), gen.fields(n, 1.0));
        const cplx z(gen.real(-1, 1), gen.real(0.1, 1.0));
        const MatrixXc r = resolvent_tensor_ordered(in.h, in.partition, z);
        const auto d = static_cast<Eigen::Index>(in.partition.block_dim());
        PathSumEvaluator<double> ev(in.graph, z);
        const auto op = partition_operator(in.h, in.partition);
        for (int a = 0; a < (1 << k); ++a) {
            const auto col = ev.column(a);
            for (int w = 0; w < (1 << k); ++w) CHECK(rel(col[w], r.block(w * d, a * d, d, d)) < 1e-9);
            // self-energy closes the diagonal block
            const MatrixXc sigma = z * MatrixXc::Identity(d, d) - op.static_block(a).cast<cplx>() -
                                   MatrixXc(r.block(a * d, a * d, d, d)).inverse();
            CHECK(rel(ev.self_energy(a), sigma) < 1e-8);
        }
    }
}

TEST_CASE("property: Hermitian symmetry and memoisation") {
    Gen gen(5);
    for (int trial = 0; trial < 15; ++trial) {
        const int n = gen.integer(2, 5);
        const int k = gen.integer(1, std::min(n, 3));
        const auto in = instance(gen.lattice(n), gen.sites(n, k), gen.couplings(), gen.fields(n, 1.0));
        const cplx z(gen.real(-1, 1), gen.real(0.1, 1.0));
        PathSumEvaluator<double> up(in.graph, z), down(in.graph, std::conj(z));
        const int a = gen.integer(0, (1 << k) - 1), w = gen.integer(0, (1 << k) - 1);
        const MatrixXc g_wa = up.offdiagonal(w, a);
        const MatrixXc g_aw_bar = down.offdiagonal(a, w);
        CHECK(rel(MatrixXc(g_aw_bar.adjoint()), g_wa) < 1e-10);

        const MatrixXc first = up.diagonal(a);
        const std::size_t entries = up.cache_entries();
        CHECK(up.diagonal(a) == first);
        CHECK(up.cache_entries() == entries);
        CHECK(PathSumEvaluator<double>(in.graph, z).diagonal(a) == first);
    }
}

TEST_CASE("path-sum cap") {
    Gen gen(6);
    const auto lat = build_lattice(LatticeKind::chain, 5);
    const auto in = instance(lat, {0, 1, 2, 3, 4}, {1.0, 0.5, 0.2}, gen.fields(5, 1.0));
    CHECK_THROWS_AS(PathSumEvaluator<double>(in.graph, cplx(0, 1)), SizeError);
    PathSumOptions opts;
    opts.allow_override = true;
    CHECK_NOTHROW(PathSumEvaluator<double>(in.graph, cplx(0, 1), opts));
    CHECK(pathsum_cost_estimate(5, 1) > pathsum_cost_estimate(4, 2));
}

TEST_CASE("random verification instances") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto a = random_greens_instance(5, 2, seed);
        const auto b = random_greens_instance(5, 2, seed);
        CHECK(a.fields == b.fields);
        CHECK(a.lattice.edges == b.lattice.edges);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK_FALSE(a.lattice.adjacent(a.partition.sprime_sites[i], a.partition.sprime_sites[j]));
        const auto r1 = check_greens_instance(a);
        CHECK(r1.max_rel_error < 1e-9);
        CHECK(r1.max_rel_error == check_greens_instance(b).max_rel_error);
        CHECK(r1.blocks == 16);
    }
    CHECK_THROWS_AS(random_greens_instance(3, 0, 1), ParameterError);
}

TEST_CASE("fractional moment Monte Carlo") {
    // one isolated site: G = 1 / (z - Y) with Y ~ N(0, sigma^2)
    const double sb = 1.3, s = 0.5;
    FractionalMomentSetup setup{build_lattice(LatticeKind::chain, 1), {}, {0.0, 0.0, 0.0}, sb};
    setup.partition = make_partition(setup.lattice, {0});
    const cplx z(0.0, sb);
    const auto mc = fractional_norm_mc(setup, 1, 1, z, s, 20000, 9);
    double quad = 0.0;
    const int steps = 20000;
    const double lim = 12.0 * sb, h = 2.0 * lim / steps;
    for (int k = 0; k <= steps; ++k) {
        const double y = -lim + k * h;
        const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
        quad += w * h * std::exp(-y * y / (2 * sb * sb)) / (sb * std::sqrt(2 * M_PI)) *
                std::pow(std::abs(z - y), -s);
    }
    CHECK(std::abs(mc.mean - quad) <= 4 * mc.std_error);

    // disconnected pair: exactly zero
    FractionalMomentSetup xxz{build_lattice(LatticeKind::chain, 2), {}, {1.0, 1.0, 0.0}, 1.0};
    xxz.partition = make_partition(xxz.lattice, {0, 1});
    CHECK(fractional_norm_mc(xxz, 0b01, 0b00, cplx(0, 1), 0.5, 50, 3).mean == 0.0);

    // ceiling (2 * 2^|S|)^s / (1-s) (sigma sqrt(2 pi))^-s on a coupled instance
    FractionalMomentSetup chain{build_lattice(LatticeKind::chain, 3), {}, {1.0, 0.5, 0.3}, 1.0};
    chain.partition = make_partition(chain.lattice, {1});
    const auto est = fractional_norm_mc(chain, 0, 0, cplx(0.2, 0.05), s, 4000, 12);
    CHECK(est.mean <= lemma2_ceiling(2.0 * 4.0, s, 1.0 / std::sqrt(2 * M_PI)));
}

}
