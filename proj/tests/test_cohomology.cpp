#include <catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "flatpath/flatpath.hpp"
#include "test_support.hpp"

using namespace flatpath;
using namespace flatpath::testing;
using Catch::Approx;

namespace {

// Index of the sublattice generated by 2-vectors: gcd of all 2x2 minors.
long lattice_index_2d(const std::vector<CellOffset>& vs)
{
    long g = 0;
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j)
            g = std::gcd(g, std::labs(static_cast<long>(vs[i][0]) * vs[j][1] - static_cast<long>(vs[i][1]) * vs[j][0]));
    return g;
}

double dot(const CellOffset& k, const Theta& t)
{
    double s = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i)
        s += k[i] * t[i];
    return s;
}

} // namespace

TEST_CASE("betti_numbers", "[cohomology]")
{
    CHECK(betti_numbers(PeriodicGraph(1, 4, {})).beta0 == 4);
    CHECK(betti_numbers(PeriodicGraph(1, 4, {})).beta1 == 0);

    const auto z = betti_numbers(z1_cell3());
    CHECK(z.beta0 == 1);
    CHECK(z.beta1 == 1);

    // Two disjoint trees on 4 and 5 vertices.
    const PeriodicGraph forest(2, 9,
                               {{0, 1, {0, 0}}, {1, 2, {1, 0}}, {1, 3, {0, 1}}, {4, 5, {0, 0}}, {5, 6, {1, 1}},
                                {6, 7, {0, -1}}, {6, 8, {0, 0}}});
    const auto b = betti_numbers(forest);
    CHECK(b.beta0 == 2);
    CHECK(b.beta1 == 0);
}

TEST_CASE("cycle_basis", "[cohomology]")
{
    SECTION("tree has no cycles")
    {
        CHECK(cycle_basis(PeriodicGraph(1, 3, {{0, 1, {0}}, {1, 2, {1}}})).cycles.empty());
    }
    SECTION("3-cycle cell of Z winds once")
    {
        const auto basis = cycle_basis(z1_cell3());
        REQUIRE(basis.cycles.size() == 1);
        CHECK(std::abs(basis.cycles[0].total_offset[0]) == 1);
        CHECK(basis.cycles[0].vertices.front() == basis.cycles[0].vertices.back());
        CHECK(basis.cycles[0].vertices.size() == 4);
    }
    SECTION("Z^2 on a 3x3 cell: 10 cycles spanning Z^2")
    {
        const auto g = hypercubic_cell({3, 3}).graph;
        const auto basis = cycle_basis(g);
        CHECK(basis.cycles.size() == 18 - 9 + 1);
        std::vector<CellOffset> ks;
        for (const auto& c : basis.cycles)
            ks.push_back(c.total_offset);
        CHECK(lattice_index_2d(ks) == 1);
    }
    SECTION("Z^2 on a 2x2 cell with parallel edges: 5 cycles spanning Z^2")
    {
        const auto g = hypercubic_cell({2, 2}).graph;
        const auto basis = cycle_basis(g);
        CHECK(basis.cycles.size() == 8 - 4 + 1);
        std::vector<CellOffset> ks;
        for (const auto& c : basis.cycles)
            ks.push_back(c.total_offset);
        CHECK(lattice_index_2d(ks) == 1);
    }
}

TEST_CASE("cycle offsets agree with a pairwise edge lookup", "[cohomology][property]")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = random_admissible_graph(rng, 1 + trial % 2, 2 + trial % 7, 0.5);
        const auto basis = cycle_basis(g);
        CHECK(basis.cycles.size() == basis.beta1);
        for (const auto& c : basis.cycles) {
            CHECK(loop_offset_by_lookup(g, c.vertices) == c.total_offset);
            for (std::size_t j = 1; j < c.vertices.size(); ++j)
                CHECK(!g.edges_between(c.vertices[j - 1], c.vertices[j]).empty());
        }
    }
}

TEST_CASE("beta1 identity on random fragments", "[cohomology][property]")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto g = random_admissible_graph(rng, 1 + trial % 2, 1 + trial % 8, 0.45);
        std::vector<VertexId> subset;
        for (VertexId v = 0; v < g.num_vertices(); ++v)
            if (rng() % 3 != 0)
                subset.push_back(v);
        const auto frag = induced_subgraph(g, subset).graph;
        const auto basis = cycle_basis(frag);
        CHECK(basis.cycles.size() + frag.num_vertices() == frag.edges().size() + basis.beta0);
    }
}

TEST_CASE("chain_psi_theta and loop_sum", "[cohomology]")
{
    const auto g = z1_cell3();
    CHECK(chain_psi_theta(g, {0.0}).values == std::vector<double>{0.0, 0.0, 0.0});

    const PeriodicGraph two(2, 2, {{0, 1, {1, 0}}});
    CHECK(chain_psi_theta(two, {0.25, 0.7}).values[0] == 0.25);
    const PeriodicGraph flat(2, 2, {{0, 1, {0, 0}}});
    CHECK(chain_psi_theta(flat, {0.25, 0.7}).values[0] == 0.0);

    SECTION("loop around the 3-cell picks up <k, theta>")
    {
        const auto psi = chain_psi_theta(g, {0.3});
        CHECK(loop_sum(g, psi, {0, 1, 2, 0}) == Approx(0.3).margin(1e-15));
        CHECK(loop_sum(g, psi, {0, 2, 1, 0}) == Approx(-0.3).margin(1e-15));
    }
    SECTION("forward then backward cancels")
    {
        const OneChain psi{{0.7, -1.3, 2.9}};
        CHECK(loop_sum(g, psi, {0, 1, 2, 1, 0}) == Approx(0.0).margin(1e-15));
    }
    SECTION("errors")
    {
        const PeriodicGraph path(1, 3, {{0, 1, {0}}, {1, 2, {0}}});
        const OneChain psi{{1.0, 1.0}};
        CHECK_THROWS_AS(loop_sum(path, psi, {0, 2, 0}), EdgeNotPresentError);
        CHECK_THROWS_AS(loop_sum(path, psi, {0, 1}), EdgeNotPresentError);
    }
}

TEST_CASE("loop sums of gradients vanish", "[cohomology][property]")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = random_admissible_graph(rng, 2, 3 + trial % 6, 0.6);
        GaugePotential phi(g.num_vertices());
        for (auto& x : phi)
            x = unif(rng);
        const auto psi = gradient(g, phi);
        for (const auto& c : cycle_basis(g).cycles) {
            CHECK(std::abs(loop_sum(psi, c)) <= 1e-12);
            CHECK(std::abs(loop_sum(g, psi, c.vertices)) <= 1e-12);
        }
    }
}

TEST_CASE("is_h1_trivial", "[cohomology]")
{
    CHECK(is_h1_trivial(PeriodicGraph(2, 3, {})).trivial);
    CHECK(is_h1_trivial(PeriodicGraph(1, 3, {{0, 1, {1}}, {1, 2, {1}}})).trivial);

    const auto z = is_h1_trivial(z1_cell3());
    REQUIRE_FALSE(z.trivial);
    REQUIRE(z.witness);
    CHECK(std::abs(z.witness->total_offset[0]) == 1);

    SECTION("stripe level set closes up along axis 2")
    {
        const auto m = z2_stripe();
        const auto levels = level_sets(m.graph, *m.potential);
        REQUIRE(levels.size() == 2);
        for (const auto& ls : levels) {
            const auto h1 = is_h1_trivial(induced_subgraph(m.graph, ls.vertices).graph);
            REQUIRE_FALSE(h1.trivial);
            CHECK(h1.witness->total_offset[0] == 0);
            CHECK(std::abs(h1.witness->total_offset[1]) == 1);
        }
    }
    SECTION("two-site column of a 2x2 cell, joined through offset (0,1)")
    {
        const PeriodicGraph column(2, 2, {{0, 1, {0, 0}}, {1, 0, {0, 1}}});
        const auto h1 = is_h1_trivial(column);
        REQUIRE_FALSE(h1.trivial);
        CHECK(h1.witness->total_offset[0] == 0);
        CHECK(std::abs(h1.witness->total_offset[1]) == 1);
    }
    SECTION("a closed square with zero offsets is trivial")
    {
        const PeriodicGraph sq(2, 4, {{0, 1, {0, 0}}, {1, 2, {0, 0}}, {2, 3, {0, 0}}, {3, 0, {0, 0}}});
        CHECK(is_h1_trivial(sq).trivial);
        CHECK(betti_numbers(sq).beta1 == 1);
    }
}

TEST_CASE("is_h1_trivial does not depend on the spanning forest", "[cohomology][property]")
{
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t nu = 2 + trial % 7;
        const auto g = random_admissible_graph(rng, 1 + trial % 2, nu, 0.4);
        const bool expected = is_h1_trivial(g).trivial;
        for (int k = 0; k < 20; ++k) {
            std::vector<VertexId> perm(nu);
            std::iota(perm.begin(), perm.end(), VertexId{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            CHECK(is_h1_trivial(relabel(g, perm)).trivial == expected);
        }
    }
}

TEST_CASE("witness loop sums equal <k, theta>", "[cohomology][property]")
{
    std::mt19937_64 rng(31);
    int witnesses = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto g = random_admissible_graph(rng, 1 + trial % 2, 3 + trial % 6, 0.5);
        const auto h1 = is_h1_trivial(g);
        if (h1.trivial)
            continue;
        ++witnesses;
        for (int k = 0; k < 10; ++k) {
            const auto t = random_theta(rng, g.dim());
            const auto psi = chain_psi_theta(g, t);
            CHECK(std::abs(loop_sum(g, psi, h1.witness->vertices) - dot(h1.witness->total_offset, t)) <= 1e-12);
        }
    }
    CHECK(witnesses > 10);
}

TEST_CASE("lift oracle", "[cohomology]")
{
    CHECK_FALSE(brute_force_lift_oracle(PeriodicGraph(1, 3, {}), {0, 1, 2}, 3));
    CHECK(brute_force_lift_oracle(z1_cell3(), {0, 1, 2}, 2));
    CHECK_FALSE(brute_force_lift_oracle(z1_cell3(), {0, 1}, 2));

    // Closed square with zero offsets inside a bigger cell whose other edges wind.
    const PeriodicGraph g(2, 6,
                          {{0, 1, {0, 0}}, {1, 2, {0, 0}}, {2, 3, {0, 0}}, {3, 0, {0, 0}}, {3, 4, {1, 0}},
                           {4, 5, {0, 0}}, {5, 0, {0, 1}}});
    for (int r = 1; r <= 6; ++r)
        CHECK_FALSE(brute_force_lift_oracle(g, {0, 1, 2, 3}, r));
    CHECK(brute_force_lift_oracle(g, {0, 1, 2, 3, 4, 5}, 2));
    CHECK_THROWS_AS(brute_force_lift_oracle(g, {0}, 0), ConfigError);
}

TEST_CASE("cycle-basis test agrees with the lift oracle", "[cohomology][property]")
{
    std::mt19937_64 rng(37);
    int nontrivial = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const auto g = random_admissible_graph(rng, 1 + trial % 2, 1 + trial % 8, 0.4);
        const auto q = random_potential(rng, g.num_vertices(), 3);
        for (const auto& ls : level_sets(g, q)) {
            const bool trivial = is_h1_trivial(induced_subgraph(g, ls.vertices).graph).trivial;
            nontrivial += trivial ? 0 : 1;
            CHECK(trivial == !brute_force_lift_oracle(g, ls.vertices, 6));
        }
    }
    CHECK(nontrivial > 5);
}

TEST_CASE("solve_gauge", "[cohomology]")
{
    SECTION("zero chain")
    {
        const auto phi = solve_gauge(z1_cell3(), OneChain{{0.0, 0.0, 0.0}});
        CHECK(phi == GaugePotential{0.0, 0.0, 0.0});
    }
    SECTION("round trip on random trees")
    {
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> unif(-3.0, 3.0);
        for (int trial = 0; trial < 30; ++trial) {
            const auto g = random_tree_plus_chords(rng, 2, 2 + trial % 9, 0);
            GaugePotential phi0(g.num_vertices());
            for (auto& x : phi0)
                x = unif(rng);
            const auto phi = solve_gauge(g, gradient(g, phi0));
            for (VertexId v = 0; v < g.num_vertices(); ++v)
                CHECK(std::abs(phi[v] - (phi0[v] - phi0[0])) <= 1e-12);
        }
    }
    SECTION("nontrivial class raises with the offending cycle")
    {
        const Theta t{0.3};
        const auto psi = chain_psi_theta(z1_cell3(), t);
        try {
            solve_gauge(z1_cell3(), psi);
            FAIL("expected NontrivialClassError");
        } catch (const NontrivialClassError& e) {
            CHECK(std::abs(e.loop_sum() - dot(e.cycle().total_offset, t)) <= 1e-12);
            CHECK(std::abs(e.loop_sum()) > 0.1);
        }
    }
    SECTION("psi_theta on an H1-trivial fragment is reproduced exactly")
    {
        std::mt19937_64 rng(43);
        int checked = 0;
        for (int trial = 0; trial < 60; ++trial) {
            const auto g = random_admissible_graph(rng, 2, 2 + trial % 7, 0.4);
            if (!is_h1_trivial(g).trivial)
                continue;
            ++checked;
            const auto psi = chain_psi_theta(g, random_theta(rng, 2));
            const auto back = gradient(g, solve_gauge(g, psi));
            for (std::size_t i = 0; i < psi.values.size(); ++i)
                CHECK(std::abs(back.values[i] - psi.values[i]) <= 1e-12);
        }
        CHECK(checked > 5);
    }
}

TEST_CASE("flat_path_report", "[cohomology]")
{
    SECTION("injective potential: all singletons, decay predicted")
    {
        const auto r = flat_path_report(z1_cell3(), {0.0, 1.0, 2.0});
        CHECK(r.levels.size() == 3);
        CHECK(r.decay_predicted);
        for (const auto& lv : r.levels) {
            CHECK(lv.level.vertices.size() == 1);
            CHECK(lv.trivial);
        }
    }
    SECTION("constant potential on a connected graph: bounded below")
    {
        const auto r = flat_path_report(z1_cell3(), {0.0, 0.0, 0.0});
        REQUIRE(r.levels.size() == 1);
        CHECK_FALSE(r.decay_predicted);
        REQUIRE(r.levels[0].witness);
        const auto text = format_report(z1_cell3(), r);
        CHECK(text.find("witness") != std::string::npos);
        CHECK(text.find(verdict_bounded) != std::string::npos);
    }
    SECTION("stripe: witnesses along axis 2, in parent vertex ids")
    {
        const auto m = z2_stripe();
        const auto r = flat_path_report(m.graph, *m.potential);
        CHECK_FALSE(r.decay_predicted);
        for (const auto& lv : r.levels) {
            REQUIRE(lv.witness);
            CHECK(lv.witness->total_offset[0] == 0);
            CHECK(std::abs(lv.witness->total_offset[1]) == 1);
            for (VertexId v : lv.witness->vertices)
                CHECK((*m.potential)[v] == lv.level.value);
            CHECK(loop_offset_by_lookup(m.graph, lv.witness->vertices) == lv.witness->total_offset);
        }
    }
}
