#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>
#include <sstream>

#include "flatpath/flatpath.hpp"
#include "test_support.hpp"

using namespace flatpath;
using namespace flatpath::testing;
using Catch::Approx;

namespace {

double max_entry_diff(const FloquetMatrix& a, const FloquetMatrix& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("assemble_floquet", "[floquet]")
{
    const auto g = z1_cell3();
    SECTION("theta = 0 is the adjacency of the 3-cycle")
    {
        const auto m = assemble_floquet(g, {}, 0.0, {0.0});
        for (int u = 0; u < 3; ++u)
            for (int v = 0; v < 3; ++v)
                CHECK(std::abs(m(u, v) - std::complex<double>(u == v ? 0.0 : 1.0)) <= 1e-15);
    }
    SECTION("theta = 1/2 flips the sign of the boundary bond")
    {
        const auto m = assemble_floquet(g, {}, 0.0, {0.5});
        CHECK(std::abs(m(2, 0) - std::complex<double>(-1.0)) <= 1e-15);
        CHECK(std::abs(m(0, 2) - std::complex<double>(-1.0)) <= 1e-15);
        CHECK(std::abs(m(0, 1) - std::complex<double>(1.0)) <= 1e-15);
    }
    SECTION("diagonal is mu Q")
    {
        const auto m = assemble_floquet(g, {1.0, 2.0, -3.0}, 10.0, {0.2});
        CHECK(m(0, 0).real() == 10.0);
        CHECK(m(1, 1).real() == 20.0);
        CHECK(m(2, 2).real() == -30.0);
    }
    SECTION("one-vertex cell carries 2 cos per axis on the diagonal")
    {
        const auto m = assemble_floquet(z2_single(), {}, 0.0, {0.25, 0.0});
        CHECK(m(0, 0).real() == Approx(2.0).margin(1e-15));
    }
    SECTION("errors")
    {
        CHECK_THROWS_AS(assemble_floquet(g, {}, 0.0, {0.0, 0.0}), ConfigError);
        CHECK_THROWS_AS(assemble_floquet(g, {1.0}, 1.0, {0.0}), GraphError);
    }
}

TEST_CASE("assembled matrices are exactly Hermitian", "[floquet][property]")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = random_admissible_graph(rng, 1 + trial % 3, 1 + trial % 9, 0.5);
        const auto q = random_potential(rng, g.num_vertices(), 4);
        const auto m = assemble_floquet(g, q, 7.5, random_theta(rng, g.dim()));
        CHECK(hermitian_defect(m) == 0.0);
    }
}

TEST_CASE("hermitian_eigenvalues", "[floquet]")
{
    const auto g = z1_cell3();
    const auto ev = hermitian_eigenvalues(assemble_floquet(g, {}, 0.0, {0.0}));
    REQUIRE(ev.size() == 3);
    CHECK(ev[0] == Approx(-1.0).margin(1e-12));
    CHECK(ev[1] == Approx(-1.0).margin(1e-12));
    CHECK(ev[2] == Approx(2.0).margin(1e-12));

    SECTION("closed form on the 3-cycle with flux theta")
    {
        for (double t : {0.0, 0.1, 0.37, 0.5, 0.81}) {
            std::vector<double> expected;
            for (int k = 0; k < 3; ++k)
                expected.push_back(2.0 * std::cos(2.0 * std::numbers::pi * (t + k) / 3.0));
            std::sort(expected.begin(), expected.end());
            const auto got = hermitian_eigenvalues(assemble_floquet(g, {}, 0.0, {t}));
            for (int k = 0; k < 3; ++k)
                CHECK(got[k] == Approx(expected[k]).margin(1e-12));
        }
    }
    SECTION("non-Hermitian input is rejected")
    {
        FloquetMatrix m = FloquetMatrix::Zero(2, 2);
        m(0, 1) = 1.0;
        CHECK_THROWS_AS(hermitian_eigenvalues(m), NonHermitianError);
        CHECK_THROWS_AS(hermitian_eigenvalues(FloquetMatrix::Zero(2, 3)), NonHermitianError);
    }
    SECTION("residuals are small on random matrices")
    {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            const auto gr = random_admissible_graph(rng, 2, 2 + trial % 8, 0.6);
            const auto q = random_potential(rng, gr.num_vertices(), 3);
            CHECK(eigen_residual(assemble_floquet(gr, q, 100.0, random_theta(rng, 2))) <= 1e-10);
        }
    }
}

TEST_CASE("compute_bands", "[floquet]")
{
    SECTION("Z with a one-vertex cell")
    {
        BandOptions opts;
        opts.grid = {256};
        const auto bs = compute_bands(z1_single(), {}, 0.0, opts);
        REQUIRE(bs.bands.size() == 1);
        CHECK(bs.bands[0].lo == Approx(-2.0).margin(1e-12));
        CHECK(bs.bands[0].hi == Approx(2.0).margin(1e-12));
        CHECK(bs.thetas.size() == 256);
    }
    SECTION("Z^2 with a one-vertex cell")
    {
        const auto bs = compute_bands(z2_single(), {}, 0.0);
        CHECK(bs.grid == std::vector<int>{64, 64});
        CHECK(bs.bands[0].lo == Approx(-4.0).margin(1e-12));
        CHECK(bs.bands[0].hi == Approx(4.0).margin(1e-12));
    }
    SECTION("constant potential shifts the band")
    {
        const auto bs = compute_bands(z1_cell3(), {1.0, 1.0, 1.0}, 3.0);
        const auto est = spectrum_measure(bs);
        REQUIRE(est.components.size() == 1);
        CHECK(est.components[0].lo == Approx(1.0).margin(1e-9));
        CHECK(est.components[0].hi == Approx(5.0).margin(1e-9));
    }
    SECTION("grid validation")
    {
        BandOptions opts;
        opts.grid = {1};
        CHECK_THROWS_AS(compute_bands(z1_single(), {}, 0.0, opts), ConfigError);
        opts.grid = {8, 8};
        CHECK_THROWS_AS(compute_bands(z1_single(), {}, 0.0, opts), ConfigError);
    }
    SECTION("default grid")
    {
        CHECK(default_grid(1) == std::vector<int>{64});
        CHECK(default_grid(3) == std::vector<int>{24, 24, 24});
    }
}

TEST_CASE("spectrum_measure", "[floquet]")
{
    CHECK(spectrum_measure(std::vector<Interval>{{0, 1}, {2, 3}}).measure == 2.0);
    CHECK(spectrum_measure(std::vector<Interval>{{0, 2}, {1, 3}}).measure == 3.0);
    CHECK(spectrum_measure(std::vector<Interval>{{0, 1}, {1 + 1e-12, 2}}).components.size() == 1);
    CHECK(spectrum_measure(std::vector<Interval>{{0, 1}, {1.1, 2}}).components.size() == 2);
    CHECK(spectrum_measure(std::vector<Interval>{{5, 5}}).measure == 0.0);

    SECTION("measure of Z does not depend on the cell")
    {
        const auto three = spectrum_measure(compute_bands(z1_cell3(), {}, 0.0));
        CHECK(three.measure == Approx(4.0).margin(1e-9));
        const auto six = refine_period(z1_cell3(), {}, {2}).first;
        CHECK(spectrum_measure(compute_bands(six, {}, 0.0)).measure == Approx(4.0).margin(1e-9));
    }
    SECTION("csv writer")
    {
        std::ostringstream os;
        write_spectrum(os, spectrum_measure(std::vector<Interval>{{-2, 2}}));
        CHECK(os.str() == "# lo,hi\n-2,2\n# total_measure 4\n");
    }
}

TEST_CASE("write_bands_csv", "[floquet]")
{
    BandOptions opts;
    opts.grid = {2};
    std::ostringstream os;
    write_bands_csv(os, compute_bands(z1_single(), {}, 0.0, opts));
    CHECK(os.str() == "theta1,lambda1\n0,2\n0.5,-2\n");
}

TEST_CASE("gauge_conjugate", "[floquet]")
{
    const auto m = assemble_floquet(z1_cell3(), {}, 0.0, {0.3});
    CHECK(max_entry_diff(gauge_conjugate(m, {0.0, 0.0, 0.0}), m) == 0.0);
    CHECK(max_entry_diff(gauge_conjugate(m, {0.4, 0.4, 0.4}), m) <= 1e-15);
    CHECK_THROWS_AS(gauge_conjugate(m, {0.0}), ConfigError);

    // Conjugation preserves the spectrum.
    const auto a = hermitian_eigenvalues(m);
    const auto b = hermitian_eigenvalues(gauge_conjugate(m, {0.1, -0.7, 0.25}));
    for (int k = 0; k < 3; ++k)
        CHECK(a[k] == Approx(b[k]).margin(1e-12));
}

TEST_CASE("H1-trivial graphs are gauge equivalent to theta = 0", "[floquet][property]")
{
    std::mt19937_64 rng(11);
    int checked = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const auto g = random_tree_plus_chords(rng, 1 + trial % 2, 2 + trial % 8, trial % 3);
        if (!is_h1_trivial(g).trivial)
            continue;
        ++checked;
        const auto t = random_theta(rng, g.dim());
        const auto phi = solve_gauge(g, chain_psi_theta(g, t));
        const auto zero = assemble_floquet(g, {}, 0.0, Theta(g.dim(), 0.0));
        CHECK(max_entry_diff(gauge_conjugate(assemble_floquet(g, {}, 0.0, t), phi), zero) <= 1e-12);
    }
    CHECK(checked > 20);
}

TEST_CASE("H1-nontrivial graphs have a theta-dependent branch", "[floquet][property]")
{
    std::mt19937_64 rng(13);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto g = random_admissible_graph(rng, 1 + trial % 2, 2 + trial % 6, 0.5);
        if (is_h1_trivial(g).trivial)
            continue;
        ++checked;
        BandOptions opts;
        opts.grid = std::vector<int>(g.dim(), 16);
        opts.refine = false;
        const auto bs = compute_bands(g, {}, 0.0, opts);
        double widest = 0.0;
        for (const auto& b : bs.bands)
            widest = std::max(widest, b.length());
        CHECK(widest > 1e-6);
    }
    CHECK(checked > 10);
}

TEST_CASE("nested grids give monotone measures without refinement", "[floquet][property]")
{
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = random_admissible_graph(rng, 1 + trial % 2, 2 + trial % 5, 0.6);
        const auto q = random_potential(rng, g.num_vertices(), 3);
        double previous = -1.0;
        for (int n : {4, 8, 16}) {
            BandOptions opts;
            opts.grid = std::vector<int>(g.dim(), n);
            opts.refine = false;
            const double m = spectrum_measure(compute_bands(g, q, 2.0, opts)).measure;
            CHECK(m >= previous - 1e-12);
            previous = m;
        }
    }
}

TEST_CASE("refined band edges match dense sampling", "[floquet][property]")
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        const auto g = random_admissible_graph(rng, 1, 1 + trial % 3, 0.8);
        if (g.num_vertices() == 1 && g.edges().empty())
            continue;
        const auto q = random_potential(rng, g.num_vertices(), 3);
        const double mu = 0.5 + trial % 4;
        const auto bs = compute_bands(g, q, mu);

        std::vector<Interval> dense(g.num_vertices(), Interval{1e300, -1e300});
        for (int k = 0; k < 10000; ++k) {
            const auto ev = hermitian_eigenvalues(assemble_floquet(g, q, mu, {k / 10000.0}));
            for (std::size_t j = 0; j < ev.size(); ++j) {
                dense[j].lo = std::min(dense[j].lo, ev[j]);
                dense[j].hi = std::max(dense[j].hi, ev[j]);
            }
        }
        for (std::size_t j = 0; j < dense.size(); ++j) {
            CHECK(std::abs(bs.bands[j].lo - dense[j].lo) <= 1e-4);
            CHECK(std::abs(bs.bands[j].hi - dense[j].hi) <= 1e-4);
        }
    }
}
