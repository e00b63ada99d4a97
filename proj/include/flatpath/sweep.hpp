#pragma once

// Large-coupling experiments on H = Delta + mu Q. For mu large the bands
// cluster around mu*a for each value a of Q; cluster widths shrink like
// 1/mu when no level set carries an infinite flat path and stay of order
// one otherwise.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "flatpath/cohomology.hpp"
#include "flatpath/errors.hpp"
#include "flatpath/floquet.hpp"
#include "flatpath/lattice.hpp"

namespace flatpath {

/// Geometric mu schedule lo .. hi with `steps` points (inclusive).
inline std::vector<double> geometric_schedule(double lo, double hi, int steps)
{
    if (!(lo > 0.0) || !(hi >= lo) || steps < 1)
        throw ConfigError("geometric schedule needs 0 < lo <= hi and steps >= 1");
    std::vector<double> mus;
    for (int k = 0; k < steps; ++k) {
        const double t = steps == 1 ? 0.0 : static_cast<double>(k) / (steps - 1);
        mus.push_back(std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo))));
    }
    return mus;
}

/// mu above which Gershgorin discs (radius <= max degree) around distinct
/// values mu*a are separated with margin: 3 * max_degree / min_gap.
inline double separation_threshold(const PeriodicGraph& g, const std::vector<LevelSet>& levels)
{
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < levels.size(); ++i)
        gap = std::min(gap, levels[i].value - levels[i - 1].value);
    if (levels.size() < 2 || g.max_degree() == 0)
        return 0.0;
    return 3.0 * static_cast<double>(g.max_degree()) / gap;
}

namespace detail {

// Index of the level value nearest to x / mu; ties go to the smaller value.
inline std::size_t nearest_level(const std::vector<LevelSet>& levels, double mu, double x)
{
    std::size_t best = 0;
    double dist = std::abs(x - mu * levels[0].value);
    for (std::size_t k = 1; k < levels.size(); ++k) {
        const double d = std::abs(x - mu * levels[k].value);
        if (d < dist) {
            dist = d;
            best = k;
        }
    }
    return best;
}

} // namespace detail

struct SweepOptions {
    BandOptions bands;
    double level_tol = 0.0;
};

struct SweepResult {
    std::vector<double> mus;
    std::vector<double> measures;
    std::vector<double> level_values;
    /// cluster_lengths[i][k]: measure of the bands near mu_i * a_k.
    std::vector<std::vector<double>> cluster_lengths;
    std::vector<int> grid;
    std::vector<std::string> warnings;
};

inline SweepResult coupling_sweep(const PeriodicGraph& g, const Potential& q, const std::vector<double>& mus,
                                  const SweepOptions& opts = {})
{
    if (mus.empty())
        throw ConfigError("mu schedule is empty");
    for (std::size_t i = 0; i < mus.size(); ++i) {
        if (!(mus[i] > 0.0) || !std::isfinite(mus[i]))
            throw ConfigError("mu values must be finite and > 0");
        if (i > 0 && mus[i] <= mus[i - 1])
            throw ConfigError("mu values must be strictly ascending");
    }
    const auto levels = level_sets(g, q, opts.level_tol);
    const double threshold = separation_threshold(g, levels);

    SweepResult sr;
    for (const auto& ls : levels)
        sr.level_values.push_back(ls.value);
    for (double mu : mus) {
        if (mu < threshold) {
            sr.warnings.push_back("mu = " + std::to_string(mu) + " is below the cluster separation threshold " +
                                  std::to_string(threshold) + "; clusters may overlap");
        }
        const auto bs = compute_bands(g, q, mu, opts.bands);
        const auto est = spectrum_measure(bs);
        std::vector<std::vector<Interval>> clusters(levels.size());
        for (const auto& b : bs.bands)
            clusters[detail::nearest_level(levels, mu, 0.5 * (b.lo + b.hi))].push_back(b);
        std::vector<double> lengths;
        for (auto& c : clusters)
            lengths.push_back(total_length(merge_intervals(std::move(c), est.merge_epsilon)));
        sr.mus.push_back(mu);
        sr.measures.push_back(est.measure);
        sr.cluster_lengths.push_back(std::move(lengths));
        sr.grid = bs.grid;
    }
    return sr;
}

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Root-mean-square residual of the log-log line.
    double residual = 0.0;
    std::size_t samples = 0;
};

inline constexpr double measure_floor = 1e-9;

/// Least-squares line through (log mu, log measure) over samples above the floor.
inline DecayFit fit_decay(const std::vector<double>& mus, const std::vector<double>& measures)
{
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < std::min(mus.size(), measures.size()); ++i) {
        if (measures[i] > measure_floor && mus[i] > 0.0) {
            xs.push_back(std::log(mus[i]));
            ys.push_back(std::log(measures[i]));
        }
    }
    if (xs.size() < 3)
        throw InsufficientDataError("decay fit needs at least 3 samples with measure > 1e-9, got " +
                                    std::to_string(xs.size()));
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0)
        throw InsufficientDataError("decay fit needs at least two distinct mu values");
    DecayFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.samples = xs.size();
    return fit;
}

inline DecayFit fit_decay(const SweepResult& sr) { return fit_decay(sr.mus, sr.measures); }

// ---------------------------------------------------------------------------
// First-order coefficients: eigenvalues of Delta(theta) restricted to a level set.

inline constexpr double flat_branch_tol = 1e-6;

struct FirstOrderCoefficients {
    double value = 0.0;
    std::vector<int> grid;
    std::vector<Theta> thetas;
    /// coefficients[k][r] = c_{a,r}(thetas[k]), ascending in r.
    std::vector<std::vector<double>> coefficients;
    /// max - min over the grid per branch.
    std::vector<double> variation;
    std::vector<bool> flat;

    bool all_flat() const { return std::all_of(flat.begin(), flat.end(), [](bool f) { return f; }); }
    double max_variation() const
    {
        return variation.empty() ? 0.0 : *std::max_element(variation.begin(), variation.end());
    }
};

inline FirstOrderCoefficients first_order_coefficients(const PeriodicGraph& g, const LevelSet& level,
                                                        const std::vector<int>& grid)
{
    if (level.vertices.empty())
        throw ConfigError("level set is empty");
    const auto frag = induced_subgraph(g, level.vertices);
    FirstOrderCoefficients fc;
    fc.value = level.value;
    fc.grid = grid.empty() ? default_grid(g.dim()) : grid;
    fc.thetas = theta_grid(fc.grid);
    for (const auto& t : fc.thetas)
        fc.coefficients.push_back(hermitian_eigenvalues(assemble_floquet(frag.graph, {}, 0.0, t)));
    const std::size_t branches = level.vertices.size();
    for (std::size_t r = 0; r < branches; ++r) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& c : fc.coefficients) {
            lo = std::min(lo, c[r]);
            hi = std::max(hi, c[r]);
        }
        fc.variation.push_back(hi - lo);
        fc.flat.push_back(hi - lo <= flat_branch_tol);
    }
    return fc;
}

struct PerturbationReport {
    double value = 0.0;
    double mu = 0.0;
    /// max over theta and r of |lambda_r(theta) - mu*a - c_{a,r}(theta)|.
    double max_deviation = 0.0;
    std::size_t samples = 0;
};

/// Compares the eigenvalues of H_{mu Q}(theta) near mu*a with the first-order
/// prediction mu*a + c_{a,r}(theta). The remainder is O(1/mu).
inline PerturbationReport perturbation_check(const PeriodicGraph& g, const Potential& q, double a, double mu,
                                             const std::vector<int>& grid, double level_tol = 0.0)
{
    const auto levels = level_sets(g, q, level_tol);
    const std::size_t target = detail::nearest_level(levels, 1.0, a);
    const double threshold = separation_threshold(g, levels);
    if (mu < threshold)
        throw ClusterOverlapError("mu = " + std::to_string(mu) + " is below the separation threshold " +
                                  std::to_string(threshold));
    const auto& level = levels[target];
    const auto frag = induced_subgraph(g, level.vertices);

    PerturbationReport rep;
    rep.value = level.value;
    rep.mu = mu;
    for (const auto& t : theta_grid(grid.empty() ? default_grid(g.dim()) : grid)) {
        const auto lambda = hermitian_eigenvalues(assemble_floquet(g, q, mu, t));
        const auto c = hermitian_eigenvalues(assemble_floquet(frag.graph, {}, 0.0, t));
        std::vector<double> near;
        for (double x : lambda)
            if (detail::nearest_level(levels, mu, x) == target)
                near.push_back(x - mu * level.value);
        if (near.size() != c.size())
            throw ClusterOverlapError("cluster near mu*a holds " + std::to_string(near.size()) +
                                      " eigenvalues, expected " + std::to_string(c.size()));
        for (std::size_t r = 0; r < c.size(); ++r)
            rep.max_deviation = std::max(rep.max_deviation, std::abs(near[r] - c[r]));
        ++rep.samples;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Separable lower bound on hypercubic lattices.

struct SeparableBound {
    /// Axes along which Q is invariant under unit translation.
    std::size_t free_axes = 0;
    /// Number of distinct values of Q.
    std::size_t distinct_values = 0;
    /// 4 * free_axes * distinct_values (0 when no axis is free).
    double bound = 0.0;
};

inline SeparableBound separable_lower_bound(const LatticeModel& model)
{
    if (!model.layout)
        throw NotHypercubicError("lattice has no hypercubic layout");
    if (!model.potential)
        throw ConfigError("separable bound needs a potential");
    const auto& g = model.graph;
    const auto& lay = *model.layout;
    const auto& q = *model.potential;
    const std::size_t d = g.dim();
    if (lay.shape.size() != d || lay.coords.size() != g.num_vertices())
        throw NotHypercubicError("layout does not match the graph");

    std::map<std::vector<int>, VertexId> site;
    for (VertexId v = 0; v < g.num_vertices(); ++v)
        site[lay.coords[v]] = v;
    if (site.size() != g.num_vertices())
        throw NotHypercubicError("layout assigns one site to several vertices");

    // Every bond must be a unit step along one axis; each site has 2d bonds.
    if (g.edges().size() != d * g.num_vertices())
        throw NotHypercubicError("bond count differs from nearest-neighbour Z^d");
    for (const auto& e : g.edges()) {
        int nonzero = 0;
        for (std::size_t i = 0; i < d; ++i) {
            const int step = lay.coords[e.v][i] + e.offset[i] * lay.shape[i] - lay.coords[e.u][i];
            if (step == 1 || step == -1)
                ++nonzero;
            else if (step != 0)
                nonzero = 2;
        }
        if (nonzero != 1)
            throw NotHypercubicError("bond (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                     ") is not a nearest-neighbour step");
    }

    SeparableBound sb;
    for (std::size_t i = 0; i < d; ++i) {
        bool invariant = true;
        for (VertexId v = 0; v < g.num_vertices() && invariant; ++v) {
            auto c = lay.coords[v];
            c[i] = (c[i] + 1) % lay.shape[i];
            invariant = q[site.at(c)] == q[v];
        }
        sb.free_axes += invariant ? 1 : 0;
    }
    sb.distinct_values = std::set<double>(q.begin(), q.end()).size();
    sb.bound = 4.0 * static_cast<double>(sb.free_axes * sb.distinct_values);
    return sb;
}

// ---------------------------------------------------------------------------

/// Columns mu, total_measure, one per level cluster; fit summary as comments.
inline void write_sweep_csv(std::ostream& os, const SweepResult& sr, const std::optional<DecayFit>& fit)
{
    const auto old = os.precision(12);
    os << "mu,total_measure";
    for (double a : sr.level_values)
        os << ",cluster_" << a;
    os << '\n';
    for (std::size_t i = 0; i < sr.mus.size(); ++i) {
        os << sr.mus[i] << ',' << sr.measures[i];
        for (double len : sr.cluster_lengths[i])
            os << ',' << len;
        os << '\n';
    }
    if (fit) {
        os << "# decay_fit slope " << fit->slope << '\n';
        os << "# decay_fit intercept " << fit->intercept << '\n';
        os << "# decay_fit residual " << fit->residual << '\n';
        os << "# decay_fit samples " << fit->samples << '\n';
    }
    os.precision(old);
}

} // namespace flatpath
