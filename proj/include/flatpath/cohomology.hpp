#pragma once

// Cochains on finite (quotient) graphs: 0-chains are values on vertices,
// 1-chains are antisymmetric values on edges, and the gradient maps the
// former into the latter. A 1-chain is a gradient exactly when every loop
// sum vanishes; for the quasimomentum chain psi_theta(u,v) = <sigma(u,v), theta>
// this reduces to every cycle having zero total cell offset.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flatpath/errors.hpp"
#include "flatpath/lattice.hpp"

namespace flatpath {

/// Value per canonical edge of a graph; the reversed orientation carries the negative.
struct OneChain {
    std::vector<double> values;
};

/// Value per vertex.
using GaugePotential = std::vector<double>;

/// Torus coordinates theta in [0,1)^d.
using Theta = std::vector<double>;

struct CycleStep {
    std::size_t edge = 0;
    bool forward = true;
};

/// Closed vertex loop: vertices.front() == vertices.back(), steps[j] joins
/// vertices[j] to vertices[j+1]. total_offset is the sum of edge offsets
/// along the loop, i.e. its class in pi_1 of the torus.
struct Cycle {
    std::vector<VertexId> vertices;
    std::vector<CycleStep> steps;
    CellOffset total_offset;
};

struct SpanningForest {
    static constexpr std::size_t none = static_cast<std::size_t>(-1);

    std::vector<std::size_t> parent;
    std::vector<std::size_t> parent_edge;
    /// True when the parent -> child step follows the stored orientation.
    std::vector<bool> parent_forward;
    std::vector<std::size_t> depth;
    std::vector<std::size_t> component;
    std::vector<VertexId> roots;
    std::vector<VertexId> order;
    std::vector<bool> tree_edge;
};

/// Breadth-first forest, rooted at the lowest unvisited vertex of each
/// component, neighbours visited in canonical edge order.
inline SpanningForest spanning_forest(const PeriodicGraph& g)
{
    const std::size_t nu = g.num_vertices();
    SpanningForest f;
    f.parent.assign(nu, SpanningForest::none);
    f.parent_edge.assign(nu, SpanningForest::none);
    f.parent_forward.assign(nu, true);
    f.depth.assign(nu, 0);
    f.component.assign(nu, SpanningForest::none);
    f.tree_edge.assign(g.edges().size(), false);

    for (VertexId root = 0; root < nu; ++root) {
        if (f.component[root] != SpanningForest::none)
            continue;
        const std::size_t comp = f.roots.size();
        f.roots.push_back(root);
        f.component[root] = comp;
        std::deque<VertexId> queue{root};
        while (!queue.empty()) {
            const VertexId x = queue.front();
            queue.pop_front();
            f.order.push_back(x);
            for (const auto& inc : g.incident(x)) {
                const VertexId y = inc.neighbor;
                if (f.component[y] != SpanningForest::none)
                    continue;
                f.component[y] = comp;
                f.parent[y] = x;
                f.parent_edge[y] = inc.edge;
                f.parent_forward[y] = inc.forward;
                f.depth[y] = f.depth[x] + 1;
                f.tree_edge[inc.edge] = true;
                queue.push_back(y);
            }
        }
    }
    return f;
}

inline CellOffset step_offset(const PeriodicGraph& g, const CycleStep& s)
{
    const auto& n = g.edges()[s.edge].offset;
    return s.forward ? n : offsets::negated(n);
}

/// The loop closed by a non-forest edge: across the edge, then back through the forest.
inline Cycle fundamental_cycle(const PeriodicGraph& g, const SpanningForest& f, std::size_t edge)
{
    const auto& e = g.edges()[edge];
    std::vector<VertexId> up_v{e.v}, up_u{e.u};
    std::vector<CycleStep> steps_v, steps_u; // child -> parent steps from each side
    VertexId a = e.v, b = e.u;
    while (a != b) {
        if (f.depth[a] >= f.depth[b]) {
            steps_v.push_back({f.parent_edge[a], !f.parent_forward[a]});
            a = f.parent[a];
            up_v.push_back(a);
        } else {
            steps_u.push_back({f.parent_edge[b], !f.parent_forward[b]});
            b = f.parent[b];
            up_u.push_back(b);
        }
    }

    Cycle c;
    c.vertices.push_back(e.u);
    c.steps.push_back({edge, true});
    c.vertices.insert(c.vertices.end(), up_v.begin(), up_v.end());
    c.steps.insert(c.steps.end(), steps_v.begin(), steps_v.end());
    // Descend from the common ancestor back to u.
    for (std::size_t i = steps_u.size(); i-- > 0;) {
        c.vertices.push_back(up_u[i]);
        c.steps.push_back({steps_u[i].edge, !steps_u[i].forward});
    }
    c.total_offset = offsets::zero(g.dim());
    for (const auto& s : c.steps)
        offsets::accumulate(c.total_offset, step_offset(g, s));
    return c;
}

struct BettiNumbers {
    std::size_t beta0 = 0;
    std::size_t beta1 = 0;
};

inline BettiNumbers betti_numbers(const PeriodicGraph& g)
{
    const auto f = spanning_forest(g);
    const std::size_t beta0 = f.roots.size();
    return {beta0, g.edges().size() + beta0 - g.num_vertices()};
}

struct CycleBasis {
    std::vector<Cycle> cycles;
    std::size_t beta0 = 0;
    std::size_t beta1 = 0;
    SpanningForest forest;
};

/// One fundamental cycle per non-forest edge, in canonical edge order.
inline CycleBasis cycle_basis(const PeriodicGraph& g)
{
    CycleBasis basis;
    basis.forest = spanning_forest(g);
    for (std::size_t i = 0; i < g.edges().size(); ++i)
        if (!basis.forest.tree_edge[i])
            basis.cycles.push_back(fundamental_cycle(g, basis.forest, i));
    basis.beta0 = basis.forest.roots.size();
    basis.beta1 = basis.cycles.size();
    return basis;
}

// ---------------------------------------------------------------------------
// Chains.

inline OneChain chain_psi_theta(const PeriodicGraph& g, const Theta& theta)
{
    if (theta.size() != g.dim())
        throw ConfigError("theta has " + std::to_string(theta.size()) + " components, expected " +
                          std::to_string(g.dim()));
    OneChain psi;
    psi.values.reserve(g.edges().size());
    for (const auto& e : g.edges()) {
        double s = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i)
            s += e.offset[i] * theta[i];
        psi.values.push_back(s);
    }
    return psi;
}

/// [grad phi](u, v) = phi(v) - phi(u).
inline OneChain gradient(const PeriodicGraph& g, const GaugePotential& phi)
{
    if (phi.size() != g.num_vertices())
        throw ConfigError("gauge potential size does not match vertex count");
    OneChain psi;
    psi.values.reserve(g.edges().size());
    for (const auto& e : g.edges())
        psi.values.push_back(phi[e.v] - phi[e.u]);
    return psi;
}

inline double loop_sum(const OneChain& psi, const Cycle& cycle)
{
    double s = 0.0;
    for (const auto& step : cycle.steps)
        s += step.forward ? psi.values.at(step.edge) : -psi.values.at(step.edge);
    return s;
}

/// Sum of psi along a closed vertex loop (v_0, ..., v_l), v_0 == v_l.
inline double loop_sum(const PeriodicGraph& g, const OneChain& psi, const std::vector<VertexId>& loop)
{
    if (psi.values.size() != g.edges().size())
        throw ConfigError("chain size does not match edge count");
    if (loop.empty() || loop.front() != loop.back())
        throw EdgeNotPresentError("vertex loop must start and end at the same vertex");
    double s = 0.0;
    for (std::size_t j = 1; j < loop.size(); ++j) {
        const VertexId a = loop[j - 1], b = loop[j];
        if (a >= g.num_vertices() || b >= g.num_vertices())
            throw EdgeNotPresentError("loop vertex outside the graph");
        const auto between = g.edges_between(a, b);
        if (between.empty())
            throw EdgeNotPresentError("no edge between " + std::to_string(a) + " and " + std::to_string(b));
        if (between.size() > 1 || a == b)
            throw EdgeNotPresentError("edge between " + std::to_string(a) + " and " + std::to_string(b) +
                                      " is not unique");
        const auto& e = g.edges()[between.front()];
        s += e.u == a ? psi.values[between.front()] : -psi.values[between.front()];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Triviality of psi_theta and gauge solving.

struct H1Triviality {
    bool trivial = true;
    /// A basis cycle with nonzero total offset when not trivial.
    std::optional<Cycle> witness;
};

/// psi_theta restricted to g is a gradient for every theta iff every basis
/// cycle has zero total offset (exact integer arithmetic).
inline H1Triviality is_h1_trivial(const PeriodicGraph& g)
{
    auto basis = cycle_basis(g);
    for (auto& c : basis.cycles)
        if (!offsets::is_zero(c.total_offset))
            return {false, std::move(c)};
    return {true, std::nullopt};
}

class NontrivialClassError : public Error {
public:
    NontrivialClassError(Cycle cycle, double sum)
        : Error("chain is not a gradient: loop sum " + std::to_string(sum) + " around cycle with offset " +
                offsets::to_string(cycle.total_offset)),
          cycle_(std::move(cycle)), loop_sum_(sum)
    {
    }

    const Cycle& cycle() const { return cycle_; }
    double loop_sum() const { return loop_sum_; }

private:
    Cycle cycle_;
    double loop_sum_;
};

/// Finds phi with grad phi = psi, phi = 0 at each component root. Throws
/// NontrivialClassError if some non-forest edge is inconsistent by more than tol.
inline GaugePotential solve_gauge(const PeriodicGraph& g, const OneChain& psi, double tol = 1e-10)
{
    if (psi.values.size() != g.edges().size())
        throw ConfigError("chain size does not match edge count");
    const auto f = spanning_forest(g);
    GaugePotential phi(g.num_vertices(), 0.0);
    for (VertexId x : f.order) {
        if (f.parent[x] == SpanningForest::none)
            continue;
        const double step = psi.values[f.parent_edge[x]];
        phi[x] = phi[f.parent[x]] + (f.parent_forward[x] ? step : -step);
    }
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        if (f.tree_edge[i])
            continue;
        const auto& e = g.edges()[i];
        if (std::abs(phi[e.v] - phi[e.u] - psi.values[i]) > tol) {
            auto c = fundamental_cycle(g, f, i);
            const double s = loop_sum(psi, c);
            throw NontrivialClassError(std::move(c), s);
        }
    }
    return phi;
}

// ---------------------------------------------------------------------------
// Lift oracle: explores the periodic lift directly, independent of cycle bases.

/// Breadth-first search on lifted vertices (v, n), n in [-R, R]^d, of the
/// subgraph induced by `subset`. True iff some start (v, 0) reaches a
/// translate (v, n) with n != 0, which certifies an infinite path.
inline bool brute_force_lift_oracle(const PeriodicGraph& g, const std::vector<VertexId>& subset, int radius)
{
    if (radius < 1)
        throw ConfigError("lift radius must be >= 1");
    const auto frag = induced_subgraph(g, subset);
    const auto& h = frag.graph;
    const std::size_t d = h.dim();
    const std::size_t side = static_cast<std::size_t>(2 * radius + 1);
    std::size_t box = 1;
    for (std::size_t i = 0; i < d; ++i)
        box *= side;

    auto encode = [&](const CellOffset& n) {
        std::size_t idx = 0;
        for (std::size_t i = d; i-- > 0;)
            idx = idx * side + static_cast<std::size_t>(n[i] + radius);
        return idx;
    };

    std::vector<char> seen(h.num_vertices() * box);
    for (VertexId start = 0; start < h.num_vertices(); ++start) {
        std::fill(seen.begin(), seen.end(), 0);
        std::deque<std::pair<VertexId, CellOffset>> queue;
        queue.emplace_back(start, offsets::zero(d));
        seen[start * box + encode(queue.front().second)] = 1;
        while (!queue.empty()) {
            auto [x, n] = std::move(queue.front());
            queue.pop_front();
            for (const auto& inc : h.incident(x)) {
                // x + n ~ y + n + sigma(x, y)
                auto m = n;
                offsets::accumulate(m, h.step_offset(inc));
                if (std::any_of(m.begin(), m.end(), [&](int c) { return c < -radius || c > radius; }))
                    continue;
                const auto key = inc.neighbor * box + encode(m);
                if (seen[key])
                    continue;
                if (inc.neighbor == start && !offsets::is_zero(m))
                    return true;
                seen[key] = 1;
                queue.emplace_back(inc.neighbor, std::move(m));
            }
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Flat-path criterion over all level sets of a potential.

struct LevelSetVerdict {
    LevelSet level;
    std::size_t beta0 = 0;
    std::size_t beta1 = 0;
    bool trivial = true;
    /// Witness loop in the parent graph's vertex ids.
    std::optional<Cycle> witness;
};

struct FlatPathReport {
    std::vector<LevelSetVerdict> levels;
    /// True iff every level set is H^1-trivial (no infinite flat path).
    bool decay_predicted = true;
};

inline constexpr const char* verdict_decay = "measure → 0 predicted";
inline constexpr const char* verdict_bounded = "measure bounded below";

inline FlatPathReport flat_path_report(const PeriodicGraph& g, const Potential& q, double tol = 0.0)
{
    FlatPathReport report;
    for (auto& ls : level_sets(g, q, tol)) {
        const auto frag = induced_subgraph(g, ls.vertices);
        LevelSetVerdict lv;
        const auto betti = betti_numbers(frag.graph);
        lv.beta0 = betti.beta0;
        lv.beta1 = betti.beta1;
        auto h1 = is_h1_trivial(frag.graph);
        lv.trivial = h1.trivial;
        if (h1.witness) {
            for (auto& v : h1.witness->vertices)
                v = frag.vertices[v];
            for (auto& s : h1.witness->steps)
                s.edge = frag.edges[s.edge];
            lv.witness = std::move(h1.witness);
        }
        lv.level = std::move(ls);
        report.decay_predicted = report.decay_predicted && lv.trivial;
        report.levels.push_back(std::move(lv));
    }
    return report;
}

/// Loop as "v0 -(n)-> v1 -(n)-> ... -> v0"; `g` owns the cycle's edge ids.
inline std::string format_witness(const PeriodicGraph& g, const Cycle& c)
{
    std::ostringstream os;
    os << c.vertices.front();
    for (std::size_t j = 0; j < c.steps.size(); ++j)
        os << " -" << offsets::to_string(step_offset(g, c.steps[j])) << "-> " << c.vertices[j + 1];
    return os.str();
}

inline std::string format_report(const PeriodicGraph& g, const FlatPathReport& report)
{
    std::ostringstream os;
    os.precision(12);
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        const auto& lv = report.levels[i];
        os << "level " << i << ": a = " << lv.level.value << " | size " << lv.level.vertices.size() << " | beta0 "
           << lv.beta0 << " | beta1 " << lv.beta1 << " | "
           << (lv.trivial ? "no infinite flat path" : "infinite flat path") << '\n';
        if (lv.witness) {
            os << "  witness: " << format_witness(g, *lv.witness) << "  total offset "
               << offsets::to_string(lv.witness->total_offset) << '\n';
        }
    }
    os << "verdict: " << (report.decay_predicted ? verdict_decay : verdict_bounded) << '\n';
    return os.str();
}

} // namespace flatpath
