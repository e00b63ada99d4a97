#pragma once

// Z^d-periodic graphs described by their quotient: a finite set of
// fundamental-cell vertices and edges labelled by integer cell offsets.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flatpath/errors.hpp"

namespace flatpath {

using VertexId = std::size_t;

/// Integer translation n in Z^d; one component per lattice axis.
using CellOffset = std::vector<int>;

/// Real on-site value per fundamental vertex. Periodicity is structural:
/// Q(u + n) = Q(u) for every translate.
using Potential = std::vector<double>;

namespace offsets {

inline CellOffset zero(std::size_t d) { return CellOffset(d, 0); }

inline CellOffset negated(CellOffset n)
{
    for (auto& c : n)
        c = -c;
    return n;
}

inline void accumulate(CellOffset& acc, const CellOffset& n, int sign = 1)
{
    for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] += sign * n[i];
}

inline bool is_zero(const CellOffset& n)
{
    return std::all_of(n.begin(), n.end(), [](int c) { return c == 0; });
}

inline std::string to_string(const CellOffset& n)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < n.size(); ++i)
        os << (i ? "," : "") << n[i];
    os << ')';
    return os.str();
}

} // namespace offsets

/// Quotient edge u ~ v + offset.
struct QuotientEdge {
    VertexId u = 0;
    VertexId v = 0;
    CellOffset offset;

    auto operator<=>(const QuotientEdge&) const = default;
};

inline QuotientEdge reversed(const QuotientEdge& e)
{
    return {e.v, e.u, offsets::negated(e.offset)};
}

/// Lower vertex first; for loops the lexicographically smaller offset wins.
inline QuotientEdge canonical(const QuotientEdge& e)
{
    if (e.u > e.v)
        return reversed(e);
    if (e.u == e.v) {
        auto neg = offsets::negated(e.offset);
        if (neg < e.offset)
            return {e.u, e.v, std::move(neg)};
    }
    return e;
}

/// One end of an edge as seen from a vertex. `forward` means the edge is
/// traversed from its stored `u` to its stored `v`.
struct Incidence {
    std::size_t edge = 0;
    VertexId neighbor = 0;
    bool forward = true;
};

/// Quotient data of a Z^d-periodic graph. Edges are stored once per
/// unordered pair in canonical orientation, sorted; the reversed edge
/// (v, u, -offset) is implied, so the edge index is antisymmetric by
/// construction. Self-loops with nonzero offset and parallel edges are
/// representable so that inadmissible inputs can be validated and refined.
class PeriodicGraph {
public:
    PeriodicGraph() = default;

    PeriodicGraph(std::size_t dim, std::size_t num_vertices, std::vector<QuotientEdge> edges)
        : dim_(dim), num_vertices_(num_vertices)
    {
        if (dim_ == 0)
            throw GraphError("lattice dimension must be at least 1");
        for (auto& e : edges) {
            if (e.u >= num_vertices_ || e.v >= num_vertices_) {
                throw GraphError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                 ") references a vertex outside [0," + std::to_string(num_vertices_) + ")");
            }
            if (e.offset.size() != dim_) {
                throw GraphError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") has offset of length " +
                                 std::to_string(e.offset.size()) + ", expected " + std::to_string(dim_));
            }
            if (e.u == e.v && offsets::is_zero(e.offset))
                throw GraphError("vertex " + std::to_string(e.u) + " is joined to itself with zero offset");
            e = canonical(e);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        edges_ = std::move(edges);

        incidence_.assign(num_vertices_, {});
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const auto& e = edges_[i];
            incidence_[e.u].push_back({i, e.v, true});
            incidence_[e.v].push_back({i, e.u, false});
        }
    }

    std::size_t dim() const { return dim_; }
    std::size_t num_vertices() const { return num_vertices_; }
    const std::vector<QuotientEdge>& edges() const { return edges_; }
    const std::vector<Incidence>& incident(VertexId v) const { return incidence_.at(v); }
    std::size_t degree(VertexId v) const { return incidence_.at(v).size(); }

    std::size_t max_degree() const
    {
        std::size_t m = 0;
        for (const auto& inc : incidence_)
            m = std::max(m, inc.size());
        return m;
    }

    /// Offset picked up when walking along `inc` away from the vertex that owns it.
    CellOffset step_offset(const Incidence& inc) const
    {
        const auto& n = edges_[inc.edge].offset;
        return inc.forward ? n : offsets::negated(n);
    }

    /// Edge indices joining u to v (any offset).
    std::vector<std::size_t> edges_between(VertexId u, VertexId v) const
    {
        std::vector<std::size_t> out;
        for (const auto& inc : incident(u))
            if (inc.neighbor == v && (u != v || inc.forward))
                out.push_back(inc.edge);
        return out;
    }

    bool operator==(const PeriodicGraph& other) const
    {
        return dim_ == other.dim_ && num_vertices_ == other.num_vertices_ && edges_ == other.edges_;
    }

private:
    std::size_t dim_ = 1;
    std::size_t num_vertices_ = 0;
    std::vector<QuotientEdge> edges_;
    std::vector<std::vector<Incidence>> incidence_;
};

// ---------------------------------------------------------------------------
// Admissibility: no self-loops and at most one offset per vertex pair.

enum class ViolationKind { MissingReverse, SelfLoop, MultiEdge };

struct Violation {
    ViolationKind kind;
    VertexId u = 0;
    VertexId v = 0;
    std::vector<CellOffset> offsets;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::size_t count(ViolationKind kind) const
    {
        return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                      [kind](const Violation& v) { return v.kind == kind; }));
    }
};

inline std::string describe(const Violation& viol)
{
    std::ostringstream os;
    switch (viol.kind) {
    case ViolationKind::MissingReverse:
        os << "missing reversed edge for (" << viol.u << "," << viol.v << ","
           << offsets::to_string(viol.offsets.front()) << ")";
        break;
    case ViolationKind::SelfLoop:
        os << "self-loop at vertex " << viol.u << " with offset " << offsets::to_string(viol.offsets.front());
        break;
    case ViolationKind::MultiEdge:
        os << "vertices " << viol.u << " and " << viol.v << " joined by " << viol.offsets.size() << " offsets:";
        for (const auto& n : viol.offsets)
            os << ' ' << offsets::to_string(n);
        break;
    }
    return os.str();
}

inline ValidationReport validate_graph(const PeriodicGraph& g)
{
    ValidationReport report;
    const auto& edges = g.edges();
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j].u == edges[i].u && edges[j].v == edges[i].v)
            ++j;
        if (edges[i].u == edges[i].v) {
            for (std::size_t k = i; k < j; ++k)
                report.violations.push_back({ViolationKind::SelfLoop, edges[k].u, edges[k].v, {edges[k].offset}});
        } else if (j - i >= 2) {
            Violation viol{ViolationKind::MultiEdge, edges[i].u, edges[i].v, {}};
            for (std::size_t k = i; k < j; ++k)
                viol.offsets.push_back(edges[k].offset);
            report.violations.push_back(std::move(viol));
        }
        i = j;
    }
    return report;
}

/// Validates an explicitly oriented edge list in which both orientations
/// of every edge are expected to be present.
inline ValidationReport validate_edge_list(std::size_t dim, std::size_t num_vertices,
                                           std::span<const QuotientEdge> oriented)
{
    ValidationReport report;
    std::vector<QuotientEdge> sorted(oriented.begin(), oriented.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<QuotientEdge> kept;
    for (const auto& e : oriented) {
        if (!std::binary_search(sorted.begin(), sorted.end(), reversed(e)))
            report.violations.push_back({ViolationKind::MissingReverse, e.u, e.v, {e.offset}});
        if (e.u == e.v && offsets::is_zero(e.offset)) {
            if (e.offset.size() == dim && e.u < num_vertices)
                report.violations.push_back({ViolationKind::SelfLoop, e.u, e.v, {e.offset}});
            continue;
        }
        kept.push_back(e);
    }
    auto rest = validate_graph(PeriodicGraph(dim, num_vertices, std::move(kept)));
    for (auto& viol : rest.violations)
        report.violations.push_back(std::move(viol));
    return report;
}

// ---------------------------------------------------------------------------
// Period refinement along the coordinate axes.

namespace detail {

inline std::size_t product(const std::vector<int>& factors)
{
    return std::accumulate(factors.begin(), factors.end(), std::size_t{1},
                           [](std::size_t acc, int f) { return acc * static_cast<std::size_t>(f); });
}

// Axis 0 varies fastest.
inline std::vector<int> decode_residue(std::size_t index, const std::vector<int>& factors)
{
    std::vector<int> r(factors.size());
    for (std::size_t i = 0; i < factors.size(); ++i) {
        r[i] = static_cast<int>(index % static_cast<std::size_t>(factors[i]));
        index /= static_cast<std::size_t>(factors[i]);
    }
    return r;
}

inline std::size_t encode_residue(const std::vector<int>& r, const std::vector<int>& factors)
{
    std::size_t index = 0;
    for (std::size_t i = factors.size(); i-- > 0;)
        index = index * static_cast<std::size_t>(factors[i]) + static_cast<std::size_t>(r[i]);
    return index;
}

inline int floor_div(int a, int b)
{
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

inline void check_factors(const PeriodicGraph& g, const std::vector<int>& factors)
{
    if (factors.size() != g.dim())
        throw ConfigError("refinement needs " + std::to_string(g.dim()) + " factors, got " +
                          std::to_string(factors.size()));
    for (int f : factors)
        if (f < 1)
            throw ConfigError("refinement factors must be >= 1");
}

} // namespace detail

/// Re-expresses the same infinite graph with a coarser translation group
/// f_1 Z x ... x f_d Z. New vertex (v, r) has index v + nu * residue_index(r).
inline std::pair<PeriodicGraph, Potential> refine_period(const PeriodicGraph& g, const Potential& q,
                                                         const std::vector<int>& factors)
{
    detail::check_factors(g, factors);
    if (!q.empty() && q.size() != g.num_vertices())
        throw GraphError("potential has " + std::to_string(q.size()) + " values for " +
                         std::to_string(g.num_vertices()) + " vertices");

    const std::size_t nu = g.num_vertices();
    const std::size_t cells = detail::product(factors);
    std::vector<QuotientEdge> edges;
    edges.reserve(g.edges().size() * cells);
    for (std::size_t ri = 0; ri < cells; ++ri) {
        const auto r = detail::decode_residue(ri, factors);
        for (const auto& e : g.edges()) {
            std::vector<int> target(g.dim());
            CellOffset carry(g.dim());
            for (std::size_t i = 0; i < g.dim(); ++i) {
                const int t = r[i] + e.offset[i];
                carry[i] = detail::floor_div(t, factors[i]);
                target[i] = t - carry[i] * factors[i];
            }
            edges.push_back({e.u + nu * ri, e.v + nu * detail::encode_residue(target, factors), std::move(carry)});
        }
    }

    Potential refined_q;
    if (!q.empty()) {
        refined_q.resize(nu * cells);
        for (std::size_t ri = 0; ri < cells; ++ri)
            std::copy(q.begin(), q.end(), refined_q.begin() + static_cast<std::ptrdiff_t>(nu * ri));
    }
    return {PeriodicGraph(g.dim(), nu * cells, std::move(edges)), std::move(refined_q)};
}

/// Smallest refinement (by cell count, then lexicographically) that removes
/// every self-loop and parallel edge. Searches factors in [1, cap]^d.
inline std::vector<int> minimal_assumption_refinement(const PeriodicGraph& g, int cap = 8)
{
    std::vector<int> ones(g.dim(), 1);
    if (validate_graph(g).ok())
        return ones;
    if (cap < 1)
        throw ConfigError("refinement cap must be >= 1");

    std::vector<std::vector<int>> candidates;
    std::vector<int> cur(g.dim(), 1);
    std::function<void(std::size_t)> enumerate = [&](std::size_t axis) {
        if (axis == g.dim()) {
            candidates.push_back(cur);
            return;
        }
        for (int f = 1; f <= cap; ++f) {
            cur[axis] = f;
            enumerate(axis + 1);
        }
    };
    enumerate(0);
    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        const auto pa = detail::product(a), pb = detail::product(b);
        return pa != pb ? pa < pb : a < b;
    });
    for (const auto& f : candidates) {
        if (f == ones)
            continue;
        if (validate_graph(refine_period(g, {}, f).first).ok())
            return f;
    }
    throw BoundExceededError("no refinement with factors <= " + std::to_string(cap) +
                             " per axis removes all self-loops and multi-edges");
}

// ---------------------------------------------------------------------------
// Level sets and induced subgraphs.

struct LevelSet {
    double value = 0.0;
    std::vector<VertexId> vertices;
    /// max |Q(u) - value| over members.
    double spread = 0.0;
};

/// Partitions the vertices into groups of (single-linkage) equal potential.
/// Sorted by value.
inline std::vector<LevelSet> level_sets(const PeriodicGraph& g, const Potential& q, double tol = 0.0)
{
    if (tol < 0.0 || !std::isfinite(tol))
        throw ConfigError("level-set tolerance must be finite and >= 0");
    if (q.size() != g.num_vertices())
        throw GraphError("potential has " + std::to_string(q.size()) + " values for " +
                         std::to_string(g.num_vertices()) + " vertices");
    for (double x : q)
        if (!std::isfinite(x))
            throw GraphError("potential values must be finite");

    std::vector<VertexId> order(q.size());
    std::iota(order.begin(), order.end(), VertexId{0});
    std::stable_sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return q[a] < q[b]; });

    std::vector<LevelSet> sets;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i + 1;
        while (j < order.size() && q[order[j]] - q[order[j - 1]] <= tol)
            ++j;
        LevelSet ls;
        const double lo = q[order[i]], hi = q[order[j - 1]];
        ls.value = lo == hi ? lo : 0.5 * (lo + hi);
        ls.vertices.assign(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(j));
        std::sort(ls.vertices.begin(), ls.vertices.end());
        for (VertexId v : ls.vertices)
            ls.spread = std::max(ls.spread, std::abs(q[v] - ls.value));
        sets.push_back(std::move(ls));
        i = j;
    }
    return sets;
}

/// Induced subgraph in local numbering; `vertices[local]` is the id in the parent.
struct Fragment {
    PeriodicGraph graph;
    std::vector<VertexId> vertices;
    /// Parent edge index of each local edge.
    std::vector<std::size_t> edges;
};

inline Fragment induced_subgraph(const PeriodicGraph& g, std::vector<VertexId> subset)
{
    std::sort(subset.begin(), subset.end());
    subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
    constexpr auto absent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> local(g.num_vertices(), absent);
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (subset[i] >= g.num_vertices())
            throw GraphError("vertex " + std::to_string(subset[i]) + " is not in the graph");
        local[subset[i]] = i;
    }
    // A monotone relabelling keeps canonical orientation and edge order.
    std::vector<QuotientEdge> kept;
    std::vector<std::size_t> parent_edges;
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const auto& e = g.edges()[i];
        if (local[e.u] != absent && local[e.v] != absent) {
            kept.push_back({local[e.u], local[e.v], e.offset});
            parent_edges.push_back(i);
        }
    }
    return {PeriodicGraph(g.dim(), subset.size(), std::move(kept)), std::move(subset), std::move(parent_edges)};
}

/// Restricts an existing fragment further; `subset` uses parent ids.
inline Fragment induced_subgraph(const Fragment& frag, const std::vector<VertexId>& subset)
{
    std::vector<VertexId> local;
    for (VertexId v : subset) {
        auto it = std::lower_bound(frag.vertices.begin(), frag.vertices.end(), v);
        if (it == frag.vertices.end() || *it != v)
            throw GraphError("vertex " + std::to_string(v) + " is not in the fragment");
        local.push_back(static_cast<VertexId>(it - frag.vertices.begin()));
    }
    auto sub = induced_subgraph(frag.graph, std::move(local));
    for (auto& v : sub.vertices)
        v = frag.vertices[v];
    for (auto& e : sub.edges)
        e = frag.edges[e];
    return sub;
}

// ---------------------------------------------------------------------------
// Lattice models: a graph with its optional potential and hypercubic layout.

/// Integer coordinates of each fundamental vertex inside a box-shaped cell of
/// the nearest-neighbour lattice Z^d.
struct HypercubicLayout {
    std::vector<int> shape;
    std::vector<std::vector<int>> coords;

    bool operator==(const HypercubicLayout&) const = default;
};

struct LatticeModel {
    std::string name;
    PeriodicGraph graph;
    std::optional<Potential> potential;
    std::optional<HypercubicLayout> layout;
    /// Cumulative refinement applied since generation or load.
    std::vector<int> refinement;
};

inline LatticeModel refine_model(const LatticeModel& model, const std::vector<int>& factors)
{
    auto [graph, q] = refine_period(model.graph, model.potential.value_or(Potential{}), factors);
    LatticeModel out;
    out.name = model.name;
    out.graph = std::move(graph);
    if (model.potential)
        out.potential = std::move(q);
    out.refinement = model.refinement.empty() ? std::vector<int>(factors.size(), 1) : model.refinement;
    for (std::size_t i = 0; i < factors.size(); ++i)
        out.refinement[i] *= factors[i];
    if (model.layout) {
        const auto& old = *model.layout;
        HypercubicLayout lay;
        lay.shape = old.shape;
        for (std::size_t i = 0; i < lay.shape.size(); ++i)
            lay.shape[i] *= factors[i];
        const std::size_t nu = model.graph.num_vertices();
        const std::size_t cells = detail::product(factors);
        lay.coords.resize(nu * cells);
        for (std::size_t ri = 0; ri < cells; ++ri) {
            const auto r = detail::decode_residue(ri, factors);
            for (std::size_t v = 0; v < nu; ++v) {
                auto c = old.coords[v];
                for (std::size_t i = 0; i < c.size(); ++i)
                    c[i] += old.shape[i] * r[i];
                lay.coords[v + nu * ri] = std::move(c);
            }
        }
        out.layout = std::move(lay);
    }
    return out;
}

/// Applies the minimal admissible refinement, logging one line when the cell changes.
inline LatticeModel ensure_admissible(const LatticeModel& model, int cap = 8, std::ostream* log = nullptr)
{
    const auto factors = minimal_assumption_refinement(model.graph, cap);
    if (std::all_of(factors.begin(), factors.end(), [](int f) { return f == 1; }))
        return model;
    auto out = refine_model(model, factors);
    if (log) {
        *log << "refined fundamental cell by factors " << offsets::to_string(factors) << ": "
             << model.graph.num_vertices() << " -> " << out.graph.num_vertices()
             << " vertices (removes self-loops and multi-edges)\n";
    }
    return out;
}

} // namespace flatpath
