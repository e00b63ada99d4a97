#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "flatpath/errors.hpp"
#include "flatpath/graph_io.hpp"
#include "flatpath/lattice.hpp"

namespace flatpath {

enum class LatticeKind { Hypercubic, Stripe, CustomFile };

inline LatticeKind parse_lattice_kind(const std::string& s)
{
    if (s == "hypercubic")
        return LatticeKind::Hypercubic;
    if (s == "stripe")
        return LatticeKind::Stripe;
    if (s == "custom-file" || s == "file")
        return LatticeKind::CustomFile;
    throw ConfigError("unknown lattice kind '" + s + "' (expected hypercubic, stripe or custom-file)");
}

/// Box of shape[0] x ... x shape[d-1] sites of Z^d with nearest-neighbour
/// bonds. Vertex index is the row-major position with axis 0 fastest.
inline LatticeModel hypercubic_cell(const std::vector<int>& shape)
{
    if (shape.empty())
        throw ConfigError("hypercubic cell needs at least one axis");
    for (int s : shape)
        if (s < 1)
            throw ConfigError("hypercubic periods must be >= 1");

    const std::size_t d = shape.size();
    const std::size_t nu = detail::product(shape);
    LatticeModel model;
    model.layout = HypercubicLayout{shape, {}};
    std::vector<QuotientEdge> edges;
    for (std::size_t v = 0; v < nu; ++v) {
        const auto c = detail::decode_residue(v, shape);
        model.layout->coords.push_back(c);
        for (std::size_t i = 0; i < d; ++i) {
            auto next = c;
            CellOffset n = offsets::zero(d);
            if (++next[i] == shape[i]) {
                next[i] = 0;
                n[i] = 1;
            }
            edges.push_back({v, detail::encode_residue(next, shape), std::move(n)});
        }
    }
    model.graph = PeriodicGraph(d, nu, std::move(edges));
    model.refinement.assign(d, 1);
    return model;
}

struct LatticeRequest {
    LatticeKind kind = LatticeKind::Hypercubic;
    std::size_t dim = 1;
    /// Cell shape for hypercubic lattices; empty means all ones.
    std::vector<int> periods;
    /// Hypercubic: one value per cell vertex. Stripe: W(u_1) for u_1 = 0..|W|-1.
    std::vector<double> values;
    std::string path;
    int refine_cap = 8;
};

/// Builds (or loads) a lattice and refines it to an admissible cell.
inline LatticeModel gen_lattice(const LatticeRequest& req, std::ostream* log = nullptr)
{
    LatticeModel model;
    switch (req.kind) {
    case LatticeKind::Hypercubic: {
        if (req.dim < 1)
            throw ConfigError("dimension must be >= 1");
        auto periods = req.periods.empty() ? std::vector<int>(req.dim, 1) : req.periods;
        if (periods.size() != req.dim)
            throw ConfigError("expected " + std::to_string(req.dim) + " periods");
        model = hypercubic_cell(periods);
        model.name = "hypercubic-d" + std::to_string(req.dim);
        if (!req.values.empty()) {
            if (req.values.size() != model.graph.num_vertices())
                throw ConfigError("hypercubic potential needs " + std::to_string(model.graph.num_vertices()) +
                                  " values");
            model.potential = req.values;
        }
        break;
    }
    case LatticeKind::Stripe: {
        if (req.dim < 1)
            throw ConfigError("dimension must be >= 1");
        if (req.values.empty())
            throw ConfigError("stripe lattice needs at least one value W");
        std::vector<int> shape(req.dim, 1);
        shape[0] = static_cast<int>(req.values.size());
        model = hypercubic_cell(shape);
        model.name = "stripe-d" + std::to_string(req.dim);
        Potential q;
        for (const auto& c : model.layout->coords)
            q.push_back(req.values[static_cast<std::size_t>(c[0])]);
        model.potential = std::move(q);
        break;
    }
    case LatticeKind::CustomFile:
        if (req.path.empty())
            throw ConfigError("custom-file lattice needs a path");
        model = read_graph_file(req.path);
        break;
    }
    return ensure_admissible(model, req.refine_cap, log);
}

} // namespace flatpath
