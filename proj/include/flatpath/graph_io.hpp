#pragma once

// Graph file format (JSON):
//
//   {
//     "name": "z2-stripe",                       (optional)
//     "d": 2,
//     "num_vertices": 4,
//     "edges": [[u, v, [n1, ..., nd]], ...],      either orientation accepted
//     "potential": [q0, ..., q_{nu-1}],          (optional)
//     "hypercubic": {"shape": [...], "coords": [[...], ...]}   (optional)
//   }
//
// Edges are written once per unordered pair in canonical orientation.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "flatpath/errors.hpp"
#include "flatpath/lattice.hpp"

namespace flatpath {

namespace detail {

inline std::size_t line_of(const std::string& text, std::size_t byte)
{
    const auto end = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& source)
{
    auto it = obj.find(key);
    if (it == obj.end())
        throw ParseError(source + ": missing field '" + key + "'");
    return *it;
}

inline std::vector<int> int_array(const nlohmann::json& arr, const std::string& where)
{
    if (!arr.is_array())
        throw ParseError(where + ": expected an array of integers");
    std::vector<int> out;
    for (const auto& x : arr) {
        if (!x.is_number_integer())
            throw ParseError(where + ": expected an array of integers");
        out.push_back(x.get<int>());
    }
    return out;
}

} // namespace detail

inline LatticeModel parse_graph_json(const std::string& text, const std::string& source = "<input>")
{
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ":" + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
    }
    if (!doc.is_object())
        throw ParseError(source + ": top level must be an object");

    const auto& jd = detail::require(doc, "d", source);
    const auto& jn = detail::require(doc, "num_vertices", source);
    if (!jd.is_number_integer() || jd.get<long long>() < 1)
        throw ParseError(source + ": field 'd' must be a positive integer");
    if (!jn.is_number_integer() || jn.get<long long>() < 1)
        throw ParseError(source + ": field 'num_vertices' must be a positive integer");
    const auto d = jd.get<std::size_t>();
    const auto nu = jn.get<std::size_t>();

    const auto& jedges = detail::require(doc, "edges", source);
    if (!jedges.is_array())
        throw ParseError(source + ": field 'edges' must be an array");
    std::vector<QuotientEdge> edges;
    for (std::size_t i = 0; i < jedges.size(); ++i) {
        const auto where = source + ": edges[" + std::to_string(i) + "]";
        const auto& je = jedges[i];
        if (!je.is_array() || je.size() != 3 || !je[0].is_number_integer() || !je[1].is_number_integer())
            throw ParseError(where + ": expected [u, v, [n1..nd]]");
        const auto u = je[0].get<long long>(), v = je[1].get<long long>();
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= nu || static_cast<std::size_t>(v) >= nu)
            throw ParseError(where + ": vertex id out of range [0," + std::to_string(nu) + ")");
        auto n = detail::int_array(je[2], where + " offset");
        if (n.size() != d)
            throw ParseError(where + ": offset has " + std::to_string(n.size()) + " components, expected d = " +
                             std::to_string(d));
        if (u == v && offsets::is_zero(n))
            throw ParseError(where + ": vertex joined to itself with zero offset");
        edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v), std::move(n)});
    }

    LatticeModel model;
    model.graph = PeriodicGraph(d, nu, std::move(edges));
    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string())
            throw ParseError(source + ": field 'name' must be a string");
        model.name = it->get<std::string>();
    }
    if (auto it = doc.find("potential"); it != doc.end() && !it->is_null()) {
        if (!it->is_array() || it->size() != nu)
            throw ParseError(source + ": field 'potential' must be an array of " + std::to_string(nu) + " numbers");
        Potential q;
        for (std::size_t i = 0; i < nu; ++i) {
            const auto& x = (*it)[i];
            if (!x.is_number() || !std::isfinite(x.get<double>()))
                throw ParseError(source + ": potential[" + std::to_string(i) + "] is not a finite number");
            q.push_back(x.get<double>());
        }
        model.potential = std::move(q);
    }
    if (auto it = doc.find("hypercubic"); it != doc.end() && !it->is_null()) {
        HypercubicLayout lay;
        lay.shape = detail::int_array(detail::require(*it, "shape", source + ": hypercubic"), source + ": hypercubic.shape");
        const auto& jc = detail::require(*it, "coords", source + ": hypercubic");
        if (lay.shape.size() != d || !jc.is_array() || jc.size() != nu)
            throw ParseError(source + ": hypercubic layout does not match d / num_vertices");
        for (std::size_t i = 0; i < nu; ++i) {
            auto c = detail::int_array(jc[i], source + ": hypercubic.coords[" + std::to_string(i) + "]");
            if (c.size() != d)
                throw ParseError(source + ": hypercubic.coords[" + std::to_string(i) + "] has wrong length");
            lay.coords.push_back(std::move(c));
        }
        model.layout = std::move(lay);
    }
    model.refinement.assign(d, 1);
    return model;
}

inline LatticeModel read_graph_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(path + ": cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_graph_json(buf.str(), path);
}

inline std::string to_graph_json(const LatticeModel& model)
{
    using nlohmann::json;
    json doc = json::object();
    if (!model.name.empty())
        doc["name"] = model.name;
    doc["d"] = model.graph.dim();
    doc["num_vertices"] = model.graph.num_vertices();
    json edges = json::array();
    for (const auto& e : model.graph.edges())
        edges.push_back(json::array({e.u, e.v, e.offset}));
    doc["edges"] = std::move(edges);
    if (model.potential)
        doc["potential"] = *model.potential;
    if (model.layout)
        doc["hypercubic"] = {{"shape", model.layout->shape}, {"coords", model.layout->coords}};
    return doc.dump(1) + "\n";
}

inline void write_graph_file(const std::string& path, const LatticeModel& model)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError(path + ": cannot open for writing");
    out << to_graph_json(model);
}

} // namespace flatpath
