#pragma once

// Command-line front end. Exit codes: 0 success, 1 validation failure,
// 2 parse/config error, 3 numerical-contract violation.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flatpath/cohomology.hpp"
#include "flatpath/errors.hpp"
#include "flatpath/floquet.hpp"
#include "flatpath/generators.hpp"
#include "flatpath/graph_io.hpp"
#include "flatpath/lattice.hpp"
#include "flatpath/sweep.hpp"

namespace flatpath::cli {

enum ExitCode : int { ok = 0, validation_failure = 1, config_error = 2, numerical_error = 3 };

struct RunConfig {
    std::string command;
    std::string input;
    std::string grid;
    std::string mu;
    double tol_level = 0.0;
    double tol_eig = 1e-12;
    std::string refine = "auto";
    int refine_cap = 8;
    std::string out;
    std::uint64_t seed = 0;
    std::string format = "report";
    bool fix = false;
    // generate
    std::string kind;
    std::size_t dim = 1;
    std::vector<int> periods;
    std::vector<double> values;
};

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        parts.push_back(item);
    return parts;
}

inline double parse_double(const std::string& s, const std::string& what)
{
    try {
        std::size_t pos = 0;
        const double x = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(what + ": '" + s + "' is not a number");
    }
}

inline int parse_int(const std::string& s, const std::string& what)
{
    try {
        std::size_t pos = 0;
        const int x = std::stoi(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(what + ": '" + s + "' is not an integer");
    }
}

/// "N" (all axes) or "N1,N2,..." (one per axis); empty selects the default.
inline std::vector<int> parse_grid(const std::string& spec, std::size_t dim)
{
    if (spec.empty())
        return default_grid(dim);
    std::vector<int> grid;
    for (const auto& p : split(spec, ','))
        grid.push_back(parse_int(p, "--grid"));
    if (grid.size() == 1)
        grid.assign(dim, grid.front());
    if (grid.size() != dim)
        throw ConfigError("--grid needs 1 or " + std::to_string(dim) + " values");
    for (int n : grid)
        if (n < 2)
            throw ConfigError("--grid needs at least 2 samples per axis");
    return grid;
}

/// "m1,m2,..." or "geometric:lo:hi:steps".
inline std::vector<double> parse_mu(const std::string& spec)
{
    if (spec.rfind("geometric:", 0) == 0) {
        const auto parts = split(spec.substr(10), ':');
        if (parts.size() != 3)
            throw ConfigError("--mu geometric:lo:hi:steps expects three fields");
        return geometric_schedule(parse_double(parts[0], "--mu"), parse_double(parts[1], "--mu"),
                                  parse_int(parts[2], "--mu"));
    }
    std::vector<double> mus;
    for (const auto& p : split(spec, ','))
        if (!p.empty())
            mus.push_back(parse_double(p, "--mu"));
    if (mus.empty())
        throw ConfigError("--mu list is empty");
    return mus;
}

namespace detail {

class Formatter {
public:
    explicit Formatter(std::ostream& os, int digits) : os_(os), flags_(os.flags()), precision_(os.precision())
    {
        os_ << std::setprecision(digits) << std::showpoint;
    }
    ~Formatter()
    {
        os_.flags(flags_);
        os_.precision(precision_);
    }
    Formatter(const Formatter&) = delete;
    Formatter& operator=(const Formatter&) = delete;

private:
    std::ostream& os_;
    std::ios::fmtflags flags_;
    std::streamsize precision_;
};

inline LatticeModel load_model(const RunConfig& cfg, std::ostream& err)
{
    auto model = read_graph_file(cfg.input);
    if (cfg.refine == "auto")
        return ensure_admissible(model, cfg.refine_cap, &err);
    if (cfg.refine != "off") {
        std::vector<int> factors;
        for (const auto& p : split(cfg.refine, ','))
            factors.push_back(parse_int(p, "--refine"));
        model = refine_model(model, factors);
    }
    return model;
}

inline std::string settings_line(const RunConfig& cfg, const std::vector<int>& grid, int golden)
{
    std::ostringstream os;
    os << "grid " << offsets::to_string(grid) << " | golden-section iterations " << golden << " | tol-level "
       << cfg.tol_level << " | tol-eig " << cfg.tol_eig << " | seed " << cfg.seed;
    return os.str();
}

struct Output {
    std::ofstream file;
    std::ostream* stream;

    Output(const std::string& path, std::ostream& fallback) : stream(&fallback)
    {
        if (!path.empty()) {
            file.open(path);
            if (!file)
                throw ConfigError(path + ": cannot open for writing");
            stream = &file;
        }
    }
};

} // namespace detail

inline int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream&)
{
    auto model = read_graph_file(cfg.input);
    const auto report = validate_graph(model.graph);
    if (report.ok()) {
        out << cfg.input << ": admissible (" << model.graph.num_vertices() << " vertices, "
            << model.graph.edges().size() << " edges)\n";
        return ok;
    }
    for (const auto& v : report.violations)
        out << "violation: " << describe(v) << '\n';
    const auto factors = minimal_assumption_refinement(model.graph, cfg.refine_cap);
    out << "minimal refinement factors: " << offsets::to_string(factors) << '\n';
    if (!cfg.fix)
        return validation_failure;
    const auto refined = refine_model(model, factors);
    if (cfg.out.empty()) {
        out << to_graph_json(refined);
    } else {
        write_graph_file(cfg.out, refined);
        out << "wrote refined graph to " << cfg.out << '\n';
    }
    return ok;
}

inline int cmd_flat_paths(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const auto model = detail::load_model(cfg, err);
    if (!model.potential)
        throw ConfigError(cfg.input + ": missing potential");
    if (!validate_graph(model.graph).ok()) {
        out << "graph is not admissible; rerun with --refine auto\n";
        return validation_failure;
    }
    const auto report = flat_path_report(model.graph, *model.potential, cfg.tol_level);
    detail::Output dest(cfg.out, out);
    auto& os = *dest.stream;
    if (cfg.format == "csv") {
        const auto old = os.precision(12);
        os << "level,value,size,beta0,beta1,infinite_flat_path,witness_offset\n";
        for (std::size_t i = 0; i < report.levels.size(); ++i) {
            const auto& lv = report.levels[i];
            os << i << ',' << lv.level.value << ',' << lv.level.vertices.size() << ',' << lv.beta0 << ','
               << lv.beta1 << ',' << (lv.trivial ? 0 : 1) << ','
               << (lv.witness ? '"' + offsets::to_string(lv.witness->total_offset) + '"' : std::string{}) << '\n';
        }
        os.precision(old);
    } else {
        os << format_report(model.graph, report);
    }
    return ok;
}

inline double single_mu(const RunConfig& cfg)
{
    if (cfg.mu.empty())
        return 1.0;
    const auto mus = parse_mu(cfg.mu);
    if (mus.size() != 1)
        throw ConfigError("this command takes a single --mu value");
    return mus.front();
}

inline int cmd_bands(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const auto model = detail::load_model(cfg, err);
    BandOptions opts;
    opts.grid = parse_grid(cfg.grid, model.graph.dim());
    opts.hermitian_tol = cfg.tol_eig;
    const double mu = single_mu(cfg);
    const auto bs = compute_bands(model.graph, model.potential.value_or(Potential{}), mu, opts);
    {
        detail::Output dest(cfg.out, out);
        write_bands_csv(*dest.stream, bs);
    }
    if (!cfg.out.empty()) {
        detail::Formatter fmt(out, 4);
        out << "bands: " << bs.bands.size() << " | mu " << mu << " | "
            << detail::settings_line(cfg, bs.grid, bs.golden_iterations) << '\n';
        for (std::size_t j = 0; j < bs.bands.size(); ++j)
            out << "  I_" << j + 1 << " = [" << bs.bands[j].lo << ", " << bs.bands[j].hi << "]\n";
    }
    return ok;
}

inline int cmd_measure(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const auto model = detail::load_model(cfg, err);
    BandOptions opts;
    opts.grid = parse_grid(cfg.grid, model.graph.dim());
    opts.hermitian_tol = cfg.tol_eig;
    const double mu = single_mu(cfg);
    const auto est = spectrum_measure(compute_bands(model.graph, model.potential.value_or(Potential{}), mu, opts));
    detail::Output dest(cfg.out, out);
    auto& os = *dest.stream;
    if (cfg.format == "csv") {
        write_spectrum(os, est);
        return ok;
    }
    const auto old = os.precision(12);
    for (const auto& c : est.components)
        os << "component [" << c.lo << ", " << c.hi << "]\n";
    os.precision(old);
    detail::Formatter fmt(os, 4);
    os << detail::settings_line(cfg, est.grid, est.golden_iterations) << " | mu " << mu << '\n';
    os << "measure ≈ " << est.measure << '\n';
    return ok;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const auto mus = parse_mu(cfg.mu.empty() ? "geometric:10:1000:5" : cfg.mu);
    const auto model = detail::load_model(cfg, err);
    if (!model.potential)
        throw ConfigError(cfg.input + ": missing potential");
    SweepOptions opts;
    opts.bands.grid = parse_grid(cfg.grid, model.graph.dim());
    opts.bands.hermitian_tol = cfg.tol_eig;
    opts.level_tol = cfg.tol_level;
    const auto sr = coupling_sweep(model.graph, *model.potential, mus, opts);
    std::optional<DecayFit> fit;
    try {
        fit = fit_decay(sr);
    } catch (const InsufficientDataError&) {
    }
    for (const auto& w : sr.warnings)
        err << "warning: " << w << '\n';
    {
        detail::Output dest(cfg.out, out);
        write_sweep_csv(*dest.stream, sr, fit);
    }

    const auto report = flat_path_report(model.graph, *model.potential, cfg.tol_level);
    detail::Formatter fmt(out, 4);
    out << "# " << detail::settings_line(cfg, sr.grid, opts.bands.refine ? opts.bands.golden_iterations : 0) << '\n';
    out << "# criterion: " << (report.decay_predicted ? verdict_decay : verdict_bounded) << '\n';
    if (fit)
        out << "# decay slope " << fit->slope << '\n';
    const double last = sr.measures.back();
    std::ostringstream last_mu;
    last_mu << sr.mus.back();
    std::optional<SeparableBound> sb;
    if (model.layout) {
        try {
            sb = separable_lower_bound(model);
        } catch (const NotHypercubicError&) {
        }
    }
    if (sb && sb->bound > 0.0) {
        out << "# lower bound 4mr = " << sb->bound << " (m = " << sb->free_axes << ", r = " << sb->distinct_values
            << "); observed measure at mu = " << last_mu.str() << " is " << last << '\n';
    } else {
        out << "# observed measure at mu = " << last_mu.str() << " is " << last << '\n';
    }
    return ok;
}

inline int cmd_generate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    LatticeRequest req;
    req.kind = parse_lattice_kind(cfg.kind);
    req.dim = cfg.dim;
    req.periods = cfg.periods;
    req.values = cfg.values;
    req.path = cfg.input;
    req.refine_cap = cfg.refine_cap;
    const auto model = gen_lattice(req, &err);
    if (cfg.out.empty())
        out << to_graph_json(model);
    else
        write_graph_file(cfg.out, model);
    return ok;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Spectra of periodic discrete Schrodinger operators and the flat-path criterion", "flatpath"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--grid", cfg.grid, "theta samples: N or N1,N2,...");
        sub->add_option("--mu", cfg.mu, "coupling: list m1,m2,... or geometric:lo:hi:steps");
        sub->add_option("--tol-level", cfg.tol_level, "level-set grouping tolerance")->check(CLI::NonNegativeNumber);
        sub->add_option("--tol-eig", cfg.tol_eig, "Hermiticity tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--refine", cfg.refine, "auto | off | f1,f2,...");
        sub->add_option("--refine-cap", cfg.refine_cap, "largest refinement factor searched per axis");
        sub->add_option("--out", cfg.out, "output path");
        sub->add_option("--seed", cfg.seed, "seed recorded in summaries");
        sub->add_option("--format", cfg.format, "report | csv")->check(CLI::IsMember({"report", "csv"}));
    };

    auto* validate = app.add_subcommand("validate", "check a graph file for self-loops and multi-edges");
    validate->add_option("file", cfg.input)->required();
    validate->add_flag("--fix", cfg.fix, "write the minimally refined graph");
    validate->add_option("--out", cfg.out, "output path for --fix");
    validate->add_option("--refine-cap", cfg.refine_cap, "largest refinement factor searched per axis");

    auto* flat = app.add_subcommand("flat-paths", "per-level-set flat-path verdicts");
    flat->add_option("file", cfg.input)->required();
    add_common(flat);

    auto* bands = app.add_subcommand("bands", "band structure over the theta grid");
    bands->add_option("file", cfg.input)->required();
    add_common(bands);

    auto* measure = app.add_subcommand("measure", "Lebesgue measure of the spectrum");
    measure->add_option("file", cfg.input)->required();
    add_common(measure);

    auto* sweep = app.add_subcommand("sweep", "spectrum measure along a coupling schedule");
    sweep->add_option("file", cfg.input)->required();
    add_common(sweep);

    auto* generate = app.add_subcommand("generate", "write a generated lattice as a graph file");
    generate->add_option("kind", cfg.kind, "hypercubic | stripe | custom-file")->required();
    generate->add_option("--d", cfg.dim, "dimension");
    generate->add_option("--periods", cfg.periods, "cell shape (hypercubic)")->delimiter(',');
    generate->add_option("--values", cfg.values, "potential values")->delimiter(',');
    generate->add_option("--file", cfg.input, "input path (custom-file)");
    generate->add_option("--out", cfg.out, "output path");
    generate->add_option("--refine-cap", cfg.refine_cap, "largest refinement factor searched per axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : config_error;
    }

    const auto* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    try {
        if (sub == validate)
            return cmd_validate(cfg, out, err);
        if (sub == flat)
            return cmd_flat_paths(cfg, out, err);
        if (sub == bands)
            return cmd_bands(cfg, out, err);
        if (sub == measure)
            return cmd_measure(cfg, out, err);
        if (sub == sweep)
            return cmd_sweep(cfg, out, err);
        return cmd_generate(cfg, out, err);
    } catch (const NonHermitianError& e) {
        err << "flatpath " << cfg.command << ": " << e.what() << '\n';
        return numerical_error;
    } catch (const BoundExceededError& e) {
        err << "flatpath " << cfg.command << ": " << e.what() << '\n';
        return validation_failure;
    } catch (const std::exception& e) {
        err << "flatpath " << cfg.command << ": " << e.what() << '\n';
        return config_error;
    }
}

} // namespace flatpath::cli
