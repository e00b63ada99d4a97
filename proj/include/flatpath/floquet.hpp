#pragma once

// Floquet-Bloch reduction: the periodic operator Delta + mu Q splits into
// nu x nu Hermitian matrices H(theta), theta in the torus [0,1)^d. The
// sorted eigenvalues lambda_j(theta) sweep out bands I_j and the spectrum
// is their union.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flatpath/cohomology.hpp"
#include "flatpath/errors.hpp"
#include "flatpath/lattice.hpp"

namespace flatpath {

using FloquetMatrix = Eigen::MatrixXcd;

inline Theta reduce_theta(Theta theta)
{
    for (auto& t : theta) {
        t -= std::floor(t);
        if (t >= 1.0)
            t = 0.0;
    }
    return theta;
}

namespace detail {

inline std::complex<double> bloch_phase(const CellOffset& n, const Theta& theta)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i)
        s += n[i] * theta[i];
    return std::polar(1.0, 2.0 * std::numbers::pi * s);
}

} // namespace detail

/// Diagonal mu*Q(u); off-diagonal exp(2 pi i <sigma(u,v), theta>) summed
/// over the edges joining u and v.
inline FloquetMatrix assemble_floquet(const PeriodicGraph& g, const Potential& q, double mu, const Theta& theta)
{
    if (theta.size() != g.dim())
        throw ConfigError("theta has " + std::to_string(theta.size()) + " components, expected " +
                          std::to_string(g.dim()));
    if (!q.empty() && q.size() != g.num_vertices())
        throw GraphError("potential size does not match vertex count");
    const auto nu = static_cast<Eigen::Index>(g.num_vertices());
    FloquetMatrix m = FloquetMatrix::Zero(nu, nu);
    if (!q.empty())
        for (Eigen::Index u = 0; u < nu; ++u)
            m(u, u) = mu * q[static_cast<std::size_t>(u)];
    for (const auto& e : g.edges()) {
        const auto phase = detail::bloch_phase(e.offset, theta);
        const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
        if (u == v) {
            m(u, u) += 2.0 * phase.real();
        } else {
            m(u, v) += phase;
            m(v, u) += std::conj(phase);
        }
    }
    return m;
}

/// Delta(theta) restricted to the subgraph induced by `subset` (zero diagonal).
inline FloquetMatrix assemble_restricted_laplacian(const PeriodicGraph& g, const std::vector<VertexId>& subset,
                                                   const Theta& theta)
{
    if (subset.empty())
        throw ConfigError("restricted Laplacian needs a nonempty vertex set");
    return assemble_floquet(induced_subgraph(g, subset).graph, {}, 0.0, theta);
}

inline double hermitian_defect(const FloquetMatrix& m)
{
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Ascending eigenvalues with multiplicity. `tol` bounds the Hermiticity
/// defect relative to max(1, largest entry).
inline std::vector<double> hermitian_eigenvalues(const FloquetMatrix& m, double tol = 1e-12)
{
    if (m.rows() != m.cols())
        throw NonHermitianError("matrix is not square");
    if (m.size() == 0)
        return {};
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double defect = hermitian_defect(m);
    if (!(defect <= tol * scale))
        throw NonHermitianError("matrix is not Hermitian: defect " + std::to_string(defect));
    Eigen::SelfAdjointEigenSolver<FloquetMatrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NonHermitianError("eigensolver did not converge");
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!std::isfinite(out[i]) || (i > 0 && out[i] < out[i - 1]))
            throw NonHermitianError("eigenvalues are not real and ordered");
    return out;
}

/// max_j ||M x_j - lambda_j x_j|| / ||M|| over a full eigendecomposition.
inline double eigen_residual(const FloquetMatrix& m)
{
    Eigen::SelfAdjointEigenSolver<FloquetMatrix> es(m);
    const double norm = std::max(m.norm(), 1e-300);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        const Eigen::VectorXcd x = es.eigenvectors().col(j);
        worst = std::max(worst, (m * x - es.eigenvalues()(j) * x).norm() / norm);
    }
    return worst;
}

/// U* M U with U = diag(exp(-2 pi i phi(u))).
inline FloquetMatrix gauge_conjugate(const FloquetMatrix& m, const GaugePotential& phi)
{
    if (static_cast<Eigen::Index>(phi.size()) != m.rows())
        throw ConfigError("gauge potential size does not match matrix");
    FloquetMatrix out = m;
    for (Eigen::Index u = 0; u < m.rows(); ++u)
        for (Eigen::Index v = 0; v < m.cols(); ++v)
            out(u, v) *= std::polar(1.0, 2.0 * std::numbers::pi *
                                             (phi[static_cast<std::size_t>(u)] - phi[static_cast<std::size_t>(v)]));
    return out;
}

// ---------------------------------------------------------------------------
// Bands on a theta grid.

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
};

inline std::vector<int> default_grid(std::size_t dim)
{
    return std::vector<int>(dim, dim <= 2 ? 64 : 24);
}

struct BandOptions {
    /// Samples per axis; empty selects default_grid(d).
    std::vector<int> grid;
    /// Golden-section polish of each band extremum inside its grid cell.
    bool refine = true;
    int golden_iterations = 30;
    double hermitian_tol = 1e-12;
};

struct BandStructure {
    std::vector<int> grid;
    int golden_iterations = 0;
    std::vector<Theta> thetas;
    /// eigenvalues[k][j] = lambda_j(thetas[k]).
    std::vector<std::vector<double>> eigenvalues;
    std::vector<Interval> bands;
};

/// Grid points k / N per axis, axis 0 fastest.
inline std::vector<Theta> theta_grid(const std::vector<int>& grid)
{
    for (int n : grid)
        if (n < 1)
            throw ConfigError("grid needs at least one sample per axis");
    std::size_t total = 1;
    for (int n : grid)
        total *= static_cast<std::size_t>(n);
    std::vector<Theta> out;
    out.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
        const auto idx = detail::decode_residue(k, grid);
        Theta t(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            t[i] = static_cast<double>(idx[i]) / grid[i];
        out.push_back(std::move(t));
    }
    return out;
}

using MatrixFamily = std::function<FloquetMatrix(const Theta&)>;

namespace detail {

// Per-axis golden-section search for the extremum of one band, starting
// from a grid point and staying within one grid spacing of it.
inline double polish_extremum(const MatrixFamily& family, std::size_t band, Theta point, double value,
                              const std::vector<int>& grid, bool maximize, int iterations, double tol)
{
    const double sign = maximize ? -1.0 : 1.0;
    auto f = [&](const Theta& t) { return sign * hermitian_eigenvalues(family(t), tol)[band]; };
    double best = sign * value;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    for (std::size_t axis = 0; axis < point.size(); ++axis) {
        const double h = 1.0 / grid[axis];
        double a = point[axis] - h, b = point[axis] + h;
        auto at = [&](double x) {
            Theta t = point;
            t[axis] = x;
            return t;
        };
        double c = b - ratio * (b - a), d = a + ratio * (b - a);
        double fc = f(at(c)), fd = f(at(d));
        double best_x = point[axis];
        auto consider = [&](double x, double fx) {
            if (fx < best) {
                best = fx;
                best_x = x;
            }
        };
        consider(c, fc);
        consider(d, fd);
        for (int it = 0; it < iterations; ++it) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = f(at(c));
                consider(c, fc);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = f(at(d));
                consider(d, fd);
            }
        }
        point[axis] = best_x;
    }
    return sign * best;
}

} // namespace detail

/// Bands of an arbitrary Hermitian matrix family over the theta grid.
inline BandStructure compute_bands(const MatrixFamily& family, std::size_t dim, const BandOptions& opts = {})
{
    BandStructure bs;
    bs.grid = opts.grid.empty() ? default_grid(dim) : opts.grid;
    if (bs.grid.size() != dim)
        throw ConfigError("grid has " + std::to_string(bs.grid.size()) + " axes, expected " + std::to_string(dim));
    bs.thetas = theta_grid(bs.grid);
    bs.golden_iterations = opts.refine ? opts.golden_iterations : 0;
    bs.eigenvalues.reserve(bs.thetas.size());
    for (const auto& t : bs.thetas)
        bs.eigenvalues.push_back(hermitian_eigenvalues(family(t), opts.hermitian_tol));

    const std::size_t nbands = bs.eigenvalues.empty() ? 0 : bs.eigenvalues.front().size();
    bs.bands.resize(nbands);
    for (std::size_t j = 0; j < nbands; ++j) {
        std::size_t kmin = 0, kmax = 0;
        for (std::size_t k = 1; k < bs.thetas.size(); ++k) {
            if (bs.eigenvalues[k][j] < bs.eigenvalues[kmin][j])
                kmin = k;
            if (bs.eigenvalues[k][j] > bs.eigenvalues[kmax][j])
                kmax = k;
        }
        Interval band{bs.eigenvalues[kmin][j], bs.eigenvalues[kmax][j]};
        if (opts.refine && band.hi > band.lo) {
            band.lo = std::min(band.lo, detail::polish_extremum(family, j, bs.thetas[kmin], band.lo, bs.grid, false,
                                                                opts.golden_iterations, opts.hermitian_tol));
            band.hi = std::max(band.hi, detail::polish_extremum(family, j, bs.thetas[kmax], band.hi, bs.grid, true,
                                                                opts.golden_iterations, opts.hermitian_tol));
        }
        bs.bands[j] = band;
    }
    return bs;
}

/// Bands of Delta + mu Q.
inline BandStructure compute_bands(const PeriodicGraph& g, const Potential& q, double mu, const BandOptions& opts = {})
{
    for (int n : opts.grid)
        if (n < 2)
            throw ConfigError("grid needs at least 2 samples per axis");
    return compute_bands([&](const Theta& t) { return assemble_floquet(g, q, mu, t); }, g.dim(), opts);
}

// ---------------------------------------------------------------------------
// Spectrum as a union of bands.

struct SpectrumEstimate {
    std::vector<Interval> components;
    double measure = 0.0;
    std::vector<int> grid;
    int golden_iterations = 0;
    double merge_epsilon = 0.0;
};

/// 1e-9 * max(1, spectral radius).
inline double merge_epsilon(const std::vector<Interval>& bands)
{
    double radius = 0.0;
    for (const auto& b : bands)
        radius = std::max({radius, std::abs(b.lo), std::abs(b.hi)});
    return 1e-9 * std::max(1.0, radius);
}

/// Sorted, pairwise disjoint union; gaps of at most eps are closed.
inline std::vector<Interval> merge_intervals(std::vector<Interval> bands, double eps)
{
    std::sort(bands.begin(), bands.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const auto& b : bands) {
        if (!out.empty() && b.lo <= out.back().hi + eps)
            out.back().hi = std::max(out.back().hi, b.hi);
        else
            out.push_back(b);
    }
    return out;
}

inline double total_length(const std::vector<Interval>& components)
{
    double s = 0.0;
    for (const auto& c : components)
        s += c.length();
    return s;
}

inline SpectrumEstimate spectrum_measure(const std::vector<Interval>& bands)
{
    SpectrumEstimate est;
    est.merge_epsilon = merge_epsilon(bands);
    est.components = merge_intervals(bands, est.merge_epsilon);
    est.measure = total_length(est.components);
    return est;
}

inline SpectrumEstimate spectrum_measure(const BandStructure& bs)
{
    auto est = spectrum_measure(bs.bands);
    est.grid = bs.grid;
    est.golden_iterations = bs.golden_iterations;
    return est;
}

// ---------------------------------------------------------------------------
// Plot-ready export.

/// One row per grid sample: theta components then lambda_1..lambda_nu.
inline void write_bands_csv(std::ostream& os, const BandStructure& bs)
{
    const auto old = os.precision(12);
    for (std::size_t i = 0; i < bs.grid.size(); ++i)
        os << (i ? "," : "") << "theta" << i + 1;
    const std::size_t nbands = bs.bands.size();
    for (std::size_t j = 0; j < nbands; ++j)
        os << ",lambda" << j + 1;
    os << '\n';
    for (std::size_t k = 0; k < bs.thetas.size(); ++k) {
        for (std::size_t i = 0; i < bs.thetas[k].size(); ++i)
            os << (i ? "," : "") << bs.thetas[k][i];
        for (double x : bs.eigenvalues[k])
            os << ',' << x;
        os << '\n';
    }
    os.precision(old);
}

inline void write_spectrum(std::ostream& os, const SpectrumEstimate& est)
{
    const auto old = os.precision(12);
    os << "# lo,hi\n";
    for (const auto& c : est.components)
        os << c.lo << ',' << c.hi << '\n';
    os << "# total_measure " << est.measure << '\n';
    os.precision(old);
}

} // namespace flatpath
