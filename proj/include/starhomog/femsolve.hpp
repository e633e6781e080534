#pragma once

// P1 finite elements on every edge of a star stage, coupled through the single
// center unknown. The global matrix is an arrowhead: one SPD tridiagonal block
// per edge plus a shared last row/column for p(0). It is eliminated exactly in
// O(n m): Thomas sweeps per block, a scalar Schur complement for the center,
// then back-substitution.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "starhomog/detail/parallel.hpp"
#include "starhomog/errors.hpp"
#include "starhomog/forcing.hpp"
#include "starhomog/grid.hpp"
#include "starhomog/quadrature.hpp"
#include "starhomog/stargraph.hpp"

namespace starhomog {

struct SolverOptions {
    /// Gauss points per element for the load integrals.
    std::size_t quadrature_order = 3;
    std::size_t threads = 1;
};

/// Unknowns: interior nodes t_1..t_{m-1} of every edge (edge-major), then p(0).
/// The rim node t_m carries the Dirichlet zero and is not an unknown.
struct ArrowheadSystem {
    StarStage stage;
    std::size_t m = 0;
    std::vector<double> diag;      ///< n*(m-1) block diagonals
    std::vector<double> off;       ///< n*(m-1); off[k] couples k and k+1 (last of each block unused)
    std::vector<double> coupling;  ///< n; first interior node <-> center
    std::vector<double> rhs;       ///< n*(m-1) interior loads
    std::vector<double> center_loads;  ///< n; load of the center node from each edge
    double center_diag = 0.0;
    double center_rhs = 0.0;       ///< h + sum of center_loads, summed in edge order
    double h = 0.0;

    std::size_t n() const noexcept { return stage.n(); }
    std::size_t block_size() const noexcept { return m - 1; }
    std::size_t unknowns() const noexcept { return n() * block_size() + 1; }
};

inline ArrowheadSystem assemble(const StarStage& stage, const ForcingField& field, double h,
                                std::size_t m, const SolverOptions& options = {}) {
    if (m < 2) throw std::invalid_argument("assemble: at least 2 elements per edge are required");
    ArrowheadSystem sys{stage, m, {}, {}, {}, {}, {}, 0.0, 0.0, h};
    const std::size_t n = stage.n();
    const std::size_t s = m - 1;
    const double md = static_cast<double>(m);
    sys.diag.resize(n * s);
    sys.off.resize(n * s);
    sys.rhs.resize(n * s);
    sys.coupling.resize(n);
    sys.center_loads.resize(n);
    const auto rule = gauss_legendre(options.quadrature_order);

    detail::parallel_for(n, options.threads, [&](std::size_t e) {
        const double km = stage.coeffs()[e] * md;
        std::vector<double> loads(m + 1);
        nodal_loads(field, e + 1, m, rule, loads);
        const std::size_t base = e * s;
        for (std::size_t k = 0; k < s; ++k) {
            sys.diag[base + k] = 2.0 * km;
            sys.off[base + k] = k + 1 < s ? -km : 0.0;
            sys.rhs[base + k] = loads[k + 1];
        }
        sys.coupling[e] = -km;
        sys.center_loads[e] = loads[0];
    });

    sys.center_rhs = h;
    for (std::size_t e = 0; e < n; ++e) {
        sys.center_diag += stage.coeffs()[e] * md;
        sys.center_rhs += sys.center_loads[e];
    }
    return sys;
}

struct StageSolution {
    StarStage stage;
    std::size_t m = 0;
    double center_value = 0.0;
    std::vector<GridFunction> edges;  ///< edges[e] over t_0 (center) .. t_m (rim)
    double min_pivot = 0.0;           ///< smallest Thomas pivot over all blocks
    double schur = 0.0;               ///< center Schur complement

    std::size_t n() const noexcept { return stage.n(); }
};

inline StageSolution solve(const ArrowheadSystem& sys, std::size_t threads = 1) {
    const std::size_t n = sys.n();
    const std::size_t s = sys.block_size();
    std::vector<double> pivot(n * s), reduced(n * s);
    std::vector<double> schur_diag(n), schur_rhs(n), block_min(n);

    // Sweep each block from the rim toward the center so the pivot of the first
    // interior node is the one that meets the coupling column.
    detail::parallel_for(n, threads, [&](std::size_t e) {
        const std::size_t b = e * s;
        pivot[b + s - 1] = sys.diag[b + s - 1];
        reduced[b + s - 1] = sys.rhs[b + s - 1];
        for (std::size_t k = s - 1; k-- > 0;) {
            const double ratio = sys.off[b + k] / pivot[b + k + 1];
            pivot[b + k] = sys.diag[b + k] - ratio * sys.off[b + k];
            reduced[b + k] = sys.rhs[b + k] - ratio * reduced[b + k + 1];
        }
        block_min[e] = *std::min_element(pivot.begin() + static_cast<std::ptrdiff_t>(b),
                                         pivot.begin() + static_cast<std::ptrdiff_t>(b + s));
        if (!(block_min[e] > 0.0)) return;
        const double gamma = sys.coupling[e];
        schur_diag[e] = gamma * gamma / pivot[b];
        schur_rhs[e] = gamma * reduced[b] / pivot[b];
    });

    StageSolution sol{sys.stage, sys.m, 0.0, {}, 0.0, 0.0};
    sol.min_pivot = *std::min_element(block_min.begin(), block_min.end());
    if (!(sol.min_pivot > 0.0))
        throw NumericalBreakdown("non-positive pivot in edge block at stage n=" + std::to_string(n));

    // Fixed edge order keeps the reduction bit-identical for any thread count.
    double schur = sys.center_diag, rhs = sys.center_rhs;
    for (std::size_t e = 0; e < n; ++e) {
        schur -= schur_diag[e];
        rhs -= schur_rhs[e];
    }
    if (!(schur > 0.0))
        throw NumericalBreakdown("non-positive center Schur complement at stage n=" + std::to_string(n));
    sol.schur = schur;
    sol.center_value = rhs / schur;

    sol.edges.assign(n, GridFunction(sys.m));
    detail::parallel_for(n, threads, [&](std::size_t e) {
        const std::size_t b = e * s;
        auto values = sol.edges[e].values();
        values[0] = sol.center_value;
        values[sys.m] = 0.0;
        double x = (reduced[b] - sys.coupling[e] * sol.center_value) / pivot[b];
        values[1] = x;
        for (std::size_t k = 0; k + 1 < s; ++k) {
            x = (reduced[b + k + 1] - sys.off[b + k] * x) / pivot[b + k + 1];
            values[k + 2] = x;
        }
    });
    return sol;
}

inline StageSolution solve_stage(const StarStage& stage, const ForcingField& field, double h,
                                 std::size_t m, const SolverOptions& options = {}) {
    return solve(assemble(stage, field, h, m, options), options.threads);
}

/// ||A x - b||_inf / ||b||_inf for the assembled system (||A x||_inf when b = 0).
/// Rows are accumulated in long double so the measurement does not add its own
/// cancellation error.
inline double relative_residual(const ArrowheadSystem& sys, const StageSolution& sol) {
    using wide = long double;
    const std::size_t s = sys.block_size();
    wide worst = 0.0L, scale = std::abs(static_cast<wide>(sys.center_rhs));
    wide center_row = static_cast<wide>(sys.center_diag) * sol.center_value;
    for (std::size_t e = 0; e < sys.n(); ++e) {
        const std::size_t b = e * s;
        const auto x = sol.edges[e].values().subspan(1, s);
        center_row += static_cast<wide>(sys.coupling[e]) * x[0];
        for (std::size_t k = 0; k < s; ++k) {
            wide row = static_cast<wide>(sys.diag[b + k]) * x[k];
            if (k > 0) row += static_cast<wide>(sys.off[b + k - 1]) * x[k - 1];
            if (k + 1 < s) row += static_cast<wide>(sys.off[b + k]) * x[k + 1];
            if (k == 0) row += static_cast<wide>(sys.coupling[e]) * sol.center_value;
            worst = std::max(worst, std::abs(row - sys.rhs[b + k]));
            scale = std::max(scale, std::abs(static_cast<wide>(sys.rhs[b + k])));
        }
    }
    worst = std::max(worst, std::abs(center_row - sys.center_rhs));
    return static_cast<double>(scale > 0.0L ? worst / scale : worst);
}

/// ||A x - b||_inf / (||A||_inf ||x||_inf + ||b||_inf). Unlike relative_residual
/// this stays at roundoff level for fine meshes, where ||A|| ||x|| >> ||b||.
inline double normwise_backward_error(const ArrowheadSystem& sys, const StageSolution& sol) {
    const std::size_t s = sys.block_size();
    double center_row = sys.center_diag, a_norm = 0.0;
    double x_norm = std::abs(sol.center_value), b_norm = std::abs(sys.center_rhs);
    for (std::size_t e = 0; e < sys.n(); ++e) {
        center_row += std::abs(sys.coupling[e]);
        for (std::size_t k = 0; k < s; ++k) {
            const std::size_t i = e * s + k;
            double row = std::abs(sys.diag[i]);
            if (k > 0) row += std::abs(sys.off[i - 1]);
            if (k + 1 < s) row += std::abs(sys.off[i]);
            if (k == 0) row += std::abs(sys.coupling[e]);
            a_norm = std::max(a_norm, row);
            x_norm = std::max(x_norm, std::abs(sol.edges[e][k + 1]));
            b_norm = std::max(b_norm, std::abs(sys.rhs[i]));
        }
    }
    const double scale = std::max(a_norm, center_row) * x_norm + b_norm;
    const double r = relative_residual(sys, sol) * (b_norm > 0.0 ? b_norm : 1.0);
    return scale > 0.0 ? r / scale : r;
}

/// Discrete first-element flux K(e) (p_1 - p_0) m, outward from the center.
inline double edge_flux_at_center(const StageSolution& sol, std::size_t e) {
    const auto& p = sol.edges.at(e);
    return sol.stage.coeffs()[e] * (p[1] - p[0]) * static_cast<double>(sol.m);
}

/// Residual of p(0) sum_e K(e) = h + sum_e int (1-t) F_e dt, scaled by
/// 1 + |h| + sum |moment|. Moments use the assembly quadrature, so the
/// identity holds for the discrete solution up to roundoff.
inline double center_identity_residual(const StageSolution& sol, const ForcingField& field,
                                       double h, std::size_t quadrature_order = 3) {
    const auto rule = gauss_legendre(quadrature_order);
    const std::size_t m = sol.m;
    std::vector<double> loads(m + 1);
    double ksum = 0.0, moments = 0.0, moment_abs = 0.0;
    for (std::size_t e = 0; e < sol.n(); ++e) {
        nodal_loads(field, e + 1, m, rule, loads);
        double moment = 0.0;
        // (1 - t) is the P1 hat-sum with nodal weights 1 - t_j.
        for (std::size_t j = 0; j < m; ++j)
            moment += (1.0 - static_cast<double>(j) / static_cast<double>(m)) * loads[j];
        moments += moment;
        moment_abs += std::abs(moment);
        ksum += sol.stage.coeffs()[e];
    }
    return std::abs(sol.center_value * ksum - h - moments) / (1.0 + std::abs(h) + moment_abs);
}

/// |K p(0) + K p'(0) - int (1-t) F_e dt| with the one-sided discrete slope; O(1/m).
inline double edge_identity_residual(const StageSolution& sol, const ForcingField& field,
                                     std::size_t e) {
    const double k = sol.stage.coeffs()[e];
    return std::abs(k * sol.center_value + edge_flux_at_center(sol, e) -
                    edge_load_moment(field, e + 1));
}

/// CSV export: edge_index (1-based l), node_index, t, value.
inline void write_solution_csv(std::ostream& out, const StageSolution& sol) {
    out << "edge_index,node_index,t,value\n";
    char buf[96];
    for (std::size_t e = 0; e < sol.n(); ++e) {
        const auto& g = sol.edges[e];
        for (std::size_t j = 0; j <= g.m(); ++j) {
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.5e,%.5e\n", e + 1, j, g.t(j), g[j]);
            out << buf;
        }
    }
}

} // namespace starhomog
