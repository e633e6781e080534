#pragma once

// The homogenized problem on the I-edge star: edge i carries the weighted
// coefficient s_i K_i and load s_i Fbar_i, the center carries hbar. Its
// solution pbar is the limit of the group Cesaro averages of stage solutions.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "starhomog/femsolve.hpp"
#include "starhomog/forcing.hpp"
#include "starhomog/grid.hpp"
#include "starhomog/stargraph.hpp"

namespace starhomog {

using RadialFunction = std::function<double(double)>;

struct UpscaledProblem {
    std::vector<double> s;             ///< limit group fractions, each > 0, summing to 1
    std::vector<double> K;             ///< group coefficients
    std::vector<RadialFunction> fbar;  ///< Cesaro limits of the group loads
    double hbar = 0.0;                 ///< lim h^n / n

    std::size_t groups() const noexcept { return s.size(); }

    void validate() const {
        if (s.empty()) throw std::invalid_argument("upscaled problem needs at least one group");
        if (K.size() != s.size() || fbar.size() != s.size())
            throw std::invalid_argument("upscaled problem: s, K and fbar must have one entry per group");
        double total = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!(s[i] > 0.0)) throw std::invalid_argument("upscaled problem: every s_i must be > 0");
            if (!(K[i] > 0.0)) throw std::invalid_argument("upscaled problem: every K_i must be > 0");
            if (!fbar[i]) throw std::invalid_argument("upscaled problem: missing group load");
            total += s[i];
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("upscaled problem: fractions must sum to 1");
    }
};

/// Limit problem for a coefficient law and a field with known group limits.
inline UpscaledProblem make_upscaled_problem(const CoefficientRule& rule, const ForcingField& field,
                                             double hbar = 0.0) {
    if (!field.has_group_limit())
        throw std::invalid_argument("field '" + field.family() + "' has no known Cesaro group limit");
    UpscaledProblem p{rule.limit_fractions(), rule.group_values(), {}, hbar};
    for (std::size_t i = 0; i < p.groups(); ++i)
        p.fbar.push_back([lim = field.group_limit(), i](double t) { return lim(i, t); });
    return p;
}

struct HomogenizedSolution {
    double center_value = 0.0;
    std::vector<GridFunction> groups;  ///< pbar_i on t_0 (center) .. t_m (rim)
    std::vector<double> group_flux;    ///< K_i (pbar_i(t_1) - pbar_i(0)) m
};

/// Solves the I-edge star problem with the stage solver.
inline HomogenizedSolution solve_upscaled(const UpscaledProblem& problem, std::size_t m,
                                          const SolverOptions& options = {}) {
    problem.validate();
    const std::size_t I = problem.groups();
    std::vector<std::size_t> group_of(I);
    std::vector<double> weighted(I), angles(I);
    for (std::size_t i = 0; i < I; ++i) {
        group_of[i] = i;
        weighted[i] = problem.s[i] * problem.K[i];
        angles[i] = two_pi * static_cast<double>(i) / static_cast<double>(I);
    }
    const StarStage stage(angles, group_of, weighted);
    const ForcingField field("upscaled", [&problem](std::size_t ell, double t) {
        return problem.s[ell - 1] * problem.fbar[ell - 1](t);
    });
    auto sol = solve_stage(stage, field, problem.hbar, m, options);

    HomogenizedSolution out;
    out.center_value = sol.center_value;
    for (std::size_t i = 0; i < I; ++i) {
        const auto& g = sol.edges[i];
        out.group_flux.push_back(problem.K[i] * (g[1] - g[0]) * static_cast<double>(m));
        out.groups.push_back(g);
    }
    return out;
}

namespace detail {

inline double radial_moment(const RadialFunction& f) {
    return integrate([&](double t) { return (1.0 - t) * f(t); }, 0.0, 1.0, 64, gauss_legendre(3));
}

} // namespace detail

/// Predicted limit of p^n(0): (hbar + sum_i s_i int (1-t) Fbar_i) / sum_i s_i K_i.
inline double center_limit(const UpscaledProblem& problem) {
    problem.validate();
    double num = problem.hbar, den = 0.0;
    for (std::size_t i = 0; i < problem.groups(); ++i) {
        num += problem.s[i] * detail::radial_moment(problem.fbar[i]);
        den += problem.s[i] * problem.K[i];
    }
    return num / den;
}

/// Predicted K_i dpbar_i(0): int (1-t) Fbar_i - K_i * center_limit.
inline double predicted_edge_flux(const UpscaledProblem& problem, std::size_t group) {
    if (group >= problem.groups()) throw std::out_of_range("predicted_edge_flux: no such group");
    return detail::radial_moment(problem.fbar[group]) - problem.K[group] * center_limit(problem);
}

enum class Orientation { center_out, rim_in };

/// A registered closed form. When the printed functions fail the upscaled
/// problem's vertex conditions, `corrected` holds the consistent solution.
struct OracleEntry {
    std::string id;
    std::vector<RadialFunction> printed;
    bool printed_consistent = false;
    std::vector<RadialFunction> corrected;

    const std::vector<RadialFunction>& best() const {
        return printed_consistent ? printed : corrected;
    }
};

/// Checks continuity at the center, p(1) = 0, -K_i p_i'' = Fbar_i and the
/// weighted flux balance sum_i s_i K_i p_i'(0) = -hbar, by finite differences.
inline bool satisfies_upscaled_problem(const UpscaledProblem& problem,
                                       const std::vector<RadialFunction>& p) {
    if (p.size() != problem.groups()) return false;
    constexpr double d = 1e-4;
    double flux = problem.hbar;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (std::abs(p[i](1.0)) > 1e-9 || std::abs(p[i](0.0) - p[0](0.0)) > 1e-9) return false;
        const double slope = (-3.0 * p[i](0.0) + 4.0 * p[i](d) - p[i](2.0 * d)) / (2.0 * d);
        flux += problem.s[i] * problem.K[i] * slope;
        for (int k = 1; k <= 9; ++k) {
            const double t = 0.1 * k;
            const double second = (p[i](t + d) - 2.0 * p[i](t) + p[i](t - d)) / (d * d);
            const double f = problem.fbar[i](t);
            if (std::abs(-problem.K[i] * second - f) > 1e-3 * (1.0 + std::abs(f))) return false;
        }
    }
    return std::abs(flux) <= 1e-5;
}

/// Adds the affine center mode P(1-t) to profiles q_i that solve the edge ODEs
/// with q_i(0) = q_i(1) = 0, choosing P from the weighted flux balance.
inline std::vector<RadialFunction> with_center_mode(const UpscaledProblem& problem,
                                                    const std::vector<RadialFunction>& q) {
    constexpr double d = 1e-5;
    double num = problem.hbar, den = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double slope = (q[i](d) - q[i](-d)) / (2.0 * d);
        num += problem.s[i] * problem.K[i] * slope;
        den += problem.s[i] * problem.K[i];
    }
    const double P = num / den;
    std::vector<RadialFunction> out;
    for (const auto& qi : q) out.push_back([qi, P](double t) { return qi(t) + P * (1.0 - t); });
    return out;
}

/// Registry of closed-form upscaled solutions: ex1, ex2 (zero), ex3 (printed
/// sines and the consistent correction), constant, manufactured. Absent for
/// ids without a closed form.
inline std::optional<OracleEntry> analytic_oracle(std::string_view id, const UpscaledProblem& problem,
                                                  Orientation orientation = Orientation::center_out) {
    problem.validate();
    constexpr double pi = std::numbers::pi;
    const std::size_t I = problem.groups();
    const bool rim = orientation == Orientation::rim_in;
    auto local = [rim](double t) { return rim ? 1.0 - t : t; };
    OracleEntry entry{std::string(id), {}, false, {}};

    if (id == "ex1" || id == "ex2") {
        entry.printed.assign(I, [](double) { return 0.0; });
    } else if (id == "ex3") {
        if (I != 2) return std::nullopt;
        entry.printed = {[local](double t) { return std::sin(2.0 * pi * local(t)); },
                         [local](double t) { return 0.5 * std::sin(pi * local(t)); }};
    } else if (id == "constant") {
        const double c = problem.fbar[0](0.5);
        std::vector<RadialFunction> q;
        for (std::size_t i = 0; i < I; ++i)
            q.push_back([c, k = problem.K[i]](double t) { return c / (2.0 * k) * t * (1.0 - t); });
        entry.printed = with_center_mode(problem, q);
    } else if (id == "manufactured") {
        entry.printed.assign(I, [local](double t) { return ManufacturedSolution::value(local(t)); });
    } else {
        return std::nullopt;
    }
    entry.printed_consistent = satisfies_upscaled_problem(problem, entry.printed);
    if (!entry.printed_consistent) entry.corrected = with_center_mode(problem, entry.printed);
    return entry;
}

} // namespace starhomog
