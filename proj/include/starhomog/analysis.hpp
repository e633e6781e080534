#pragma once

// Norms on grid functions, group Cesaro averages of stage solutions,
// convergence tables against a reference, windowed Cauchy diagnostics, the
// three-gap rate quotient and equidistribution counts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "starhomog/detail/parallel.hpp"
#include "starhomog/errors.hpp"
#include "starhomog/femsolve.hpp"
#include "starhomog/forcing.hpp"
#include "starhomog/grid.hpp"
#include "starhomog/quadrature.hpp"
#include "starhomog/stargraph.hpp"

namespace starhomog {

struct NormPair {
    double l2 = 0.0;
    double h1 = 0.0;
};

enum class H1Kind {
    seminorm,  ///< ||(f - g)'||
    full,      ///< sqrt(||f - g||^2 + ||(f - g)'||^2)
};

namespace detail {

/// Composite Simpson on nodal samples; an odd interval count closes with 3/8.
inline double simpson(std::span<const double> y, double h) {
    const std::size_t m = y.size() - 1;
    std::size_t even = m % 2 == 0 ? m : m - 3;
    double total = 0.0;
    if (even > 0) {
        double s = y[0] + y[even];
        for (std::size_t j = 1; j < even; ++j) s += (j % 2 ? 4.0 : 2.0) * y[j];
        total += s * h / 3.0;
    }
    if (even != m)
        total += 3.0 * h / 8.0 * (y[even] + 3.0 * y[even + 1] + 3.0 * y[even + 2] + y[even + 3]);
    return total;
}

} // namespace detail

/// L2 of f - g by composite Simpson on the nodes; H1 from the elementwise slopes.
inline NormPair grid_norms(const GridFunction& f, const GridFunction& g,
                           H1Kind kind = H1Kind::seminorm) {
    if (f.m() != g.m()) throw std::invalid_argument("grid_norms: meshes differ");
    const std::size_t m = f.m();
    const double h = 1.0 / static_cast<double>(m);
    std::vector<double> sq(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        const double d = f[j] - g[j];
        sq[j] = d * d;
    }
    double slope_sq = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double ds = ((f[j + 1] - g[j + 1]) - (f[j] - g[j])) / h;
        slope_sq += ds * ds * h;
    }
    NormPair out;
    const double l2_sq = std::max(0.0, detail::simpson(sq, h));
    out.l2 = std::sqrt(l2_sq);
    out.h1 = std::sqrt(kind == H1Kind::full ? l2_sq + slope_sq : slope_sq);
    return out;
}

/// Errors of the piecewise-linear interpolant of `ph` against an exact solution,
/// integrated elementwise with a Gauss rule (not only at the nodes).
inline NormPair fe_error_norms(const GridFunction& ph, const std::function<double(double)>& exact,
                               const std::function<double(double)>& exact_derivative,
                               std::size_t order = 5) {
    const auto rule = gauss_legendre(order);
    const std::size_t m = ph.m();
    const double h = 1.0 / static_cast<double>(m);
    double l2 = 0.0, h1 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double slope = (ph[k + 1] - ph[k]) / h;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double xi = rule.nodes[q];
            const double t = h * (static_cast<double>(k) + xi);
            const double e0 = (1.0 - xi) * ph[k] + xi * ph[k + 1] - exact(t);
            const double e1 = slope - exact_derivative(t);
            l2 += rule.weights[q] * h * e0 * e0;
            h1 += rule.weights[q] * h * e1 * e1;
        }
    }
    return {std::sqrt(l2), std::sqrt(h1)};
}

/// Nodewise mean of the edge solutions in group g.
inline GridFunction cesaro_solution_average(const StageSolution& sol, std::size_t group) {
    const auto edges = sol.stage.edges_in_group(group);
    if (edges.empty()) throw EmptyGroupError(group, sol.n());
    GridFunction avg(sol.m);
    for (std::size_t e : edges) avg += sol.edges[e];
    avg *= 1.0 / static_cast<double>(edges.size());
    return avg;
}

inline std::vector<GridFunction> group_averages(const StageSolution& sol) {
    std::vector<GridFunction> out;
    for (std::size_t g = 0; g < sol.stage.group_count(); ++g)
        out.push_back(cesaro_solution_average(sol, g));
    return out;
}

/// Everything needed to build and solve stage n of an experiment.
struct StageProblem {
    std::string id;
    CoefficientRule coefficients = CoefficientRule::deterministic();
    std::function<ForcingField(std::size_t)> field;  ///< field used at stage n
    std::function<double(std::size_t)> h = [](std::size_t) { return 0.0; };
    std::optional<std::uint64_t> seed;
};

struct StageAverages {
    double center_value = 0.0;
    std::vector<GridFunction> groups;
    double wall_ms = 0.0;
};

/// Group averages of stage solutions for one problem and mesh, memoized by n.
class StageCache {
public:
    StageCache(const StageProblem& problem, std::size_t m, SolverOptions options = {})
        : problem_(problem), m_(m), options_(options) {}

    /// Solves every missing stage, spreading stages over options.threads workers.
    void prefetch(std::span<const std::size_t> stages) {
        std::vector<std::size_t> missing;
        for (std::size_t n : stages)
            if (!cache_.contains(n)) missing.push_back(n);
        std::vector<std::optional<StageAverages>> results(missing.size());
        SolverOptions inner = options_;
        inner.threads = 1;
        detail::parallel_for(missing.size(), options_.threads, [&](std::size_t i) {
            results[i] = compute(missing[i], inner);
        });
        for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(missing[i], std::move(*results[i]));
    }

    const StageAverages& at(std::size_t n) {
        auto it = cache_.find(n);
        if (it == cache_.end()) it = cache_.emplace(n, compute(n, options_)).first;
        return it->second;
    }

    std::size_t m() const noexcept { return m_; }

private:
    StageAverages compute(std::size_t n, const SolverOptions& options) const {
        const auto start = std::chrono::steady_clock::now();
        const auto stage = build_stage(n, problem_.coefficients);
        const auto field = problem_.field(n);
        const auto sol = [&] {
            try {
                return solve_stage(stage, field, problem_.h(n), m_, options);
            } catch (const NumericalBreakdown& e) {
                throw NumericalBreakdown(std::string(e.what()) + " (experiment " + problem_.id + ")");
            }
        }();
        StageAverages out{sol.center_value, group_averages(sol), 0.0};
        out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return out;
    }

    const StageProblem& problem_;
    std::size_t m_;
    SolverOptions options_;
    std::map<std::size_t, StageAverages> cache_;
};

struct ConvergenceRow {
    std::size_t n = 0;
    std::size_t group = 0;  ///< zero-based; written 1-based
    double l2_error = 0.0;
    double h1_error = 0.0;
    double center_value = 0.0;
    std::string reference;
    std::size_t m = 0;
    double wall_ms = 0.0;
    std::optional<std::uint64_t> seed;
};

struct AnalysisOptions {
    H1Kind h1 = H1Kind::seminorm;
    SolverOptions solver;
};

/// One row per (n, group): errors of the group Cesaro averages against
/// `reference` (one grid function per group on the same mesh).
inline std::vector<ConvergenceRow> convergence_table(const StageProblem& problem,
                                                     std::span<const std::size_t> stages,
                                                     std::size_t m,
                                                     const std::vector<GridFunction>& reference,
                                                     std::string_view reference_id,
                                                     const AnalysisOptions& options = {}) {
    for (std::size_t i = 1; i < stages.size(); ++i)
        if (stages[i] <= stages[i - 1])
            throw std::invalid_argument("convergence_table: stages must be strictly increasing");
    if (reference.size() != problem.coefficients.group_count())
        throw std::invalid_argument("convergence_table: one reference function per group is required");
    StageCache cache(problem, m, options.solver);
    cache.prefetch(stages);
    std::vector<ConvergenceRow> rows;
    for (std::size_t n : stages) {
        const auto& avg = cache.at(n);
        for (std::size_t g = 0; g < avg.groups.size(); ++g) {
            const auto err = grid_norms(avg.groups[g], reference[g], options.h1);
            rows.push_back({n, g, err.l2, err.h1, avg.center_value, std::string(reference_id), m,
                            avg.wall_ms, problem.seed});
        }
    }
    return rows;
}

struct CauchyRow {
    std::size_t n = 0;
    std::size_t group = 0;
    double epsilon = 0.0;  ///< windowed mean of successive L2 differences
    double delta = 0.0;    ///< windowed mean of successive H1 differences
    std::size_t window = 0;
};

/// For each center c, averages ||pbar^j - pbar^{j-1}|| over the `window`
/// stages j = c - window/2 + 1 .. c + window/2 (j = c-4..c+5 for window 10).
inline std::vector<CauchyRow> cauchy_diagnostics(const StageProblem& problem,
                                                 std::span<const std::size_t> centers,
                                                 std::size_t window, std::size_t m,
                                                 const AnalysisOptions& options = {}) {
    if (window < 2 || window % 2 != 0)
        throw std::invalid_argument("cauchy_diagnostics: window must be even and >= 2");
    const std::size_t half = window / 2;
    std::vector<std::size_t> stages;
    for (std::size_t c : centers) {
        if (c < half + 2)
            throw std::invalid_argument("cauchy_diagnostics: center " + std::to_string(c) +
                                        " needs stages below n = 2");
        for (std::size_t j = c - half; j <= c + half; ++j) stages.push_back(j);
    }
    StageCache cache(problem, m, options.solver);
    cache.prefetch(stages);

    std::vector<CauchyRow> rows;
    for (std::size_t c : centers) {
        const std::size_t groups = problem.coefficients.group_count();
        std::vector<double> eps(groups, 0.0), del(groups, 0.0);
        for (std::size_t j = c - half + 1; j <= c + half; ++j) {
            const auto& now = cache.at(j);
            const auto& before = cache.at(j - 1);
            for (std::size_t g = 0; g < groups; ++g) {
                const auto d = grid_norms(now.groups[g], before.groups[g], options.h1);
                eps[g] += d.l2;
                del[g] += d.h1;
            }
        }
        for (std::size_t g = 0; g < groups; ++g)
            rows.push_back({c, g, eps[g] / static_cast<double>(window),
                            del[g] / static_cast<double>(window), window});
    }
    return rows;
}

/// alpha = (log d_next - log d_mid) / (log d_mid - log d_prev) from three
/// successive gap magnitudes, oldest first.
inline double rate_estimate(double d_prev, double d_mid, double d_next) {
    if (!(d_prev > 0.0) || !(d_mid > 0.0) || !(d_next > 0.0))
        throw UndefinedRate("rate_estimate: every gap must be > 0");
    const double den = std::log(d_mid) - std::log(d_prev);
    if (den == 0.0) throw UndefinedRate("rate_estimate: equal successive gaps");
    return (std::log(d_next) - std::log(d_mid)) / den;
}

/// Rate from four successive values e_0..e_3 through their gaps |e_{k+1} - e_k|.
inline double rate_from_sequence(std::span<const double> values) {
    if (values.size() != 4) throw std::invalid_argument("rate_from_sequence: four values are required");
    return rate_estimate(std::abs(values[1] - values[0]), std::abs(values[2] - values[1]),
                         std::abs(values[3] - values[2]));
}

/// #{l <= n : (l mod 2pi) in [c, d]} / n.
inline double weyl_fraction(std::size_t n, double c, double d) {
    if (n == 0) throw std::invalid_argument("weyl_fraction: n must be >= 1");
    if (!(c >= 0.0) || !(d > c) || !(d <= two_pi))
        throw std::invalid_argument("weyl_fraction: need 0 <= c < d <= 2pi");
    std::size_t hits = 0;
    for (std::size_t ell = 1; ell <= n; ++ell) {
        const double a = angle_of(ell);
        if (a >= c && a <= d) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

/// (1/n) sum_{l=1..n} f(l mod 2pi).
template <class Fn>
double weyl_mean(std::size_t n, Fn&& f) {
    if (n == 0) throw std::invalid_argument("weyl_mean: n must be >= 1");
    double sum = 0.0;
    for (std::size_t ell = 1; ell <= n; ++ell) sum += f(angle_of(ell));
    return sum / static_cast<double>(n);
}

// CSV output: RFC 4180 quoting, '.' decimals, 6 significant digits.

inline std::string csv_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", x);
    return buf;
}

inline std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline void write_table_csv(std::ostream& out, std::span<const ConvergenceRow> rows,
                            bool with_timing = false) {
    out << "n,group,l2_error,h1_error,center_value,reference,m,seed";
    out << (with_timing ? ",wall_ms\n" : "\n");
    for (const auto& r : rows) {
        out << r.n << ',' << r.group + 1 << ',' << csv_number(r.l2_error) << ','
            << csv_number(r.h1_error) << ',' << csv_number(r.center_value) << ','
            << csv_field(r.reference) << ',' << r.m << ',';
        if (r.seed) out << *r.seed;
        if (with_timing) out << ',' << csv_number(r.wall_ms);
        out << '\n';
    }
}

inline void write_cauchy_csv(std::ostream& out, std::span<const CauchyRow> rows) {
    out << "n,group,epsilon,delta,window\n";
    for (const auto& r : rows)
        out << r.n << ',' << r.group + 1 << ',' << csv_number(r.epsilon) << ','
            << csv_number(r.delta) << ',' << r.window << '\n';
}

} // namespace starhomog
