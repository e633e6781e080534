#pragma once

// Radial forcing data F_e(t) on the edges of a star stage, the built-in
// example families, and Cesaro / angular averages of that data.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "starhomog/detail/random.hpp"
#include "starhomog/errors.hpp"
#include "starhomog/grid.hpp"
#include "starhomog/quadrature.hpp"
#include "starhomog/stargraph.hpp"

namespace starhomog {

using FieldParameters = std::map<std::string, double>;

/// Per-edge radial forcing. Evaluation is pure: random families derive their
/// per-edge draws from (seed, edge index) and hold no mutable state.
class ForcingField {
public:
    /// (1-based edge index, t) -> force density.
    using Profile = std::function<double(std::size_t, double)>;
    /// (zero-based group, t) -> closed-form Cesaro limit of the group.
    using GroupLimit = std::function<double(std::size_t, double)>;

    ForcingField(std::string family, Profile profile, FieldParameters params = {},
                 std::optional<double> bounded_l2 = std::nullopt,
                 GroupLimit known_group_limit = nullptr,
                 std::optional<std::uint64_t> seed = std::nullopt)
        : family_(std::move(family)), profile_(std::move(profile)), params_(std::move(params)),
          bounded_l2_(bounded_l2), group_limit_(std::move(known_group_limit)), seed_(seed) {
        if (!profile_) throw std::invalid_argument("forcing field needs a profile");
    }

    double operator()(std::size_t ell, double t) const { return profile_(ell, t); }

    const std::string& family() const noexcept { return family_; }
    const FieldParameters& parameters() const noexcept { return params_; }
    std::optional<double> bounded_l2() const noexcept { return bounded_l2_; }
    bool has_group_limit() const noexcept { return static_cast<bool>(group_limit_); }
    const GroupLimit& group_limit() const noexcept { return group_limit_; }
    std::optional<std::uint64_t> seed() const noexcept { return seed_; }

    /// Closed-form limit of group g at t. Requires has_group_limit().
    double group_limit(std::size_t g, double t) const {
        if (!group_limit_) throw std::logic_error("field '" + family_ + "' has no known group limit");
        return group_limit_(g, t);
    }

    std::string describe() const {
        std::ostringstream out;
        out.precision(17);
        out << family_ << "(";
        bool first = true;
        for (const auto& [key, value] : params_) {
            out << (first ? "" : ";") << key << "=" << value;
            first = false;
        }
        if (seed_) out << (first ? "" : ";") << "seed=" << *seed_ << ";prng=" << detail::prng_name;
        out << ")";
        return out.str();
    }

private:
    std::string family_;
    Profile profile_;
    FieldParameters params_;
    std::optional<double> bounded_l2_;
    GroupLimit group_limit_;
    std::optional<std::uint64_t> seed_;
};

/// Exact solution used by the manufactured family: p(t) = sin(pi t)(1 - t) on
/// every edge, with F = -k p'' and center datum h = -k p'(0) per edge.
struct ManufacturedSolution {
    static double value(double t) { return std::sin(std::numbers::pi * t) * (1.0 - t); }
    static double derivative(double t) {
        const double pi = std::numbers::pi;
        return pi * std::cos(pi * t) * (1.0 - t) - std::sin(pi * t);
    }
    static double minus_second_derivative(double t) {
        const double pi = std::numbers::pi;
        return pi * pi * std::sin(pi * t) * (1.0 - t) + 2.0 * pi * std::cos(pi * t);
    }
    /// h^n = center_datum_per_edge(k) * n balances the outgoing fluxes.
    static double center_datum_per_edge(double k) { return -k * std::numbers::pi; }
};

inline const std::vector<std::string>& builtin_field_ids() {
    static const std::vector<std::string> ids{"ex1", "ex2", "ex3", "ex4", "ex5", "constant",
                                              "manufactured"};
    return ids;
}

namespace detail {

inline double param_or(const FieldParameters& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

inline void check_param_names(std::string_view id, const FieldParameters& params,
                              std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : params) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok)
            throw std::invalid_argument("family '" + std::string(id) + "' has no parameter '" + key + "'");
    }
}

inline double radial_two_group(std::size_t ell, double t) {
    constexpr double pi = std::numbers::pi;
    return ell % 3 == 0 ? 4.0 * pi * pi * std::sin(2.0 * pi * t) : pi * pi * std::sin(pi * t);
}

inline double radial_two_group_limit(std::size_t group, double t) {
    constexpr double pi = std::numbers::pi;
    return group == 0 ? 4.0 * pi * pi * std::sin(2.0 * pi * t) : pi * pi * std::sin(pi * t);
}

/// (-1)^floor(l/6) * 10 * (l mod 2pi).
inline double alternating_angular_part(std::size_t ell) {
    const double sign = (ell / 6) % 2 == 0 ? 1.0 : -1.0;
    return sign * 10.0 * angle_of(ell);
}

inline double l2_norm_on_unit(const std::function<double(double)>& f) {
    const auto rule = gauss_legendre(8);
    return std::sqrt(integrate([&](double t) { return f(t) * f(t); }, 0.0, 1.0, 64, rule));
}

} // namespace detail

namespace detail {

inline ForcingField builtin_center_out(std::string_view id, const FieldParameters& params,
                                       std::optional<std::uint64_t> seed) {
    constexpr double pi = std::numbers::pi;
    const double pi2 = pi * pi;
    const std::string name(id);
    auto zero_limit = [](std::size_t, double) { return 0.0; };

    if (id == "ex1") {
        detail::check_param_names(id, params, {});
        return ForcingField(
            name, [pi2](std::size_t ell, double t) { return pi2 * std::sin(pi * t) * std::cos(static_cast<double>(ell)); },
            params, pi2 / std::sqrt(2.0), zero_limit);
    }
    if (id == "ex2") {
        detail::check_param_names(id, params, {"amplitude", "realization"});
        FieldParameters p = params;
        const double amplitude = detail::param_or(p, "amplitude", 100.0);
        const double realization = detail::param_or(p, "realization", 0.0);
        if (!(amplitude >= 0.0)) throw std::invalid_argument("ex2: amplitude must be >= 0");
        if (realization < 0.0 || realization != std::floor(realization))
            throw std::invalid_argument("ex2: realization must be a non-negative integer");
        p["amplitude"] = amplitude;
        p["realization"] = realization;
        const std::uint64_t s = seed.value_or(0);
        const std::uint64_t stream =
            detail::forcing_stream + (static_cast<std::uint64_t>(realization) << 8);
        return ForcingField(
            name,
            [pi2, amplitude, s, stream](std::size_t ell, double t) {
                const double z = amplitude * (2.0 * detail::draw_unit(s, stream, ell) - 1.0);
                return pi2 * std::sin(pi * t) * std::cos(static_cast<double>(ell)) + z;
            },
            std::move(p), pi2 / std::sqrt(2.0) + amplitude, zero_limit, s);
    }
    if (id == "ex3") {
        detail::check_param_names(id, params, {});
        return ForcingField(
            name,
            [](std::size_t ell, double t) {
                return detail::radial_two_group(ell, t) + detail::alternating_angular_part(ell);
            },
            params, 4.0 * pi2 / std::sqrt(2.0) + 20.0 * pi, detail::radial_two_group_limit);
    }
    if (id == "ex4") {
        detail::check_param_names(id, params, {});
        return ForcingField(
            name,
            [](std::size_t ell, double t) {
                const double sign = ell % 2 == 0 ? 1.0 : -1.0;
                return detail::radial_two_group(ell, t) + sign * std::sqrt(static_cast<double>(ell));
            },
            params, std::nullopt, detail::radial_two_group_limit);
    }
    if (id == "ex5") {
        detail::check_param_names(id, params, {});
        return ForcingField(
            name,
            [pi2](std::size_t ell, double t) {
                const double l = static_cast<double>(ell);
                return ell % 3 == 0 ? 4.0 * pi2 * std::sin(2.0 * pi * t * l)
                                    : pi2 * std::sin(pi * t * l);
            },
            params, 4.0 * pi2 / std::sqrt(2.0));
    }
    if (id == "constant") {
        detail::check_param_names(id, params, {"c"});
        FieldParameters p = params;
        const double c = detail::param_or(p, "c", 1.0);
        p["c"] = c;
        return ForcingField(
            name, [c](std::size_t, double) { return c; }, std::move(p), std::abs(c),
            [c](std::size_t, double) { return c; });
    }
    if (id == "manufactured") {
        detail::check_param_names(id, params, {"k"});
        FieldParameters p = params;
        const double k = detail::param_or(p, "k", 1.0);
        if (!(k > 0.0)) throw std::invalid_argument("manufactured: k must be > 0");
        p["k"] = k;
        auto profile = [k](std::size_t, double t) {
            return k * ManufacturedSolution::minus_second_derivative(t);
        };
        const double bound = detail::l2_norm_on_unit([&](double t) { return profile(1, t); });
        return ForcingField(name, profile, std::move(p), bound,
                            [profile](std::size_t, double t) { return profile(1, t); });
    }
    throw std::invalid_argument("unknown forcing family '" + name + "'");
}

} // namespace detail

/// Built-in families: ex1..ex5 of the numerical study, a constant load and a
/// manufactured load. Parameters: constant{c}, ex2{amplitude, realization},
/// manufactured{k}. Groups in the known limits follow the l = 0 mod 3 split.
/// Every family also accepts from_rim=1, which reads the radial profile with t
/// measured from the rim, i.e. evaluates F(l, 1 - t).
inline ForcingField builtin_field(std::string_view id, const FieldParameters& params = {},
                                  std::optional<std::uint64_t> seed = std::nullopt) {
    FieldParameters base_params = params;
    const double from_rim = detail::param_or(base_params, "from_rim", 0.0);
    base_params.erase("from_rim");
    if (from_rim != 0.0 && from_rim != 1.0)
        throw std::invalid_argument("from_rim must be 0 or 1");
    auto base = detail::builtin_center_out(id, base_params, seed);
    if (from_rim == 0.0) return base;

    FieldParameters echoed = base.parameters();
    echoed["from_rim"] = 1.0;
    ForcingField::GroupLimit limit;
    if (base.has_group_limit())
        limit = [lim = base.group_limit()](std::size_t g, double t) { return lim(g, 1.0 - t); };
    return ForcingField(
        base.family(), [base](std::size_t ell, double t) { return base(ell, 1.0 - t); },
        std::move(echoed), base.bounded_l2(), std::move(limit), base.seed());
}

/// Consistent P1 loads b_j = int F_l phi_j, j = 0..m, with `rule` on each element.
inline void nodal_loads(const ForcingField& field, std::size_t ell, std::size_t m,
                        const QuadratureRule& rule, std::span<double> out) {
    const double h = 1.0 / static_cast<double>(m);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const double left = h * static_cast<double>(k);
        double to_left = 0.0, to_right = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double xi = rule.nodes[q];
            const double wf = rule.weights[q] * field(ell, left + h * xi);
            to_left += wf * (1.0 - xi);
            to_right += wf * xi;
        }
        out[k] += to_left * h;
        out[k + 1] += to_right * h;
    }
}

/// int_0^1 (1 - t) F_l(t) dt by `panels` panels of the `order`-point Gauss rule.
inline double edge_load_moment(const ForcingField& field, std::size_t ell,
                               std::size_t panels = 64, std::size_t order = 3) {
    return integrate([&](double t) { return (1.0 - t) * field(ell, t); }, 0.0, 1.0, panels,
                     gauss_legendre(order));
}

/// Pointwise mean of F_e over the edges of group g, sampled on t_j = j/m.
inline GridFunction cesaro_forcing_average(const ForcingField& field, const StarStage& stage,
                                           std::size_t group, std::size_t m) {
    const auto edges = stage.edges_in_group(group);
    if (edges.empty()) throw EmptyGroupError(group, stage.n());
    GridFunction avg(m);
    for (std::size_t j = 0; j <= m; ++j) {
        double sum = 0.0;
        for (std::size_t e : edges) sum += field(e + 1, avg.t(j));
        avg[j] = sum / static_cast<double>(edges.size());
    }
    return avg;
}

/// m_rad[f](t): mean of a planar field, given in polar form f(t, theta), over
/// the circle of radius t. Periodic trapezoid with `count` nodes.
inline double angular_average(const std::function<double(double, double)>& f, double t,
                              std::size_t count = 64) {
    if (count < 4) throw std::invalid_argument("angular_average: at least 4 nodes are required");
    double sum = 0.0;
    for (std::size_t k = 0; k < count; ++k)
        sum += f(t, two_pi * static_cast<double>(k) / static_cast<double>(count));
    return sum / static_cast<double>(count);
}

} // namespace starhomog
