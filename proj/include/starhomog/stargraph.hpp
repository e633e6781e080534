#pragma once

// Star metric graphs G_n: one center vertex joined to n rim vertices by unit
// edges, each edge carrying a diffusion coefficient drawn from a finite set
// of group values K_1..K_I. Edge e_l (l = 1..n) is parametrized by t in [0,1]
// with t = 0 at the center and t = 1 at the rim, where p = 0 is imposed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "starhomog/detail/random.hpp"

namespace starhomog {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// l mod 2pi, in [0, 2pi).
inline double angle_of(std::size_t ell) {
    const double r = std::fmod(static_cast<double>(ell), two_pi);
    return r < 0.0 ? r + two_pi : r;
}

/// Directions of v_l = (cos l, sin l) for l = 1..n.
inline std::vector<double> vertex_angles(std::size_t n) {
    if (n == 0) throw std::invalid_argument("vertex_angles: n must be >= 1");
    std::vector<double> angles(n);
    for (std::size_t ell = 1; ell <= n; ++ell) angles[ell - 1] = angle_of(ell);
    return angles;
}

/// Deterministic two-valued coefficient: 1 when l = 0 mod 3, 2 otherwise.
inline double coefficient_deterministic(std::size_t ell) {
    return ell % 3 == 0 ? 1.0 : 2.0;
}

namespace detail {

inline void check_probabilities(const std::vector<double>& probs) {
    if (probs.empty()) throw std::invalid_argument("group probabilities must not be empty");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("group probabilities must be >= 0");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("group probabilities must sum to 1");
}

inline std::size_t sample_group(const std::vector<double>& probs, std::uint64_t seed,
                                std::size_t ell) {
    const double u = draw_unit(seed, coefficient_stream, ell);
    double cumulative = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        cumulative += probs[i];
        if (u < cumulative) return i;
    }
    // Trailing zero-probability groups are never selected.
    std::size_t last = probs.size() - 1;
    while (last > 0 && probs[last] == 0.0) --last;
    return last;
}

inline std::vector<double> default_group_values(std::size_t count) {
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) values[i] = static_cast<double>(i + 1);
    return values;
}

} // namespace detail

/// Assigns each edge index l >= 1 to a coefficient group.
class CoefficientRule {
public:
    enum class Kind { deterministic, random, uniform };

    /// Group 1 (K=1) for l = 0 mod 3, group 2 (K=2) otherwise.
    static CoefficientRule deterministic() {
        return CoefficientRule(Kind::deterministic, {1.0, 2.0}, {1.0 / 3.0, 2.0 / 3.0}, 0);
    }

    /// Independent draws with P(group i) = probs[i]. Values default to 1..I.
    static CoefficientRule random(std::uint64_t seed, std::vector<double> probs,
                                  std::vector<double> values = {}) {
        detail::check_probabilities(probs);
        if (values.empty()) values = detail::default_group_values(probs.size());
        if (values.size() != probs.size())
            throw std::invalid_argument("one coefficient value per group is required");
        return CoefficientRule(Kind::random, std::move(values), std::move(probs), seed);
    }

    /// A single group with coefficient k on every edge.
    static CoefficientRule uniform(double k) {
        return CoefficientRule(Kind::uniform, {k}, {1.0}, 0);
    }

    Kind kind() const noexcept { return kind_; }
    std::size_t group_count() const noexcept { return values_.size(); }
    const std::vector<double>& group_values() const noexcept { return values_; }
    /// Limit fractions s_i of each group as n grows.
    const std::vector<double>& limit_fractions() const noexcept { return fractions_; }
    std::optional<std::uint64_t> seed() const {
        return kind_ == Kind::random ? std::optional<std::uint64_t>(seed_) : std::nullopt;
    }

    /// Zero-based group of the 1-based edge index.
    std::size_t group_of(std::size_t ell) const {
        switch (kind_) {
        case Kind::deterministic: return ell % 3 == 0 ? 0 : 1;
        case Kind::random: return detail::sample_group(fractions_, seed_, ell);
        case Kind::uniform: return 0;
        }
        return 0;
    }

    std::string describe() const {
        std::ostringstream out;
        out.precision(17);
        switch (kind_) {
        case Kind::deterministic: out << "deterministic"; break;
        case Kind::uniform: out << "uniform(" << values_[0] << ")"; break;
        case Kind::random:
            out << "random(seed=" << seed_ << ";prng=" << detail::prng_name << ";probs=";
            for (std::size_t i = 0; i < fractions_.size(); ++i)
                out << (i ? "/" : "") << fractions_[i];
            out << ")";
            break;
        }
        return out.str();
    }

private:
    CoefficientRule(Kind kind, std::vector<double> values, std::vector<double> fractions,
                    std::uint64_t seed)
        : kind_(kind), values_(std::move(values)), fractions_(std::move(fractions)), seed_(seed) {
        for (double v : values_)
            if (!(v > 0.0)) throw std::invalid_argument("coefficient values must be > 0");
    }

    Kind kind_;
    std::vector<double> values_;
    std::vector<double> fractions_;
    std::uint64_t seed_;
};

/// Coefficients K(e_1..e_n) of a seeded random realization with values 1..I.
inline std::vector<double> coefficient_random(std::size_t n, std::uint64_t seed,
                                              const std::vector<double>& probs) {
    const auto rule = CoefficientRule::random(seed, probs);
    std::vector<double> coeffs(n);
    for (std::size_t ell = 1; ell <= n; ++ell)
        coeffs[ell - 1] = rule.group_values()[rule.group_of(ell)];
    return coeffs;
}

/// Geometry and coefficients of one stage. Immutable after construction.
class StarStage {
public:
    StarStage(std::vector<double> angles, std::vector<std::size_t> group_of,
              std::vector<double> group_values)
        : angles_(std::move(angles)), group_of_(std::move(group_of)),
          group_values_(std::move(group_values)) {
        if (angles_.empty()) throw std::invalid_argument("a star stage needs at least one edge");
        if (angles_.size() != group_of_.size())
            throw std::invalid_argument("one group index per edge is required");
        if (group_values_.empty()) throw std::invalid_argument("at least one group value is required");
        c_K_ = group_values_.front();
        for (double v : group_values_) {
            if (!(v > 0.0)) throw std::invalid_argument("group values must be > 0");
            c_K_ = std::min(c_K_, v);
        }
        coeffs_.reserve(group_of_.size());
        for (std::size_t g : group_of_) {
            if (g >= group_values_.size()) throw std::invalid_argument("group index out of range");
            coeffs_.push_back(group_values_[g]);
        }
    }

    std::size_t n() const noexcept { return coeffs_.size(); }
    std::size_t group_count() const noexcept { return group_values_.size(); }
    const std::vector<double>& angles() const noexcept { return angles_; }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    const std::vector<std::size_t>& group_of() const noexcept { return group_of_; }
    const std::vector<double>& group_values() const noexcept { return group_values_; }
    double c_K() const noexcept { return c_K_; }

    /// Zero-based edge positions belonging to group g.
    std::vector<std::size_t> edges_in_group(std::size_t g) const {
        std::vector<std::size_t> edges;
        for (std::size_t e = 0; e < group_of_.size(); ++e)
            if (group_of_[e] == g) edges.push_back(e);
        return edges;
    }

private:
    std::vector<double> angles_;
    std::vector<std::size_t> group_of_;
    std::vector<double> group_values_;
    std::vector<double> coeffs_;
    double c_K_ = 0.0;
};

/// Stage G_n with edges l = 1..n. The center must be interior, so n >= 2.
inline StarStage build_stage(std::size_t n, const CoefficientRule& rule) {
    if (n < 2)
        throw std::invalid_argument("build_stage: n must be >= 2 so the center is an interior vertex");
    std::vector<std::size_t> groups(n);
    for (std::size_t ell = 1; ell <= n; ++ell) groups[ell - 1] = rule.group_of(ell);
    return StarStage(vertex_angles(n), std::move(groups), rule.group_values());
}

struct GroupStats {
    std::vector<std::size_t> counts;
    std::vector<double> fractions;
    double kbar = 0.0;
};

inline GroupStats group_stats(const StarStage& stage) {
    GroupStats stats;
    stats.counts.assign(stage.group_count(), 0);
    for (std::size_t g : stage.group_of()) ++stats.counts[g];
    const double n = static_cast<double>(stage.n());
    stats.fractions.reserve(stats.counts.size());
    for (std::size_t c : stats.counts) stats.fractions.push_back(static_cast<double>(c) / n);
    for (double k : stage.coeffs()) stats.kbar += k;
    stats.kbar /= n;
    return stats;
}

} // namespace starhomog
