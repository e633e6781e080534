#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace starhomog {

/// Gauss-Legendre rule mapped to [0,1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// q-point Gauss-Legendre rule on [0,1], computed by Newton iteration on P_q.
inline QuadratureRule gauss_legendre(std::size_t q) {
    if (q == 0 || q > 64) throw std::invalid_argument("gauss_legendre: order must be in [1, 64]");
    QuadratureRule rule;
    rule.nodes.resize(q);
    rule.weights.resize(q);
    const double n = static_cast<double>(q);
    for (std::size_t i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= q; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1,1] to [0,1]; nodes ascending.
        rule.nodes[i] = 0.5 * (1.0 - x);
        rule.nodes[q - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = rule.weights[q - 1 - i] = 0.5 * w;
    }
    return rule;
}

/// Composite rule: `panels` equal panels of the q-point rule on [a,b].
template <class Fn>
double integrate(Fn&& fn, double a, double b, std::size_t panels, const QuadratureRule& rule) {
    const double h = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
        const double left = a + h * static_cast<double>(k);
        double panel = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) panel += rule.weights[q] * fn(left + h * rule.nodes[q]);
        total += panel * h;
    }
    return total;
}

} // namespace starhomog
