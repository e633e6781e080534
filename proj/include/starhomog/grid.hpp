#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace starhomog {

/// Nodal values on the uniform grid t_j = j/m of [0,1]; t = 0 is the center end.
class GridFunction {
public:
    explicit GridFunction(std::size_t m) : GridFunction(std::vector<double>(m + 1, 0.0)) {}

    explicit GridFunction(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() < 3)
            throw std::invalid_argument("GridFunction needs m >= 2 (at least 3 nodes)");
    }

    template <class Fn>
    static GridFunction sample(std::size_t m, Fn&& fn) {
        GridFunction g(m);
        for (std::size_t j = 0; j <= m; ++j) g.values_[j] = fn(g.t(j));
        return g;
    }

    std::size_t m() const noexcept { return values_.size() - 1; }
    double t(std::size_t j) const noexcept {
        return static_cast<double>(j) / static_cast<double>(m());
    }
    double operator[](std::size_t j) const noexcept { return values_[j]; }
    double& operator[](std::size_t j) noexcept { return values_[j]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    /// Piecewise-linear interpolant at t in [0,1].
    double at(double t) const {
        const double x = std::clamp(t, 0.0, 1.0) * static_cast<double>(m());
        const auto j = std::min(static_cast<std::size_t>(x), m() - 1);
        const double w = x - static_cast<double>(j);
        return (1.0 - w) * values_[j] + w * values_[j + 1];
    }

    GridFunction& operator+=(const GridFunction& other) {
        check_same_mesh(other);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& other) {
        check_same_mesh(other);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
        return *this;
    }
    GridFunction& operator*=(double s) noexcept {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }

    void check_same_mesh(const GridFunction& other) const {
        if (other.m() != m()) throw std::invalid_argument("grid functions live on different meshes");
    }

private:
    std::vector<double> values_;
};

} // namespace starhomog
