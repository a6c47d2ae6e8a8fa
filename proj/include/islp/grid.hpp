#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "islp/errors.hpp"
#include "islp/spline.hpp"

namespace islp {

inline constexpr double pi = std::numbers::pi;

enum class RuleKind { uniform_trapezoid, uniform_simpson, gauss_legendre };

inline std::string_view to_string(RuleKind k)
{
    switch (k) {
    case RuleKind::uniform_trapezoid: return "uniform-trapezoid";
    case RuleKind::uniform_simpson: return "uniform-simpson";
    case RuleKind::gauss_legendre: return "gauss-legendre";
    }
    return "?";
}

inline RuleKind rule_from_string(std::string_view s)
{
    if (s == "uniform-trapezoid") return RuleKind::uniform_trapezoid;
    if (s == "uniform-simpson") return RuleKind::uniform_simpson;
    if (s == "gauss-legendre") return RuleKind::gauss_legendre;
    throw ConfigurationError("unknown quadrature rule: " + std::string(s));
}

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre_unit(std::size_t n)
{
    std::vector<double> x(n), w(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (double(i) + 0.75) / (double(n) + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * double(k) - 1) * z * p1 - (double(k) - 1) * p0) / double(k);
                p0 = p1;
                p1 = p2;
            }
            dp = double(n) * (z * p1 - p0) / (z * z - 1);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        // recompute derivative at the converged root
        {
            double p0 = 1, p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * double(k) - 1) * z * p1 - (double(k) - 1) * p0) / double(k);
                p0 = p1;
                p1 = p2;
            }
            dp = double(n) * (z * p1 - p0) / (z * z - 1);
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
    }
    if (n % 2 == 1)
        x[n / 2] = 0;
    return {x, w};
}

/// Quadrature nodes and weights on an interval [lower, upper] (by default [0, pi]).
class Grid {
public:
    Grid() = default;

    Grid(std::vector<double> nodes, std::vector<double> weights, RuleKind kind, double lower, double upper)
        : nodes_(std::move(nodes)), weights_(std::move(weights)), kind_(kind), lower_(lower), upper_(upper)
    {
        if (nodes_.size() != weights_.size() || nodes_.empty())
            throw ConfigurationError("grid nodes and weights differ in length");
        if (!(upper_ > lower_))
            throw ConfigurationError("grid interval is empty");
        double sum = 0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (i > 0 && !(nodes_[i] > nodes_[i - 1]))
                throw ConfigurationError("grid nodes must be strictly increasing");
            sum += weights_[i];
        }
        const double span = upper_ - lower_;
        if (nodes_.front() < lower_ - 1e-14 * span || nodes_.back() > upper_ + 1e-14 * span)
            throw ConfigurationError("grid nodes leave the interval");
        if (std::abs(sum - span) > 1e-12 * span)
            throw ConfigurationError("grid weights do not sum to the interval length");
    }

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }
    double node(std::size_t i) const { return nodes_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    std::size_t size() const { return nodes_.size(); }
    RuleKind kind() const { return kind_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    bool uniform() const { return kind_ != RuleKind::gauss_legendre; }

private:
    std::vector<double> nodes_, weights_;
    RuleKind kind_ = RuleKind::uniform_trapezoid;
    double lower_ = 0, upper_ = pi;
};

inline Grid make_grid(std::size_t n_nodes, RuleKind kind, double a, double b, std::size_t min_nodes = 8)
{
    if (n_nodes < min_nodes)
        throw ConfigurationError("grid needs at least " + std::to_string(min_nodes) + " nodes");
    if (!(b > a))
        throw ConfigurationError("grid interval is empty");
    std::vector<double> x(n_nodes), w(n_nodes);
    if (kind == RuleKind::gauss_legendre) {
        auto [z, v] = gauss_legendre_unit(n_nodes);
        const double half = (b - a) / 2, mid = (a + b) / 2;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            x[i] = mid + half * z[i];
            w[i] = half * v[i];
        }
        return Grid(std::move(x), std::move(w), kind, a, b);
    }
    const double h = (b - a) / double(n_nodes - 1);
    for (std::size_t i = 0; i < n_nodes; ++i)
        x[i] = a + h * double(i);
    x.back() = b;
    if (kind == RuleKind::uniform_trapezoid) {
        for (auto& v : w) v = h;
        w.front() = w.back() = h / 2;
    } else {
        if (n_nodes % 2 == 0)
            throw ConfigurationError("Simpson rule needs an odd number of nodes");
        for (std::size_t i = 0; i < n_nodes; ++i)
            w[i] = h / 3 * ((i == 0 || i == n_nodes - 1) ? 1 : (i % 2 ? 4 : 2));
    }
    return Grid(std::move(x), std::move(w), kind, a, b);
}

/// Grid on [0, pi].
inline Grid make_grid(std::size_t n_nodes, RuleKind kind)
{
    return make_grid(n_nodes, kind, 0.0, pi);
}

/// Uniform grid built from arbitrary sample positions (e.g. read from a file).
/// Simpson weights when the spacing is uniform with an odd count, trapezoid otherwise.
inline Grid grid_from_samples(std::vector<double> x, double a = 0, double b = pi)
{
    const std::size_t n = x.size();
    if (n < 8)
        throw ConfigurationError("grid needs at least 8 nodes");
    const double span = b - a;
    if (std::abs(x.front() - a) > 1e-9 * span || std::abs(x.back() - b) > 1e-9 * span)
        throw ConfigurationError("samples must start at the left end and stop at the right end of the interval");
    x.front() = a;
    x.back() = b;
    const double h = span / double(n - 1);
    bool uniform = true;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(x[i] - (a + h * double(i))) > 1e-9 * h)
            uniform = false;
    if (uniform && n % 2 == 1)
        return make_grid(n, RuleKind::uniform_simpson, a, b);
    if (uniform)
        return make_grid(n, RuleKind::uniform_trapezoid, a, b);
    std::vector<double> w(n, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = x[i + 1] - x[i];
        if (!(d > 0))
            throw ConfigurationError("sample positions must be strictly increasing");
        w[i] += d / 2;
        w[i + 1] += d / 2;
    }
    return Grid(std::move(x), std::move(w), RuleKind::uniform_trapezoid, a, b);
}

/// Barycentric weights for Legendre points, ascending order.
inline std::vector<double> legendre_barycentric_weights(const Grid& g)
{
    const std::size_t n = g.size();
    const double half = (g.upper() - g.lower()) / 2, mid = (g.upper() + g.lower()) / 2;
    std::vector<double> bw(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double z = (g.node(j) - mid) / half;
        const double s = std::sqrt((1 - z * z) * g.weight(j) / half);
        bw[j] = (j % 2 ? -s : s);
    }
    return bw;
}

inline double barycentric(std::span<const double> x, std::span<const double> bw, std::span<const double> f, double t)
{
    double num = 0, den = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = t - x[j];
        if (d == 0)
            return f[j];
        const double c = bw[j] / d;
        num += c * f[j];
        den += c;
    }
    return num / den;
}

/// Samples of a function on a grid.
class GridFunction {
public:
    GridFunction() = default;

    GridFunction(Grid grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values))
    {
        if (values_.size() != grid_.size())
            throw ConfigurationError("grid function has " + std::to_string(values_.size())
                                     + " values for " + std::to_string(grid_.size()) + " nodes");
        for (double v : values_)
            if (!std::isfinite(v))
                throw ConfigurationError("grid function contains a non-finite value");
    }

    template <class F>
    static GridFunction sample(const Grid& grid, F&& f)
    {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            v[i] = f(grid.node(i));
        return GridFunction(grid, std::move(v));
    }

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double value(std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline double integrate(const GridFunction& f)
{
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        s += f.grid().weight(i) * f.value(i);
    return s;
}

/// Reusable interpolant: not-a-knot cubic spline on uniform grids, barycentric
/// Lagrange on Gauss-Legendre grids. Exact at nodes.
class Interpolant {
public:
    Interpolant() = default;

    explicit Interpolant(const GridFunction& f)
        : lower_(f.grid().lower()), upper_(f.grid().upper())
    {
        if (f.grid().kind() == RuleKind::gauss_legendre) {
            x_.assign(f.grid().nodes().begin(), f.grid().nodes().end());
            f_.assign(f.values().begin(), f.values().end());
            bw_ = legendre_barycentric_weights(f.grid());
        } else {
            spline_ = CubicSpline(f.grid().nodes(), f.values());
        }
    }

    double operator()(double t) const
    {
        check(t);
        if (!x_.empty())
            return barycentric(x_, bw_, f_, t);
        return spline_(t);
    }

    /// Derivative; spline only.
    double derivative(double t) const
    {
        check(t);
        if (!x_.empty())
            throw ConfigurationError("derivative is available on uniform grids only");
        return spline_.derivative(t);
    }

private:
    double lower_ = 0, upper_ = pi;
    CubicSpline spline_;
    std::vector<double> x_, f_, bw_;

    void check(double t) const
    {
        const double tol = 1e-12 * (upper_ - lower_);
        if (!(t >= lower_ - tol && t <= upper_ + tol))
            throw DomainError("interpolation point " + std::to_string(t) + " outside ["
                              + std::to_string(lower_) + ", " + std::to_string(upper_) + "]");
    }
};

inline double interpolate(const GridFunction& f, double t)
{
    return Interpolant(f)(t);
}

} // namespace islp
