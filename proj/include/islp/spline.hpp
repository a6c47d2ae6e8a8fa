#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "islp/errors.hpp"

namespace islp {

/// Piecewise cubic with C2 joins, stored as knot values and second derivatives.
class CubicSpline {
public:
    CubicSpline() = default;

    /// Not-a-knot interpolant through (x, y). Needs at least 4 strictly increasing knots.
    CubicSpline(std::span<const double> x, std::span<const double> y)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end())
    {
        check_knots();
        if (x_.size() < 4)
            throw ConfigurationError("cubic spline needs at least 4 knots");
        solve_not_a_knot();
        detect_uniform();
    }

    /// Spline with prescribed second derivatives at every knot.
    CubicSpline(std::span<const double> x, std::span<const double> y, std::span<const double> m)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(m.begin(), m.end())
    {
        check_knots();
        if (m_.size() != x_.size())
            throw ConfigurationError("second-derivative array has wrong length");
        detect_uniform();
    }

    double operator()(double t) const
    {
        const std::size_t i = segment(t);
        const double h = x_[i + 1] - x_[i];
        const double a = x_[i + 1] - t;
        const double b = t - x_[i];
        if (b == 0)
            return y_[i];
        if (a == 0)
            return y_[i + 1];
        return m_[i] * a * a * a / (6 * h) + m_[i + 1] * b * b * b / (6 * h)
            + (y_[i] / h - m_[i] * h / 6) * a + (y_[i + 1] / h - m_[i + 1] * h / 6) * b;
    }

    double derivative(double t) const
    {
        const std::size_t i = segment(t);
        const double h = x_[i + 1] - x_[i];
        const double a = x_[i + 1] - t;
        const double b = t - x_[i];
        return -m_[i] * a * a / (2 * h) + m_[i + 1] * b * b / (2 * h)
            + (y_[i + 1] - y_[i]) / h - (m_[i + 1] - m_[i]) * h / 6;
    }

    double second_derivative(double t) const
    {
        const std::size_t i = segment(t);
        const double h = x_[i + 1] - x_[i];
        return (m_[i] * (x_[i + 1] - t) + m_[i + 1] * (t - x_[i])) / h;
    }

    /// Exact integral of the spline over [x_0, t].
    double integral(double t) const
    {
        const std::size_t last = segment(t);
        double s = 0;
        for (std::size_t i = 0; i <= last; ++i) {
            const double h = x_[i + 1] - x_[i];
            const double u = (i == last) ? t - x_[i] : h;
            const double a0 = h, a1 = h - u;
            // antiderivative pieces of the two cubic terms and the two linear terms
            s += m_[i] * (a0 * a0 * a0 * a0 - a1 * a1 * a1 * a1) / (24 * h)
                + m_[i + 1] * u * u * u * u / (24 * h)
                + (y_[i] / h - m_[i] * h / 6) * (a0 * a0 - a1 * a1) / 2
                + (y_[i + 1] / h - m_[i + 1] * h / 6) * u * u / 2;
        }
        return s;
    }

    std::span<const double> knots() const { return x_; }
    std::span<const double> values() const { return y_; }
    std::span<const double> second_derivatives() const { return m_; }
    bool empty() const { return x_.empty(); }

private:
    std::vector<double> x_, y_, m_;
    bool uniform_ = false;
    double h_ = 0;

    void check_knots() const
    {
        if (x_.size() != y_.size())
            throw ConfigurationError("spline knots and values differ in length");
        if (x_.size() < 2)
            throw ConfigurationError("spline needs at least 2 knots");
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (!(x_[i] > x_[i - 1]))
                throw ConfigurationError("spline knots must be strictly increasing");
    }

    void detect_uniform()
    {
        const std::size_t n = x_.size();
        h_ = (x_.back() - x_.front()) / double(n - 1);
        uniform_ = true;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(x_[i] - x_[i - 1] - h_) > 1e-10 * h_) {
                uniform_ = false;
                break;
            }
    }

    std::size_t segment(double t) const
    {
        const std::size_t n = x_.size();
        if (uniform_) {
            const double r = (t - x_.front()) / h_;
            if (r <= 0)
                return 0;
            auto i = static_cast<std::size_t>(r);
            i = std::min(i, n - 2);
            // guard against rounding at knot boundaries
            if (i + 1 < n - 1 && t >= x_[i + 1])
                ++i;
            else if (i > 0 && t < x_[i])
                --i;
            return i;
        }
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        if (it == x_.begin())
            return 0;
        const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
        return std::min(i, n - 2);
    }

    // Tridiagonal system for interior second derivatives with the end
    // conditions folded into the first and last rows.
    void solve_not_a_knot()
    {
        const std::size_t n = x_.size();
        std::vector<double> h(n - 1), d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            d[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        const std::size_t m = n - 2;
        std::vector<double> lo(m, 0), di(m, 0), up(m, 0), rhs(m, 0);
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = k + 1;
            lo[k] = h[i - 1];
            di[k] = 2 * (h[i - 1] + h[i]);
            up[k] = h[i];
            rhs[k] = 6 * (d[i] - d[i - 1]);
        }
        // M0 = ((h0+h1) M1 - h0 M2) / h1
        di[0] += h[0] * (h[0] + h[1]) / h[1];
        up[0] -= h[0] * h[0] / h[1];
        // M_{n-1} = ((h_{n-2}+h_{n-3}) M_{n-2} - h_{n-2} M_{n-3}) / h_{n-3}
        const double ha = h[n - 3], hb = h[n - 2];
        di[m - 1] += hb * (ha + hb) / ha;
        lo[m - 1] -= hb * hb / ha;
        for (std::size_t k = 1; k < m; ++k) {
            const double w = lo[k] / di[k - 1];
            di[k] -= w * up[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        std::vector<double> inner(m);
        inner[m - 1] = rhs[m - 1] / di[m - 1];
        for (std::size_t k = m - 1; k-- > 0;)
            inner[k] = (rhs[k] - up[k] * inner[k + 1]) / di[k];
        m_.assign(n, 0);
        for (std::size_t k = 0; k < m; ++k)
            m_[k + 1] = inner[k];
        m_[0] = ((h[0] + h[1]) * m_[1] - h[0] * m_[2]) / h[1];
        m_[n - 1] = ((ha + hb) * m_[n - 2] - hb * m_[n - 3]) / ha;
    }
};

/// Natural cubic smoothing spline minimising sum (y - g)^2 + lambda * int g''^2.
/// lambda must be positive; use the interpolating constructor for lambda = 0.
inline CubicSpline smoothing_spline(std::span<const double> x, std::span<const double> y, double lambda)
{
    const std::size_t n = x.size();
    if (n < 4 || y.size() != n)
        throw ConfigurationError("smoothing spline needs at least 4 matching knots");
    if (!(lambda > 0))
        throw ConfigurationError("smoothing parameter must be positive");
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        if (!(h[i] > 0))
            throw ConfigurationError("spline knots must be strictly increasing");
    }
    const Eigen::Index m = Eigen::Index(n - 2);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(Eigen::Index(n), m);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const std::size_t i = std::size_t(j) + 1;
        Q(j, j) = 1 / h[i - 1];
        Q(j + 1, j) = -1 / h[i - 1] - 1 / h[i];
        Q(j + 2, j) = 1 / h[i];
        R(j, j) = (h[i - 1] + h[i]) / 3;
        if (j + 1 < m) {
            R(j, j + 1) = h[i] / 6;
            R(j + 1, j) = h[i] / 6;
        }
    }
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), Eigen::Index(n));
    const Eigen::MatrixXd A = R + lambda * Q.transpose() * Q;
    const Eigen::VectorXd gamma = A.ldlt().solve(Q.transpose() * yv);
    const Eigen::VectorXd g = yv - lambda * Q * gamma;
    std::vector<double> gv(g.data(), g.data() + n), mv(n, 0);
    for (Eigen::Index j = 0; j < m; ++j)
        mv[std::size_t(j) + 1] = gamma(j);
    return CubicSpline(x, gv, mv);
}

} // namespace islp
