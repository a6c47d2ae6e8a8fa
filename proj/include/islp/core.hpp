#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "islp/errors.hpp"
#include "islp/grid.hpp"

namespace islp {

/// Real potential on [0, pi] with its mean value.
class Potential {
public:
    Potential() = default;

    explicit Potential(GridFunction f)
        : f_(std::move(f))
    {
        const Grid& g = f_.grid();
        if (std::abs(g.lower()) > 1e-12 || std::abs(g.upper() - pi) > 1e-12)
            throw ConfigurationError("potential must live on [0, pi]");
        mean_ = integrate(f_) / pi;
    }

    template <class F>
    static Potential sample(const Grid& grid, F&& q)
    {
        return Potential(GridFunction::sample(grid, std::forward<F>(q)));
    }

    const GridFunction& function() const { return f_; }
    const Grid& grid() const { return f_.grid(); }
    std::span<const double> values() const { return f_.values(); }
    double mean() const { return mean_; }
    double integral() const { return mean_ * pi; }

private:
    GridFunction f_;
    double mean_ = 0;
};

/// Robin angle at the right end. The left end is Dirichlet.
class BoundaryAngle {
public:
    BoundaryAngle() = default;

    explicit BoundaryAngle(double beta)
        : beta_(beta)
    {
        if (!(beta > 0 && beta < pi))
            throw ConfigurationError("boundary angle must lie strictly inside (0, pi), got "
                                     + std::to_string(beta));
    }

    double value() const { return beta_; }
    double sin() const { return std::sin(beta_); }
    double cos() const { return std::cos(beta_); }
    double cot() const { return std::cos(beta_) / std::sin(beta_); }

    static BoundaryAngle from_cot(double c)
    {
        // arccot onto (0, pi)
        return BoundaryAngle(std::atan2(1.0, c));
    }

private:
    double beta_ = pi / 2;
};

/// Eigenvalues mu_n = lambda_n^2 and norming constants a_n, n = 0 .. count-1.
struct SpectralData {
    BoundaryAngle beta;
    std::vector<double> mu;
    std::vector<double> norming;
    double c_fit = 0;

    std::size_t count() const { return mu.size(); }

    /// sqrt(mu_n); zero for non-positive mu (see imaginary()).
    double lambda(std::size_t n) const { return std::sqrt(std::max(mu.at(n), 0.0)); }
    bool imaginary(std::size_t n) const { return mu.at(n) < 0; }

    /// k_n = a_n lambda_n^2.
    double k(std::size_t n) const { return norming.at(n) * mu.at(n); }
};

inline bool is_zero_mu(double mu, double threshold = 1e-10)
{
    return std::abs(mu) < threshold;
}

/// sin(sqrt(mu) x) / sqrt(mu), continued to mu <= 0.
inline double sin_mu(double mu, double x)
{
    const double z = mu * x * x;
    if (std::abs(z) < 1e-6)
        return x * (1 - z / 6 * (1 - z / 20 * (1 - z / 42)));
    if (mu > 0) {
        const double l = std::sqrt(mu);
        return std::sin(l * x) / l;
    }
    const double k = std::sqrt(-mu);
    return std::sinh(k * x) / k;
}

/// cos(sqrt(mu) x), continued to mu <= 0.
inline double cos_mu(double mu, double x)
{
    if (mu >= 0)
        return std::cos(std::sqrt(mu) * x);
    return std::cosh(std::sqrt(-mu) * x);
}

} // namespace islp
