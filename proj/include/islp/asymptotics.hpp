#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "islp/core.hpp"

namespace islp {

/// Right-hand side of the fixed-point equation for the phase shift delta_n.
inline double delta_map(const BoundaryAngle& beta, std::size_t n, double delta)
{
    const double s = beta.sin(), c = beta.cos();
    const double l = double(n) + delta;
    return 1 - std::acos(std::clamp(c / std::sqrt(l * l * s * s + c * c), -1.0, 1.0)) / pi;
}

/// delta_n for n >= 2: fixed-point iteration seeded at 1/2, bisection if that stalls.
inline double solve_delta(const BoundaryAngle& beta, std::size_t n, double tol = 1e-15)
{
    if (n < 2)
        throw ConfigurationError("phase shift is defined for n >= 2");
    double d = 0.5;
    for (int it = 0; it < 50; ++it) {
        const double next = delta_map(beta, n, d);
        if (std::abs(next - d) <= tol)
            return next;
        d = next;
    }
    double lo = -1, hi = 1;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = (lo + hi) / 2;
        if (delta_map(beta, n, mid) - mid > 0)
            lo = mid;
        else
            hi = mid;
    }
    return (lo + hi) / 2;
}

/// Characteristic function of the free problem (q = 0). Scaled by 1/cosh for mu < 0
/// so it stays finite; the sign is unchanged.
inline double free_characteristic(const BoundaryAngle& beta, double mu)
{
    if (mu >= 0)
        return sin_mu(mu, pi) * beta.cos() + cos_mu(mu, pi) * beta.sin();
    const double k = std::sqrt(-mu);
    const double th = std::tanh(k * pi);
    const double s_over_c = (k * pi < 1e-6) ? pi : th / k;
    return s_over_c * beta.cos() + beta.sin();
}

/// int_0^pi (sin(sqrt(mu) x)/sqrt(mu))^2 dx.
inline double free_norming(double mu)
{
    if (std::abs(mu) * pi * pi < 1e-2) {
        static const auto gl = gauss_legendre_unit(40);
        double s = 0;
        for (std::size_t i = 0; i < gl.first.size(); ++i) {
            const double x = pi / 2 * (gl.first[i] + 1);
            const double v = sin_mu(mu, x);
            s += gl.second[i] * v * v;
        }
        return s * pi / 2;
    }
    if (mu > 0) {
        const double l = std::sqrt(mu);
        return (pi / 2 - std::sin(2 * l * pi) / (4 * l)) / mu;
    }
    const double k = std::sqrt(-mu);
    return (std::sinh(2 * k * pi) / (4 * k) - pi / 2) / (-mu);
}

/// The two lowest free eigenvalues (may be zero or negative).
inline std::array<double, 2> free_low_modes(const BoundaryAngle& beta)
{
    // Both roots lie below mu = 4; a negative root lies above -(cot^2 + 1).
    const double cot = beta.cot();
    const double mu_lo = -(cot * cot + 1);
    std::vector<double> mus;
    const std::size_t m = 4000;
    for (std::size_t i = 0; i < m; ++i)
        mus.push_back(mu_lo * (1 - double(i) / m));
    for (std::size_t i = 0; i <= m; ++i) {
        const double l = 2.0 * double(i) / m;
        mus.push_back(l * l);
    }
    std::vector<double> vals(mus.size());
    for (std::size_t i = 0; i < mus.size(); ++i)
        vals[i] = free_characteristic(beta, mus[i]);

    std::vector<double> roots;
    std::vector<bool> flat(mus.size());
    for (std::size_t i = 0; i < mus.size(); ++i) {
        flat[i] = std::abs(vals[i]) < 1e-14;
        if (flat[i])
            roots.push_back(mus[i]);
    }
    for (std::size_t i = 0; i + 1 < mus.size(); ++i) {
        if (flat[i] || flat[i + 1] || (vals[i] > 0) == (vals[i + 1] > 0))
            continue;
        std::uintmax_t iters = 200;
        auto f = [&](double mu) { return free_characteristic(beta, mu); };
        auto [a, b] = boost::math::tools::toms748_solve(
            f, mus[i], mus[i + 1], vals[i], vals[i + 1],
            boost::math::tools::eps_tolerance<double>(52), iters);
        roots.push_back((a + b) / 2);
    }
    std::sort(roots.begin(), roots.end());
    if (roots.size() != 2)
        throw NumericalError("expected two free eigenvalues below 4, found " + std::to_string(roots.size()));
    return {roots[0], roots[1]};
}

/// Phase shifts delta_n (n >= 2) and the two lowest free eigenvalues.
class DeltaSequence {
public:
    DeltaSequence() = default;

    DeltaSequence(const BoundaryAngle& beta, std::size_t count, double tol = 1e-15)
        : beta_(beta), low_(free_low_modes(beta))
    {
        delta_.assign(std::max<std::size_t>(count, 2), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t n = 2; n < count; ++n)
            delta_[n] = solve_delta(beta, n, tol);
    }

    const BoundaryAngle& beta() const { return beta_; }
    std::size_t count() const { return delta_.size(); }
    double delta(std::size_t n) const
    {
        if (n < 2 || n >= delta_.size())
            throw ConfigurationError("phase shift index out of range");
        return delta_[n];
    }
    /// n + delta_n.
    double lambda0(std::size_t n) const { return double(n) + delta(n); }
    /// Free eigenvalue mu0_n for any n < count().
    double mu0(std::size_t n) const
    {
        if (n < 2)
            return low_[n];
        const double l = lambda0(n);
        return l * l;
    }
    const std::array<double, 2>& low_modes() const { return low_; }

private:
    BoundaryAngle beta_;
    std::array<double, 2> low_{};
    std::vector<double> delta_;
};

inline DeltaSequence make_delta_sequence(const BoundaryAngle& beta, std::size_t count, double tol = 1e-15)
{
    return DeltaSequence(beta, count, tol);
}

/// Spectral data of the free problem (q = 0) with the same boundary angle.
inline SpectralData unperturbed_spectrum(const DeltaSequence& delta, std::size_t count)
{
    if (count > delta.count())
        throw ConfigurationError("phase-shift sequence is shorter than the requested spectrum");
    SpectralData d;
    d.beta = delta.beta();
    d.mu.resize(count);
    d.norming.resize(count);
    for (std::size_t n = 0; n < count; ++n) {
        d.mu[n] = delta.mu0(n);
        d.norming[n] = free_norming(d.mu[n]);
    }
    return d;
}

inline SpectralData unperturbed_spectrum(const BoundaryAngle& beta, std::size_t count)
{
    return unperturbed_spectrum(DeltaSequence(beta, count), count);
}

/// Parameters of the two-term asymptotics: lambda_n = n + delta_n + c/(2(n+delta_n)) + l_n
/// and a_n = pi/(2(n+delta_n)^2) (1 + 2 s_n/(pi (n+delta_n))). Sequences are indexed by n;
/// entries below 2 are unused.
struct AsymptoticModel {
    double c = 0;
    std::vector<double> l;
    std::vector<double> s;
    std::optional<double> q_mean;
};

inline double asymptotic_lambda(const AsymptoticModel& m, const DeltaSequence& delta, std::size_t n)
{
    const double l0 = delta.lambda0(n);
    return l0 + m.c / (2 * l0) + (n < m.l.size() ? m.l[n] : 0.0);
}

inline double asymptotic_norming(const AsymptoticModel& m, const DeltaSequence& delta, std::size_t n)
{
    const double l0 = delta.lambda0(n);
    return pi / (2 * l0 * l0) * (1 + 2 * (n < m.s.size() ? m.s[n] : 0.0) / (pi * l0));
}

struct CFit {
    double c = 0;
    double slope = 0;      // coefficient A of the A/lambda0^2 correction
    double cauchy_gap = 0; // disagreement between fits over the two halves of the window
    bool converged = true;
    std::vector<double> l;
};

namespace detail {
inline std::pair<double, double> fit_const_plus_inv_sq(const std::vector<double>& l0, const std::vector<double>& y,
                                                       std::size_t lo, std::size_t hi)
{
    // least squares for y = c + A u with u = 1/l0^2
    double s1 = 0, su = 0, suu = 0, sy = 0, suy = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double u = 1 / (l0[i] * l0[i]);
        s1 += 1;
        su += u;
        suu += u * u;
        sy += y[i];
        suy += u * y[i];
    }
    const double det = s1 * suu - su * su;
    if (std::abs(det) < 1e-300 * (1 + s1 * suu) || hi - lo < 2)
        return {sy / s1, 0.0};
    return {(suu * sy - su * suy) / det, (s1 * suy - su * sy) / det};
}
} // namespace detail

/// Estimate c from c_n = 2 lambda0_n (lambda_n - lambda0_n) over the last third of the data,
/// fitting c + A/lambda0^2, and return the residual sequence l_n.
inline CFit fit_c(const SpectralData& data, const DeltaSequence& delta)
{
    const std::size_t N = data.count();
    if (N < 12)
        throw ConfigurationError("fit_c needs at least 12 eigenvalues");
    if (delta.count() < N)
        throw ConfigurationError("phase-shift sequence shorter than the data");
    std::vector<double> l0(N, 0), cn(N, 0);
    for (std::size_t n = 2; n < N; ++n) {
        l0[n] = delta.lambda0(n);
        cn[n] = 2 * l0[n] * (data.lambda(n) - l0[n]);
    }
    const std::size_t lo = N - N / 3, mid = lo + (N - lo) / 2;
    CFit r;
    std::tie(r.c, r.slope) = detail::fit_const_plus_inv_sq(l0, cn, lo, N);
    const double c1 = detail::fit_const_plus_inv_sq(l0, cn, lo, mid).first;
    const double c2 = detail::fit_const_plus_inv_sq(l0, cn, mid, N).first;
    r.cauchy_gap = std::abs(c1 - c2);
    r.converged = r.cauchy_gap <= 0.1 * std::max(std::abs(r.c), 1.0);
    r.l.assign(N, 0);
    for (std::size_t n = 2; n < N; ++n)
        r.l[n] = data.lambda(n) - l0[n] - r.c / (2 * l0[n]);
    return r;
}

/// s_n recovered from the norming constants.
inline std::vector<double> extract_s(const SpectralData& data, const DeltaSequence& delta)
{
    std::vector<double> s(data.count(), 0);
    for (std::size_t n = 2; n < data.count(); ++n) {
        const double l0 = delta.lambda0(n);
        s[n] = pi * l0 / 2 * (2 * data.norming[n] * l0 * l0 / pi - 1);
    }
    return s;
}

inline AsymptoticModel make_model(const SpectralData& data, const DeltaSequence& delta)
{
    const CFit f = fit_c(data, delta);
    return AsymptoticModel{f.c, f.l, extract_s(data, delta), std::nullopt};
}

enum class RemainderKind { l, s };

struct SeriesValue {
    double value = 0;
    double tail_bound = 0; // estimate of the omitted tail, +inf if the coefficients do not decay fast enough
};

/// l(t) = sum l_n sin(lambda0_n t) or s(t) = sum s_n/lambda0_n cos(lambda0_n t), n = 2 .. N-1.
inline SeriesValue remainder_series(const AsymptoticModel& m, const DeltaSequence& delta, double t, RemainderKind which)
{
    const std::vector<double>& seq = (which == RemainderKind::l) ? m.l : m.s;
    const std::size_t N = seq.size();
    SeriesValue r;
    std::vector<double> coef(N, 0);
    for (std::size_t n = 2; n < N; ++n) {
        const double l0 = delta.lambda0(n);
        if (which == RemainderKind::l) {
            coef[n] = seq[n];
            r.value += seq[n] * std::sin(l0 * t);
        } else {
            coef[n] = seq[n] / l0;
            r.value += coef[n] * std::cos(l0 * t);
        }
    }
    // power-law fit |coef_n| ~ C n^-p over the last ten terms
    const std::size_t lo = (N > 12) ? N - 10 : 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, k = 0;
    for (std::size_t n = lo; n < N; ++n) {
        const double a = std::abs(coef[n]);
        if (a == 0)
            continue;
        const double x = std::log(double(n)), y = std::log(a);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        k += 1;
    }
    if (k < 2) {
        r.tail_bound = 0;
        return r;
    }
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double logC = (sy - slope * sx) / k;
    const double p = -slope;
    if (p <= 1) {
        r.tail_bound = std::numeric_limits<double>::infinity();
        return r;
    }
    r.tail_bound = std::exp(logC) * std::pow(double(N) - 0.5, 1 - p) / (p - 1);
    return r;
}

/// sum_{n>=2} sin(lambda0_n x)/lambda0_n in closed-form-plus-correction form.
/// The correction series is summed until three consecutive terms fall below tol*(|S|+1).
class TBetaSeries {
public:
    explicit TBetaSeries(const BoundaryAngle& beta, double tol = 1e-14, std::size_t max_terms = 400000)
        : beta_(beta), tol_(tol), max_terms_(max_terms)
    {
        lambda0_.reserve(1024);
    }

    /// Value on [0, 2 pi]; at the ends this is the one-sided limit of the closed form.
    double evaluate(double x) const
    {
        const double cot = beta_.cot();
        const double t1 = pi / 2 - 2 * std::sin(x / 2) - 2.0 / 3 * std::sin(1.5 * x);
        const double t2 = x * cot / pi * ((pi * pi - pi * x) / 2 - 4 * std::cos(x / 2) - 4.0 / 9 * std::cos(1.5 * x));
        return t1 + t2 + correction(x);
    }

    double operator()(double x) const
    {
        if (!(x > 0 && x < 2 * pi))
            throw DomainError("closed form is valid on (0, 2 pi)");
        return evaluate(x);
    }

    /// Ensures phase shifts are cached up to max_terms (call before sharing across threads).
    void prepare() const { ensure(max_terms_); }

    double correction(double x) const
    {
        const double cot = beta_.cot();
        double s = 0;
        int small = 0;
        for (std::size_t n = 2; n < max_terms_; ++n) {
            ensure(n + 1);
            const double l0 = lambda0_[n];
            const double m = double(n) + 0.5;
            const double term = std::sin(l0 * x) / l0 - std::sin(m * x) / m - x * cot / pi * std::cos(m * x) / (m * m);
            s += term;
            if (std::abs(term) < tol_ * (std::abs(s) + 1)) {
                if (++small == 3)
                    break;
            } else {
                small = 0;
            }
        }
        return s;
    }

private:
    BoundaryAngle beta_;
    double tol_;
    std::size_t max_terms_;
    mutable std::vector<double> lambda0_;

    void ensure(std::size_t n) const
    {
        if (lambda0_.size() >= n)
            return;
        std::size_t target = std::max<std::size_t>(n, 2 * lambda0_.size());
        target = std::min(std::max(target, n), max_terms_);
        std::size_t k = lambda0_.size();
        lambda0_.resize(target);
        for (; k < target; ++k)
            lambda0_[k] = (k < 2) ? 0.0 : double(k) + solve_delta(beta_, k);
    }
};

/// sum_{n>=2} sin((n+delta_n) x)/(n+delta_n) for 0 < x < 2 pi.
inline double t_beta_closed_form(const BoundaryAngle& beta, double x, double tol = 1e-14)
{
    return TBetaSeries(beta, tol)(x);
}

struct RefinedAsymptoticsReport {
    std::size_t n_lo = 0, n_hi = 0; // inclusive range
    double q_mean = 0;
    double q_beta = 0; // constant in the norming-constant formula
    std::vector<double> lambda_residual;  // lambda_n - prediction
    std::vector<double> norming_residual; // a_n - prediction
    double lambda_scaled_max = 0, lambda_scaled_median = 0;
    double norming_scaled_max = 0, norming_scaled_median = 0;
    bool lambda_bounded = false;
    bool norming_bounded = false;
};

namespace detail {
inline std::pair<double, double> max_and_median(std::vector<double> v)
{
    if (v.empty())
        return {0, 0};
    const double mx = *std::max_element(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(k), v.end());
    double med = v[k];
    if (v.size() % 2 == 0) {
        const double lower = *std::max_element(v.begin(), v.begin() + std::ptrdiff_t(k));
        med = (med + lower) / 2;
    }
    return {mx, med};
}
} // namespace detail

/// Compares eigenvalues and norming constants of an absolutely continuous potential with the
/// third-order formulas; residual * n^3 should stay bounded (max <= 10 x median).
inline RefinedAsymptoticsReport refined_asymptotics_check(const Potential& q, const GridFunction& q_prime,
                                                          const BoundaryAngle& beta, const SpectralData& data,
                                                          std::size_t n_lo = 10, std::size_t n_hi = 0)
{
    if (n_hi == 0)
        n_hi = data.count() - 1;
    if (n_lo < 2 || n_hi >= data.count() || n_lo > n_hi)
        throw ConfigurationError("invalid index range for the refined asymptotics check");
    const DeltaSequence delta(beta, n_hi + 1);
    RefinedAsymptoticsReport r;
    r.n_lo = n_lo;
    r.n_hi = n_hi;
    r.q_mean = q.mean();
    const double q0 = Interpolant(q.function())(0.0);
    r.q_beta = 5 / pi * q.integral() + 2 * (q0 + beta.cot());
    const Grid& g = q_prime.grid();
    std::vector<double> lam_scaled, nor_scaled;
    for (std::size_t n = n_lo; n <= n_hi; ++n) {
        const double l0 = delta.lambda0(n);
        double i_l = 0, i_s = 0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double x = g.node(j), w = g.weight(j) * q_prime.value(j);
            i_l += w * std::sin(2 * l0 * x);
            i_s += w * (pi - x) * std::cos(2 * l0 * x);
        }
        const double ln = i_l / (4 * pi * l0 * l0);
        const double sn = i_s / 4;
        const double lam_pred = l0 + r.q_mean / (2 * l0) + ln;
        const double a_pred = pi / (2 * l0 * l0) * (1 + r.q_beta / (2 * l0 * l0) + 2 * sn / (pi * l0 * l0));
        r.lambda_residual.push_back(data.lambda(n) - lam_pred);
        r.norming_residual.push_back(data.norming[n] - a_pred);
        const double n3 = double(n) * double(n) * double(n);
        lam_scaled.push_back(std::abs(r.lambda_residual.back()) * n3);
        nor_scaled.push_back(std::abs(r.norming_residual.back()) * n3);
    }
    std::tie(r.lambda_scaled_max, r.lambda_scaled_median) = detail::max_and_median(lam_scaled);
    std::tie(r.norming_scaled_max, r.norming_scaled_median) = detail::max_and_median(nor_scaled);
    r.lambda_bounded = r.lambda_scaled_max <= 10 * r.lambda_scaled_median;
    r.norming_bounded = r.norming_scaled_max <= 10 * r.norming_scaled_median;
    return r;
}

} // namespace islp
