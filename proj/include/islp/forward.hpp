#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "islp/asymptotics.hpp"
#include "islp/core.hpp"
#include "islp/parallel.hpp"

namespace islp {

struct ForwardOptions {
    double abs_tol = 1e-11;
    double rel_tol = 1e-11;
    std::size_t resample_nodes = 4097; // potentials on Gauss-Legendre grids are resampled to this many uniform nodes
    std::size_t threads = 1;
};

/// phi, phi' and int_0^x phi^2 sampled on a grid.
struct SolutionTrace {
    Grid grid;
    double mu = 0;
    std::vector<double> phi, dphi, norm;
};

/// Values at x = pi together with the number of sign changes of phi on (0, pi).
struct EndState {
    double phi = 0, dphi = 0, norm = 0;
    int zeros = 0;
};

struct EigenRecord {
    std::size_t index = 0;
    double mu = 0;
    double norming = 0; // a_n = int phi^2
    double ratio = 0;   // beta_n = psi(pi)/phi(pi)
    double b = 0;       // beta_n^2 a_n
};

struct EigenvalueResult {
    std::vector<double> mu;
    double mu_low = 0;          // lower bound used to seed the search
    std::size_t window_from = 0; // every lambda_n, n >= window_from, lies within 0.45 of n + delta_n
};

/// Shooting solver for -y'' + q y = mu y, y(0) = 0, y'(0) = 1.
class ForwardSolver {
private:
    using State = std::array<double, 3>;
    ForwardOptions opt_;
    CubicSpline spline_;
    double qmin_ = 0, mean_ = 0;

    auto rhs(double mu) const
    {
        return [this, mu](const State& y, State& dy, double x) {
            dy[0] = y[1];
            dy[1] = (spline_(std::clamp(x, 0.0, pi)) - mu) * y[0];
            dy[2] = y[0] * y[0];
        };
    }

    double max_step(double mu) const { return 0.1 / std::sqrt(std::max(std::abs(mu - qmin_), 1.0)); }
    double initial_step(double mu) const { return max_step(mu) / 4; }

    auto make_stepper(double mu) const
    {
        namespace ode = boost::numeric::odeint;
        return ode::make_controlled(opt_.abs_tol, opt_.rel_tol, max_step(mu), ode::runge_kutta_fehlberg78<State>());
    }


public:
    explicit ForwardSolver(const Potential& q, ForwardOptions opt = {})
        : opt_(opt), mean_(q.mean())
    {
        for (double v : q.values())
            if (std::abs(v) > 1e6)
                throw ConfigurationError("potential sample exceeds 1e6 in magnitude");
        const Grid& g = q.grid();
        if (g.kind() == RuleKind::gauss_legendre) {
            const Interpolant ip(q.function());
            const Grid u = make_grid(opt_.resample_nodes, RuleKind::uniform_trapezoid);
            std::vector<double> v(u.size());
            for (std::size_t i = 0; i < u.size(); ++i)
                v[i] = ip(u.node(i));
            spline_ = CubicSpline(u.nodes(), v);
            qmin_ = *std::min_element(v.begin(), v.end());
        } else {
            spline_ = CubicSpline(g.nodes(), q.values());
            qmin_ = *std::min_element(q.values().begin(), q.values().end());
        }
    }

    double potential(double x) const { return spline_(x); }
    double mean() const { return mean_; }
    double min_potential() const { return qmin_; }

    EndState end_state(double mu) const
    {
        namespace ode = boost::numeric::odeint;
        State y{0.0, 1.0, 0.0};
        auto stepper = make_stepper(mu);
        EndState e;
        int sign = 0;
        auto observer = [&](const State& s, double x) {
            if (x >= pi)
                return;
            const int sg = (s[0] > 0) - (s[0] < 0);
            if (sg != 0) {
                if (sign != 0 && sg != sign)
                    ++e.zeros;
                sign = sg;
            }
        };
        ode::integrate_adaptive(stepper, rhs(mu), y, 0.0, pi, initial_step(mu), observer);
        // a sign flip inside the last step is not seen by the observer
        const int last = (y[0] > 0) - (y[0] < 0);
        if (sign != 0 && last != 0 && last != sign)
            ++e.zeros;
        e.phi = y[0];
        e.dphi = y[1];
        e.norm = y[2];
        return e;
    }

    SolutionTrace trace(double mu, const Grid& grid) const
    {
        namespace ode = boost::numeric::odeint;
        if (grid.lower() != 0.0 || std::abs(grid.upper() - pi) > 1e-12)
            throw ConfigurationError("trace grid must cover [0, pi]");
        std::vector<double> times;
        const bool prepend = grid.node(0) > 0;
        if (prepend)
            times.push_back(0.0);
        times.insert(times.end(), grid.nodes().begin(), grid.nodes().end());
        SolutionTrace t;
        t.grid = grid;
        t.mu = mu;
        State y{0.0, 1.0, 0.0};
        auto stepper = make_stepper(mu);
        std::size_t k = 0;
        auto observer = [&](const State& s, double) {
            if (prepend && k++ == 0)
                return;
            t.phi.push_back(s[0]);
            t.dphi.push_back(s[1]);
            t.norm.push_back(s[2]);
        };
        ode::integrate_times(stepper, rhs(mu), y, times.begin(), times.end(), initial_step(mu), observer);
        return t;
    }

    /// phi(pi) cos(beta) + phi'(pi) sin(beta); the Wronskian with the right-end solution is its negative.
    double characteristic(const BoundaryAngle& beta, double mu) const
    {
        const EndState e = end_state(mu);
        return e.phi * beta.cos() + e.dphi * beta.sin();
    }

    double wronskian(const BoundaryAngle& beta, double mu) const { return -characteristic(beta, mu); }

    /// Heuristic lower bound for mu_0.
    double mu_low(const BoundaryAngle& beta) const
    {
        const double h = std::max(0.0, -beta.cot());
        return 1.1 * std::min(0.0, qmin_) - 1 - 1.1 * h * h;
    }

    EigenvalueResult eigenvalues(const BoundaryAngle& beta, std::size_t count) const
    {
        if (count == 0)
            throw ConfigurationError("eigenvalue count must be positive");
        const DeltaSequence delta(beta, std::max<std::size_t>(count, 3));
        EigenvalueResult r;
        r.mu_low = mu_low(beta);
        r.mu.assign(count, 0);
        parallel_for(count, opt_.threads, [&](std::size_t n) { r.mu[n] = eigenvalue(beta, delta, n, r.mu_low); });
        for (std::size_t n = 1; n < count; ++n)
            if (!(r.mu[n] > r.mu[n - 1]))
                throw NumericalError("eigenvalues not strictly increasing at index " + std::to_string(n));
        r.window_from = count;
        for (std::size_t n = count; n-- > 2;) {
            if (std::abs(std::sqrt(std::max(r.mu[n], 0.0)) - delta.lambda0(n)) > 0.45)
                break;
            r.window_from = n;
        }
        return r;
    }

    std::vector<EigenRecord> norming_constants(const BoundaryAngle& beta, const std::vector<double>& mus) const
    {
        std::vector<EigenRecord> out(mus.size());
        parallel_for(mus.size(), opt_.threads, [&](std::size_t n) {
            const EndState e = end_state(mus[n]);
            if (!(std::abs(e.phi) > 1e-300))
                throw NumericalError("eigenfunction vanishes at the right end for index " + std::to_string(n));
            EigenRecord& r = out[n];
            r.index = n;
            r.mu = mus[n];
            r.norming = e.norm;
            r.ratio = beta.sin() / e.phi;
            r.b = r.ratio * r.ratio * r.norming;
        });
        return out;
    }

    SpectralData spectral_data(const BoundaryAngle& beta, std::size_t count) const
    {
        SpectralData d;
        d.beta = beta;
        d.mu = eigenvalues(beta, count).mu;
        for (const EigenRecord& r : norming_constants(beta, d.mu))
            d.norming.push_back(r.norming);
        if (count >= 12)
            d.c_fit = fit_c(d, DeltaSequence(beta, count)).c;
        else
            d.c_fit = mean_;
        return d;
    }

    /// theta(pi) - theta_beta for a Pruefer angle with scale s; compare against n pi.
    double pruefer_offset(const BoundaryAngle& beta, double mu, EndState* out = nullptr) const
    {
        const EndState e = end_state(mu);
        if (out)
            *out = e;
        const double s = std::sqrt(std::max(mu - qmin_, 1.0));
        const double sg = (e.zeros % 2) ? -1.0 : 1.0;
        const double theta = e.zeros * pi + std::atan2(sg * s * e.phi, sg * e.dphi);
        return theta - std::atan2(s * beta.sin(), -beta.cos());
    }

private:
    double eigenvalue(const BoundaryAngle& beta, const DeltaSequence& delta, std::size_t n, double mu_low) const
    {
        const double target = double(n) * pi;
        double lo, hi;
        const std::size_t m = std::max<std::size_t>(n, 2);
        const double l0 = delta.lambda0(m);
        const double lc = l0 + mean_ / (2 * l0);
        if (n >= 2 && lc > 0.45) {
            lo = (lc - 0.45) * (lc - 0.45);
            hi = (lc + 0.45) * (lc + 0.45);
        } else {
            lo = mu_low;
            hi = std::max(lc - 0.45, 0.5);
            hi *= hi;
            hi += std::max(0.0, mean_);
        }
        EndState elo, ehi;
        double w = 1 + std::abs(lo);
        for (int it = 0; pruefer_offset(beta, lo, &elo) >= target; ++it) {
            if (it > 200)
                throw NumericalError("could not bracket eigenvalue " + std::to_string(n) + " from below");
            hi = std::min(hi, lo);
            lo -= w;
            w *= 2;
        }
        w = 1 + std::abs(hi);
        for (int it = 0; pruefer_offset(beta, hi, &ehi) <= target; ++it) {
            if (it > 200)
                throw NumericalError("could not bracket eigenvalue " + std::to_string(n) + " from above");
            lo = std::max(lo, hi);
            elo = ehi;
            hi += w;
            w *= 2;
        }
        // bisection on the angle keeps exactly one eigenvalue in the bracket
        while (hi - lo > 1e-6 * (1 + std::abs(lo + hi) / 2)) {
            const double mid = (lo + hi) / 2;
            EndState e;
            if (pruefer_offset(beta, mid, &e) > target) {
                hi = mid;
                ehi = e;
            } else {
                lo = mid;
                elo = e;
            }
        }
        // Illinois iteration on the characteristic function
        const double cb = beta.cos(), sb = beta.sin();
        double flo = elo.phi * cb + elo.dphi * sb;
        double fhi = ehi.phi * cb + ehi.dphi * sb;
        if (flo == 0)
            return lo;
        if (fhi == 0)
            return hi;
        if ((flo > 0) == (fhi > 0))
            throw NumericalError("characteristic function does not change sign around eigenvalue " + std::to_string(n));
        double x = lo, prev = hi;
        int side = 0;
        for (int it = 0; it < 100; ++it) {
            x = (lo * fhi - hi * flo) / (fhi - flo);
            if (!(x > lo && x < hi))
                x = (lo + hi) / 2;
            const EndState e = end_state(x);
            const double fx = e.phi * cb + e.dphi * sb;
            if (fx == 0 || std::abs(x - prev) <= 1e-15 * (1 + std::abs(x))
                || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * (1 + std::abs(x)))
                break;
            prev = x;
            if ((fx > 0) == (fhi > 0)) {
                hi = x;
                fhi = fx;
                if (side == 1)
                    flo /= 2;
                side = 1;
            } else {
                lo = x;
                flo = fx;
                if (side == -1)
                    fhi /= 2;
                side = -1;
            }
        }
        const EndState e = end_state(x);
        if (e.zeros != int(n))
            throw NumericalError("eigenfunction " + std::to_string(n) + " has " + std::to_string(e.zeros)
                                 + " interior zeros; a root was missed");
        return x;
    }
};

inline SolutionTrace shoot(const Potential& q, double mu, const Grid& grid)
{
    return ForwardSolver(q).trace(mu, grid);
}

inline SolutionTrace shoot(const Potential& q, double mu, std::size_t n_nodes = 1025)
{
    return shoot(q, mu, make_grid(n_nodes, RuleKind::uniform_simpson));
}

inline std::vector<double> eigenvalues(const Potential& q, const BoundaryAngle& beta, std::size_t count,
                                       ForwardOptions opt = {})
{
    return ForwardSolver(q, opt).eigenvalues(beta, count).mu;
}

inline std::vector<EigenRecord> norming_constants(const Potential& q, const BoundaryAngle& beta,
                                                  const std::vector<double>& mus, ForwardOptions opt = {})
{
    return ForwardSolver(q, opt).norming_constants(beta, mus);
}

/// Partial sum of the eigenfunction expansion of f with the first N eigenpairs,
/// coefficients c_n = (1/a_n) int f phi_n.
inline GridFunction expand(const ForwardSolver& solver, const GridFunction& f, const std::vector<EigenRecord>& records,
                           std::size_t N)
{
    if (N > records.size())
        throw ConfigurationError("expansion asks for more eigenpairs than supplied");
    const Grid& g = f.grid();
    std::vector<double> sum(g.size(), 0);
    for (std::size_t n = 0; n < N; ++n) {
        const SolutionTrace t = solver.trace(records[n].mu, g);
        double c = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            c += g.weight(i) * f.value(i) * t.phi[i];
        c /= records[n].norming;
        for (std::size_t i = 0; i < g.size(); ++i)
            sum[i] += c * t.phi[i];
    }
    return GridFunction(g, std::move(sum));
}

} // namespace islp
