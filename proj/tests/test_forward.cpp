#include <array>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "islp/forward.hpp"

using namespace islp;

namespace {

Potential sampled(double (*f)(double), std::size_t n = 2049)
{
    return Potential::sample(make_grid(n, RuleKind::uniform_simpson), f);
}

// Fixed-step classical RK4 for (phi, phi', int phi^2) with the solver's own potential.
std::array<double, 3> rk4_end(const ForwardSolver& s, double mu, int steps)
{
    using V = std::array<double, 3>;
    auto f = [&](double x, const V& y) {
        return V{y[1], (s.potential(std::clamp(x, 0.0, pi)) - mu) * y[0], y[0] * y[0]};
    };
    V y{0, 1, 0};
    const double h = pi / steps;
    for (int i = 0; i < steps; ++i) {
        const double x = i * h;
        const V k1 = f(x, y);
        V t;
        for (int j = 0; j < 3; ++j)
            t[j] = y[j] + h / 2 * k1[j];
        const V k2 = f(x + h / 2, t);
        for (int j = 0; j < 3; ++j)
            t[j] = y[j] + h / 2 * k2[j];
        const V k3 = f(x + h / 2, t);
        for (int j = 0; j < 3; ++j)
            t[j] = y[j] + h * k3[j];
        const V k4 = f(x + h, t);
        for (int j = 0; j < 3; ++j)
            y[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    return y;
}

} // namespace

TEST(Forward, FreeProblemRightAngle)
{
    const Potential q = sampled([](double) { return 0.0; }, 129);
    const BoundaryAngle b(pi / 2);
    const SpectralData d = ForwardSolver(q).spectral_data(b, 20);
    for (std::size_t n = 0; n < 20; ++n) {
        const double l = double(n) + 0.5;
        EXPECT_NEAR(d.mu[n], l * l, 1e-9) << n;
        EXPECT_NEAR(d.norming[n], pi / (2 * l * l), 1e-10) << n;
    }
}

TEST(Forward, FreeProblemOtherAngles)
{
    const Potential q = sampled([](double) { return 0.0; }, 129);
    for (double beta : {0.4, pi / 3, 2.0, 2.9}) {
        const BoundaryAngle b(beta);
        const SpectralData d = ForwardSolver(q).spectral_data(b, 30);
        const SpectralData f = unperturbed_spectrum(b, 30);
        for (std::size_t n = 0; n < 30; ++n) {
            EXPECT_NEAR(d.mu[n], f.mu[n], 1e-9 * (1 + std::abs(f.mu[n]))) << beta << " " << n;
            EXPECT_NEAR(d.norming[n], f.norming[n], 1e-10 * (1 + f.norming[n])) << beta << " " << n;
        }
    }
}

TEST(Forward, ConstantShift)
{
    const BoundaryAngle b(pi / 3);
    const Potential q = sampled([](double x) { return std::cos(x) + x * x / 10; });
    const Potential shifted = sampled([](double x) { return std::cos(x) + x * x / 10 + 2.5; });
    const Potential down = sampled([](double x) { return std::cos(x) + x * x / 10 - 7.0; });
    const std::vector<double> m0 = eigenvalues(q, b, 30);
    const std::vector<double> m1 = eigenvalues(shifted, b, 30);
    const std::vector<double> m2 = eigenvalues(down, b, 30);
    for (std::size_t n = 0; n < 30; ++n) {
        EXPECT_NEAR(m1[n], m0[n] + 2.5, 1e-8) << n;
        EXPECT_NEAR(m2[n], m0[n] - 7.0, 1e-8) << n;
    }
}

TEST(Forward, EndStateAgreesWithRk4Extrapolation)
{
    const Potential q = sampled([](double x) { return std::exp(-x) * std::sin(3 * x); });
    const ForwardSolver s(q);
    for (double mu : {-3.0, 0.4, 17.3, 150.0}) {
        const auto a = rk4_end(s, mu, 4000);
        const auto b = rk4_end(s, mu, 8000);
        const EndState e = s.end_state(mu);
        // Richardson for a fourth-order method
        const double phi = b[0] + (b[0] - a[0]) / 15, dphi = b[1] + (b[1] - a[1]) / 15, nrm = b[2] + (b[2] - a[2]) / 15;
        EXPECT_NEAR(e.phi, phi, 1e-8 * (1 + std::abs(phi))) << mu;
        EXPECT_NEAR(e.dphi, dphi, 1e-8 * (1 + std::abs(dphi))) << mu;
        EXPECT_NEAR(e.norm, nrm, 1e-8 * (1 + nrm)) << mu;
    }
}

TEST(Forward, WronskianDerivativeEqualsBetaTimesNorming)
{
    const BoundaryAngle b(1.0);
    const Potential q = sampled([](double x) { return 1 + std::cos(2 * x); });
    const ForwardSolver s(q);
    const std::vector<double> mu = s.eigenvalues(b, 8).mu;
    for (const EigenRecord& r : s.norming_constants(b, mu)) {
        const double h = 1e-4 * (1 + std::abs(r.mu));
        const double dw = (s.wronskian(b, r.mu + h) - s.wronskian(b, r.mu - h)) / (2 * h);
        EXPECT_NEAR(dw, r.ratio * r.norming, 1e-6 * (1 + std::abs(dw))) << r.index;
        EXPECT_NEAR(r.b, r.ratio * r.ratio * r.norming, 1e-15 * (1 + r.b));
    }
}

TEST(Forward, EigenfunctionsHaveNZeros)
{
    const BoundaryAngle b(2.3);
    const Potential q = sampled([](double x) { return 20 * std::sin(x) - 5; });
    const ForwardSolver s(q);
    const std::vector<double> mu = s.eigenvalues(b, 40).mu;
    for (std::size_t n = 0; n < mu.size(); ++n) {
        EXPECT_EQ(s.end_state(mu[n]).zeros, int(n));
        EXPECT_NEAR(s.characteristic(b, mu[n]), 0.0, 1e-8 * (1 + std::sqrt(std::abs(mu[n]))));
    }
}

TEST(Forward, NegativeEigenvaluesFromRobinEnd)
{
    // strongly negative cot(beta) pushes mu_0 below zero
    const BoundaryAngle b = BoundaryAngle::from_cot(-3.0);
    const Potential q = sampled([](double x) { return 0.5 * x; });
    const ForwardSolver s(q);
    const std::vector<double> mu = s.eigenvalues(b, 6).mu;
    EXPECT_LT(mu[0], 0.0);
    EXPECT_EQ(s.end_state(mu[0]).zeros, 0);
    EXPECT_GE(mu[0], s.mu_low(b));
}

TEST(Forward, ThreadCountDoesNotChangeResults)
{
    const BoundaryAngle b(pi / 3);
    const Potential q = sampled([](double x) { return std::cos(x); });
    ForwardOptions one, four;
    four.threads = 4;
    const SpectralData a = ForwardSolver(q, one).spectral_data(b, 24);
    const SpectralData c = ForwardSolver(q, four).spectral_data(b, 24);
    EXPECT_EQ(a.mu, c.mu);
    EXPECT_EQ(a.norming, c.norming);
}

TEST(Forward, TraceMatchesEndState)
{
    const Potential q = sampled([](double x) { return x * (pi - x); });
    const ForwardSolver s(q);
    for (RuleKind k : {RuleKind::uniform_simpson, RuleKind::gauss_legendre}) {
        const Grid g = make_grid(65, k);
        const SolutionTrace t = s.trace(7.0, g);
        ASSERT_EQ(t.phi.size(), g.size());
        if (k == RuleKind::uniform_simpson) {
            const EndState e = s.end_state(7.0);
            EXPECT_NEAR(t.phi.back(), e.phi, 1e-9);
            EXPECT_NEAR(t.norm.back(), e.norm, 1e-9);
            EXPECT_EQ(t.phi.front(), 0.0);
        }
    }
}

TEST(Forward, RejectsHugePotential)
{
    const Potential q = sampled([](double) { return 2e6; }, 33);
    EXPECT_THROW(ForwardSolver{q}, ConfigurationError);
}

TEST(Expansion, ConvergesForLinearFunction)
{
    const BoundaryAngle b(pi / 3);
    const Potential q = sampled([](double x) { return std::cos(x); });
    const ForwardSolver s(q);
    const Grid g = make_grid(1025, RuleKind::uniform_simpson);
    const GridFunction f = GridFunction::sample(g, [](double x) { return x; });
    const std::vector<double> mu = s.eigenvalues(b, 64).mu;
    const std::vector<EigenRecord> rec = s.norming_constants(b, mu);
    double prev_inner = 1e300, prev_full = 1e300;
    for (std::size_t N : {8u, 16u, 32u, 64u}) {
        const GridFunction e = expand(s, f, rec, N);
        double inner = 0, full = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double err = std::abs(e.value(i) - f.value(i));
            full = std::max(full, err);
            if (g.node(i) >= 0.3)
                inner = std::max(inner, err);
        }
        EXPECT_LT(inner, prev_inner) << N;
        EXPECT_LT(full, prev_full) << N;
        prev_inner = inner;
        prev_full = full;
    }
}
