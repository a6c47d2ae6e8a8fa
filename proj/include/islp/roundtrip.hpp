#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "islp/forward.hpp"
#include "islp/inverse.hpp"

namespace islp {

struct RoundTripOptions {
    InverseOptions inverse{};
    ForwardOptions forward{};
};

struct RoundTripReport {
    double q_sup_error = 0;
    double q_l1_error = 0;
    double beta_gap = 0;       // |beta~ - beta|
    double cot_gap = 0;        // |cot beta~ - cot beta|
    double remark57_gap = 0;   // |cot beta~ - cot beta - (pi c - int q^)/2|
    double beta_tilde = 0;
    double cot_beta_tilde = 0;
    double c_fit = 0;
    double q_integral = 0;     // int of the recovered q over [0, pi]
    std::size_t count = 0;
    std::size_t n_h = 0;
    std::size_t n_quad = 0;
    std::size_t n_x = 0;
    std::pair<double, double> trim{0.05, pi};
    double seconds = 0;
    AdmissibilityReport admissibility;
    Potential q_hat;
};

namespace detail {
inline void compare_q(RoundTripReport& r, const Potential& q_hat, auto&& q_exact)
{
    const Grid& g = q_hat.function().grid();
    double sup = 0, l1 = 0;
    double prev_x = 0, prev_e = 0;
    bool have_prev = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.node(i);
        if (x < r.trim.first - 1e-12 || x > r.trim.second + 1e-12)
            continue;
        const double e = std::abs(q_hat.values()[i] - q_exact(x));
        sup = std::max(sup, e);
        if (have_prev)
            l1 += (x - prev_x) * (e + prev_e) / 2;
        prev_x = x;
        prev_e = e;
        have_prev = true;
    }
    r.q_sup_error = sup;
    r.q_l1_error = l1;
}
} // namespace detail

/// Inverse half of a round trip: data -> (q^, beta~) compared against a known q.
inline RoundTripReport roundtrip_from_data(const SpectralData& data, auto&& q_exact, const BoundaryAngle& beta,
                                           std::pair<double, double> trim, const RoundTripOptions& opt = {})
{
    const auto t0 = std::chrono::steady_clock::now();
    RoundTripReport r;
    r.trim = trim;
    r.count = data.count();
    r.n_h = opt.inverse.n_h;
    r.n_quad = opt.inverse.n_quad;
    r.n_x = opt.inverse.n_x;
    InverseOptions io = opt.inverse;
    io.run_consistency = false;
    const InverseResult inv = solve_inverse(data, io);
    r.admissibility = inv.admissibility;
    r.q_hat = inv.q.q;
    detail::compare_q(r, inv.q.q, q_exact);
    r.beta_tilde = inv.beta.beta_tilde;
    r.cot_beta_tilde = inv.beta.cot_beta_tilde;
    r.beta_gap = std::abs(r.beta_tilde - beta.value());
    r.cot_gap = std::abs(r.cot_beta_tilde - beta.cot());
    r.c_fit = data.c_fit;
    r.q_integral = inv.q.q.integral();
    r.remark57_gap = std::abs(r.cot_beta_tilde - beta.cot() - 0.5 * (pi * data.c_fit - r.q_integral));
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// forward solve -> validate -> inverse solve -> compare.
inline RoundTripReport roundtrip(const Potential& q, const BoundaryAngle& beta, std::size_t N,
                                 std::pair<double, double> trim = {0.05, pi}, const RoundTripOptions& opt = {})
{
    if (N < 16)
        throw ConfigurationError("round trip needs at least 16 eigenvalues");
    if (!(trim.first >= 0 && trim.second <= pi && trim.first < trim.second))
        throw ConfigurationError("trim interval must lie inside [0, pi]");
    const auto t0 = std::chrono::steady_clock::now();
    const ForwardSolver solver(q, opt.forward);
    const SpectralData data = solver.spectral_data(beta, N);
    const Interpolant qi(q.function());
    RoundTripReport r = roundtrip_from_data(data, [&](double x) { return qi(x); }, beta, trim, opt);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// ---------------------------------------------------------------- closed-form example

/// lambda_n = n + 1/2, a_0 = pi, a_n = pi/(2 (n + 1/2)^2) for n >= 1, beta = pi/2.
inline SpectralData closed_form_data(std::size_t count = 64)
{
    SpectralData d;
    d.beta = BoundaryAngle(pi / 2);
    for (std::size_t n = 0; n < count; ++n) {
        const double l = double(n) + 0.5;
        d.mu.push_back(l * l);
        d.norming.push_back(n == 0 ? pi : pi / (2 * l * l));
    }
    d.c_fit = 0;
    return d;
}

namespace closed_form {
inline double H(double t) { return 2 / pi * std::cos(t / 2); }
inline double F(double x, double t) { return 2 / pi * std::sin(x / 2) * std::sin(t / 2); }
inline double P(double x, double t) { return 4 * std::sin(x / 2) * std::sin(t / 2) / (2 * std::sin(x) - 2 * x - 2 * pi); }
inline double q(double x)
{
    const double d = std::sin(x) - x - pi;
    const double s = std::sin(x / 2);
    return 2 * std::sin(x) / d - 4 * (std::cos(x) - 1) * s * s / (d * d);
}
inline double cot_beta_tilde() { return 1 / pi; }
} // namespace closed_form

struct OracleCheck {
    std::string name;
    double error = 0;
    double tolerance = 0;
    bool pass() const { return error <= tolerance; }
};

struct ClosedFormReport {
    std::vector<OracleCheck> checks;
    double seconds = 0;
    InverseResult inverse;

    bool passed() const
    {
        for (const OracleCheck& c : checks)
            if (!c.pass())
                return false;
        return true;
    }
};

inline ClosedFormReport closed_form_oracle(std::size_t count = 64, const InverseOptions& opt = {})
{
    const auto t0 = std::chrono::steady_clock::now();
    ClosedFormReport rep;
    const SpectralData data = closed_form_data(count);
    rep.inverse = solve_inverse(data, opt);
    const InverseResult& r = rep.inverse;

    double eh = 0;
    for (int i = 0; i <= 400; ++i) {
        const double t = 2 * pi * i / 400;
        eh = std::max(eh, std::abs(r.F->h_table(t) - closed_form::H(t)));
    }
    rep.checks.push_back({"H", eh, 1e-10});

    double ef = 0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const double x = pi * i / 19, t = pi * j / 19;
            ef = std::max(ef, std::abs((*r.F)(x, t) - closed_form::F(x, t)));
        }
    rep.checks.push_back({"F", ef, 1e-10});

    double ep = 0;
    for (const KernelRow& row : r.field->rows())
        for (std::size_t k = 0; k < row.t.size(); ++k)
            ep = std::max(ep, std::abs(row.p[k] - closed_form::P(row.x, row.t[k])));
    ep = std::max(ep, std::abs(r.field->rows().back().diagonal - closed_form::P(pi, pi)));
    rep.checks.push_back({"P", ep, 1e-8});

    double eq = 0;
    const Grid& g = r.q.q.function().grid();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.node(i) >= 0.05)
            eq = std::max(eq, std::abs(r.q.q.values()[i] - closed_form::q(g.node(i))));
    rep.checks.push_back({"q", eq, 1e-4});

    rep.checks.push_back({"cot-beta", std::abs(r.beta.cot_beta_tilde - closed_form::cot_beta_tilde()), 1e-6});
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace islp
