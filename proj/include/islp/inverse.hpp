#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "islp/asymptotics.hpp"
#include "islp/core.hpp"
#include "islp/forward.hpp"
#include "islp/parallel.hpp"

namespace islp {

// ---------------------------------------------------------------- admissibility

enum class Status { pass, warn, fail };

inline std::string_view to_string(Status s)
{
    switch (s) {
    case Status::pass: return "pass";
    case Status::warn: return "warn";
    case Status::fail: return "fail";
    }
    return "?";
}

struct Check {
    std::string name;
    Status status = Status::pass;
    std::string detail;
};

struct AdmissibilityReport {
    std::vector<Check> checks;
    double c_fit = std::numeric_limits<double>::quiet_NaN();
    double cauchy_gap = std::numeric_limits<double>::quiet_NaN();

    bool hard_fail() const
    {
        return std::any_of(checks.begin(), checks.end(), [](const Check& c) { return c.status == Status::fail; });
    }
    Status overall() const
    {
        Status s = Status::pass;
        for (const Check& c : checks)
            s = std::max(s, c.status);
        return s;
    }
    const Check* find(std::string_view name) const
    {
        for (const Check& c : checks)
            if (c.name == name)
                return &c;
        return nullptr;
    }
};

namespace detail {
// Largest |v_n| over the first and the last quarter of [2, N).
inline std::pair<double, double> quarter_maxima(const std::vector<double>& v)
{
    const std::size_t N = v.size(), span = N - 2, q = std::max<std::size_t>(span / 4, 1);
    double first = 0, last = 0;
    for (std::size_t n = 2; n < 2 + q; ++n)
        first = std::max(first, std::abs(v[n]));
    for (std::size_t n = N - q; n < N; ++n)
        last = std::max(last, std::abs(v[n]));
    return {first, last};
}
} // namespace detail

/// Distinctness, positivity and the two tail conditions on the data.
inline AdmissibilityReport validate(const SpectralData& data, const BoundaryAngle& beta)
{
    AdmissibilityReport r;
    const std::size_t N = data.count();
    if (data.norming.size() != N) {
        r.checks.push_back({"shape", Status::fail, "mu and norming arrays differ in length"});
        return r;
    }
    if (N < 12) {
        r.checks.push_back({"count", Status::fail, "at least 12 eigenvalues are needed, got " + std::to_string(N)});
        return r;
    }
    r.checks.push_back({"count", Status::pass, std::to_string(N) + " pairs"});

    Check distinct{"distinct", Status::pass, "mu strictly increasing"};
    for (std::size_t n = 0; n < N; ++n) {
        if (!std::isfinite(data.mu[n])) {
            distinct = {"distinct", Status::fail, "mu_" + std::to_string(n) + " is not finite"};
            break;
        }
        if (n > 0 && !(data.mu[n] > data.mu[n - 1])) {
            distinct = {"distinct", Status::fail,
                        "mu_" + std::to_string(n) + " does not exceed mu_" + std::to_string(n - 1)};
            break;
        }
    }
    r.checks.push_back(distinct);

    Check positive{"positive", Status::pass, "all a_n > 0"};
    for (std::size_t n = 0; n < N; ++n)
        if (!(data.norming[n] > 0) || !std::isfinite(data.norming[n])) {
            positive = {"positive", Status::fail, "a_" + std::to_string(n) + " is not positive"};
            break;
        }
    r.checks.push_back(positive);

    if (std::abs(data.beta.value() - beta.value()) > 1e-12)
        r.checks.push_back({"angle", Status::warn, "data carries a different boundary angle"});

    if (r.hard_fail())
        return r;

    const DeltaSequence delta(beta, N);
    const CFit fit = fit_c(data, delta);
    r.c_fit = fit.c;
    r.cauchy_gap = fit.cauchy_gap;
    r.checks.push_back({"c-fit", fit.converged ? Status::pass : Status::warn,
                        "c = " + std::to_string(fit.c) + ", half-window gap " + std::to_string(fit.cauchy_gap)});

    std::vector<double> nl(N, 0);
    for (std::size_t n = 2; n < N; ++n)
        nl[n] = double(n) * fit.l[n];
    const auto [l_first, l_last] = detail::quarter_maxima(nl);
    r.checks.push_back({"l-tail", (l_last <= l_first + 1e-12) ? Status::pass : Status::warn,
                        "max |n l_n|: first quarter " + std::to_string(l_first) + ", last quarter "
                            + std::to_string(l_last)});

    const std::vector<double> s = extract_s(data, delta);
    const auto [s_first, s_last] = detail::quarter_maxima(s);
    r.checks.push_back({"s-tail", (s_last <= s_first + 1e-12) ? Status::pass : Status::warn,
                        "max |s_n|: first quarter " + std::to_string(s_first) + ", last quarter "
                            + std::to_string(s_last)});
    return r;
}

// ---------------------------------------------------------------- H and F

enum class HBranch { regular, zero_in_data, zero_in_unperturbed, zero_in_both };

inline std::string_view to_string(HBranch b)
{
    switch (b) {
    case HBranch::regular: return "regular";
    case HBranch::zero_in_data: return "zero-in-data";
    case HBranch::zero_in_unperturbed: return "zero-in-unperturbed";
    case HBranch::zero_in_both: return "zero-in-both";
    }
    return "?";
}

struct HOptions {
    std::size_t n_h = 2000;
    bool accelerate = true;
    double zero_threshold = 1e-10;
    double t_beta_tol = 1e-12;
};

/// H(t) = sum_n [cos(lambda_n t)/(a_n mu_n) - cos(lambda0_n t)/(a0_n mu0_n)] over n < N_H.
/// Pairs beyond the supplied data use mu_n = mu0_n + c, a_n = a0_n.
class HFunction {
public:
    HFunction(const SpectralData& data, const SpectralData& unperturbed, HOptions opt = {})
        : opt_(opt), beta_(data.beta), c_(data.c_fit), tb_(data.beta, opt.t_beta_tol, 200000)
    {
        const std::size_t nh = opt_.n_h;
        if (nh < 2)
            throw ConfigurationError("H truncation must be at least 2");
        if (unperturbed.count() < nh)
            throw ConfigurationError("unperturbed spectrum has " + std::to_string(unperturbed.count())
                                     + " terms, truncation needs " + std::to_string(nh));
        if (data.count() == 0 || data.norming.size() != data.count())
            throw ConfigurationError("spectral data is empty or malformed");
        mu_.resize(nh);
        a_.resize(nh);
        mu0_.assign(unperturbed.mu.begin(), unperturbed.mu.begin() + std::ptrdiff_t(nh));
        a0_.assign(unperturbed.norming.begin(), unperturbed.norming.begin() + std::ptrdiff_t(nh));
        for (std::size_t n = 0; n < nh; ++n) {
            const bool given = n < data.count();
            mu_[n] = given ? data.mu[n] : mu0_[n] + c_;
            a_[n] = given ? data.norming[n] : a0_[n];
        }
        for (std::size_t n = 0; n < nh; ++n) {
            if (is_zero_mu(mu_[n], opt_.zero_threshold)) {
                if (zd_)
                    throw ConfigurationError("data contains two zero eigenvalues");
                zd_ = n;
            }
            if (is_zero_mu(mu0_[n], opt_.zero_threshold))
                zu_ = n;
        }
        branch_ = zd_ ? (zu_ ? HBranch::zero_in_both : HBranch::zero_in_data)
                      : (zu_ ? HBranch::zero_in_unperturbed : HBranch::regular);
        if (accelerated())
            tb_.prepare();
    }

    HBranch branch() const { return branch_; }
    std::size_t n_h() const { return opt_.n_h; }
    double c() const { return c_; }
    const BoundaryAngle& beta() const { return beta_; }
    bool accelerated() const { return opt_.accelerate && c_ != 0; }
    double mu(std::size_t n) const { return mu_.at(n); }
    double norming(std::size_t n) const { return a_.at(n); }
    double mu0(std::size_t n) const { return mu0_.at(n); }
    double norming0(std::size_t n) const { return a0_.at(n); }
    std::optional<std::size_t> zero_in_data() const { return zd_; }
    std::optional<std::size_t> zero_in_unperturbed() const { return zu_; }

    /// H(t) for t in [0, 2 pi].
    double operator()(double t) const
    {
        if (!(t >= 0 && t <= 2 * pi + 1e-12))
            throw DomainError("H is evaluated on [0, 2 pi]");
        const bool acc = accelerated();
        double s = 0;
        for (std::size_t n = 0; n < opt_.n_h; ++n) {
            double term = 0;
            if (!(zd_ && *zd_ == n))
                term += cos_mu(mu_[n], t) / (a_[n] * mu_[n]);
            if (!(zu_ && *zu_ == n))
                term -= cos_mu(mu0_[n], t) / (a0_[n] * mu0_[n]);
            if (acc && n >= 2) {
                const double l0 = std::sqrt(mu0_[n]);
                term += c_ * t / pi * std::sin(l0 * t) / l0;
            }
            s += term;
        }
        switch (branch_) {
        case HBranch::regular:
            break;
        case HBranch::zero_in_data:
            s -= t * t / (2 * a_[*zd_]);
            break;
        case HBranch::zero_in_unperturbed:
            s += t * t / (2 * a0_[*zu_]);
            break;
        case HBranch::zero_in_both:
            s += (1 / a0_[*zu_] - 1 / a_[*zd_]) * t * t / 2;
            break;
        }
        if (acc && t > 0)
            s -= c_ * t / pi * tb_.evaluate(std::min(t, 2 * pi));
        return s;
    }

    /// Rough size of what the unaccelerated sum leaves out at t.
    double direct_tail_bound(double t) const
    {
        const double nh = double(opt_.n_h);
        const double st = std::abs(std::sin(t / 2));
        const double osc = (st > 0) ? std::abs(c_) * t / (pi * nh * st) : std::abs(c_) * t / pi;
        return osc + (std::abs(c_) * (1 + std::abs(beta_.cot())) + c_ * c_ * t * t) / nh;
    }

    /// F(x, t) from the product series, truncated at N_H.
    double series_F(double x, double t) const
    {
        double s = 0;
        for (std::size_t n = 0; n < opt_.n_h; ++n) {
            if (!(zd_ && *zd_ == n))
                s += sin_mu(mu_[n], x) * sin_mu(mu_[n], t) / a_[n];
            if (!(zu_ && *zu_ == n))
                s -= sin_mu(mu0_[n], x) * sin_mu(mu0_[n], t) / a0_[n];
        }
        switch (branch_) {
        case HBranch::regular:
            break;
        case HBranch::zero_in_data:
            s += x * t / a_[*zd_];
            break;
        case HBranch::zero_in_unperturbed:
            s -= x * t / a0_[*zu_];
            break;
        case HBranch::zero_in_both:
            s += (1 / a_[*zd_] - 1 / a0_[*zu_]) * x * t;
            break;
        }
        return s;
    }

private:
    HOptions opt_;
    BoundaryAngle beta_;
    double c_;
    TBetaSeries tb_;
    std::vector<double> mu_, a_, mu0_, a0_;
    std::optional<std::size_t> zd_, zu_;
    HBranch branch_ = HBranch::regular;
};

inline std::shared_ptr<const HFunction> build_H(const SpectralData& data, const BoundaryAngle& beta, std::size_t n_h,
                                                bool accelerate = true)
{
    SpectralData d = data;
    d.beta = beta;
    HOptions o;
    o.n_h = n_h;
    o.accelerate = accelerate;
    return std::make_shared<const HFunction>(d, unperturbed_spectrum(beta, n_h), o);
}

/// F(x, t) = (H(|x - t|) - H(x + t)) / 2 with H tabulated on [0, 2 pi] and splined.
class FKernel {
public:
    explicit FKernel(std::shared_ptr<const HFunction> h, std::size_t table_nodes = 4097, std::size_t threads = 0)
        : h_(std::move(h))
    {
        if (!h_)
            throw ConfigurationError("F needs an H function");
        if (table_nodes < 65)
            throw ConfigurationError("H table needs at least 65 nodes");
        const Grid g = make_grid(table_nodes, RuleKind::uniform_trapezoid, 0.0, 2 * pi);
        std::vector<double> v(table_nodes);
        parallel_for(table_nodes, threads, [&](std::size_t i) { v[i] = (*h_)(g.node(i)); });
        table_ = CubicSpline(g.nodes(), v);
    }

    const HFunction& H() const { return *h_; }
    double h_table(double t) const { return table_(t); }
    double h_table_derivative(double t) const { return table_.derivative(t); }

    double operator()(double x, double t) const { return 0.5 * (table_(std::abs(x - t)) - table_(x + t)); }

    /// dF/dx.
    double dx(double x, double t) const
    {
        const double d = x - t;
        const double sg = (d > 0) - (d < 0);
        return 0.5 * (sg * table_.derivative(std::abs(d)) - table_.derivative(x + t));
    }

private:
    std::shared_ptr<const HFunction> h_;
    CubicSpline table_;
};

inline std::shared_ptr<const FKernel> build_F(std::shared_ptr<const HFunction> h, std::size_t table_nodes = 4097,
                                              std::size_t threads = 0)
{
    return std::make_shared<const FKernel>(std::move(h), table_nodes, threads);
}

// ---------------------------------------------------------------- Gelfand-Levitan rows

/// P(x, .) at Gauss nodes on [0, x], together with dP/dx and the diagonal value.
struct KernelRow {
    double x = 0;
    std::vector<double> t, w; // quadrature on [0, x]
    std::vector<double> p, px;
    double diagonal = 0;  // P(x, x)
    double condition = 1; // 1-norm condition estimate of I + F
    double residual = 0;  // max-norm residual of the discrete system
};

inline KernelRow solve_gl(const FKernel& F, double x, const Grid& quad, double max_condition = 1e8)
{
    if (!(x > 0 && x <= pi + 1e-12))
        throw DomainError("Gelfand-Levitan row needs x in (0, pi]");
    if (quad.size() < 16)
        throw ConfigurationError("Gelfand-Levitan quadrature needs at least 16 nodes");
    if (std::abs(quad.lower()) > 1e-14 || std::abs(quad.upper() - x) > 1e-12 * (1 + x))
        throw ConfigurationError("quadrature must cover [0, x]");
    const Eigen::Index n = Eigen::Index(quad.size());
    KernelRow r;
    r.x = x;
    r.t.assign(quad.nodes().begin(), quad.nodes().end());
    r.w.assign(quad.weights().begin(), quad.weights().end());
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd f(n), fx(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k)
            A(j, k) = (j == k ? 1.0 : 0.0) + r.w[std::size_t(k)] * F(r.t[std::size_t(k)], r.t[std::size_t(j)]);
        f(j) = F(x, r.t[std::size_t(j)]);
        fx(j) = F.dx(x, r.t[std::size_t(j)]);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const double rc = lu.rcond();
    r.condition = rc > 0 ? 1 / rc : std::numeric_limits<double>::infinity();
    if (!(r.condition <= max_condition))
        throw IllPosedError("Gelfand-Levitan system at x = " + std::to_string(x) + " has condition estimate "
                            + std::to_string(r.condition));
    const Eigen::VectorXd p = lu.solve(-f);
    r.residual = (A * p + f).cwiseAbs().maxCoeff();
    r.p.assign(p.data(), p.data() + n);
    double s = 0;
    for (Eigen::Index k = 0; k < n; ++k)
        s += r.w[std::size_t(k)] * r.p[std::size_t(k)] * F(r.t[std::size_t(k)], x);
    r.diagonal = -F(x, x) - s;
    const Eigen::VectorXd px = lu.solve(-(fx + r.diagonal * f));
    r.px.assign(px.data(), px.data() + n);
    return r;
}

inline KernelRow solve_gl(const FKernel& F, double x, std::size_t n_quad = 96)
{
    return solve_gl(F, x, make_grid(n_quad, RuleKind::gauss_legendre, 0.0, x, 16));
}

/// Rows of P for every node of an x-grid.
class KernelField {
public:
    KernelField(std::shared_ptr<const FKernel> F, Grid x_grid, std::vector<KernelRow> rows)
        : F_(std::move(F)), grid_(std::move(x_grid)), rows_(std::move(rows))
    {
    }

    const Grid& grid() const { return grid_; }
    const FKernel& kernel() const { return *F_; }
    const std::vector<KernelRow>& rows() const { return rows_; }
    const KernelRow& row(std::size_t i) const { return rows_.at(i); }

    std::vector<double> diagonal() const
    {
        std::vector<double> d;
        for (const KernelRow& r : rows_)
            d.push_back(r.diagonal);
        return d;
    }

    double condition_max() const
    {
        double c = 1;
        for (const KernelRow& r : rows_)
            c = std::max(c, r.condition);
        return c;
    }

    /// Nystrom interpolant of row i at any t in [0, x_i].
    double value(std::size_t i, double t) const
    {
        const KernelRow& r = rows_.at(i);
        if (r.t.empty())
            return 0;
        double s = 0;
        for (std::size_t k = 0; k < r.t.size(); ++k)
            s += r.w[k] * r.p[k] * (*F_)(r.t[k], t);
        return -(*F_)(r.x, t) - s;
    }

private:
    std::shared_ptr<const FKernel> F_;
    Grid grid_;
    std::vector<KernelRow> rows_;
};

inline KernelField solve_kernel_field(std::shared_ptr<const FKernel> F, const Grid& x_grid, std::size_t n_quad = 96,
                                      std::size_t threads = 0)
{
    std::vector<KernelRow> rows(x_grid.size());
    parallel_for(x_grid.size(), threads, [&](std::size_t i) {
        const double x = x_grid.node(i);
        if (x <= 0)
            rows[i] = KernelRow{};
        else
            rows[i] = solve_gl(*F, x, n_quad);
    });
    return KernelField(std::move(F), x_grid, std::move(rows));
}

// ---------------------------------------------------------------- q, phi, beta

struct QRecovery {
    Potential q;
    CubicSpline diagonal; // spline through P(x_i, x_i)
    double roughness = 0; // max gap between spline slope and centred differences, relative to max |q|
    bool rough = false;
};

/// q = 2 d/dx P(x, x) from the diagonal on a uniform grid.
inline QRecovery recover_q(const KernelField& field, double smoothing = 0)
{
    const Grid& g = field.grid();
    if (!g.uniform())
        throw ConfigurationError("q recovery needs a uniform x-grid");
    if (std::abs(g.lower()) > 1e-14 || std::abs(g.upper() - pi) > 1e-12)
        throw ConfigurationError("q recovery needs an x-grid covering [0, pi]");
    const std::vector<double> d = field.diagonal();
    QRecovery r;
    r.diagonal = (smoothing > 0) ? smoothing_spline(g.nodes(), d, smoothing) : CubicSpline(g.nodes(), d);
    std::vector<double> q(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        q[i] = 2 * r.diagonal.derivative(g.node(i));
    double qmax = 0, gap = 0;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        const double fd = (d[i + 1] - d[i - 1]) / (g.node(i + 1) - g.node(i - 1));
        gap = std::max(gap, std::abs(2 * fd - q[i]));
        qmax = std::max(qmax, std::abs(q[i]));
    }
    r.roughness = gap / std::max(qmax, 1.0);
    r.rough = r.roughness > 0.05;
    r.q = Potential(GridFunction(g, std::move(q)));
    return r;
}

/// phi(x, mu) and phi'(x, mu) at the nodes of the field's x-grid.
inline SolutionTrace reconstruct_phi(const KernelField& field, double mu)
{
    SolutionTrace tr;
    tr.grid = field.grid();
    tr.mu = mu;
    for (std::size_t i = 0; i < field.grid().size(); ++i) {
        const KernelRow& r = field.row(i);
        const double x = field.grid().node(i);
        double phi = sin_mu(mu, x), dphi = cos_mu(mu, x) + r.diagonal * sin_mu(mu, x);
        for (std::size_t k = 0; k < r.t.size(); ++k) {
            const double s = sin_mu(mu, r.t[k]);
            phi += r.w[k] * r.p[k] * s;
            dphi += r.w[k] * r.px[k] * s;
        }
        tr.phi.push_back(phi);
        tr.dphi.push_back(dphi);
    }
    return tr;
}

struct BetaRecovery {
    double beta_tilde = pi / 2;
    double cot_beta_tilde = 0;
    double spread = 0;
    std::vector<double> ratios;  // -phi'(pi, mu_n)/phi(pi, mu_n)
    double q_integral = 0;       // 2 P(pi, pi)
    double predicted_cot = 0;    // cot(beta) + (pi c - int q)/2
    double prediction_gap = 0;   // |median - predicted_cot|
};

inline BetaRecovery recover_beta(const KernelField& field, const SpectralData& data, std::size_t K = 0)
{
    if (K == 0)
        K = std::clamp<std::size_t>(data.count() / 4, 5, 8);
    if (K < 5 || K > data.count())
        throw ConfigurationError("angle recovery needs between 5 and count eigenvalues");
    const Grid& g = field.grid();
    const std::size_t last = g.size() - 1;
    if (std::abs(g.node(last) - pi) > 1e-12)
        throw ConfigurationError("angle recovery needs a row at x = pi");
    const KernelRow& r = field.row(last);
    BetaRecovery b;
    for (std::size_t n = 0; n < K; ++n) {
        const double mu = data.mu[n];
        double phi = sin_mu(mu, pi), dphi = cos_mu(mu, pi) + r.diagonal * sin_mu(mu, pi);
        for (std::size_t k = 0; k < r.t.size(); ++k) {
            const double s = sin_mu(mu, r.t[k]);
            phi += r.w[k] * r.p[k] * s;
            dphi += r.w[k] * r.px[k] * s;
        }
        b.ratios.push_back(-dphi / phi);
    }
    std::vector<double> sorted = b.ratios;
    std::sort(sorted.begin(), sorted.end());
    const double median = (K % 2) ? sorted[K / 2] : (sorted[K / 2 - 1] + sorted[K / 2]) / 2;
    for (double v : b.ratios)
        b.spread = std::max(b.spread, std::abs(v - median));
    b.cot_beta_tilde = median;
    b.beta_tilde = BoundaryAngle::from_cot(median).value();
    b.q_integral = 2 * r.diagonal;
    b.predicted_cot = data.beta.cot() + 0.5 * (pi * data.c_fit - b.q_integral);
    b.prediction_gap = std::abs(median - b.predicted_cot);
    if (b.spread > 1e-2 * (1 + std::abs(median)))
        throw InconsistencyError("ratios -phi'/phi at x = pi disagree: spread " + std::to_string(b.spread)
                                 + " around " + std::to_string(median));
    return b;
}

// ---------------------------------------------------------------- consistency

struct ConsistencyOptions {
    std::size_t gram_nodes = 256;
    std::size_t terms = 20;
    std::size_t n_quad = 96;
    std::size_t threads = 0;
};

struct ConsistencyReport {
    double eq434_max_residual = 0;      // max |2P(x,x) + F(x,x) + int P(x,s)F(s,x) ds|
    double diagonal_max_residual = 0;   // max |P(x,x) + F(x,x) + int P(x,s)F(s,x) ds|, P(x,x) extrapolated from the row
    double boundary_max = 0;            // max |P(x, 0)|
    double row_residual_max = 0;        // max discrete-system residual
    double parseval_defect_x = 0;
    double parseval_defect_sin = 0;
    double gram_offdiag_max = 0;
    double gram_diag_max = 0;           // max |G_nn - a_n| / a_n
    double condition_max = 1;
    std::size_t terms = 0;
};

inline ConsistencyReport consistency_suite(std::shared_ptr<const FKernel> F, const KernelField& field,
                                           const SpectralData& data, const ConsistencyOptions& opt = {})
{
    ConsistencyReport rep;
    rep.condition_max = field.condition_max();
    const FKernel& k = *F;
    for (std::size_t i = 0; i < field.grid().size(); ++i) {
        const KernelRow& r = field.row(i);
        if (r.t.empty())
            continue;
        const double x = r.x;
        double integral = 0;
        for (std::size_t j = 0; j < r.t.size(); ++j)
            integral += r.w[j] * r.p[j] * k(r.t[j], x);
        rep.eq434_max_residual = std::max(rep.eq434_max_residual, std::abs(2 * r.diagonal + k(x, x) + integral));
        // endpoint values of the Legendre interpolant through the row
        const Grid q(r.t, r.w, RuleKind::gauss_legendre, 0.0, x);
        const std::vector<double> bw = legendre_barycentric_weights(q);
        const double p_end = barycentric(r.t, bw, r.p, x);
        const double p_zero = barycentric(r.t, bw, r.p, 0.0);
        rep.diagonal_max_residual = std::max(rep.diagonal_max_residual, std::abs(p_end + k(x, x) + integral));
        rep.boundary_max = std::max(rep.boundary_max, std::abs(p_zero));
        rep.row_residual_max = std::max(rep.row_residual_max, r.residual);
    }

    const std::size_t K = std::min(opt.terms, data.count());
    rep.terms = K;
    const Grid gx = make_grid(opt.gram_nodes, RuleKind::gauss_legendre);
    const KernelField gl = solve_kernel_field(F, gx, opt.n_quad, opt.threads);
    rep.condition_max = std::max(rep.condition_max, gl.condition_max());
    std::vector<std::vector<double>> phi(K);
    for (std::size_t n = 0; n < K; ++n)
        phi[n] = reconstruct_phi(gl, data.mu[n]).phi;
    for (std::size_t n = 0; n < K; ++n)
        for (std::size_t m = n; m < K; ++m) {
            double g = 0;
            for (std::size_t i = 0; i < gx.size(); ++i)
                g += gx.weight(i) * phi[n][i] * phi[m][i];
            if (n == m)
                rep.gram_diag_max = std::max(rep.gram_diag_max, std::abs(g - data.norming[n]) / data.norming[n]);
            else
                rep.gram_offdiag_max
                    = std::max(rep.gram_offdiag_max, std::abs(g) / std::sqrt(data.norming[n] * data.norming[m]));
        }
    auto parseval = [&](auto f) {
        double norm = 0, sum = 0;
        for (std::size_t i = 0; i < gx.size(); ++i)
            norm += gx.weight(i) * f(gx.node(i)) * f(gx.node(i));
        for (std::size_t n = 0; n < K; ++n) {
            double c = 0;
            for (std::size_t i = 0; i < gx.size(); ++i)
                c += gx.weight(i) * f(gx.node(i)) * phi[n][i];
            sum += c * c / data.norming[n];
        }
        return std::abs(norm - sum) / norm;
    };
    rep.parseval_defect_x = parseval([](double x) { return x; });
    rep.parseval_defect_sin = parseval([](double x) { return std::sin(x); });
    return rep;
}

// ---------------------------------------------------------------- pipeline

struct InverseOptions {
    std::size_t n_h = 2000;
    bool accelerate = true;
    std::size_t n_quad = 96;
    std::size_t n_x = 129;
    std::size_t table_nodes = 4097;
    double t_beta_tol = 1e-12;
    double smoothing = 0;
    std::size_t beta_terms = 0; // 0: min(8, count/4), at least 5
    ConsistencyOptions consistency{};
    bool run_consistency = true;
    bool force = false;
    std::size_t threads = 0;
};

struct InverseResult {
    AdmissibilityReport admissibility;
    std::shared_ptr<const HFunction> H;
    std::shared_ptr<const FKernel> F;
    std::optional<KernelField> field;
    QRecovery q;
    BetaRecovery beta;
    std::optional<ConsistencyReport> consistency;
};

class AdmissibilityError : public ConfigurationError {
public:
    using ConfigurationError::ConfigurationError;
};

inline InverseResult solve_inverse(const SpectralData& data, const InverseOptions& opt = {})
{
    InverseResult res;
    res.admissibility = validate(data, data.beta);
    if (res.admissibility.hard_fail() && !opt.force)
        throw AdmissibilityError("spectral data failed validation");
    const DeltaSequence delta(data.beta, opt.n_h);
    const SpectralData free = unperturbed_spectrum(delta, opt.n_h);
    HOptions ho;
    ho.n_h = opt.n_h;
    ho.accelerate = opt.accelerate;
    ho.t_beta_tol = opt.t_beta_tol;
    res.H = std::make_shared<const HFunction>(data, free, ho);
    res.F = build_F(res.H, opt.table_nodes, opt.threads);
    res.field = solve_kernel_field(res.F, make_grid(opt.n_x, RuleKind::uniform_simpson), opt.n_quad, opt.threads);
    res.q = recover_q(*res.field, opt.smoothing);
    res.beta = recover_beta(*res.field, data, opt.beta_terms);
    if (opt.run_consistency) {
        ConsistencyOptions co = opt.consistency;
        co.n_quad = opt.n_quad;
        co.threads = opt.threads;
        res.consistency = consistency_suite(res.F, *res.field, data, co);
    }
    return res;
}

} // namespace islp
