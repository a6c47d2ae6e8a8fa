// islp: forward, inverse and round-trip runs for the Dirichlet/Robin Sturm-Liouville problem.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "islp/forward.hpp"
#include "islp/inverse.hpp"
#include "islp/io.hpp"
#include "islp/roundtrip.hpp"

namespace fs = std::filesystem;
using namespace islp;

namespace {

constexpr int exit_ok = 0, exit_numerical = 1, exit_invalid = 2, exit_usage = 64;

struct Config {
    std::string command;
    std::string input;
    std::string out_dir = ".";
    std::optional<double> beta, beta_deg;
    std::size_t count = 64;
    std::size_t n_h = 2000;
    std::size_t n_quad = 96;
    std::size_t n_x = 129;
    std::size_t table_nodes = 4097;
    double smoothing = 0;
    double abs_tol = 1e-11, rel_tol = 1e-11;
    double trim_lo = 0.05, trim_hi = pi;
    bool no_accelerate = false;
    bool force = false;
    bool json_logs = false;
    std::size_t threads = 0;

    json to_json() const
    {
        json j{{"command", command},
               {"input", input},
               {"out_dir", out_dir},
               {"count", count},
               {"n_h", n_h},
               {"n_quad", n_quad},
               {"n_x", n_x},
               {"table_nodes", table_nodes},
               {"smoothing", smoothing},
               {"abs_tol", abs_tol},
               {"rel_tol", rel_tol},
               {"trim", {trim_lo, trim_hi}},
               {"accelerate", !no_accelerate},
               {"force", force},
               {"threads", threads}};
        if (auto b = resolved_beta())
            j["beta"] = *b;
        return j;
    }

    std::optional<double> resolved_beta() const
    {
        if (beta)
            return beta;
        if (beta_deg)
            return *beta_deg * pi / 180;
        return std::nullopt;
    }

    InverseOptions inverse() const
    {
        InverseOptions o;
        o.n_h = n_h;
        o.n_quad = n_quad;
        o.n_x = n_x;
        o.table_nodes = table_nodes;
        o.smoothing = smoothing;
        o.accelerate = !no_accelerate;
        o.force = force;
        o.threads = threads;
        return o;
    }

    ForwardOptions forward() const
    {
        ForwardOptions o;
        o.abs_tol = abs_tol;
        o.rel_tol = rel_tol;
        o.threads = threads == 0 ? default_threads() : threads;
        return o;
    }
};

class Logger {
public:
    explicit Logger(bool json_lines)
        : json_(json_lines), start_(std::chrono::steady_clock::now())
    {
    }

    void stage(const std::string& name) const
    {
        const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (json_)
            std::cerr << json{{"event", "stage"}, {"name", name}, {"elapsed", t}}.dump() << '\n';
        else
            std::cerr << "[" << std::fixed << std::setprecision(2) << t << "s] " << name << '\n';
    }

private:
    bool json_;
    std::chrono::steady_clock::time_point start_;
};

BoundaryAngle require_beta(const Config& c)
{
    const auto b = c.resolved_beta();
    if (!b)
        throw ConfigurationError("--beta or --beta-deg is required");
    return BoundaryAngle(*b);
}

fs::path prepare_out(const Config& c)
{
    const fs::path out(c.out_dir);
    fs::create_directories(out);
    return out;
}

void print_admissibility(const AdmissibilityReport& r)
{
    for (const Check& c : r.checks)
        std::cout << to_string(c.status) << "  " << c.name << ": " << c.detail << '\n';
    std::cout << "overall: " << to_string(r.overall()) << '\n';
}

int run_forward(const Config& c, const Logger& log)
{
    const BoundaryAngle beta = require_beta(c);
    const Potential q(read_csv(c.input));
    log.stage("forward solve");
    const SpectralData d = ForwardSolver(q, c.forward()).spectral_data(beta, c.count);
    json j = to_json(d);
    j["config"] = c.to_json();
    const fs::path out = prepare_out(c) / "spectral.json";
    write_json(out, j);
    log.stage("wrote " + out.string());
    return exit_ok;
}

int run_validate(const Config& c, const Logger&)
{
    const SpectralData d = spectral_from_json(read_json(c.input));
    const AdmissibilityReport r = validate(d, d.beta);
    print_admissibility(r);
    return r.hard_fail() ? exit_invalid : exit_ok;
}

int run_inverse(const Config& c, const Logger& log)
{
    SpectralData d = spectral_from_json(read_json(c.input));
    if (auto b = c.resolved_beta())
        d.beta = BoundaryAngle(*b);
    const AdmissibilityReport adm = validate(d, d.beta);
    if (adm.hard_fail() && !c.force) {
        print_admissibility(adm);
        return exit_invalid;
    }
    log.stage("inverse solve");
    const InverseResult r = solve_inverse(d, c.inverse());
    const fs::path out = prepare_out(c);
    write_csv(out / "q.csv", r.q.q.function());
    json j = to_json(r);
    j["config"] = c.to_json();
    write_json(out / "report.json", j);
    log.stage("wrote " + (out / "q.csv").string() + " and report.json");
    std::cout << std::setprecision(12) << "beta~ = " << r.beta.beta_tilde << "  cot beta~ = " << r.beta.cot_beta_tilde
              << '\n';
    return exit_ok;
}

int run_roundtrip(const Config& c, const Logger& log)
{
    const BoundaryAngle beta = require_beta(c);
    const Potential q(read_csv(c.input));
    if (c.count < 16)
        throw ConfigurationError("round trip needs -N of at least 16");
    log.stage("forward solve");
    const SpectralData d = ForwardSolver(q, c.forward()).spectral_data(beta, c.count);
    const AdmissibilityReport adm = validate(d, beta);
    if (adm.hard_fail() && !c.force) {
        print_admissibility(adm);
        return exit_invalid;
    }
    log.stage("inverse solve");
    RoundTripOptions o;
    o.inverse = c.inverse();
    o.forward = c.forward();
    const Interpolant qi(q.function());
    const RoundTripReport r
        = roundtrip_from_data(d, [&](double x) { return qi(x); }, beta, {c.trim_lo, c.trim_hi}, o);
    const fs::path out = prepare_out(c);
    json j = to_json(r);
    j["config"] = c.to_json();
    write_json(out / "roundtrip.json", j);
    std::ofstream csv(out / "comparison.csv");
    csv << "x,q,q_hat\n" << std::setprecision(17);
    const Grid& g = r.q_hat.grid();
    for (std::size_t i = 0; i < g.size(); ++i)
        csv << g.node(i) << ',' << qi(g.node(i)) << ',' << r.q_hat.values()[i] << '\n';
    log.stage("wrote " + (out / "roundtrip.json").string());
    std::cout << std::setprecision(6) << "sup |q^ - q| on [" << c.trim_lo << ", " << c.trim_hi
              << "] = " << r.q_sup_error << "\nremark 5.7 gap = " << r.remark57_gap << '\n';
    return exit_ok;
}

int run_example6(const Config& c, const Logger& log)
{
    log.stage("closed-form example");
    InverseOptions o = c.inverse();
    const ClosedFormReport r = closed_form_oracle(c.count, o);
    for (const OracleCheck& k : r.checks)
        std::cout << (k.pass() ? "PASS " : "FAIL ") << k.name << "  error " << std::setprecision(3)
                  << std::scientific << k.error << "  tolerance " << k.tolerance << '\n';
    std::cout << std::defaultfloat;
    if (!c.out_dir.empty() && c.out_dir != ".") {
        json j = to_json(r);
        j["config"] = c.to_json();
        write_json(prepare_out(c) / "example6.json", j);
    }
    return r.passed() ? exit_ok : exit_numerical;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Inverse Sturm-Liouville problem with a Robin condition at pi"};
    app.require_subcommand(1);
    Config cfg;

    auto common = [&](CLI::App* sub, bool needs_input) {
        if (needs_input)
            sub->add_option("input", cfg.input, "input file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", cfg.out_dir, "output directory");
        sub->add_option("--threads", cfg.threads, "worker threads (0: hardware)");
        sub->add_flag("--json-logs", cfg.json_logs, "progress as JSON lines on stderr");
    };
    auto angle = [&](CLI::App* sub) {
        auto* b = sub->add_option("--beta", cfg.beta, "boundary angle in radians");
        sub->add_option("--beta-deg", cfg.beta_deg, "boundary angle in degrees")->excludes(b);
    };
    auto inverse_knobs = [&](CLI::App* sub) {
        sub->add_option("--n-h", cfg.n_h, "terms in the H series")->check(CLI::Range(2, 1000000));
        sub->add_option("--n-quad", cfg.n_quad, "Gauss nodes per kernel row")->check(CLI::Range(16, 1024));
        sub->add_option("--n-x", cfg.n_x, "odd number of x nodes")->check(CLI::Range(9, 4097));
        sub->add_option("--table-nodes", cfg.table_nodes, "H table size")->check(CLI::Range(65, 1000001));
        sub->add_option("--smoothing", cfg.smoothing, "smoothing parameter for the diagonal")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("--no-accelerate", cfg.no_accelerate, "sum H directly");
        sub->add_flag("--force", cfg.force, "continue past validation failures");
    };
    auto forward_knobs = [&](CLI::App* sub) {
        sub->add_option("-N,--count", cfg.count, "number of eigenpairs")->check(CLI::Range(1, 100000));
        sub->add_option("--abs-tol", cfg.abs_tol, "ODE absolute tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--rel-tol", cfg.rel_tol, "ODE relative tolerance")->check(CLI::PositiveNumber);
    };

    auto* fwd = app.add_subcommand("forward", "spectral data of a potential");
    common(fwd, true);
    angle(fwd);
    forward_knobs(fwd);

    auto* inv = app.add_subcommand("inverse", "recover q and beta~ from spectral data");
    common(inv, true);
    angle(inv);
    inverse_knobs(inv);

    auto* rt = app.add_subcommand("roundtrip", "forward, validate, inverse, compare");
    common(rt, true);
    angle(rt);
    forward_knobs(rt);
    inverse_knobs(rt);
    rt->add_option("--trim-lo", cfg.trim_lo, "left end of the comparison interval");
    rt->add_option("--trim-hi", cfg.trim_hi, "right end of the comparison interval");

    auto* ex = app.add_subcommand("example6", "closed-form example with lambda_n = n + 1/2");
    common(ex, false);
    inverse_knobs(ex);
    ex->add_option("-N,--count", cfg.count, "number of eigenpairs")->check(CLI::Range(12, 100000));

    auto* val = app.add_subcommand("validate", "admissibility report for spectral data");
    common(val, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    for (auto* s : {fwd, inv, rt, ex, val})
        if (s->parsed())
            cfg.command = s->get_name();

    const Logger log(cfg.json_logs);
    try {
        if (cfg.command == "forward")
            return run_forward(cfg, log);
        if (cfg.command == "inverse")
            return run_inverse(cfg, log);
        if (cfg.command == "roundtrip")
            return run_roundtrip(cfg, log);
        if (cfg.command == "example6")
            return run_example6(cfg, log);
        return run_validate(cfg, log);
    } catch (const AdmissibilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_invalid;
    } catch (const ConfigurationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}
