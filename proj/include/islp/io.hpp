#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "islp/core.hpp"
#include "islp/inverse.hpp"
#include "islp/roundtrip.hpp"

namespace islp {

using json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- CSV

inline void write_csv(std::ostream& os, const GridFunction& f)
{
    os << "x,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < f.size(); ++i)
        os << f.grid().node(i) << ',' << f.values()[i] << '\n';
}

inline void write_csv(const std::filesystem::path& p, const GridFunction& f)
{
    std::ofstream os(p);
    if (!os)
        throw IoError("cannot write " + p.string());
    write_csv(os, f);
}

/// Reads `x,value` rows; a header line is optional. Positions must run from 0 to pi.
inline GridFunction read_csv(std::istream& is)
{
    std::vector<double> x, y;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw IoError("line " + std::to_string(lineno) + ": expected two comma-separated columns");
        try {
            std::size_t used = 0;
            const double a = std::stod(line.substr(0, comma), &used);
            const double b = std::stod(line.substr(comma + 1));
            x.push_back(a);
            y.push_back(b);
        } catch (const std::invalid_argument&) {
            if (x.empty() && lineno == 1)
                continue; // header
            throw IoError("line " + std::to_string(lineno) + ": not a number");
        }
    }
    if (x.empty())
        throw IoError("no samples");
    return GridFunction(grid_from_samples(std::move(x)), std::move(y));
}

inline GridFunction read_csv(const std::filesystem::path& p)
{
    std::ifstream is(p);
    if (!is)
        throw IoError("cannot read " + p.string());
    return read_csv(is);
}

// ---------------------------------------------------------------- spectral data

inline json to_json(const SpectralData& d)
{
    return json{{"beta", d.beta.value()}, {"count", d.count()}, {"mu", d.mu}, {"a", d.norming}, {"c_fit", d.c_fit}};
}

inline SpectralData spectral_from_json(const json& j)
{
    SpectralData d;
    try {
        d.beta = BoundaryAngle(j.at("beta").get<double>());
        d.mu = j.at("mu").get<std::vector<double>>();
        d.norming = j.at("a").get<std::vector<double>>();
        d.c_fit = j.value("c_fit", 0.0);
        if (j.contains("count") && j.at("count").get<std::size_t>() != d.mu.size())
            throw IoError("count does not match the length of mu");
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed spectral data: ") + e.what());
    }
    return d;
}

inline std::string dump(const json& j)
{
    // 17 significant digits are what nlohmann emits for doubles already
    return j.dump(2) + "\n";
}

inline void write_json(const std::filesystem::path& p, const json& j)
{
    std::ofstream os(p);
    if (!os)
        throw IoError("cannot write " + p.string());
    os << dump(j);
}

inline json read_json(const std::filesystem::path& p)
{
    std::ifstream is(p);
    if (!is)
        throw IoError("cannot read " + p.string());
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw IoError(p.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------- reports

inline json to_json(const AdmissibilityReport& r)
{
    json checks = json::array();
    for (const Check& c : r.checks)
        checks.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}});
    json j{{"overall", to_string(r.overall())}, {"checks", checks}};
    if (std::isfinite(r.c_fit)) {
        j["c_fit"] = r.c_fit;
        j["cauchy_gap"] = r.cauchy_gap;
    }
    return j;
}

inline json to_json(const ConsistencyReport& c)
{
    return json{{"eq434_max_residual", c.eq434_max_residual},
                {"diagonal_max_residual", c.diagonal_max_residual},
                {"boundary_max", c.boundary_max},
                {"row_residual_max", c.row_residual_max},
                {"parseval_defect_x", c.parseval_defect_x},
                {"parseval_defect_sin", c.parseval_defect_sin},
                {"gram_offdiag_max", c.gram_offdiag_max},
                {"gram_diag_max", c.gram_diag_max},
                {"condition_max", c.condition_max},
                {"terms", c.terms}};
}

inline json to_json(const InverseResult& r)
{
    json j{{"beta_tilde", r.beta.beta_tilde},
           {"cot_beta_tilde", r.beta.cot_beta_tilde},
           {"spread", r.beta.spread}};
    if (r.consistency) {
        j["eq434_max_residual"] = r.consistency->eq434_max_residual;
        j["parseval_defect"] = r.consistency->parseval_defect_sin;
        j["gram_offdiag_max"] = r.consistency->gram_offdiag_max;
    }
    j["condition_max"] = r.field ? r.field->condition_max() : 1.0;
    j["branch"] = to_string(r.H->branch());
    j["ratios"] = r.beta.ratios;
    j["q_integral"] = r.beta.q_integral;
    j["remark57_predicted_cot"] = r.beta.predicted_cot;
    j["remark57_gap"] = r.beta.prediction_gap;
    j["c_fit"] = r.H->c();
    j["q_roughness"] = r.q.roughness;
    j["q_rough"] = r.q.rough;
    if (r.consistency)
        j["consistency"] = to_json(*r.consistency);
    j["admissibility"] = to_json(r.admissibility);
    return j;
}

inline json to_json(const RoundTripReport& r)
{
    return json{{"q_sup_error", r.q_sup_error},
                {"q_l1_error", r.q_l1_error},
                {"beta_gap", r.beta_gap},
                {"cot_gap", r.cot_gap},
                {"remark57_gap", r.remark57_gap},
                {"beta_tilde", r.beta_tilde},
                {"cot_beta_tilde", r.cot_beta_tilde},
                {"c_fit", r.c_fit},
                {"q_integral", r.q_integral},
                {"parameters",
                 {{"count", r.count},
                  {"n_h", r.n_h},
                  {"n_quad", r.n_quad},
                  {"n_x", r.n_x},
                  {"trim", {r.trim.first, r.trim.second}}}},
                {"admissibility", to_json(r.admissibility)}};
}

inline json to_json(const ClosedFormReport& r)
{
    json checks = json::array();
    for (const OracleCheck& c : r.checks)
        checks.push_back({{"name", c.name}, {"error", c.error}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
    return json{{"passed", r.passed()}, {"checks", checks}};
}

} // namespace islp
