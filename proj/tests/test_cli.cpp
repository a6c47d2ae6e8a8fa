#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "islp/forward.hpp"
#include "islp/io.hpp"

namespace fs = std::filesystem;
using namespace islp;

namespace {

const fs::path work = fs::path(ISLP_TEST_WORKDIR) / "cli_work";

int run(const std::string& args)
{
    const std::string cmd = std::string(ISLP_CLI) + " " + args + " >" + (work / "stdout.txt").string() + " 2>"
        + (work / "stderr.txt").string();
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        fs::create_directories(work);
        const Grid g = make_grid(513, RuleKind::uniform_simpson);
        write_csv(work / "cos.csv", GridFunction::sample(g, [](double x) { return std::cos(x); }));
    }
};

} // namespace

TEST_F(Cli, Example6Passes)
{
    EXPECT_EQ(run("example6"), 0);
    const std::string out = slurp(work / "stdout.txt");
    EXPECT_EQ(out.find("FAIL"), std::string::npos);
    for (const char* k : {"PASS H", "PASS F", "PASS P", "PASS q", "PASS cot-beta"})
        EXPECT_NE(out.find(k), std::string::npos) << k;
}

TEST_F(Cli, UsageErrors)
{
    EXPECT_EQ(run(""), 64);
    EXPECT_EQ(run("forward"), 64);
    EXPECT_EQ(run("forward " + (work / "cos.csv").string() + " -N 16"), 64); // no angle
    EXPECT_EQ(run("forward " + (work / "cos.csv").string() + " --beta 4.0 -N 16"), 64);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, ValidateRejectsNegativeNorming)
{
    SpectralData d = ForwardSolver(Potential(read_csv(work / "cos.csv"))).spectral_data(BoundaryAngle(1.0), 16);
    write_json(work / "good.json", to_json(d));
    EXPECT_EQ(run("validate " + (work / "good.json").string()), 0);
    d.norming[4] = -0.1;
    write_json(work / "bad.json", to_json(d));
    EXPECT_EQ(run("validate " + (work / "bad.json").string()), 2);
    EXPECT_EQ(run("inverse " + (work / "bad.json").string() + " -o " + (work / "bad").string()), 2);
}

TEST_F(Cli, ForwardIsDeterministicAndInverseReproducesSpectrum)
{
    const std::string in = (work / "cos.csv").string();
    ASSERT_EQ(run("forward " + in + " --beta 1.0471975511965976 -N 128 -o " + (work / "a").string()), 0);
    ASSERT_EQ(run("forward " + in + " --beta-deg 60 -N 128 --threads 3 -o " + (work / "b").string()), 0);
    const json ja = read_json(work / "a" / "spectral.json"), jb = read_json(work / "b" / "spectral.json");
    EXPECT_EQ(ja.at("mu"), jb.at("mu"));
    EXPECT_EQ(ja.at("a"), jb.at("a"));
    EXPECT_TRUE(ja.contains("config"));
    const std::string first = slurp(work / "a" / "spectral.json");
    ASSERT_EQ(run("forward " + in + " --beta 1.0471975511965976 -N 128 -o " + (work / "a").string()), 0);
    EXPECT_TRUE(first == slurp(work / "a" / "spectral.json")) << "identical runs wrote different files";

    ASSERT_EQ(run("inverse " + (work / "a" / "spectral.json").string() + " -o " + (work / "inv").string()), 0);
    const json report = read_json(work / "inv" / "report.json");
    EXPECT_TRUE(report.contains("config"));
    const Potential qhat(read_csv(work / "inv" / "q.csv"));
    const BoundaryAngle bt(report.at("beta_tilde").get<double>());
    const std::vector<double> mu = eigenvalues(qhat, bt, 8);
    const std::vector<double> mu_in = ja.at("mu").get<std::vector<double>>();
    for (std::size_t n = 0; n < 8; ++n)
        EXPECT_NEAR(mu[n], mu_in[n], 1e-4) << n;
}

TEST_F(Cli, RoundTripWritesReport)
{
    ASSERT_EQ(run("roundtrip " + (work / "cos.csv").string() + " --beta 1.0471975511965976 -N 32 --trim-lo 0.3 -o "
                  + (work / "rt").string() + " --json-logs"),
              0);
    const json r = read_json(work / "rt" / "roundtrip.json");
    for (const char* k : {"q_sup_error", "q_l1_error", "beta_gap", "remark57_gap", "parameters", "config"})
        EXPECT_TRUE(r.contains(k)) << k;
    EXPECT_TRUE(fs::exists(work / "rt" / "comparison.csv"));
    const std::string log = slurp(work / "stderr.txt");
    EXPECT_NE(log.find("{\"event\":\"stage\""), std::string::npos);
}
