#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "lyapinfl/io.hpp"

using namespace lyapinfl;
namespace fs = std::filesystem;

namespace {

const fs::path maps = fs::path(LYAPINFL_SOURCE_DIR) / "maps";

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("lyapinfl_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Runs the CLI with stdout redirected to out_dir/stdout.txt.
int run(const std::string& args, const fs::path& out_dir)
{
    const std::string cmd = std::string("\"") + LYAPINFL_CLI + "\" --out-dir \"" + out_dir.string() + "\" " + args +
                            " > \"" + (out_dir / "stdout.txt").string() + "\" 2> \"" +
                            (out_dir / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) { return io::read_file(p); }

} // namespace

TEST(Cli, AnalyzeWritesArtifacts)
{
    const fs::path d = scratch("analyze");
    ASSERT_EQ(run("analyze \"" + (maps / "t-minus.json").string() + "\" --svg", d), 0);
    const InflectionReport r = io::report_from_json(io::parse_json_text(slurp(d / "report.json")));
    EXPECT_EQ(r.transversal_count, 2u);
    EXPECT_TRUE(fs::exists(d / "spectrum.csv"));
    EXPECT_TRUE(fs::exists(d / "characteristic.csv"));
    EXPECT_TRUE(fs::exists(d / "spectrum.svg"));
    EXPECT_NE(slurp(d / "stdout.txt").find("inflections 2"), std::string::npos);
}

TEST(Cli, AnalyzeJsonSummary)
{
    const fs::path d = scratch("analyze_json");
    ASSERT_EQ(run("--json analyze \"" + (maps / "t-minus-star.json").string() + "\" --points 101", d), 0);
    const io::json j = io::parse_json_text(slurp(d / "stdout.txt"));
    EXPECT_EQ(j.at("transversal_count"), 4);
}

TEST(Cli, GeometryWarning)
{
    const fs::path d = scratch("geometry");
    std::ofstream(d / "m.json") << R"({"slopes": [1.2, 1.5]})";
    ASSERT_EQ(run("analyze \"" + (d / "m.json").string() + "\"", d), 0);
    EXPECT_NE(slurp(d / "stderr.txt").find("warning"), std::string::npos);
}

TEST(Cli, DegenerateMapIsNotAnError)
{
    const fs::path d = scratch("degenerate");
    ASSERT_EQ(run("analyze \"" + (maps / "degenerate.json").string() + "\"", d), 0);
    EXPECT_NE(slurp(d / "stdout.txt").find("degenerate"), std::string::npos);
    EXPECT_FALSE(fs::exists(d / "spectrum.csv"));
}

TEST(Cli, ExitCodes)
{
    const fs::path d = scratch("codes");
    EXPECT_EQ(run("frobnicate", d), 1);
    EXPECT_EQ(run("analyze", d), 1);
    EXPECT_EQ(run("--tol -1 analyze x.json", d), 1);
    EXPECT_EQ(run("analyze /nonexistent/map.json", d), 2);
    std::ofstream(d / "bad.json") << R"({"slopes": [2, 0.5]})";
    EXPECT_EQ(run("analyze \"" + (d / "bad.json").string() + "\"", d), 3);
    std::ofstream(d / "junk.json") << "{not json";
    EXPECT_EQ(run("analyze \"" + (d / "junk.json").string() + "\"", d), 2);
    EXPECT_EQ(run("coincide --bracket 29.0 29.1", d), 3);
    EXPECT_EQ(run("surgery --n-target 5 --lambda-cap 200", d), 4);
    EXPECT_EQ(run("scan", d), 1);
}

TEST(Cli, Surgery)
{
    const fs::path d = scratch("surgery");
    ASSERT_EQ(run("surgery --n-target 4", d), 0);
    const io::json j = io::parse_json_text(slurp(d / "surgery.json"));
    ASSERT_EQ(j.at("steps").size(), 1u);
    EXPECT_GE(j.at("steps")[0].at("transversal_count").get<int>(), 4);
}

TEST(Cli, Coincide)
{
    const fs::path d = scratch("coincide");
    ASSERT_EQ(run("coincide", d), 0);
    const io::json j = io::parse_json_text(slurp(d / "coincidence.json"));
    EXPECT_NEAR(j.at("x_star").get<double>(), 29.54276, 1e-3);
}

TEST(Cli, ReproduceAll)
{
    const fs::path d = scratch("reproduce");
    ASSERT_EQ(run("reproduce", d), 0);
    const std::string out = slurp(d / "stdout.txt");
    EXPECT_EQ(out.find("FAIL"), std::string::npos);
    EXPECT_TRUE(fs::exists(d / "fig1_G_T-plus.csv"));
    EXPECT_TRUE(fs::exists(d / "fig8_L_T-star.csv"));
}

TEST(Cli, ScanRandomMapIsSeeded)
{
    const fs::path a = scratch("scan_a"), b = scratch("scan_b");
    ASSERT_EQ(run("--seed 7 --json scan --random-map --points 201", a), 0);
    ASSERT_EQ(run("--seed 7 --json scan --random-map --points 201", b), 0);
    EXPECT_EQ(slurp(a / "characteristic.csv"), slurp(b / "characteristic.csv"));
    const io::json j = io::parse_json_text(slurp(a / "stdout.txt"));
    EXPECT_EQ(j.at("points"), 201);
}
