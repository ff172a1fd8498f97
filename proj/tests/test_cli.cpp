#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "snnsafe/cli.hpp"
#include "support.hpp"

using namespace snnsafe;
using namespace snnsafe::test;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run call(std::vector<std::string> args)
{
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(std::move(args), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string tmp(const std::string& name) { return ::testing::TempDir() + "cli_" + name; }

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> demo_verify(const std::string& range)
{
    return {"verify", "--snn", fixture("demo.snn.json"), "--steps", "6", "--box", fixture("demo.box"),
            "--range", fixture(range), "--sim-samples", "0"};
}

} // namespace

TEST(Cli, SimulatePrintsTraceAndAverages)
{
    const auto r = call({"simulate", "--snn", fixture("demo.snn.json"), "--input", "5,2", "--steps", "6"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("op0: 4, 5, 4.66667, 5, 5, 5"), std::string::npos) << r.out;
}

TEST(Cli, TraceDumpMatchesSimulator)
{
    const auto r = call({"trace", "--snn", fixture("demo.snn.json"), "--input", "5,2", "--steps", "6"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, sim::dump_trace(sim::snn_run(demo_snn(), vec({5, 2}), 6)));
}

TEST(Cli, ReluInputIsConverted)
{
    const auto a = call({"simulate", "--snn", fixture("demo.ann.json"), "--input", "5,2", "--steps", "3"});
    const auto b = call({"simulate", "--snn", fixture("demo.snn.json"), "--input", "5,2", "--steps", "3"});
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(call({"bogus"}).code, 64);
    EXPECT_EQ(call({}).code, 64);
    EXPECT_EQ(call({"simulate", "--snn", fixture("demo.snn.json")}).code, 64);
    EXPECT_EQ(call({"encode", "--snn", fixture("demo.snn.json"), "--steps", "2", "--box", fixture("demo.box"),
                   "--query", "sideways"})
                  .code,
              64);
    EXPECT_EQ(call({"--help"}).code, 0);
}

TEST(Cli, MissingFileIsIoError)
{
    const auto r = call({"simulate", "--snn", "/nonexistent/net.json", "--input", "1,2", "--steps", "2"});
    EXPECT_EQ(r.code, 74);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, BadDataIsDataError)
{
    EXPECT_EQ(call({"simulate", "--snn", fixture("demo.snn.json"), "--input", "1,2,3", "--steps", "2"}).code, 65);
    EXPECT_EQ(call({"convert", "--ann", fixture("demo.ann.json"), "--theta", "0"}).code, 65);
}

TEST(Cli, VerifyExitCodes)
{
    const auto safe = call(demo_verify("demo_safe.range"));
    EXPECT_EQ(safe.code, 0) << safe.err;
    EXPECT_EQ(safe.out, "Safe\n");
    const auto up = call(demo_verify("demo_upper_violated.range"));
    EXPECT_EQ(up.code, 1);
    EXPECT_NE(up.out.find("Unsafe (formal): output 0 >= upper bound 4.5"), std::string::npos) << up.out;
    EXPECT_NE(up.out.find("input: 5, 2"), std::string::npos);
    EXPECT_EQ(call(demo_verify("demo_lower_violated.range")).code, 1);
    auto args = demo_verify("demo_upper_violated.range");
    args.insert(args.end(), {"--budget", "0"});
    EXPECT_EQ(call(args).code, 2);
}

TEST(Cli, VerifyWritesCounterexample)
{
    auto args = demo_verify("demo_upper_violated.range");
    const std::string cex = tmp("cex.txt");
    args.insert(args.end(), {"--cex", cex});
    ASSERT_EQ(call(args).code, 1);
    EXPECT_EQ(io::parse_vector(slurp(cex)), vec({5, 2}));
}

TEST(Cli, ConfigFileFlagsWin)
{
    const std::string cfg = tmp("verify.cfg");
    {
        std::ofstream f(cfg);
        f << "# defaults\nsteps = 6\nbudget = 0\nsim-samples = 0\n";
    }
    const std::vector<std::string> base{"verify",   "--snn",   fixture("demo.snn.json"), "--box",
                                        fixture("demo.box"), "--range", fixture("demo_upper_violated.range"),
                                        "--config", cfg};
    EXPECT_EQ(call(base).code, 2);
    auto flagged = base;
    flagged.insert(flagged.end(), {"--budget", "30"});
    EXPECT_EQ(call(flagged).code, 1);
    auto jobs_first = flagged;
    jobs_first.insert(jobs_first.begin(), {"--jobs", "2"});
    EXPECT_EQ(call(jobs_first).code, 1);
}

TEST(Cli, ConvertPrintsTUp)
{
    const std::string out = tmp("demo.snn.json");
    const auto r = call({"convert", "--ann", fixture("demo.ann.json"), "--out", out, "--period", "0.05",
                        "--step-time", "0.002"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "T_up = 25\n");
    const auto snn = io::load_spiking_network(out);
    EXPECT_EQ(sim::snn_output(snn, vec({5, 2}), 6), sim::snn_output(demo_snn(), vec({5, 2}), 6));
}

TEST(Cli, MseMatchesLibrary)
{
    const auto r = call({"mse", "--ann", fixture("demo.ann.json"), "--box", fixture("demo.box"), "--steps", "1",
                        "--samples", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "mse: 1.21\n");
}

TEST(Cli, EncodeSolveAndCheck)
{
    const std::string lp = tmp("demo.lp");
    const std::string sol = tmp("demo.sol");
    const auto e = call({"encode", "--snn", fixture("demo.snn.json"), "--steps", "2", "--box", fixture("demo.box"),
                        "--range", fixture("demo_upper_violated.range"), "--query", "ub", "--single", "--output",
                        "0", "--export-lp", lp});
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_EQ(e.out.rfind("variables ", 0), 0u);
    const auto s = call({"solve", "--lp", lp, "--solution", sol});
    EXPECT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(s.out.rfind("status: feasible", 0), 0u);
    EXPECT_EQ(call({"solve", "--lp", lp, "--check", sol}).code, 0);

    const auto safe = call({"encode", "--snn", fixture("demo.snn.json"), "--steps", "2", "--box",
                           fixture("demo.box"), "--range", fixture("demo_safe.range"), "--query", "both", "--out", lp});
    ASSERT_EQ(safe.code, 0);
    EXPECT_EQ(call({"solve", "--lp", lp}).code, 1);
    EXPECT_NE(slurp(lp).find("D_any"), std::string::npos);
    EXPECT_EQ(call({"solve", "--lp", lp, "--budget", "0"}).code, 2);
}

TEST(Cli, TightenWritesRangeAndLog)
{
    const std::string out = tmp("tight.range");
    const std::string log = tmp("tight.csv");
    const std::string plot = tmp("tight_plot.csv");
    const auto r = call({"tighten", "--snn", fixture("demo.snn.json"), "--steps", "6", "--box", fixture("demo.box"),
                        "--range", fixture("demo_upper_violated.range"), "--beta", "0.2", "--delta", "0.01", "--out",
                        out, "--log", log, "--plot-data", plot});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto range = io::load_ranges(out, 1);
    EXPECT_EQ(range[0].lower, 4.0);
    EXPECT_GT(range[0].upper, 5.0);
    EXPECT_LE(range[0].upper, 5.01);
    EXPECT_NE(slurp(log).find("expand"), std::string::npos);
    EXPECT_EQ(slurp(plot).rfind(search::kPlotHeader, 0), 0u);
    // an expansion that never reaches a safe bound is flagged
    const auto short_run = call({"tighten", "--snn", fixture("demo.snn.json"), "--steps", "6", "--box",
                                fixture("demo.box"), "--range", fixture("demo_upper_violated.range"), "--K", "1",
                                "--beta", "0.2", "--delta", "0.01"});
    EXPECT_EQ(short_run.code, 2);
    EXPECT_NE(short_run.err.find("expansion-exhausted"), std::string::npos);
}

TEST(Cli, SearchReportAndExitCodes)
{
    const std::string report = tmp("report.csv");
    const std::string plot = tmp("plot.csv");
    const auto r = call({"search", "--ann", fixture("demo.ann.json"), "--box", fixture("demo.box"), "--range",
                        fixture("demo_safe.range"), "--eps", "100", "--t-up", "6", "--mse-samples", "20",
                        "--sim-samples", "5", "--beta", "0.2", "--delta", "0.01", "--report", report, "--plot-data",
                        plot});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("NUMSTEPS = 2"), std::string::npos) << r.out;
    EXPECT_EQ(slurp(report).rfind(search::kReportHeader, 0), 0u);
    EXPECT_NE(slurp(plot).find("2,0,4,6,4,6"), std::string::npos);

    const auto none = call({"search", "--ann", fixture("demo.ann.json"), "--box", fixture("demo.box"), "--range",
                           fixture("demo_safe.range"), "--eps", "0", "--period", "0.1", "--step-time", "0.02",
                           "--mse-samples", "20"});
    EXPECT_EQ(none.code, 1);
    EXPECT_NE(none.out.find("No such T is found"), std::string::npos);
    EXPECT_EQ(std::count(none.out.begin(), none.out.end(), '\n'), 7);
    EXPECT_EQ(call({"search", "--ann", fixture("demo.ann.json"), "--box", fixture("demo.box"), "--range",
                   fixture("demo_safe.range"), "--eps", "1"})
                  .code,
              65);
}

TEST(Cli, BinaryExitStatus)
{
    const std::string cmd = std::string(SNNSAFE_CLI) + " verify --snn " + fixture("demo.snn.json") +
                            " --steps 6 --box " + fixture("demo.box") + " --range " +
                            fixture("demo_upper_violated.range") + " > /dev/null";
    const int status = std::system(cmd.c_str());
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 1);
    const int bad = std::system((std::string(SNNSAFE_CLI) + " nope 2> /dev/null").c_str());
    EXPECT_EQ(WEXITSTATUS(bad), 64);
}
