#include <gtest/gtest.h>

#include "support.hpp"

using namespace snnsafe;
using namespace snnsafe::test;

namespace {

search::SearchConfig small_config()
{
    search::SearchConfig cfg;
    cfg.mse_samples = 50;
    cfg.verify_samples = 20;
    cfg.tighten.beta = 0.2;
    cfg.tighten.delta = 0.01;
    return cfg;
}

} // namespace

TEST(Acceptable, Examples)
{
    const RangeSpec given = range1(0, 1);
    EXPECT_TRUE(search::acceptable(given, given, 0.0));
    EXPECT_TRUE(search::acceptable(given, given, 0.3));
    EXPECT_TRUE(search::acceptable(range1(-0.05, 1.05), given, 0.1));
    EXPECT_FALSE(search::acceptable(range1(-0.05, 1.05), given, 0.0));
    EXPECT_FALSE(search::acceptable(range1(0, 1.0001), given, 0.0));
    EXPECT_FALSE(search::acceptable(range1(-0.2, 1), given, 0.1));
    EXPECT_THROW(search::acceptable(given, given, -1), InvalidConfig);
    EXPECT_THROW(search::acceptable(given, RangeSpec{{{0, 1}, {0, 1}}}, 0), CountMismatch);
}

TEST(FindNumsteps, ZeroEpsNeverVerifies)
{
    verify::SolverCounter counter;
    auto cfg = small_config();
    cfg.verify.counter = &counter;
    const auto report =
        search::find_numsteps(demo_ann(), demo_snn(), 0.0, demo_point(), range1(4, 6), 6, cfg);
    EXPECT_EQ(report.outcome, search::Outcome::NotFound);
    EXPECT_EQ(report.records.size(), 6u);
    EXPECT_EQ(counter.calls.load(), 0u);
    for (const auto& r : report.records) {
        EXPECT_FALSE(r.gate_passed);
        EXPECT_FALSE(r.verdict);
    }
    EXPECT_EQ(report.summary(), "No such T is found");
}

TEST(FindNumsteps, DemoBoundaryThenInside)
{
    const auto report =
        search::find_numsteps(demo_ann(), demo_snn(), 1e9, demo_point(), range1(4, 6), 6, small_config());
    // brute force: the first T whose output lies strictly inside [4, 6]
    std::size_t expect = 0;
    for (std::size_t t = 1; t <= 6 && !expect; ++t) {
        const double o = sim::snn_output(demo_snn(), vec({5.0, 2.0}), t)(0);
        if (o > 4 && o < 6)
            expect = t;
    }
    ASSERT_EQ(expect, 2u);
    ASSERT_EQ(report.outcome, search::Outcome::Found);
    EXPECT_EQ(*report.steps, expect);
    ASSERT_EQ(report.records.size(), 2u);
    // output 4 at T = 1 sits on the lower bound
    const auto& first = report.records[0];
    ASSERT_TRUE(first.verdict);
    EXPECT_TRUE(first.verdict->unsafe());
    EXPECT_EQ(first.verdict->counterexample->side, BoundSide::Lower);
    ASSERT_TRUE(first.tightened);
    EXPECT_LT(first.tightened->range[0].lower, 4.0);
    EXPECT_GE(first.tightened->range[0].lower, 4.0 - 0.01 * (1 + 1e-9));
    EXPECT_FALSE(*first.acceptable);
    EXPECT_TRUE(report.records[1].verdict->safe());
    EXPECT_EQ(report.summary(), "NUMSTEPS = 2");
}

TEST(FindNumsteps, MarginAcceptsRelaxedRange)
{
    auto cfg = small_config();
    cfg.margin = 0.05;
    const auto report = search::find_numsteps(demo_ann(), demo_snn(), 1e9, demo_point(), range1(4, 6), 6, cfg);
    ASSERT_EQ(report.outcome, search::Outcome::FoundWithRelaxedRange);
    EXPECT_EQ(*report.steps, 1u);
    ASSERT_TRUE(report.relaxed);
    EXPECT_LT((*report.relaxed)[0].lower, 4.0);
    EXPECT_EQ((*report.relaxed)[0].upper, 6.0);
}

TEST(FindNumsteps, GateIsStrict)
{
    const auto data = sim::sample_inputs(demo_point(), 50, 0);
    // at T = 2 the MSE is exactly what the gate compares against
    const double at2 = sim::mse(data, demo_ann(), demo_snn(), 2)(0);
    const auto report =
        search::find_numsteps(demo_ann(), demo_snn(), at2, demo_point(), range1(4, 6), 2, small_config());
    EXPECT_FALSE(report.records[1].gate_passed);
    EXPECT_EQ(report.outcome, search::Outcome::NotFound);
}

TEST(FindNumsteps, MinimalityHoldsOnToy)
{
    const auto ann = io::load_network(fixture("toy2.ann.json"));
    const auto snn = convert::ann_to_snn(ann);
    const auto box = io::load_box(fixture("toy2.box"), 2);
    const RangeSpec range{{{0.0, 2.5}, {-1.0, 1.5}}};
    const auto report = search::find_numsteps(ann, snn, 0.5, box, range, 8, small_config());
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        const auto& r = report.records[i];
        EXPECT_EQ(r.steps, i + 1);
        const bool last = i + 1 == report.records.size();
        if (!last || report.outcome == search::Outcome::NotFound) {
            EXPECT_TRUE(!r.gate_passed || (r.verdict->unsafe() && !*r.acceptable) || r.verdict->unknown());
        }
    }
}

TEST(FindNumsteps, RejectsBadArguments)
{
    EXPECT_THROW(search::find_numsteps(demo_ann(), demo_snn(), 1, demo_point(), range1(4, 6), 0), InvalidConfig);
    EXPECT_THROW(search::find_numsteps(demo_ann(), demo_snn(), -1, demo_point(), range1(4, 6), 3), InvalidConfig);
    EXPECT_THROW(search::find_numsteps(demo_ann(), demo_snn(), 1, demo_point(), range1(6, 4), 3),
                 DegenerateInterval);
}

TEST(Report, CsvRows)
{
    const auto report =
        search::find_numsteps(demo_ann(), demo_snn(), 1e9, demo_point(), range1(4, 6), 6, small_config());
    const std::string csv = search::report_csv(report, false);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, search::kReportHeader);
    std::getline(in, line);
    // (5.1 - 4)^2 at T = 1
    EXPECT_EQ(line.rfind("1,1.21000,Unsafe,\"[3.99", 0), 0u) << line;
    EXPECT_EQ(line.substr(line.size() - 2), ",-");
    std::getline(in, line);
    EXPECT_EQ(line, "2,0.01000,Safe,-,-");
    EXPECT_FALSE(std::getline(in, line));
    const std::string timed = search::report_csv(report);
    EXPECT_NE(timed.find("s\n"), std::string::npos);
}

TEST(Report, GateFailedRowsHaveDashes)
{
    const auto report = search::find_numsteps(demo_ann(), demo_snn(), 0.0, demo_point(), range1(4, 6), 1,
                                              small_config());
    EXPECT_EQ(search::report_csv(report), std::string(search::kReportHeader) + "\n1,1.21000,-,-,-\n");
}

TEST(PlotData, RowsPerStepAndOutput)
{
    const auto report =
        search::find_numsteps(demo_ann(), demo_snn(), 1e9, demo_point(), range1(4, 6), 6, small_config());
    const std::string csv = search::plot_data_csv(report);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, search::kPlotHeader);
    std::getline(in, line);
    EXPECT_EQ(line.rfind("1,0,4,6,", 0), 0u) << line;
    EXPECT_EQ(line.substr(line.size() - 2), ",6");
    EXPECT_NEAR(std::stod(line.substr(8)), 4.0, 0.01 * (1 + 1e-9));
    std::getline(in, line);
    EXPECT_EQ(line, "2,0,4,6,4,6");
    EXPECT_THROW(search::plot_data_csv(search::SearchReport{}), InvalidConfig);
}
