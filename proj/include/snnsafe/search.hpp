#pragma once

// NUMSTEPS selection: for T = 1..T_up pass the MSE gate, verify, and on an
// Unsafe verdict tighten the range and test it for acceptability.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "snnsafe/io.hpp"
#include "snnsafe/sim.hpp"
#include "snnsafe/tighten.hpp"
#include "snnsafe/verify.hpp"

namespace snnsafe::search {

struct SearchConfig {
    double margin = 0.0;
    std::size_t mse_samples = 5000;
    std::size_t verify_samples = 500;
    /// MSE data uses `seed`, the verification data `seed + 1`.
    std::uint64_t seed = 0;
    verify::VerifyOptions verify;
    /// K, beta, delta and seed of the tightening stage; its probe data is
    /// always the verification dataset.
    tighten::TightenConfig tighten;
};

enum class Outcome { Found, FoundWithRelaxedRange, NotFound };

inline const char* to_string(Outcome o)
{
    switch (o) {
    case Outcome::Found: return "Found";
    case Outcome::FoundWithRelaxedRange: return "FoundWithRelaxedRange";
    case Outcome::NotFound: return "NotFound";
    }
    return "?";
}

struct SearchRecord {
    std::size_t steps = 0;
    Vector mse;
    bool gate_passed = false;
    std::optional<Verdict> verdict;
    std::optional<tighten::TightenedRange> tightened;
    std::optional<bool> acceptable;
    double seconds = 0.0;
};

struct SearchReport {
    std::vector<SearchRecord> records;
    Outcome outcome = Outcome::NotFound;
    std::optional<std::size_t> steps;
    /// The tightened range of a FoundWithRelaxedRange outcome.
    std::optional<RangeSpec> relaxed;
    RangeSpec given;
    std::uint64_t seed = 0;

    std::string summary() const
    {
        switch (outcome) {
        case Outcome::Found: return "NUMSTEPS = " + std::to_string(*steps);
        case Outcome::FoundWithRelaxedRange:
            return "NUMSTEPS = " + std::to_string(*steps) + " with range " + io::serialize(*relaxed);
        case Outcome::NotFound: break;
        }
        return "No such T is found";
    }
};

/// Each tightened interval inside the given one widened by margin * width.
inline bool acceptable(const RangeSpec& tightened, const RangeSpec& given, double margin)
{
    if (!(margin >= 0.0))
        throw InvalidConfig("acceptability margin must be non-negative");
    if (tightened.size() != given.size())
        throw CountMismatch("range counts differ");
    for (std::size_t i = 0; i < given.size(); ++i) {
        const double pad = margin * given[i].width();
        if (tightened[i].lower < given[i].lower - pad || tightened[i].upper > given[i].upper + pad)
            return false;
    }
    return true;
}

inline SearchReport find_numsteps(const LayeredNetwork& ann, const SpikingNetwork& snn, double eps,
                                  const InputBox& box, const RangeSpec& range, std::size_t t_up,
                                  const SearchConfig& cfg = {})
{
    if (t_up < 1)
        throw InvalidConfig("T_up must be at least 1");
    if (std::isnan(eps) || eps < 0.0)
        throw InvalidConfig("eps must be non-negative");
    range.validate();
    box.validate();
    if (range.size() != snn.output_count())
        throw CountMismatch("expected " + std::to_string(snn.output_count()) + " ranges, got " +
                            std::to_string(range.size()));

    const Dataset mse_data = sim::sample_inputs(box, cfg.mse_samples, cfg.seed);
    const Dataset verify_data = sim::sample_inputs(box, cfg.verify_samples, cfg.seed + 1);
    tighten::TightenConfig tcfg = cfg.tighten;
    tcfg.verify = cfg.verify;
    tcfg.probe = verify_data;

    SearchReport report;
    report.given = range;
    report.seed = cfg.seed;
    using Clock = std::chrono::steady_clock;
    for (std::size_t t = 1; t <= t_up; ++t) {
        const auto t0 = Clock::now();
        SearchRecord rec;
        rec.steps = t;
        rec.mse = sim::mse(mse_data, ann, snn, t, cfg.verify.jobs);
        rec.gate_passed = (rec.mse.array() < eps).all();
        if (!rec.gate_passed) {
            rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            report.records.push_back(std::move(rec));
            continue;
        }
        rec.verdict = verify::verify(snn, t, verify_data, box, range, cfg.verify);
        bool stop = false;
        if (rec.verdict->kind == VerdictKind::Safe) {
            report.outcome = Outcome::Found;
            report.steps = t;
            stop = true;
        } else if (rec.verdict->kind == VerdictKind::Unsafe) {
            rec.tightened = tighten::snn_bounds(snn, t, box, range, tcfg, rec.verdict);
            rec.acceptable = rec.tightened->verified() && acceptable(rec.tightened->range, range, cfg.margin);
            if (*rec.acceptable) {
                report.outcome = Outcome::FoundWithRelaxedRange;
                report.steps = t;
                report.relaxed = rec.tightened->range;
                stop = true;
            }
        }
        rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        report.records.push_back(std::move(rec));
        if (stop)
            break;
    }
    return report;
}

namespace detail {

inline std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string quoted(const std::string& s)
{
    return s.find_first_of(",\"") == std::string::npos ? s : "\"" + s + "\"";
}

inline std::string range_cell(const RangeSpec& r)
{
    std::string out;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i)
            out += "; ";
        out += "[" + fixed(r[i].lower, 5) + ", " + fixed(r[i].upper, 5) + "]";
    }
    return out;
}

} // namespace detail

inline constexpr const char* kReportHeader =
    "# of Timesteps,MSE,Verification Result,Range Obtained from Bound Tightening,Total Time Taken";

/// One row per visited T; "-" marks stages that did not run.
inline std::string report_csv(const SearchReport& report, bool include_time = true)
{
    std::string out = std::string(kReportHeader) + "\n";
    for (const auto& r : report.records) {
        std::string mse;
        for (Eigen::Index i = 0; i < r.mse.size(); ++i)
            mse += (i ? ", " : "") + detail::fixed(r.mse(i), 5);
        out += std::to_string(r.steps) + "," + detail::quoted(mse) + ",";
        out += r.verdict ? to_string(r.verdict->kind) : "-";
        out += ",";
        out += r.tightened ? detail::quoted(detail::range_cell(r.tightened->range)) : "-";
        out += ",";
        out += r.verdict && include_time ? detail::fixed(r.seconds, 3) + "s" : "-";
        out += "\n";
    }
    return out;
}

inline void write_report(const SearchReport& report, const std::string& path)
{
    io::write_file(path, report_csv(report));
}

inline constexpr const char* kPlotHeader = "T,output,given_lb,given_ub,tightened_lb,tightened_ub";

/// Given against tightened bounds per T and output; untightened rows repeat
/// the given bounds.
inline std::string plot_data_csv(const SearchReport& report)
{
    if (report.records.empty())
        throw InvalidConfig("cannot emit plot data for an empty report");
    std::string out = std::string(kPlotHeader) + "\n";
    for (const auto& r : report.records)
        for (std::size_t i = 0; i < report.given.size(); ++i) {
            const Interval g = report.given[i];
            const Interval t = r.tightened ? r.tightened->range[i] : g;
            out += std::to_string(r.steps) + "," + std::to_string(i) + "," + io::format_double(g.lower) + "," +
                   io::format_double(g.upper) + "," + io::format_double(t.lower) + "," +
                   io::format_double(t.upper) + "\n";
        }
    return out;
}

inline void emit_plot_data(const SearchReport& report, const std::string& path)
{
    const std::string text = plot_data_csv(report);
    io::write_file(path, text);
}

/// Plot rows for a single tightening run at horizon `steps`.
inline std::string plot_data_csv(const tighten::TightenedRange& tightened, const RangeSpec& given, std::size_t steps)
{
    SearchReport r;
    r.given = given;
    SearchRecord rec;
    rec.steps = steps;
    rec.tightened = tightened;
    r.records.push_back(std::move(rec));
    return plot_data_csv(r);
}

} // namespace snnsafe::search
