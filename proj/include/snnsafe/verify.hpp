#pragma once

// Simulation first, then exact MILP queries for each side of the safe range.

#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

#include "snnsafe/encode.hpp"
#include "snnsafe/milp/solver.hpp"
#include "snnsafe/model.hpp"
#include "snnsafe/sim.hpp"

namespace snnsafe::verify {

using Budget = std::chrono::duration<double>;

/// Counts MILP solve invocations; shared by reference across calls.
struct SolverCounter {
    std::atomic<std::size_t> calls{0};
};

struct VerifyOptions {
    /// Wall-clock budget of each solver call.
    Budget budget = std::chrono::hours(1);
    milp::SolverOptions solver;
    encode::EncodeOptions encoding;
    /// One disjunctive query per side instead of one query per output.
    bool disjunctive = true;
    /// Simulation samples drawn by verify() when no dataset is given.
    std::size_t sim_samples = 500;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    SolverCounter* counter = nullptr;
};

/// Agreement tolerance between claimed and re-simulated outputs.
inline constexpr double kAgreementTol = 1e-6;

namespace detail {

inline milp::SolveResult run_solver(const milp::MilpModel& model, const VerifyOptions& opt)
{
    if (opt.counter)
        ++opt.counter->calls;
    return milp::solve(model, opt.budget, opt.solver);
}

/// Lowest output index whose re-simulated value violates its bound on `side`,
/// allowing the agreement tolerance for solver round-off.
inline std::optional<std::size_t> violated_output(const Vector& out, const std::vector<double>& bounds, BoundSide side,
                                                  std::optional<std::size_t> only)
{
    for (std::size_t k = 0; k < bounds.size(); ++k) {
        if (only && *only != k)
            continue;
        const double v = out(static_cast<Eigen::Index>(k));
        const double slack = side == BoundSide::Upper ? v - bounds[k] : bounds[k] - v;
        if (slack >= -kAgreementTol)
            return k;
    }
    return std::nullopt;
}

inline Verdict side_query(const encode::EncodedSnn& enc, const std::vector<double>& bounds, BoundSide side,
                          encode::QueryMode mode, const VerifyOptions& opt)
{
    const milp::MilpModel model = encode::encode_side_query(enc, bounds, side, mode);
    const milp::SolveResult res = run_solver(model, opt);
    switch (res.status) {
    case milp::SolveStatus::Infeasible: return Verdict::make_safe();
    case milp::SolveStatus::Timeout:
    case milp::SolveStatus::Unbounded: return Verdict::make_unknown();
    case milp::SolveStatus::Feasible: break;
    }
    const auto x = encode::extract_counterexample(enc, res);
    const Vector out = sim::snn_output(enc.network, x.input, enc.steps);
    const std::optional<std::size_t> only =
        mode.kind == encode::QueryKind::Single ? std::optional{mode.output} : std::nullopt;
    std::size_t k = only.value_or(0);
    if (auto hit = violated_output(out, bounds, side, only)) {
        k = *hit;
    } else {
        // The solver witness does not reproduce; report the output the MILP
        // claims so check_counterexample flags the disagreement.
        for (std::size_t i = 0; i < bounds.size() && !only; ++i) {
            const double v = x.outputs(static_cast<Eigen::Index>(i));
            if (side == BoundSide::Upper ? v >= bounds[i] - kAgreementTol : v <= bounds[i] + kAgreementTol) {
                k = i;
                break;
            }
        }
        return Verdict::make_unsafe({x.input, x.outputs, k, side, bounds[k]}, Provenance::Formal);
    }
    return Verdict::make_unsafe({x.input, out, k, side, bounds[k]}, Provenance::Formal);
}

inline std::vector<double> uppers(const RangeSpec& r)
{
    std::vector<double> v;
    for (const auto& iv : r.bounds)
        v.push_back(iv.upper);
    return v;
}

inline std::vector<double> lowers(const RangeSpec& r)
{
    std::vector<double> v;
    for (const auto& iv : r.bounds)
        v.push_back(iv.lower);
    return v;
}

/// Folds per-query verdicts: first Unsafe wins, otherwise any Unknown.
inline Verdict combine(const std::vector<Verdict>& vs)
{
    bool unknown = false;
    for (const auto& v : vs) {
        if (v.kind == VerdictKind::Unsafe)
            return v;
        unknown = unknown || v.kind == VerdictKind::Unknown;
    }
    return unknown ? Verdict::make_unknown() : Verdict::make_safe();
}

inline Verdict over_side(const encode::EncodedSnn& enc, const std::vector<double>& bounds, BoundSide side,
                         const VerifyOptions& opt)
{
    if (opt.disjunctive)
        return side_query(enc, bounds, side, encode::QueryMode::disjunctive(), opt);
    std::vector<Verdict> vs;
    for (std::size_t k = 0; k < bounds.size(); ++k) {
        vs.push_back(side_query(enc, bounds, side, encode::QueryMode::single(k), opt));
        if (vs.back().kind == VerdictKind::Unsafe)
            break;
    }
    return combine(vs);
}

} // namespace detail

/// Unsafe if some input in the box drives an output to or above its bound.
inline Verdict fv_ub(const encode::EncodedSnn& enc, const std::vector<double>& upper, encode::QueryMode mode,
                     const VerifyOptions& opt = {})
{
    return detail::side_query(enc, upper, BoundSide::Upper, mode, opt);
}

inline Verdict fv_ub(const encode::EncodedSnn& enc, const std::vector<double>& upper, const VerifyOptions& opt = {})
{
    return detail::over_side(enc, upper, BoundSide::Upper, opt);
}

/// Unsafe if some input in the box drives an output to or below its bound.
inline Verdict fv_lb(const encode::EncodedSnn& enc, const std::vector<double>& lower, encode::QueryMode mode,
                     const VerifyOptions& opt = {})
{
    return detail::side_query(enc, lower, BoundSide::Lower, mode, opt);
}

inline Verdict fv_lb(const encode::EncodedSnn& enc, const std::vector<double>& lower, const VerifyOptions& opt = {})
{
    return detail::over_side(enc, lower, BoundSide::Lower, opt);
}

/// Single-output query for one side and one bound value.
inline Verdict fv_single(const encode::EncodedSnn& enc, std::size_t output, double bound, BoundSide side,
                         const VerifyOptions& opt = {})
{
    std::vector<double> bounds(enc.output_count(), 0.0);
    if (output >= bounds.size())
        throw IndexOutOfRange("output " + std::to_string(output) + " of " + std::to_string(bounds.size()));
    bounds[output] = bound;
    return detail::side_query(enc, bounds, side, encode::QueryMode::single(output), opt);
}

/// Lower side first, then upper; an Unsafe lower side short-circuits.
inline Verdict fv(const encode::EncodedSnn& enc, const RangeSpec& range, const VerifyOptions& opt = {})
{
    range.validate();
    if (range.size() != enc.output_count())
        throw CountMismatch("expected " + std::to_string(enc.output_count()) + " ranges, got " +
                            std::to_string(range.size()));
    const Verdict lb = fv_lb(enc, detail::lowers(range), opt);
    if (lb.kind == VerdictKind::Unsafe)
        return lb;
    const Verdict ub = fv_ub(enc, detail::uppers(range), opt);
    return detail::combine({lb, ub});
}

inline Verdict fv(const SpikingNetwork& snn, std::size_t steps, const InputBox& box, const RangeSpec& range,
                  const VerifyOptions& opt = {})
{
    return fv(encode::encode_snn(snn, steps, box, opt.encoding), range, opt);
}

/// Simulates `data`; only a clean dataset reaches the formal queries.
inline Verdict verify(const SpikingNetwork& snn, std::size_t steps, const Dataset& data, const InputBox& box,
                      const RangeSpec& range, const VerifyOptions& opt = {})
{
    range.validate();
    if (auto v = sim::find_violation(snn, steps, data, range, opt.jobs))
        return *v;
    return fv(snn, steps, box, range, opt);
}

inline Verdict verify(const SpikingNetwork& snn, std::size_t steps, const InputBox& box, const RangeSpec& range,
                      const VerifyOptions& opt = {})
{
    return verify(snn, steps, sim::sample_inputs(box, opt.sim_samples, opt.seed), box, range, opt);
}

/// Re-simulates an Unsafe verdict's input: true when the outputs agree with
/// the recorded ones and the recorded bound is reached.
inline bool check_counterexample(const SpikingNetwork& snn, std::size_t steps, const Verdict& verdict,
                                 double tol = kAgreementTol)
{
    if (verdict.kind != VerdictKind::Unsafe || !verdict.counterexample)
        throw NotUnsafe("verdict is " + std::string(to_string(verdict.kind)));
    const auto& cex = *verdict.counterexample;
    if (cex.input.size() != static_cast<Eigen::Index>(snn.input_count()) ||
        cex.outputs.size() != static_cast<Eigen::Index>(snn.output_count()) || cex.output_index >= snn.output_count())
        return false;
    const Vector out = sim::snn_output(snn, cex.input, steps);
    if ((out - cex.outputs).cwiseAbs().maxCoeff() > tol)
        return false;
    const double v = out(static_cast<Eigen::Index>(cex.output_index));
    return cex.side == BoundSide::Upper ? v >= cex.bound - tol : v <= cex.bound + tol;
}

} // namespace snnsafe::verify
