#pragma once

// Counterexample-seeded bound tightening: expand a violated bound by beta
// until the solver proves it, then a seeded random bisection down to delta.

#include <chrono>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "snnsafe/encode.hpp"
#include "snnsafe/sim.hpp"
#include "snnsafe/verify.hpp"

namespace snnsafe::tighten {

struct TightenConfig {
    std::size_t K = 5;
    double beta = 0.01;
    double delta = 0.001;
    verify::VerifyOptions verify;
    std::uint64_t seed = 0;
    /// Simulated before each solver probe in the bisection phase.
    std::optional<Dataset> probe;
    std::size_t max_iterations = 1000;

    void validate() const
    {
        if (!(delta > 0.0) || !(beta > delta) || !std::isfinite(beta))
            throw InvalidConfig("tightening needs beta > delta > 0");
        if (K < 1)
            throw InvalidConfig("tightening needs K >= 1");
        if (max_iterations < 1)
            throw InvalidConfig("tightening needs at least one bisection iteration");
    }
};

enum class TightenStatus { Tight, ExpansionExhausted, IterationCap };

inline const char* to_string(TightenStatus s)
{
    switch (s) {
    case TightenStatus::Tight: return "tight";
    case TightenStatus::ExpansionExhausted: return "expansion-exhausted";
    case TightenStatus::IterationCap: return "iteration-cap";
    }
    return "?";
}

struct TightenStep {
    std::size_t output = 0;
    BoundSide side = BoundSide::Upper;
    /// "expand" or "bisect".
    std::string phase;
    double bound = 0.0;
    /// "safe", "unsafe", "unknown" or "simulated" (probe data reached the bound).
    std::string outcome;
    double seconds = 0.0;
};

struct TightenResult {
    double bound = 0.0;
    /// Last violated and last proven bound; for find_ub left < right is
    /// (violated, safe), for find_lb (safe, violated).
    double left = 0.0;
    double right = 0.0;
    TightenStatus status = TightenStatus::Tight;
    std::vector<TightenStep> log;

    bool verified() const { return status != TightenStatus::ExpansionExhausted; }
};

/// The bisection stops once right - left is within this relative slack of
/// delta: the sampling interval (left + delta, right) has collapsed.
inline constexpr double kCollapseSlack = 1e-9;

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline const char* outcome(VerdictKind k)
{
    switch (k) {
    case VerdictKind::Safe: return "safe";
    case VerdictKind::Unsafe: return "unsafe";
    case VerdictKind::Unknown: return "unknown";
    }
    return "?";
}

/// Extreme probe output per side: max for upper, min for lower.
inline std::optional<double> probe_extreme(const encode::EncodedSnn& enc, std::size_t output, BoundSide side,
                                           const TightenConfig& cfg)
{
    if (!cfg.probe || cfg.probe->empty())
        return std::nullopt;
    const auto outs = sim::snn_outputs(enc.network, enc.steps, *cfg.probe, cfg.verify.jobs);
    double e = outs.front()(static_cast<Eigen::Index>(output));
    for (const auto& o : outs) {
        const double v = o(static_cast<Eigen::Index>(output));
        e = side == BoundSide::Upper ? std::max(e, v) : std::min(e, v);
    }
    return e;
}

/// Shared driver; `dir` is +1 for upper bounds and -1 for lower bounds, so
/// that the lower side runs as the upper search on negated bounds.
inline TightenResult search(const encode::EncodedSnn& enc, std::size_t output, double given, BoundSide side,
                            const TightenConfig& cfg)
{
    cfg.validate();
    if (output >= enc.output_count())
        throw IndexOutOfRange("output " + std::to_string(output) + " of " + std::to_string(enc.output_count()));
    const double dir = side == BoundSide::Upper ? 1.0 : -1.0;
    TightenResult res;
    const auto probe = [&](double b_neg, const char* phase) {
        const auto t0 = Clock::now();
        const double b = dir * b_neg;
        const Verdict v = verify::fv_single(enc, output, b, side, cfg.verify);
        res.log.push_back({output, side, phase, b, outcome(v.kind), seconds_since(t0)});
        return v.kind;
    };

    // Work in the upper-bound orientation: values are dir * bound.
    double ce = dir * given;
    double vio = ce;
    bool proven = false;
    for (std::size_t k = 0; k < cfg.K; ++k) {
        vio = ce;
        ce += cfg.beta;
        if (probe(ce, "expand") == VerdictKind::Safe) {
            proven = true;
            break;
        }
    }
    const auto finish = [&](double left, double right, TightenStatus st) {
        res.status = st;
        if (dir > 0) {
            res.left = left;
            res.right = right;
            res.bound = right;
        } else {
            res.left = -right;
            res.right = -left;
            res.bound = -right;
        }
        return res;
    };
    if (!proven)
        return finish(vio, ce, TightenStatus::ExpansionExhausted);

    const std::optional<double> extreme = probe_extreme(enc, output, side, cfg);
    std::mt19937_64 rng(cfg.seed);
    double left = vio;
    double right = ce;
    const double stop = cfg.delta * (1.0 + kCollapseSlack);
    for (std::size_t it = 0; right - left > stop; ++it) {
        if (it == cfg.max_iterations)
            return finish(left, right, TightenStatus::IterationCap);
        std::uniform_real_distribution<double> draw(left + cfg.delta, right);
        const double mid = draw(rng);
        if (extreme && dir * *extreme >= mid) {
            res.log.push_back({output, side, "bisect", dir * mid, "simulated", 0.0});
            left = mid;
            continue;
        }
        if (probe(mid, "bisect") == VerdictKind::Safe)
            right = mid;
        else
            left = mid;
    }
    return finish(left, right, TightenStatus::Tight);
}

} // namespace detail

/// Smallest proven upper bound within delta of a violated one. Precondition:
/// `u` is violated for `output`.
inline TightenResult find_ub(const encode::EncodedSnn& enc, std::size_t output, double u, const TightenConfig& cfg)
{
    return detail::search(enc, output, u, BoundSide::Upper, cfg);
}

/// Mirror of find_ub; returns the proven lower bound (the bracket's left end).
inline TightenResult find_lb(const encode::EncodedSnn& enc, std::size_t output, double l, const TightenConfig& cfg)
{
    return detail::search(enc, output, l, BoundSide::Lower, cfg);
}

struct SideResult {
    bool violated = false;
    std::optional<TightenResult> result;
};

struct TightenedRange {
    RangeSpec range;
    /// lower[i] and upper[i] describe output i.
    std::vector<SideResult> lower;
    std::vector<SideResult> upper;

    bool verified() const
    {
        for (const auto* sides : {&lower, &upper})
            for (const auto& s : *sides)
                if (s.result && !s.result->verified())
                    return false;
        return true;
    }

    std::vector<TightenStep> log() const
    {
        std::vector<TightenStep> all;
        for (std::size_t i = 0; i < lower.size(); ++i)
            for (const auto* s : {&lower[i], &upper[i]})
                if (s->result)
                    all.insert(all.end(), s->result->log.begin(), s->result->log.end());
        return all;
    }
};

/// Tightens every violated side of `range`. A side counts as violated when the
/// recorded counterexample hit it, the probe data reaches it, or a fresh
/// single-output query is not Safe.
inline TightenedRange snn_bounds(const SpikingNetwork& snn, std::size_t steps, const InputBox& box,
                                 const RangeSpec& range, const TightenConfig& cfg,
                                 const std::optional<Verdict>& recorded = std::nullopt)
{
    cfg.validate();
    range.validate();
    const encode::EncodedSnn enc = encode::encode_snn(snn, steps, box, cfg.verify.encoding);
    if (range.size() != enc.output_count())
        throw CountMismatch("expected " + std::to_string(enc.output_count()) + " ranges, got " +
                            std::to_string(range.size()));
    std::vector<Vector> probe_out;
    if (cfg.probe)
        probe_out = sim::snn_outputs(snn, steps, *cfg.probe, cfg.verify.jobs);

    TightenedRange out;
    out.range = range;
    out.lower.resize(range.size());
    out.upper.resize(range.size());
    for (std::size_t i = 0; i < range.size(); ++i) {
        for (const BoundSide side : {BoundSide::Lower, BoundSide::Upper}) {
            const double given = side == BoundSide::Lower ? range[i].lower : range[i].upper;
            bool hit = recorded && recorded->counterexample && recorded->counterexample->output_index == i &&
                       recorded->counterexample->side == side;
            for (const auto& o : probe_out)
                hit = hit || violates(o(static_cast<Eigen::Index>(i)), given, side);
            if (!hit)
                hit = verify::fv_single(enc, i, given, side, cfg.verify).kind != VerdictKind::Safe;
            SideResult& sr = side == BoundSide::Lower ? out.lower[i] : out.upper[i];
            sr.violated = hit;
            if (!hit)
                continue;
            sr.result = side == BoundSide::Lower ? find_lb(enc, i, given, cfg) : find_ub(enc, i, given, cfg);
            if (side == BoundSide::Lower)
                out.range.bounds[i].lower = sr.result->bound;
            else
                out.range.bounds[i].upper = sr.result->bound;
        }
    }
    return out;
}

} // namespace snnsafe::tighten
