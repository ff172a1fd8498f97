#pragma once

// MILP encoding of a T-step SRLA network run.
//
// Per hidden neuron n and step t the model carries S (instant potential),
// x (ReLU of lambda*P_{t-1} + S), q (big-M selector), A (integer spike
// amplitude) and P (stored potential):
//   C0  P_{n,0} = 0
//   C1  S = (b + sum_j w_j A_{j,t}) / theta
//   C2  S + lambda*P_{t-1} + M*q >= x        C3  S + lambda*P_{t-1} <= x
//   C4  x >= 0                               C5  M*(1 - q) >= x
//   C6  q in {0, 1}
//   C7  A <= x                               C8  A + 1 >= x + eps
//   C9  P = lambda*P_{t-1} + S - A
// Outputs accumulate S = b + sum_j w_j A_{j,t} and op = (sum_t S_t) / T (C10).
// Input amplitudes are continuous, bounded by the box and equal across steps.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "snnsafe/milp/model.hpp"
#include "snnsafe/model.hpp"
#include "snnsafe/sim.hpp"

namespace snnsafe::encode {

using milp::Relation;
using milp::Term;
using milp::VarId;
using milp::VarKind;

/// Sound interval enclosure of every quantity of one hidden neuron-step.
struct NeuronBounds {
    Interval instant;
    /// lambda * P_{t-1} + S, the ReLU argument.
    Interval before;
    Interval relu;
    Interval amplitude;
    Interval potential;
    double big_m = 0.0;
};

struct BigMTable {
    std::size_t steps = 0;
    /// hidden[t-1][h] for hidden neuron h (global id = input_count + h).
    std::vector<std::vector<NeuronBounds>> hidden;
    /// output_instant[t-1][k]
    std::vector<std::vector<Interval>> output_instant;
    /// Enclosure of op_k.
    std::vector<Interval> output_average;

    double max_big_m() const
    {
        double m = 0.0;
        for (const auto& row : hidden)
            for (const auto& b : row)
                m = std::max(m, b.big_m);
        return m;
    }
};

inline constexpr double kBigMInflation = 1.01;

namespace detail {

inline double pad_amount(double v) { return 1e-9 * (1.0 + std::abs(v)); }

inline Interval pad(Interval iv)
{
    return {iv.lower - pad_amount(iv.lower), iv.upper + pad_amount(iv.upper)};
}

inline Interval hull(Interval a, Interval b)
{
    return {std::min(a.lower, b.lower), std::max(a.upper, b.upper)};
}

/// b + W * amp with sign-aware interval arithmetic.
inline std::vector<Interval> affine(const Matrix& w, const Vector& b, const std::vector<Interval>& amp)
{
    std::vector<Interval> out(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        double lo = b(i);
        double hi = b(i);
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            const double c = w(i, j);
            const auto& a = amp[static_cast<std::size_t>(j)];
            if (c >= 0.0) {
                lo += c * a.lower;
                hi += c * a.upper;
            } else {
                lo += c * a.upper;
                hi += c * a.lower;
            }
        }
        out[static_cast<std::size_t>(i)] = {lo, hi};
    }
    return out;
}

/// Enclosure of the stored residual given the ReLU-argument enclosure.
inline Interval residual(const Interval& before)
{
    std::optional<Interval> out;
    if (before.lower <= 0.0)
        out = Interval{before.lower, std::min(before.upper, 0.0)};
    if (before.upper > 0.0) {
        const double a = std::max(before.lower, 0.0);
        const double fa = sim::snapped_floor(a);
        const double fh = sim::snapped_floor(before.upper);
        const Interval seg = fa == fh ? Interval{std::max(0.0, a - fa), std::max(0.0, before.upper - fh)}
                                      : Interval{0.0, 1.0};
        out = out ? hull(*out, seg) : seg;
    }
    return *out;
}

} // namespace detail

/// Forward interval propagation through the spiking semantics. The big-M of
/// a neuron-step is 1.01 * max(|lo|, |hi|) of its ReLU-argument enclosure.
inline BigMTable compute_big_m(const SpikingNetwork& snn, std::size_t steps, const InputBox& box)
{
    snn.validate();
    box.validate();
    if (box.size() != snn.input_count())
        throw DimensionMismatch("input box has " + std::to_string(box.size()) + " intervals, network has " +
                                std::to_string(snn.input_count()) + " inputs");
    if (steps == 0)
        throw InvalidConfig("number of timesteps must be at least 1");

    BigMTable table;
    table.steps = steps;
    const std::size_t hidden_count = snn.neuron_count() - snn.input_count() - snn.output_count();
    std::vector<Interval> prev_potential(hidden_count, Interval{0.0, 0.0});
    std::vector<Interval> out_sum(snn.output_count(), Interval{0.0, 0.0});

    for (std::size_t t = 1; t <= steps; ++t) {
        std::vector<NeuronBounds> hidden_row;
        hidden_row.reserve(hidden_count);
        std::vector<Interval> amp = box.bounds;
        std::size_t h = 0;
        for (std::size_t k = 0; k < snn.weights.size(); ++k) {
            auto pre = detail::affine(snn.weights[k], snn.biases[k], amp);
            if (k + 1 == snn.weights.size()) {
                for (auto& iv : pre)
                    iv = detail::pad(iv);
                for (std::size_t o = 0; o < pre.size(); ++o) {
                    out_sum[o].lower += pre[o].lower;
                    out_sum[o].upper += pre[o].upper;
                }
                table.output_instant.push_back(std::move(pre));
                break;
            }
            std::vector<Interval> next(pre.size());
            for (std::size_t i = 0; i < pre.size(); ++i, ++h) {
                const double theta = snn.thresholds[k](static_cast<Eigen::Index>(i));
                NeuronBounds nb;
                nb.instant = detail::pad({pre[i].lower / theta, pre[i].upper / theta});
                const auto& pp = prev_potential[h];
                nb.before = detail::pad({snn.leak * pp.lower + nb.instant.lower,
                                         snn.leak * pp.upper + nb.instant.upper});
                nb.relu = {std::max(0.0, nb.before.lower), std::max(0.0, nb.before.upper)};
                nb.amplitude = {sim::snapped_floor(nb.relu.lower), sim::snapped_floor(nb.relu.upper)};
                nb.potential = detail::pad(detail::residual(nb.before));
                nb.big_m = kBigMInflation * std::max(std::abs(nb.before.lower), std::abs(nb.before.upper));
                prev_potential[h] = nb.potential;
                next[i] = nb.amplitude;
                hidden_row.push_back(nb);
            }
            amp = std::move(next);
        }
        table.hidden.push_back(std::move(hidden_row));
    }
    for (auto& s : out_sum)
        table.output_average.push_back(
            detail::pad({s.lower / static_cast<double>(steps), s.upper / static_cast<double>(steps)}));
    return table;
}

struct EncodeOptions {
    /// Strictness constant of the floor encoding (C8).
    double epsilon = 1e-6;
    /// Use the largest per-neuron M everywhere instead of per-step values.
    bool global_big_m = false;
};

enum class Role { S, P, A, X, Q };

struct HiddenVars {
    VarId instant;
    VarId potential;
    VarId relu;
    VarId selector;
    VarId amplitude;
};

struct EncodedSnn {
    milp::MilpModel model;
    SpikingNetwork network;
    InputBox box;
    std::size_t steps = 0;
    /// input[t-1][j]
    std::vector<std::vector<VarId>> input;
    /// hidden[t-1][h]
    std::vector<std::vector<HiddenVars>> hidden;
    /// P_{n,0} per hidden neuron.
    std::vector<VarId> initial_potential;
    /// output_instant[t-1][k]
    std::vector<std::vector<VarId>> output_instant;
    std::vector<VarId> op;
    BigMTable big_m;
    double epsilon = 1e-6;

    std::size_t input_count() const { return network.input_count(); }
    std::size_t output_count() const { return network.output_count(); }
    std::size_t hidden_count() const { return initial_potential.size(); }

    /// Variable for (neuron, timestep, role); t = 0 only exists for P.
    std::optional<VarId> variable(NeuronId n, std::size_t t, Role role) const
    {
        const std::size_t nin = input_count();
        const std::size_t nhid = hidden_count();
        if (t > steps)
            return std::nullopt;
        if (n < nin)
            return (role == Role::A && t >= 1) ? std::optional{input[t - 1][n]} : std::nullopt;
        if (n < nin + nhid) {
            const std::size_t h = n - nin;
            if (t == 0)
                return role == Role::P ? std::optional{initial_potential[h]} : std::nullopt;
            const auto& hv = hidden[t - 1][h];
            switch (role) {
            case Role::S: return hv.instant;
            case Role::P: return hv.potential;
            case Role::A: return hv.amplitude;
            case Role::X: return hv.relu;
            case Role::Q: return hv.selector;
            }
        }
        if (n < nin + nhid + output_count() && t >= 1 && role == Role::S)
            return output_instant[t - 1][n - nin - nhid];
        return std::nullopt;
    }
};

inline EncodedSnn encode_snn(const SpikingNetwork& snn, std::size_t steps, const InputBox& box,
                             const EncodeOptions& opt = {})
{
    EncodedSnn enc;
    enc.big_m = compute_big_m(snn, steps, box);
    enc.network = snn;
    enc.box = box;
    enc.steps = steps;
    enc.epsilon = opt.epsilon;
    auto& m = enc.model;
    const double lambda = snn.leak;
    const double global_m = enc.big_m.max_big_m();
    const auto nm = [](const char* tag, NeuronId n, std::size_t t) {
        return std::string(tag) + "_" + std::to_string(n) + "_" + std::to_string(t);
    };

    const std::size_t nin = snn.input_count();
    const std::size_t nhid = snn.neuron_count() - nin - snn.output_count();
    for (std::size_t h = 0; h < nhid; ++h) {
        const NeuronId n = nin + h;
        const VarId p0 = m.add_variable(nm("P", n, 0), VarKind::Continuous, 0.0, 0.0);
        m.add_constraint(nm("C0", n, 0), {{p0, 1.0}}, Relation::Equal, 0.0);
        enc.initial_potential.push_back(p0);
    }

    for (std::size_t t = 1; t <= steps; ++t) {
        std::vector<VarId> inputs;
        for (std::size_t j = 0; j < nin; ++j) {
            const VarId a = m.add_variable(nm("A", j, t), VarKind::Continuous, box[j].lower, box[j].upper);
            if (t > 1)
                m.add_constraint(nm("IN", j, t), {{a, 1.0}, {enc.input[0][j], -1.0}}, Relation::Equal, 0.0);
            inputs.push_back(a);
        }
        enc.input.push_back(inputs);

        std::vector<HiddenVars> hidden_row;
        std::vector<VarId> source = inputs;
        NeuronId n = nin;
        std::size_t h = 0;
        for (std::size_t k = 0; k < snn.weights.size(); ++k) {
            const Matrix& w = snn.weights[k];
            const Vector& b = snn.biases[k];
            const bool output_layer = k + 1 == snn.weights.size();
            std::vector<VarId> next;
            for (Eigen::Index i = 0; i < w.rows(); ++i, ++n) {
                const std::size_t row = static_cast<std::size_t>(i);
                if (output_layer) {
                    const auto& iv = enc.big_m.output_instant[t - 1][row];
                    const VarId s = m.add_variable(nm("S", n, t), VarKind::Continuous, iv.lower, iv.upper);
                    std::vector<Term> c1{{s, 1.0}};
                    for (Eigen::Index j = 0; j < w.cols(); ++j)
                        c1.push_back({source[static_cast<std::size_t>(j)], -w(i, j)});
                    m.add_constraint(nm("C1", n, t), std::move(c1), Relation::Equal, b(i));
                    next.push_back(s);
                    continue;
                }
                const double theta = snn.thresholds[k](i);
                const auto& nb = enc.big_m.hidden[t - 1][h];
                const double big_m = opt.global_big_m ? global_m : nb.big_m;
                HiddenVars hv;
                hv.instant = m.add_variable(nm("S", n, t), VarKind::Continuous, nb.instant.lower, nb.instant.upper);
                hv.relu = m.add_variable(nm("x", n, t), VarKind::Continuous, nb.relu.lower, nb.relu.upper);
                hv.selector = m.add_binary(nm("q", n, t));
                hv.amplitude = m.add_variable(nm("A", n, t), VarKind::Integer, nb.amplitude.lower, nb.amplitude.upper);
                hv.potential = m.add_variable(nm("P", n, t), VarKind::Continuous, nb.potential.lower, nb.potential.upper);
                const VarId prev = t == 1 ? enc.initial_potential[h] : enc.hidden[t - 2][h].potential;

                std::vector<Term> c1{{hv.instant, 1.0}};
                for (Eigen::Index j = 0; j < w.cols(); ++j)
                    c1.push_back({source[static_cast<std::size_t>(j)], -w(i, j) / theta});
                m.add_constraint(nm("C1", n, t), std::move(c1), Relation::Equal, b(i) / theta);
                m.add_constraint(nm("C2", n, t),
                                 {{hv.instant, 1.0}, {prev, lambda}, {hv.selector, big_m}, {hv.relu, -1.0}},
                                 Relation::GreaterEqual, 0.0);
                m.add_constraint(nm("C3", n, t), {{hv.instant, 1.0}, {prev, lambda}, {hv.relu, -1.0}},
                                 Relation::LessEqual, 0.0);
                m.add_constraint(nm("C4", n, t), {{hv.relu, 1.0}}, Relation::GreaterEqual, 0.0);
                if (big_m > 0.0)
                    m.add_constraint(nm("C5", n, t), {{hv.relu, 1.0}, {hv.selector, big_m}}, Relation::LessEqual,
                                     big_m);
                else
                    m.add_constraint(nm("C5", n, t), {{hv.relu, 1.0}}, Relation::LessEqual, 0.0);
                m.add_constraint(nm("C7", n, t), {{hv.amplitude, 1.0}, {hv.relu, -1.0}}, Relation::LessEqual, 0.0);
                m.add_constraint(nm("C8", n, t), {{hv.amplitude, 1.0}, {hv.relu, -1.0}}, Relation::GreaterEqual,
                                 opt.epsilon - 1.0);
                m.add_constraint(nm("C9", n, t),
                                 {{hv.potential, 1.0}, {prev, -lambda}, {hv.instant, -1.0}, {hv.amplitude, 1.0}},
                                 Relation::Equal, 0.0);
                hidden_row.push_back(hv);
                next.push_back(hv.amplitude);
                ++h;
            }
            if (output_layer)
                enc.output_instant.push_back(next);
            source = std::move(next);
        }
        enc.hidden.push_back(std::move(hidden_row));
    }

    const NeuronId first_out = nin + nhid;
    for (std::size_t k = 0; k < snn.output_count(); ++k) {
        const auto& iv = enc.big_m.output_average[k];
        const VarId op = m.add_variable("op_" + std::to_string(k), VarKind::Continuous, iv.lower, iv.upper);
        std::vector<Term> c10{{op, 1.0}};
        for (std::size_t t = 1; t <= steps; ++t)
            c10.push_back({enc.output_instant[t - 1][k], -1.0 / static_cast<double>(steps)});
        m.add_constraint(nm("C10", first_out + k, steps), std::move(c10), Relation::Equal, 0.0);
        enc.op.push_back(op);
    }
    return enc;
}

/// Maps a simulation trace onto the base encoding's variables; q is 1
/// exactly when the ReLU argument was not positive.
inline std::vector<double> trace_to_assignment(const EncodedSnn& enc, const SimulationTrace& trace)
{
    if (trace.length() != enc.steps)
        throw DimensionMismatch("trace length differs from the encoded horizon");
    std::vector<double> x(enc.model.variable_count(), 0.0);
    const std::size_t nin = enc.input_count();
    const std::size_t nhid = enc.hidden_count();
    for (std::size_t t = 1; t <= enc.steps; ++t) {
        for (std::size_t j = 0; j < nin; ++j)
            x[enc.input[t - 1][j].index] = trace.at(j, t).amplitude;
        for (std::size_t h = 0; h < nhid; ++h) {
            const auto& st = trace.at(nin + h, t);
            const auto& hv = enc.hidden[t - 1][h];
            x[hv.instant.index] = st.instant;
            x[hv.relu.index] = std::max(0.0, st.potential_before);
            x[hv.selector.index] = st.potential_before > 0.0 ? 0.0 : 1.0;
            x[hv.amplitude.index] = st.amplitude;
            x[hv.potential.index] = st.potential;
        }
        for (std::size_t k = 0; k < enc.output_count(); ++k)
            x[enc.output_instant[t - 1][k].index] = trace.at(nin + nhid + k, t).instant;
    }
    for (std::size_t k = 0; k < enc.output_count(); ++k)
        x[enc.op[k].index] = trace.outputs()(static_cast<Eigen::Index>(k));
    return x;
}

enum class QueryKind { Single, Disjunctive };

struct QueryMode {
    QueryKind kind = QueryKind::Disjunctive;
    std::size_t output = 0;

    static QueryMode single(std::size_t i) { return {QueryKind::Single, i}; }
    static QueryMode disjunctive() { return {QueryKind::Disjunctive, 0}; }
};

namespace detail {

inline double disjunction_m(const Interval& op, double bound)
{
    return kBigMInflation * std::max(std::abs(op.upper - bound), std::abs(op.lower - bound)) + 1e-6;
}

} // namespace detail

/// Base model plus "op_i >= bound" (upper side) or "op_i <= bound" (lower side).
inline milp::MilpModel encode_bound_query(const EncodedSnn& enc, std::size_t output, double bound, BoundSide side)
{
    if (output >= enc.output_count())
        throw IndexOutOfRange("output " + std::to_string(output) + " of " + std::to_string(enc.output_count()));
    milp::MilpModel m = enc.model;
    const bool upper = side == BoundSide::Upper;
    m.add_constraint((upper ? "UB_" : "LB_") + std::to_string(output), {{enc.op[output], 1.0}},
                     upper ? Relation::GreaterEqual : Relation::LessEqual, bound);
    return m;
}

namespace detail {

/// Adds z with z = 1 forcing op_k past `bound` on `side`; returns z.
inline VarId add_disjunct(milp::MilpModel& m, const EncodedSnn& enc, std::size_t k, double bound, BoundSide side)
{
    const bool upper = side == BoundSide::Upper;
    const std::string tag = upper ? "ub" : "lb";
    const std::string suffix = "_" + tag + "_" + std::to_string(k);
    const double big_m = disjunction_m(enc.big_m.output_average[k], bound);
    const VarId z = m.add_binary("z" + suffix);
    const VarId op = enc.op[k];
    if (upper) {
        // op - u <= M z  and  u - op <= M (1 - z)
        m.add_constraint("Da" + suffix, {{op, 1.0}, {z, -big_m}}, Relation::LessEqual, bound);
        m.add_constraint("Db" + suffix, {{op, -1.0}, {z, big_m}}, Relation::LessEqual, big_m - bound);
    } else {
        // l - op <= M z  and  op - l <= M (1 - z)
        m.add_constraint("Da" + suffix, {{op, -1.0}, {z, -big_m}}, Relation::LessEqual, -bound);
        m.add_constraint("Db" + suffix, {{op, 1.0}, {z, big_m}}, Relation::LessEqual, big_m + bound);
    }
    return z;
}

inline void check_count(const EncodedSnn& enc, std::size_t n)
{
    if (n != enc.output_count())
        throw CountMismatch("expected " + std::to_string(enc.output_count()) + " bounds, got " + std::to_string(n));
}

} // namespace detail

/// Negation of the bounds on one side: a single output or, in disjunctive
/// mode, any output, linearised with one fresh binary per output.
inline milp::MilpModel encode_side_query(const EncodedSnn& enc, const std::vector<double>& bounds, BoundSide side,
                                         QueryMode mode)
{
    detail::check_count(enc, bounds.size());
    if (mode.kind == QueryKind::Single)
        return encode_bound_query(enc, mode.output, mode.output < bounds.size() ? bounds[mode.output] : 0.0, side);

    milp::MilpModel m = enc.model;
    std::vector<Term> any;
    for (std::size_t k = 0; k < bounds.size(); ++k)
        any.push_back({detail::add_disjunct(m, enc, k, bounds[k], side), 1.0});
    m.add_constraint(std::string("D_any_") + (side == BoundSide::Upper ? "ub" : "lb"), std::move(any),
                     Relation::GreaterEqual, 1.0);
    return m;
}

/// Any output leaving its range on either side.
inline milp::MilpModel encode_range_query(const EncodedSnn& enc, const RangeSpec& range)
{
    detail::check_count(enc, range.size());
    milp::MilpModel m = enc.model;
    std::vector<Term> any;
    for (std::size_t k = 0; k < range.size(); ++k) {
        any.push_back({detail::add_disjunct(m, enc, k, range[k].lower, BoundSide::Lower), 1.0});
        any.push_back({detail::add_disjunct(m, enc, k, range[k].upper, BoundSide::Upper), 1.0});
    }
    m.add_constraint("D_any", std::move(any), Relation::GreaterEqual, 1.0);
    return m;
}

inline milp::MilpModel encode_ub_query(const EncodedSnn& enc, const std::vector<double>& upper, QueryMode mode)
{
    return encode_side_query(enc, upper, BoundSide::Upper, mode);
}

inline milp::MilpModel encode_lb_query(const EncodedSnn& enc, const std::vector<double>& lower, QueryMode mode)
{
    return encode_side_query(enc, lower, BoundSide::Lower, mode);
}

struct ExtractedInput {
    Vector input;
    Vector outputs;
};

inline ExtractedInput extract_counterexample(const EncodedSnn& enc, const milp::SolveResult& result)
{
    if (!result.feasible())
        throw NotFeasible("solve status is " + std::string(milp::to_string(result.status)));
    ExtractedInput out;
    out.input.resize(static_cast<Eigen::Index>(enc.input_count()));
    for (std::size_t j = 0; j < enc.input_count(); ++j)
        out.input(static_cast<Eigen::Index>(j)) =
            std::clamp(result.value(enc.input[0][j]), enc.box[j].lower, enc.box[j].upper);
    out.outputs.resize(static_cast<Eigen::Index>(enc.output_count()));
    for (std::size_t k = 0; k < enc.output_count(); ++k)
        out.outputs(static_cast<Eigen::Index>(k)) = result.value(enc.op[k]);
    return out;
}

} // namespace snnsafe::encode
