#pragma once

// Exact forward execution of ReLU ANNs and SRLA spiking networks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "snnsafe/model.hpp"

namespace snnsafe::sim {

/// Values within this distance of an integer floor to that integer.
inline constexpr double kFloorSnap = 1e-9;

inline double snapped_floor(double x)
{
    const double r = std::round(x);
    if (std::abs(x - r) <= kFloorSnap)
        return r;
    return std::floor(x);
}

inline void check_input(const DenseTopology& net, const Vector& input)
{
    if (input.size() != static_cast<Eigen::Index>(net.input_count()))
        throw DimensionMismatch("input has " + std::to_string(input.size()) +
                                " entries, network expects " +
                                std::to_string(net.input_count()));
}

inline Vector ann_forward(const LayeredNetwork& net, const Vector& input)
{
    check_input(net, input);
    Vector a = input;
    const std::size_t links = net.weights.size();
    for (std::size_t k = 0; k < links; ++k) {
        a = net.weights[k] * a + net.biases[k];
        if (k + 1 < links)
            a = a.cwiseMax(0.0);
    }
    return a;
}

/// Membrane potentials of the hidden layers (threshold-scaled units), the
/// number of completed steps and the running sum of output instant potentials.
struct SnnState {
    std::vector<Vector> potential;
    std::size_t t = 0;
    Vector output_sum;

    static SnnState initial(const SpikingNetwork& snn)
    {
        SnnState s;
        for (std::size_t k = 1; k + 1 < snn.layer_count(); ++k)
            s.potential.push_back(Vector::Zero(static_cast<Eigen::Index>(snn.layer_sizes[k])));
        s.output_sum = Vector::Zero(static_cast<Eigen::Index>(snn.output_count()));
        return s;
    }
};

struct StepResult {
    SnnState state;
    /// Indexed by global neuron id. Inputs report their value as instant and
    /// amplitude; outputs report their instant potential in both fields too.
    std::vector<NeuronStep> neurons;
    Vector output_instant;
};

inline StepResult snn_step(const SpikingNetwork& snn, const SnnState& state, const Vector& input)
{
    check_input(snn, input);
    StepResult out;
    out.state = state;
    out.state.t = state.t + 1;
    out.neurons.resize(snn.neuron_count());

    NeuronId id = 0;
    for (Eigen::Index j = 0; j < input.size(); ++j, ++id)
        out.neurons[id] = {input(j), input(j), 0.0, input(j)};

    Vector amplitude = input;
    const std::size_t links = snn.weights.size();
    for (std::size_t k = 0; k < links; ++k) {
        const std::size_t layer = k + 1;
        Vector instant = snn.weights[k] * amplitude + snn.biases[k];
        if (layer + 1 == snn.layer_count()) {
            for (Eigen::Index i = 0; i < instant.size(); ++i, ++id)
                out.neurons[id] = {instant(i), instant(i), 0.0, instant(i)};
            out.output_instant = instant;
            out.state.output_sum += instant;
            break;
        }
        instant = instant.cwiseQuotient(snn.thresholds[k]);
        Vector& potential = out.state.potential[k];
        Vector next(instant.size());
        for (Eigen::Index i = 0; i < instant.size(); ++i, ++id) {
            const double before = snn.leak * state.potential[k](i) + instant(i);
            double a = 0.0;
            double residual = before;
            if (before > 0.0) {
                a = snapped_floor(before);
                residual = std::max(0.0, before - a);
            }
            potential(i) = residual;
            next(i) = a;
            out.neurons[id] = {instant(i), before, residual, a};
        }
        amplitude = std::move(next);
    }
    return out;
}

inline SimulationTrace snn_run(const SpikingNetwork& snn, const Vector& input, std::size_t steps)
{
    if (steps == 0)
        throw InvalidConfig("number of timesteps must be at least 1");
    SimulationTrace trace;
    trace.steps.reserve(steps);
    trace.running_average.reserve(steps);
    SnnState state = SnnState::initial(snn);
    for (std::size_t t = 1; t <= steps; ++t) {
        StepResult r = snn_step(snn, state, input);
        state = std::move(r.state);
        trace.steps.push_back(std::move(r.neurons));
        trace.running_average.push_back(state.output_sum / static_cast<double>(t));
    }
    return trace;
}

/// Final SNN outputs op_i(T), without keeping the trace.
inline Vector snn_output(const SpikingNetwork& snn, const Vector& input, std::size_t steps)
{
    if (steps == 0)
        throw InvalidConfig("number of timesteps must be at least 1");
    SnnState state = SnnState::initial(snn);
    for (std::size_t t = 1; t <= steps; ++t)
        state = snn_step(snn, state, input).state;
    return state.output_sum / static_cast<double>(steps);
}

/// Evaluates `fn` on every index in [0, n) using up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn)
{
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < jobs; ++w)
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += jobs)
                fn(i);
        });
    for (auto& t : workers)
        t.join();
}

inline std::vector<Vector> snn_outputs(const SpikingNetwork& snn, std::size_t steps,
                                       const Dataset& data, unsigned jobs = 1)
{
    std::vector<Vector> out(data.size());
    parallel_for(data.size(), jobs,
                 [&](std::size_t i) { out[i] = snn_output(snn, data.samples[i], steps); });
    return out;
}

/// Per-output mean squared error between ANN and SNN outputs over `data`.
inline Vector mse(const Dataset& data, const LayeredNetwork& ann, const SpikingNetwork& snn,
                  std::size_t steps, unsigned jobs = 1)
{
    if (data.empty())
        throw EmptyDataset("mse needs at least one sample");
    if (ann.output_count() != snn.output_count() || ann.input_count() != snn.input_count())
        throw DimensionMismatch("ANN and SNN interfaces differ");
    std::vector<Vector> sq(data.size());
    parallel_for(data.size(), jobs, [&](std::size_t i) {
        const Vector diff = ann_forward(ann, data.samples[i]) - snn_output(snn, data.samples[i], steps);
        sq[i] = diff.cwiseAbs2();
    });
    Vector total = Vector::Zero(static_cast<Eigen::Index>(snn.output_count()));
    for (const auto& s : sq)
        total += s;
    return total / static_cast<double>(data.size());
}

/// `n` points drawn uniformly per coordinate from `box`, reproducible per seed.
inline Dataset sample_inputs(const InputBox& box, std::size_t n, std::uint64_t seed)
{
    box.validate();
    Dataset data;
    data.seed = seed;
    data.samples.reserve(n);
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < n; ++s) {
        Vector x(static_cast<Eigen::Index>(box.size()));
        for (std::size_t j = 0; j < box.size(); ++j) {
            const auto& b = box[j];
            if (b.lower == b.upper) {
                x(static_cast<Eigen::Index>(j)) = b.lower;
            } else {
                std::uniform_real_distribution<double> dist(b.lower, b.upper);
                x(static_cast<Eigen::Index>(j)) = dist(rng);
            }
        }
        data.samples.push_back(std::move(x));
    }
    return data;
}

/// Lowest output index violating `range` (lower side checked first).
inline std::optional<std::pair<std::size_t, BoundSide>> first_violated_bound(const Vector& out,
                                                                            const RangeSpec& range)
{
    for (std::size_t i = 0; i < range.size(); ++i) {
        const double v = out(static_cast<Eigen::Index>(i));
        if (violates(v, range[i].lower, BoundSide::Lower))
            return std::pair{i, BoundSide::Lower};
        if (violates(v, range[i].upper, BoundSide::Upper))
            return std::pair{i, BoundSide::Upper};
    }
    return std::nullopt;
}

/// First sample (lowest index) whose SNN output leaves `range`.
inline std::optional<Verdict> find_violation(const SpikingNetwork& snn, std::size_t steps,
                                             const Dataset& data, const RangeSpec& range,
                                             unsigned jobs = 1)
{
    if (range.size() != snn.output_count())
        throw DimensionMismatch("range count does not match outputs");
    const auto outputs = snn_outputs(snn, steps, data, jobs);
    for (std::size_t s = 0; s < outputs.size(); ++s) {
        if (auto hit = first_violated_bound(outputs[s], range)) {
            const auto [i, side] = *hit;
            Counterexample cex{data.samples[s], outputs[s], i, side,
                               side == BoundSide::Lower ? range[i].lower : range[i].upper};
            return Verdict::make_unsafe(std::move(cex), Provenance::Simulation);
        }
    }
    return std::nullopt;
}

inline std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

/// Long-form dump, one row per neuron per timestep: neuron, t, S, P, A.
inline std::string dump_trace(const SimulationTrace& trace)
{
    std::string out = "neuron\tt\tS\tP\tA\n";
    for (std::size_t t = 1; t <= trace.length(); ++t) {
        const auto& row = trace.steps[t - 1];
        for (NeuronId n = 0; n < row.size(); ++n)
            out += "N" + std::to_string(n) + "\t" + std::to_string(t) + "\t" +
                   fmt("%.10g", row[n].instant) + "\t" + fmt("%.10g", row[n].potential) + "\t" +
                   fmt("%.10g", row[n].amplitude) + "\n";
    }
    return out;
}

/// Per-timestep table of stored potentials and spike outputs of all
/// non-input neurons, followed by the running output averages.
inline std::string format_table(const SimulationTrace& trace, const SpikingNetwork& snn)
{
    const NeuronId first = snn.input_count();
    const NeuronId last = snn.neuron_count();
    std::string out = "t";
    for (NeuronId n = first; n < last; ++n)
        out += "\tP(N" + std::to_string(n) + ")";
    for (NeuronId n = first; n < last; ++n)
        out += "\tA(N" + std::to_string(n) + ")";
    for (std::size_t o = 0; o < snn.output_count(); ++o)
        out += "\top" + std::to_string(o);
    out += "\n";
    for (std::size_t t = 1; t <= trace.length(); ++t) {
        out += std::to_string(t);
        for (NeuronId n = first; n < last; ++n)
            out += "\t" + fmt("%.6g", trace.at(n, t).potential_before);
        for (NeuronId n = first; n < last; ++n)
            out += "\t" + fmt("%.6g", trace.at(n, t).amplitude);
        for (Eigen::Index o = 0; o < trace.running_average[t - 1].size(); ++o)
            out += "\t" + fmt("%.6g", trace.running_average[t - 1](o));
        out += "\n";
    }
    return out;
}

} // namespace snnsafe::sim
