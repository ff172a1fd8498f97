#pragma once

// Domain types: dense ReLU networks, their spiking counterparts, ranges,
// input boxes, datasets, simulation traces and verification verdicts.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "snnsafe/error.hpp"

namespace snnsafe {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Global neuron index. Neurons are numbered layer by layer starting with the
/// inputs, so a 2x2x1 network has inputs N0,N1, hidden N2,N3 and output N4.
using NeuronId = std::size_t;

enum class Activation { ReLU, SRLA };

inline const char* to_string(Activation a)
{
    return a == Activation::ReLU ? "relu" : "srla";
}

/// Layer sizes plus dense weights and biases. Weight matrix k maps layer k to
/// layer k+1 and is stored destination-major (rows = destination neurons).
struct DenseTopology {
    std::vector<std::size_t> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    std::size_t layer_count() const { return layer_sizes.size(); }
    std::size_t input_count() const { return layer_sizes.front(); }
    std::size_t output_count() const { return layer_sizes.back(); }
    std::size_t hidden_layer_count() const { return layer_sizes.size() - 2; }

    std::size_t neuron_count() const
    {
        std::size_t n = 0;
        for (auto s : layer_sizes)
            n += s;
        return n;
    }

    NeuronId neuron_id(std::size_t layer, std::size_t index) const
    {
        NeuronId id = 0;
        for (std::size_t k = 0; k < layer; ++k)
            id += layer_sizes[k];
        return id + index;
    }

    bool is_hidden_layer(std::size_t layer) const
    {
        return layer > 0 && layer + 1 < layer_sizes.size();
    }

    void validate_topology() const
    {
        if (layer_sizes.size() < 3)
            throw ShapeError("network needs at least one hidden layer, got " +
                             std::to_string(layer_sizes.size()) + " layers");
        for (auto s : layer_sizes)
            if (s == 0)
                throw ShapeError("layer sizes must be positive");
        const std::size_t links = layer_sizes.size() - 1;
        if (weights.size() != links || biases.size() != links)
            throw ShapeError("expected " + std::to_string(links) +
                             " weight matrices and bias vectors, got " +
                             std::to_string(weights.size()) + " and " +
                             std::to_string(biases.size()));
        for (std::size_t k = 0; k < links; ++k) {
            const auto rows = static_cast<Eigen::Index>(layer_sizes[k + 1]);
            const auto cols = static_cast<Eigen::Index>(layer_sizes[k]);
            if (weights[k].rows() != rows || weights[k].cols() != cols)
                throw ShapeError("weight matrix " + std::to_string(k) + " is " +
                                 std::to_string(weights[k].rows()) + "x" +
                                 std::to_string(weights[k].cols()) + ", expected " +
                                 std::to_string(rows) + "x" + std::to_string(cols));
            if (biases[k].size() != rows)
                throw ShapeError("bias vector " + std::to_string(k) + " has length " +
                                 std::to_string(biases[k].size()) + ", expected " +
                                 std::to_string(rows));
            if (!weights[k].allFinite() || !biases[k].allFinite())
                throw ShapeError("non-finite parameter in layer " + std::to_string(k));
        }
    }

    bool same_topology(const DenseTopology& other) const
    {
        if (layer_sizes != other.layer_sizes)
            return false;
        for (std::size_t k = 0; k < weights.size(); ++k)
            if (weights[k] != other.weights[k] || biases[k] != other.biases[k])
                return false;
        return true;
    }
};

/// Feed-forward ANN with ReLU hidden layers and an affine output layer.
struct LayeredNetwork : DenseTopology {
    Activation hidden_activation = Activation::ReLU;

    void validate() const
    {
        validate_topology();
        if (hidden_activation != Activation::ReLU)
            throw UnsupportedActivation("layered networks must use relu");
    }
};

/// SNN with SRLA hidden neurons and linear accumulating outputs. Thresholds
/// exist for hidden layers only; `thresholds[k]` belongs to layer k+1.
struct SpikingNetwork : DenseTopology {
    std::vector<Vector> thresholds;
    double leak = 1.0;

    double threshold(std::size_t layer, std::size_t index) const
    {
        return is_hidden_layer(layer) ? thresholds[layer - 1](static_cast<Eigen::Index>(index))
                                      : 1.0;
    }

    void validate() const
    {
        validate_topology();
        if (thresholds.size() != hidden_layer_count())
            throw ShapeError("expected one threshold vector per hidden layer");
        for (std::size_t k = 0; k < thresholds.size(); ++k) {
            if (thresholds[k].size() != static_cast<Eigen::Index>(layer_sizes[k + 1]))
                throw ShapeError("threshold vector " + std::to_string(k) + " has wrong length");
            for (Eigen::Index i = 0; i < thresholds[k].size(); ++i)
                if (!(thresholds[k](i) > 0.0) || !std::isfinite(thresholds[k](i)))
                    throw InvalidTheta("thresholds must be positive and finite");
        }
        if (!(leak >= 0.0 && leak <= 1.0))
            throw InvalidLeak("leak factor must lie in [0, 1]");
    }
};

/// Closed real interval [lower, upper].
struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }
    bool contains(double v) const { return lower <= v && v <= upper; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Containment order on ranges: inner <= outer iff outer.lower <= inner.lower
/// and inner.upper <= outer.upper.
inline bool contained_in(const Interval& inner, const Interval& outer)
{
    return outer.lower <= inner.lower && inner.upper <= outer.upper;
}

/// Per-output safe range [l_i, u_i] with l_i < u_i.
struct RangeSpec {
    std::vector<Interval> bounds;

    std::size_t size() const { return bounds.size(); }
    const Interval& operator[](std::size_t i) const { return bounds[i]; }

    void validate() const
    {
        for (std::size_t i = 0; i < bounds.size(); ++i) {
            const auto& b = bounds[i];
            if (!std::isfinite(b.lower) || !std::isfinite(b.upper))
                throw DegenerateInterval("range " + std::to_string(i) + " is not finite");
            if (!(b.lower < b.upper))
                throw DegenerateInterval("range " + std::to_string(i) +
                                         " needs lower < upper");
        }
    }

    friend bool operator==(const RangeSpec&, const RangeSpec&) = default;
};

inline bool contained_in(const RangeSpec& inner, const RangeSpec& outer)
{
    if (inner.size() != outer.size())
        return false;
    for (std::size_t i = 0; i < inner.size(); ++i)
        if (!contained_in(inner[i], outer[i]))
            return false;
    return true;
}

/// Per-input closed box; a fixed input is a degenerate interval.
struct InputBox {
    std::vector<Interval> bounds;

    std::size_t size() const { return bounds.size(); }
    const Interval& operator[](std::size_t i) const { return bounds[i]; }

    bool is_point() const
    {
        for (const auto& b : bounds)
            if (b.lower != b.upper)
                return false;
        return true;
    }

    bool contains(const Vector& x) const
    {
        if (x.size() != static_cast<Eigen::Index>(bounds.size()))
            return false;
        for (std::size_t j = 0; j < bounds.size(); ++j)
            if (!bounds[j].contains(x(static_cast<Eigen::Index>(j))))
                return false;
        return true;
    }

    void validate() const
    {
        for (std::size_t j = 0; j < bounds.size(); ++j) {
            const auto& b = bounds[j];
            if (!std::isfinite(b.lower) || !std::isfinite(b.upper))
                throw ParseError("input interval " + std::to_string(j) + " must be finite");
            if (b.lower > b.upper)
                throw DegenerateInterval("input interval " + std::to_string(j) + " has a > b");
        }
    }

    static InputBox point(const Vector& x)
    {
        InputBox box;
        for (Eigen::Index j = 0; j < x.size(); ++j)
            box.bounds.push_back({x(j), x(j)});
        return box;
    }
};

struct Dataset {
    std::vector<Vector> samples;
    std::uint64_t seed = 0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

/// One neuron at one timestep. `potential_before` is the ReLU argument
/// lambda * P_{t-1} + S_t; `potential` is the stored residual P_t.
struct NeuronStep {
    double instant = 0.0;
    double potential_before = 0.0;
    double potential = 0.0;
    double amplitude = 0.0;
};

struct SimulationTrace {
    /// steps[t-1][neuron id]
    std::vector<std::vector<NeuronStep>> steps;
    /// running_average[t-1][output index] = (sum_{s<=t} S_s) / t
    std::vector<Vector> running_average;

    std::size_t length() const { return steps.size(); }
    const NeuronStep& at(NeuronId n, std::size_t t) const { return steps.at(t - 1).at(n); }
    const Vector& outputs() const { return running_average.back(); }
};

enum class VerdictKind { Safe, Unsafe, Unknown };
enum class Provenance { Simulation, Formal };
enum class BoundSide { Lower, Upper };

inline const char* to_string(VerdictKind k)
{
    switch (k) {
    case VerdictKind::Safe: return "Safe";
    case VerdictKind::Unsafe: return "Unsafe";
    case VerdictKind::Unknown: return "Unknown";
    }
    return "?";
}

inline const char* to_string(Provenance p)
{
    return p == Provenance::Simulation ? "simulation" : "formal";
}

inline const char* to_string(BoundSide s)
{
    return s == BoundSide::Lower ? "lower" : "upper";
}

struct Counterexample {
    Vector input;
    /// SNN output values claimed for `input` (simulated or read from the solver).
    Vector outputs;
    std::size_t output_index = 0;
    BoundSide side = BoundSide::Upper;
    double bound = 0.0;
};

struct Verdict {
    VerdictKind kind = VerdictKind::Unknown;
    std::optional<Counterexample> counterexample;
    Provenance provenance = Provenance::Formal;

    bool safe() const { return kind == VerdictKind::Safe; }
    bool unsafe() const { return kind == VerdictKind::Unsafe; }
    bool unknown() const { return kind == VerdictKind::Unknown; }

    static Verdict make_safe(Provenance p = Provenance::Formal) { return {VerdictKind::Safe, {}, p}; }
    static Verdict make_unknown() { return {VerdictKind::Unknown, {}, Provenance::Formal}; }
    static Verdict make_unsafe(Counterexample cex, Provenance p)
    {
        return {VerdictKind::Unsafe, std::move(cex), p};
    }
};

/// Non-strict violation test: an output sitting exactly on a bound violates it.
inline bool violates(double value, double bound, BoundSide side)
{
    return side == BoundSide::Upper ? value >= bound : value <= bound;
}

} // namespace snnsafe
