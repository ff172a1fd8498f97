#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>

#include "snnsafe/model.hpp"

namespace snnsafe::convert {

/// Replaces every ReLU with an SRLA neuron, keeping weights and biases.
inline SpikingNetwork ann_to_snn(const LayeredNetwork& ann, double theta = 1.0, double leak = 1.0)
{
    ann.validate();
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw InvalidTheta("threshold must be positive, got " + std::to_string(theta));
    if (!(leak >= 0.0 && leak <= 1.0))
        throw InvalidLeak("leak must lie in [0, 1], got " + std::to_string(leak));
    SpikingNetwork snn;
    snn.layer_sizes = ann.layer_sizes;
    snn.weights = ann.weights;
    snn.biases = ann.biases;
    for (std::size_t k = 1; k + 1 < ann.layer_count(); ++k)
        snn.thresholds.push_back(Vector::Constant(static_cast<Eigen::Index>(ann.layer_sizes[k]), theta));
    snn.leak = leak;
    return snn;
}

/// Copy with every bias zeroed (the bias-free form of the instant potential).
template <typename Net>
Net without_biases(Net net)
{
    for (auto& b : net.biases)
        b.setZero();
    return net;
}

namespace detail {

/// Decimal mantissa/exponent of the shortest round-trip form of `v`.
struct Decimal {
    __int128 mantissa = 0;
    int exponent = 0;
};

inline Decimal to_decimal(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
    const std::string s(buf, res.ptr);
    const auto epos = s.find('e');
    const std::string digits = s.substr(0, epos);
    int exponent = std::stoi(s.substr(epos + 1));
    Decimal d;
    int frac = 0;
    bool after_point = false;
    for (char c : digits) {
        if (c == '.') {
            after_point = true;
            continue;
        }
        d.mantissa = d.mantissa * 10 + (c - '0');
        if (after_point)
            ++frac;
    }
    d.exponent = exponent - frac;
    return d;
}

inline bool pow10_fits(int n) { return n >= 0 && n <= 18; }

inline __int128 pow10(int n)
{
    __int128 r = 1;
    for (int i = 0; i < n; ++i)
        r *= 10;
    return r;
}

} // namespace detail

/// Upper bound on the temporal window: floor(period / step_time), evaluated on
/// the decimal forms of both arguments so that 0.05 / 0.002 gives 25.
inline std::size_t compute_t_up(double control_period_s, double step_time_s)
{
    if (!(control_period_s > 0.0) || !(step_time_s > 0.0) || !std::isfinite(control_period_s) ||
        !std::isfinite(step_time_s))
        throw InvalidConfig("control period and step time must be positive");
    const auto p = detail::to_decimal(control_period_s);
    const auto e = detail::to_decimal(step_time_s);
    __int128 num = p.mantissa;
    __int128 den = e.mantissa;
    const int shift = p.exponent - e.exponent;
    std::size_t result = 0;
    if (detail::pow10_fits(shift)) {
        num *= detail::pow10(shift);
        result = static_cast<std::size_t>(num / den);
    } else if (detail::pow10_fits(-shift)) {
        den *= detail::pow10(-shift);
        result = static_cast<std::size_t>(num / den);
    } else {
        result = static_cast<std::size_t>(std::floor(control_period_s / step_time_s));
    }
    if (result == 0)
        throw StepExceedsPeriod("step time exceeds the control period");
    return result;
}

} // namespace snnsafe::convert
