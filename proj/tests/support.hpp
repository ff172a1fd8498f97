#pragma once

#include <random>
#include <string>

#include "snnsafe/snnsafe.hpp"

namespace snnsafe::test {

inline std::string fixture(const std::string& name) { return std::string(SNNSAFE_FIXTURES) + "/" + name; }

inline Vector vec(std::initializer_list<double> xs)
{
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs)
        v(i++) = x;
    return v;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows)
{
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.begin()->size());
    Matrix m(r, c);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double x : row)
            m(i, j++) = x;
        ++i;
    }
    return m;
}

/// The two-input, two-hidden, one-output example network.
inline LayeredNetwork demo_ann()
{
    LayeredNetwork net;
    net.layer_sizes = {2, 2, 1};
    net.weights = {mat({{0.6, 0.8}, {-0.1, 0.5}}), mat({{1.0, 1.0}})};
    net.biases = {vec({0.0, 0.0}), vec({0.0})};
    net.validate();
    return net;
}

inline SpikingNetwork demo_snn() { return convert::ann_to_snn(demo_ann()); }

inline InputBox demo_point() { return InputBox::point(vec({5.0, 2.0})); }

inline RangeSpec range1(double l, double u) { return RangeSpec{{{l, u}}}; }

struct RandomNetSpec {
    std::size_t max_layers = 3;
    std::size_t max_width = 4;
    double weight = 1.0;
    double bias = 0.5;
};

/// Dense net of 3..max_layers layers, widths in [1, max_width].
inline LayeredNetwork random_ann(std::mt19937_64& rng, const RandomNetSpec& spec = {})
{
    std::uniform_int_distribution<std::size_t> width(1, spec.max_width);
    std::uniform_int_distribution<std::size_t> depth(3, std::max<std::size_t>(3, spec.max_layers));
    std::uniform_real_distribution<double> w(-spec.weight, spec.weight);
    std::uniform_real_distribution<double> b(-spec.bias, spec.bias);
    LayeredNetwork net;
    const std::size_t layers = depth(rng);
    for (std::size_t k = 0; k < layers; ++k)
        net.layer_sizes.push_back(width(rng));
    for (std::size_t k = 0; k + 1 < layers; ++k) {
        const auto rows = static_cast<Eigen::Index>(net.layer_sizes[k + 1]);
        const auto cols = static_cast<Eigen::Index>(net.layer_sizes[k]);
        Matrix m(rows, cols);
        Vector v(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j)
                m(i, j) = w(rng);
            v(i) = b(rng);
        }
        net.weights.push_back(m);
        net.biases.push_back(v);
    }
    net.validate();
    return net;
}

inline InputBox random_box(std::mt19937_64& rng, std::size_t n, double lo = -2.0, double hi = 3.0)
{
    std::uniform_real_distribution<double> d(lo, hi);
    InputBox box;
    for (std::size_t j = 0; j < n; ++j) {
        double a = d(rng);
        double c = d(rng);
        if (a > c)
            std::swap(a, c);
        box.bounds.push_back({a, c});
    }
    return box;
}

inline Vector random_point(std::mt19937_64& rng, const InputBox& box)
{
    Vector x(static_cast<Eigen::Index>(box.size()));
    for (std::size_t j = 0; j < box.size(); ++j)
        x(static_cast<Eigen::Index>(j)) = std::uniform_real_distribution<double>(box[j].lower, box[j].upper)(rng);
    return x;
}

} // namespace snnsafe::test
