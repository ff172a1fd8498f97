#pragma once

// File ingestion and serialization.
//
// Network files are JSON objects:
//   { "layer_sizes": [2, 2, 1],
//     "weights": [ [[0.6, 0.8], [-0.1, 0.5]], [[1, 1]] ],
//     "biases":  [ [0, 0], [0] ],
//     "activation": "relu" }
// Spiking networks use "activation": "srla" and add "thresholds" (one vector
// per hidden layer) and "leak". Range and box files are lists of "[a, b]"
// pairs in neuron order; '#' starts a comment.

#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "snnsafe/model.hpp"

namespace snnsafe::io {

using nlohmann::json;

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out)
        throw IoError("write failed for '" + path + "'");
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '+'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

namespace detail {

inline std::string normalize_minus(std::string text)
{
    // U+2212 MINUS SIGN, as found in typeset tables.
    const std::string minus = "\xE2\x88\x92";
    for (auto pos = text.find(minus); pos != std::string::npos; pos = text.find(minus, pos))
        text.replace(pos, minus.size(), "-");
    return text;
}

inline std::string strip_comments(const std::string& text)
{
    std::string out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos)
            line.erase(pos);
        out += line;
        out += '\n';
    }
    return out;
}

inline Matrix matrix_from_json(const json& j, std::size_t k)
{
    if (!j.is_array())
        throw ParseError("weights[" + std::to_string(k) + "] must be a list of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array())
            throw ParseError("weights[" + std::to_string(k) + "] row is not a list");
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw ShapeError("weights[" + std::to_string(k) + "] row " + std::to_string(r) +
                             " has " + std::to_string(row.size()) + " columns, expected " +
                             std::to_string(cols));
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

inline Vector vector_from_json(const json& j, const std::string& what)
{
    if (!j.is_array())
        throw ParseError(what + " must be a list of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

inline json matrix_to_json(const Matrix& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json vector_to_json(const Vector& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v(i));
    return out;
}

inline json parse_json(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
}

inline void read_topology(const json& j, DenseTopology& net)
{
    for (const char* key : {"layer_sizes", "weights", "biases", "activation"})
        if (!j.contains(key))
            throw ParseError(std::string("missing field '") + key + "'");
    for (const auto& s : j.at("layer_sizes")) {
        if (!s.is_number_integer() || s.get<long long>() <= 0)
            throw ShapeError("layer sizes must be positive integers");
        net.layer_sizes.push_back(s.get<std::size_t>());
    }
    const auto& w = j.at("weights");
    const auto& b = j.at("biases");
    if (!w.is_array() || !b.is_array())
        throw ParseError("weights and biases must be lists");
    for (std::size_t k = 0; k < w.size(); ++k)
        net.weights.push_back(matrix_from_json(w[k], k));
    for (std::size_t k = 0; k < b.size(); ++k)
        net.biases.push_back(vector_from_json(b[k], "biases[" + std::to_string(k) + "]"));
}

inline json write_topology(const DenseTopology& net)
{
    json j;
    j["layer_sizes"] = net.layer_sizes;
    json w = json::array();
    json b = json::array();
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        w.push_back(matrix_to_json(net.weights[k]));
        b.push_back(vector_to_json(net.biases[k]));
    }
    j["weights"] = std::move(w);
    j["biases"] = std::move(b);
    return j;
}

} // namespace detail

inline LayeredNetwork parse_network(const std::string& text)
{
    const json j = detail::parse_json(text);
    if (!j.is_object())
        throw ParseError("network file must hold a JSON object");
    LayeredNetwork net;
    try {
        detail::read_topology(j, net);
        const auto act = j.at("activation").get<std::string>();
        if (act != "relu" && act != "ReLU")
            throw UnsupportedActivation("activation '" + act + "' is not supported, expected relu");
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    net.validate();
    return net;
}

inline LayeredNetwork load_network(const std::string& path)
{
    return parse_network(read_file(path));
}

inline std::string serialize(const LayeredNetwork& net)
{
    json j = detail::write_topology(net);
    j["activation"] = "relu";
    return j.dump(2) + "\n";
}

/// Peeks at the activation tag without validating the rest.
inline Activation file_activation(const std::string& text)
{
    const json j = detail::parse_json(text);
    if (!j.is_object() || !j.contains("activation") || !j["activation"].is_string())
        throw ParseError("missing field 'activation'");
    const auto act = j["activation"].get<std::string>();
    if (act == "relu" || act == "ReLU")
        return Activation::ReLU;
    if (act == "srla" || act == "SRLA")
        return Activation::SRLA;
    throw UnsupportedActivation("activation '" + act + "'");
}

inline SpikingNetwork parse_spiking_network(const std::string& text)
{
    const json j = detail::parse_json(text);
    if (!j.is_object())
        throw ParseError("network file must hold a JSON object");
    SpikingNetwork net;
    try {
        detail::read_topology(j, net);
        const auto act = j.at("activation").get<std::string>();
        if (act != "srla" && act != "SRLA")
            throw UnsupportedActivation("spiking network activation must be srla, got '" + act + "'");
        if (!j.contains("thresholds") || !j.contains("leak"))
            throw ParseError("spiking network needs 'thresholds' and 'leak'");
        const auto& th = j.at("thresholds");
        for (std::size_t k = 0; k < th.size(); ++k)
            net.thresholds.push_back(
                detail::vector_from_json(th[k], "thresholds[" + std::to_string(k) + "]"));
        net.leak = j.at("leak").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    net.validate();
    return net;
}

inline SpikingNetwork load_spiking_network(const std::string& path)
{
    return parse_spiking_network(read_file(path));
}

inline std::string serialize(const SpikingNetwork& net)
{
    json j = detail::write_topology(net);
    j["activation"] = "srla";
    json th = json::array();
    for (const auto& t : net.thresholds)
        th.push_back(detail::vector_to_json(t));
    j["thresholds"] = std::move(th);
    j["leak"] = net.leak;
    return j.dump(2) + "\n";
}

/// Extracts every "[a, b]" pair from `text`. Anything other than pairs,
/// separators, enclosing brackets and comments is rejected.
inline std::vector<Interval> parse_interval_list(const std::string& raw)
{
    const std::string text = detail::strip_comments(detail::normalize_minus(raw));
    static const std::regex pair_re(
        R"(\[\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*,\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*\])");
    std::vector<Interval> out;
    std::string rest;
    auto it = std::sregex_iterator(text.begin(), text.end(), pair_re);
    std::size_t last = 0;
    for (; it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        rest.append(text, last, static_cast<std::size_t>(m.position()) - last);
        last = static_cast<std::size_t>(m.position() + m.length());
        out.push_back({parse_double(m[1].str()), parse_double(m[2].str())});
    }
    rest.append(text, last, std::string::npos);
    for (char c : rest)
        if (c != ' ' && c != '\t' && c != '\r' && c != '\n' && c != ',' && c != '[' && c != ']')
            throw ParseError("unexpected text in interval list near '" + std::string(1, c) + "'");
    return out;
}

inline RangeSpec parse_ranges(const std::string& text, std::size_t n_outputs)
{
    RangeSpec spec{parse_interval_list(text)};
    if (spec.size() != n_outputs)
        throw CountMismatch("expected " + std::to_string(n_outputs) + " ranges, found " +
                            std::to_string(spec.size()));
    spec.validate();
    return spec;
}

inline RangeSpec load_ranges(const std::string& path, std::size_t n_outputs)
{
    return parse_ranges(read_file(path), n_outputs);
}

inline InputBox parse_box(const std::string& text, std::size_t n_inputs)
{
    InputBox box{parse_interval_list(text)};
    if (box.size() != n_inputs)
        throw CountMismatch("expected " + std::to_string(n_inputs) + " input intervals, found " +
                            std::to_string(box.size()));
    box.validate();
    return box;
}

inline InputBox load_box(const std::string& path, std::size_t n_inputs)
{
    return parse_box(read_file(path), n_inputs);
}

inline std::string format_interval(const Interval& iv)
{
    return "[" + format_double(iv.lower) + ", " + format_double(iv.upper) + "]";
}

inline std::string serialize(const std::vector<Interval>& bounds)
{
    std::string out;
    for (const auto& b : bounds)
        out += format_interval(b) + "\n";
    return out;
}

inline std::string serialize(const RangeSpec& r) { return serialize(r.bounds); }
inline std::string serialize(const InputBox& b) { return serialize(b.bounds); }

/// Comma or whitespace separated numbers, e.g. "5,2".
inline Vector parse_vector(const std::string& raw)
{
    std::string text = detail::normalize_minus(detail::strip_comments(raw));
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r' || c == '\t' || c == '[' || c == ']')
            c = ' ';
    std::istringstream in(text);
    std::vector<double> values;
    std::string tok;
    while (in >> tok)
        values.push_back(parse_double(tok));
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = values[i];
    return v;
}

inline std::string format_vector(const Vector& v, const char* sep = ", ")
{
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i)
            out += sep;
        out += format_double(v(i));
    }
    return out;
}

} // namespace snnsafe::io
