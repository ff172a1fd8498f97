#pragma once

// Exhaustive reference for small MILPs: enumerate every integer combination;
// an optional single continuous variable is resolved by interval reasoning.

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "snnsafe/milp/model.hpp"

namespace snnsafe::test {

struct OracleResult {
    bool feasible = false;
    /// Optimum in the model's own sense, when an objective is present.
    std::optional<double> optimum;
};

inline OracleResult enumerate(const milp::MilpModel& model)
{
    using namespace milp;
    const auto& vars = model.variables();
    std::vector<std::size_t> ints;
    std::optional<std::size_t> cont;
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].is_integral())
            ints.push_back(j);
        else
            cont = j; // at most one by construction
    }
    const auto& obj = model.objective();
    const bool maximize = obj && obj->sense == Sense::Maximize;
    OracleResult out;
    std::vector<double> x(vars.size(), 0.0);
    for (std::size_t j : ints)
        x[j] = std::ceil(vars[j].lower);

    const auto consider = [&] {
        double lo = cont ? vars[*cont].lower : 0.0;
        double hi = cont ? vars[*cont].upper : 0.0;
        for (const auto& c : model.constraints()) {
            double a = 0.0;
            double rest = 0.0;
            for (const auto& t : c.terms) {
                if (cont && t.var.index == *cont)
                    a += t.coef;
                else
                    rest += t.coef * x[t.var.index];
            }
            const double r = c.rhs - rest;
            // a * y (rel) r
            if (a == 0.0) {
                const bool ok = c.relation == Relation::LessEqual      ? 0.0 <= r + 1e-9
                                : c.relation == Relation::GreaterEqual ? 0.0 >= r - 1e-9
                                                                       : std::abs(r) <= 1e-9;
                if (!ok)
                    return;
                continue;
            }
            const double v = r / a;
            const bool le = (c.relation == Relation::LessEqual) == (a > 0.0);
            if (c.relation == Relation::Equal) {
                lo = std::max(lo, v);
                hi = std::min(hi, v);
            } else if (le) {
                hi = std::min(hi, v);
            } else {
                lo = std::max(lo, v);
            }
        }
        if (lo > hi + 1e-9)
            return;
        out.feasible = true;
        if (!obj)
            return;
        double base = 0.0;
        double cy = 0.0;
        for (const auto& t : obj->terms) {
            if (cont && t.var.index == *cont)
                cy += t.coef;
            else
                base += t.coef * x[t.var.index];
        }
        const double best_y = (cy > 0.0) == maximize ? hi : lo;
        const double val = base + (cont ? cy * std::min(std::max(best_y, lo), hi) : 0.0);
        if (!out.optimum || (maximize ? val > *out.optimum : val < *out.optimum))
            out.optimum = val;
    };

    while (true) {
        consider();
        std::size_t k = 0;
        for (; k < ints.size(); ++k) {
            const std::size_t j = ints[k];
            if (x[j] + 1.0 <= std::floor(vars[j].upper)) {
                x[j] += 1.0;
                break;
            }
            x[j] = std::ceil(vars[j].lower);
        }
        if (k == ints.size())
            break;
    }
    return out;
}

struct RandomMilpSpec {
    std::size_t max_vars = 12;
    std::size_t max_constraints = 6;
    bool continuous = false;
    bool objective = false;
    /// Cap on the number of integer combinations.
    double max_combinations = 2e5;
};

/// Integer coefficients and right-hand sides keep every verdict away from
/// the solver tolerance.
inline milp::MilpModel random_milp(std::mt19937_64& rng, const RandomMilpSpec& spec)
{
    using namespace milp;
    std::uniform_int_distribution<std::size_t> nv(1, spec.max_vars);
    std::uniform_int_distribution<std::size_t> nc(1, spec.max_constraints);
    std::uniform_int_distribution<int> coef(-5, 5);
    std::uniform_int_distribution<int> lo_d(-3, 2);
    std::uniform_int_distribution<int> width_d(0, 4);
    std::uniform_int_distribution<int> kind_d(0, 2);
    std::uniform_int_distribution<int> slack_d(-3, 3);
    MilpModel m;
    const std::size_t n = nv(rng);
    double combos = 1.0;
    std::vector<double> anchor;
    for (std::size_t j = 0; j < n; ++j) {
        const std::string name = "x" + std::to_string(j);
        if (kind_d(rng) == 0 || combos * 5 > spec.max_combinations) {
            m.add_binary(name);
            combos *= 2;
            anchor.push_back(std::uniform_int_distribution<int>(0, 1)(rng));
        } else {
            const int lo = lo_d(rng);
            const int w = width_d(rng);
            m.add_variable(name, VarKind::Integer, lo, lo + w);
            combos *= w + 1;
            anchor.push_back(lo + std::uniform_int_distribution<int>(0, w)(rng));
        }
    }
    if (spec.continuous) {
        const int lo = lo_d(rng);
        m.add_variable("y", VarKind::Continuous, lo, lo + 1 + width_d(rng));
        anchor.push_back(lo + 0.5);
    }
    const std::size_t cons = nc(rng);
    for (std::size_t c = 0; c < cons; ++c) {
        std::vector<Term> terms;
        double act = 0.0;
        for (std::size_t j = 0; j < m.variable_count(); ++j) {
            const int a = coef(rng);
            if (a == 0)
                continue;
            terms.push_back({VarId{j}, static_cast<double>(a)});
            act += a * anchor[j];
        }
        if (terms.empty())
            terms.push_back({VarId{0}, 1.0}), act = anchor[0];
        const int pick = std::uniform_int_distribution<int>(0, 5)(rng);
        const Relation rel = pick < 3 ? Relation::LessEqual : pick < 5 ? Relation::GreaterEqual : Relation::Equal;
        // anchor-relative right-hand side: roughly half the instances stay feasible
        const double rhs = std::round(act) + (rel == Relation::LessEqual ? slack_d(rng) : -slack_d(rng)) *
                                                 (rel == Relation::Equal ? 0 : 1);
        m.add_constraint("c" + std::to_string(c), std::move(terms), rel, rel == Relation::Equal ? std::round(act) : rhs);
    }
    if (spec.objective) {
        std::vector<Term> obj;
        for (std::size_t j = 0; j < m.variable_count(); ++j)
            obj.push_back({VarId{j}, static_cast<double>(coef(rng))});
        m.set_objective(std::uniform_int_distribution<int>(0, 1)(rng) ? Sense::Maximize : Sense::Minimize,
                        std::move(obj));
    }
    return m;
}

} // namespace snnsafe::test
