#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "snnsafe/error.hpp"

namespace snnsafe::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Integer, Binary };

struct VarId {
    std::size_t index = 0;
    friend auto operator<=>(const VarId&, const VarId&) = default;
};

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = 0.0;

    bool is_integral() const { return kind != VarKind::Continuous; }
};

enum class Relation { LessEqual, GreaterEqual, Equal };

inline const char* to_string(Relation r)
{
    switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::GreaterEqual: return ">=";
    case Relation::Equal: return "=";
    }
    return "?";
}

struct Term {
    VarId var;
    double coef = 0.0;
};

struct LinearConstraint {
    std::string name;
    std::vector<Term> terms;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

enum class Sense { Minimize, Maximize };

struct Objective {
    Sense sense = Sense::Minimize;
    std::vector<Term> terms;
};

class MilpModel {
public:
    VarId add_variable(std::string name, VarKind kind, double lower, double upper)
    {
        if (kind == VarKind::Binary && (lower != 0.0 || upper != 1.0))
            throw InvalidModel("binary variable '" + name + "' must have bounds [0, 1]");
        if (std::isnan(lower) || std::isnan(upper) || lower > upper)
            throw InvalidModel("variable '" + name + "' has lower > upper");
        const VarId id{vars_.size()};
        if (name.empty())
            name = "v" + std::to_string(id.index);
        if (!by_name_.emplace(name, id.index).second)
            throw InvalidModel("duplicate variable name '" + name + "'");
        vars_.push_back({std::move(name), kind, lower, upper});
        return id;
    }

    VarId add_binary(std::string name) { return add_variable(std::move(name), VarKind::Binary, 0.0, 1.0); }

    /// Adds `sum(terms) relation rhs`. Repeated variables are merged and zero
    /// coefficients dropped; a constraint must keep at least one term.
    void add_constraint(std::string name, std::vector<Term> terms, Relation rel, double rhs)
    {
        std::map<std::size_t, double> merged;
        for (const auto& t : terms) {
            if (t.var.index >= vars_.size())
                throw InvalidModel("constraint '" + name + "' references an undeclared variable");
            if (!std::isfinite(t.coef))
                throw InvalidModel("constraint '" + name + "' has a non-finite coefficient");
            merged[t.var.index] += t.coef;
        }
        std::vector<Term> clean;
        for (const auto& [v, c] : merged)
            if (c != 0.0)
                clean.push_back({VarId{v}, c});
        if (clean.empty())
            throw InvalidModel("constraint '" + name + "' has no nonzero coefficient");
        if (!std::isfinite(rhs))
            throw InvalidModel("constraint '" + name + "' has a non-finite right-hand side");
        if (name.empty())
            name = "c" + std::to_string(cons_.size());
        cons_.push_back({std::move(name), std::move(clean), rel, rhs});
    }

    void set_objective(Sense sense, std::vector<Term> terms)
    {
        for (const auto& t : terms)
            if (t.var.index >= vars_.size())
                throw InvalidModel("objective references an undeclared variable");
        obj_ = Objective{sense, std::move(terms)};
    }

    void clear_objective() { obj_.reset(); }

    void set_bounds(VarId v, double lower, double upper)
    {
        auto& var = vars_.at(v.index);
        if (lower > upper)
            throw InvalidModel("variable '" + var.name + "' has lower > upper");
        if (var.kind == VarKind::Binary && (lower < 0.0 || upper > 1.0))
            throw InvalidModel("binary variable bounds must stay within [0, 1]");
        var.lower = lower;
        var.upper = upper;
    }

    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<LinearConstraint>& constraints() const { return cons_; }
    const std::optional<Objective>& objective() const { return obj_; }
    const Variable& variable(VarId v) const { return vars_.at(v.index); }
    std::size_t variable_count() const { return vars_.size(); }
    std::size_t constraint_count() const { return cons_.size(); }

    std::size_t integral_count() const
    {
        return static_cast<std::size_t>(
            std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.is_integral(); }));
    }

    std::optional<VarId> find(std::string_view name) const
    {
        auto it = by_name_.find(std::string(name));
        if (it == by_name_.end())
            return std::nullopt;
        return VarId{it->second};
    }

private:
    std::vector<Variable> vars_;
    std::vector<LinearConstraint> cons_;
    std::optional<Objective> obj_;
    std::unordered_map<std::string, std::size_t> by_name_;
};

enum class SolveStatus { Feasible, Infeasible, Timeout, Unbounded };

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Timeout: return "timeout";
    case SolveStatus::Unbounded: return "unbounded";
    }
    return "?";
}

struct SolveStats {
    std::size_t nodes = 0;
    std::size_t pivots = 0;
    double wall_time_s = 0.0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    /// Indexed by VarId::index; empty unless status is Feasible.
    std::vector<double> assignment;
    /// Set for Feasible results of models with an objective: the optimum.
    std::optional<double> objective_value;
    SolveStats stats;
    /// Human-readable detail (first violated constraint on import, etc).
    std::string message;

    bool feasible() const { return status == SolveStatus::Feasible; }
    double value(VarId v) const { return assignment.at(v.index); }
};

struct Tolerances {
    double feasibility = 1e-6;
    double integrality = 1e-6;
};

inline double activity(const LinearConstraint& c, std::span<const double> x)
{
    double a = 0.0;
    for (const auto& t : c.terms)
        a += t.coef * x[t.var.index];
    return a;
}

inline double objective_value(const Objective& obj, std::span<const double> x)
{
    double a = 0.0;
    for (const auto& t : obj.terms)
        a += t.coef * x[t.var.index];
    return a;
}

/// Checks an assignment against bounds, integrality and every constraint.
/// Returns a description of the first violation, or nothing when it holds.
/// This evaluator is deliberately independent of the solver internals.
inline std::optional<std::string> first_violation(const MilpModel& model, std::span<const double> x,
                                                  const Tolerances& tol = {})
{
    if (x.size() != model.variable_count())
        return "assignment has " + std::to_string(x.size()) + " values for " +
               std::to_string(model.variable_count()) + " variables";
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& v = model.variables()[i];
        if (!std::isfinite(x[i]))
            return "variable " + v.name + " is not finite";
        if (x[i] < v.lower - tol.feasibility || x[i] > v.upper + tol.feasibility)
            return "variable " + v.name + " = " + std::to_string(x[i]) + " outside its bounds";
        if (v.is_integral() && std::abs(x[i] - std::round(x[i])) > tol.integrality)
            return "variable " + v.name + " = " + std::to_string(x[i]) + " is not integral";
    }
    for (const auto& c : model.constraints()) {
        const double a = activity(c, x);
        bool ok = true;
        switch (c.relation) {
        case Relation::LessEqual: ok = a <= c.rhs + tol.feasibility; break;
        case Relation::GreaterEqual: ok = a >= c.rhs - tol.feasibility; break;
        case Relation::Equal: ok = std::abs(a - c.rhs) <= tol.feasibility; break;
        }
        if (!ok)
            return "constraint " + c.name + " violated: activity " + std::to_string(a) + " " +
                   to_string(c.relation) + " " + std::to_string(c.rhs);
    }
    return std::nullopt;
}

} // namespace snnsafe::milp
