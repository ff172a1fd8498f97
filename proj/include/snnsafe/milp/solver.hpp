#pragma once

// Branch-and-bound over the simplex relaxation. Pure feasibility problems
// are searched depth-first; models with an objective best-first on the
// relaxation bound. Branching picks the most fractional integer variable,
// ties going to the lowest id.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "snnsafe/milp/model.hpp"
#include "snnsafe/milp/simplex.hpp"

namespace snnsafe::milp {

struct SolverOptions {
    Tolerances tolerances;
    LpOptions lp;
};

namespace detail {

struct Node {
    std::vector<double> lower;
    std::vector<double> upper;
    /// Relaxation bound of the parent, in minimisation form.
    double bound = -kInf;
    std::uint64_t seq = 0;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const
    {
        if (a.bound != b.bound)
            return a.bound > b.bound;
        return a.seq > b.seq;
    }
};

inline std::optional<std::size_t> branching_variable(const MilpModel& model, const std::vector<double>& x,
                                                     double int_tol)
{
    std::optional<std::size_t> best;
    double best_dist = int_tol;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!model.variables()[j].is_integral())
            continue;
        const double frac = x[j] - std::floor(x[j]);
        const double dist = std::min(frac, 1.0 - frac);
        if (dist > best_dist) {
            best_dist = dist;
            best = j;
        }
    }
    return best;
}

inline std::vector<double> finalize(const MilpModel& model, std::vector<double> x,
                                    const std::vector<double>& lower, const std::vector<double>& upper)
{
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (model.variables()[j].is_integral())
            x[j] = std::round(x[j]);
        x[j] = std::clamp(x[j], lower[j], upper[j]);
    }
    return x;
}

} // namespace detail

/// Exact MILP solve within `budget`. A zero budget times out immediately.
inline SolveResult solve(const MilpModel& model, std::chrono::duration<double> budget,
                         const SolverOptions& opt = {})
{
    const Deadline deadline(budget);
    SolveResult res;
    const auto done = [&](SolveStatus st) {
        res.status = st;
        res.stats.wall_time_s = deadline.elapsed_s();
        if (st != SolveStatus::Feasible) {
            res.assignment.clear();
            res.objective_value.reset();
        }
        return res;
    };
    if (deadline.expired())
        return done(SolveStatus::Timeout);

    const double int_tol = opt.tolerances.integrality;
    detail::Node root;
    for (const auto& v : model.variables()) {
        double lo = v.lower;
        double up = v.upper;
        if (v.is_integral()) {
            lo = std::ceil(lo - int_tol);
            up = std::floor(up + int_tol);
        }
        root.lower.push_back(lo);
        root.upper.push_back(up);
    }

    const auto& objective = model.objective();
    const bool optimize = objective && !objective->terms.empty();
    const double sign = optimize && objective->sense == Sense::Maximize ? -1.0 : 1.0;

    std::vector<detail::Node> stack;
    std::priority_queue<detail::Node, std::vector<detail::Node>, detail::NodeOrder> heap;
    std::uint64_t seq = 0;
    const auto push = [&](detail::Node n) {
        n.seq = seq++;
        if (optimize)
            heap.push(std::move(n));
        else
            stack.push_back(std::move(n));
    };
    const auto empty = [&] { return optimize ? heap.empty() : stack.empty(); };
    const auto pop = [&] {
        detail::Node n;
        if (optimize) {
            n = heap.top();
            heap.pop();
        } else {
            n = std::move(stack.back());
            stack.pop_back();
        }
        return n;
    };

    double incumbent = kInf;
    push(std::move(root));
    while (!empty()) {
        if (deadline.expired())
            return done(SolveStatus::Timeout);
        detail::Node node = pop();
        if (optimize && node.bound >= incumbent - 1e-9 * (1.0 + std::abs(incumbent)))
            continue;
        ++res.stats.nodes;
        const LpResult lp = solve_lp(model, node.lower, node.upper, deadline, opt.lp);
        res.stats.pivots += lp.pivots;
        if (lp.status == LpStatus::Timeout)
            return done(SolveStatus::Timeout);
        if (lp.status == LpStatus::Infeasible)
            continue;
        if (lp.status == LpStatus::Unbounded)
            return done(SolveStatus::Unbounded);

        const double bound = sign * lp.objective;
        if (optimize && bound >= incumbent - 1e-9 * (1.0 + std::abs(incumbent)))
            continue;

        const auto j = detail::branching_variable(model, lp.x, int_tol);
        if (!j) {
            res.assignment = detail::finalize(model, lp.x, node.lower, node.upper);
            if (!optimize)
                return done(SolveStatus::Feasible);
            incumbent = bound;
            res.objective_value = objective_value(*objective, res.assignment);
            continue;
        }

        const double v = lp.x[*j];
        detail::Node down = node;
        detail::Node up = std::move(node);
        down.upper[*j] = std::floor(v);
        up.lower[*j] = std::ceil(v);
        down.bound = up.bound = bound;
        // Depth-first explores the child on the rounding side first.
        if (v - std::floor(v) <= 0.5) {
            push(std::move(up));
            push(std::move(down));
        } else {
            push(std::move(down));
            push(std::move(up));
        }
    }
    if (optimize && std::isfinite(incumbent))
        return done(SolveStatus::Feasible);
    return done(SolveStatus::Infeasible);
}

} // namespace snnsafe::milp
