#pragma once

// Primal simplex for bounded-variable LPs on a dense row-major tableau.
// Every constraint row gets a slack; rows whose slack cannot absorb the
// initial residual get an artificial column and phase one minimises their
// sum. Entering and leaving choices follow Bland's rule so the method
// terminates on degenerate problems.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "snnsafe/milp/model.hpp"

namespace snnsafe::milp {

class Deadline {
public:
    using Clock = std::chrono::steady_clock;

    explicit Deadline(std::chrono::duration<double> budget)
        : start_(Clock::now()), zero_(!(budget.count() > 0.0))
    {
        unlimited_ = budget.count() > 1e9;
        if (!unlimited_ && !zero_)
            end_ = start_ + std::chrono::duration_cast<Clock::duration>(budget);
    }

    static Deadline unlimited() { return Deadline(std::chrono::duration<double>(1e12)); }

    bool expired() const
    {
        if (zero_)
            return true;
        return !unlimited_ && Clock::now() >= end_;
    }

    double elapsed_s() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    Clock::time_point start_;
    Clock::time_point end_{};
    bool zero_ = false;
    bool unlimited_ = false;
};

struct LpOptions {
    double primal_tol = 1e-9;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    /// Phase one declares infeasibility when the artificial sum stays above this.
    double infeasibility_tol = 1e-8;
    std::size_t refresh_every = 32;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, Timeout };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    /// In the model's own sense (maximisation reports the maximum).
    double objective = 0.0;
    std::size_t pivots = 0;
};

namespace detail {

class DenseSimplex {
public:
    DenseSimplex(const MilpModel& model, std::span<const double> lower, std::span<const double> upper,
                 const LpOptions& opt)
        : opt_(opt), n_(model.variable_count()), m_(model.constraint_count())
    {
        build(model, lower, upper);
    }

    LpResult run(const MilpModel& model, const Deadline& deadline)
    {
        LpResult res;
        if (artificials_ > 0) {
            std::vector<double> cost(cols_, 0.0);
            for (std::size_t j = n_ + m_; j < cols_; ++j)
                cost[j] = 1.0;
            const auto st = iterate(cost, deadline);
            res.pivots = pivots_;
            if (st == LpStatus::Timeout) {
                res.status = st;
                return res;
            }
            refresh();
            double infeas = 0.0;
            for (std::size_t j = n_ + m_; j < cols_; ++j)
                infeas += value(j);
            if (infeas > opt_.infeasibility_tol) {
                res.status = LpStatus::Infeasible;
                return res;
            }
            for (std::size_t j = n_ + m_; j < cols_; ++j) {
                lo_[j] = up_[j] = 0.0;
                if (state_[j] != State::Basic) {
                    state_[j] = State::AtLower;
                    x_[j] = 0.0;
                }
            }
        }

        const auto& obj = model.objective();
        if (obj && !obj->terms.empty()) {
            std::vector<double> cost(cols_, 0.0);
            const double sign = obj->sense == Sense::Maximize ? -1.0 : 1.0;
            for (const auto& t : obj->terms)
                cost[t.var.index] += sign * t.coef;
            const auto st = iterate(cost, deadline);
            res.pivots = pivots_;
            if (st != LpStatus::Optimal) {
                res.status = st;
                return res;
            }
        }
        refresh();
        res.status = LpStatus::Optimal;
        res.pivots = pivots_;
        res.x.resize(n_);
        for (std::size_t j = 0; j < n_; ++j)
            res.x[j] = value(j);
        if (obj)
            res.objective = objective_value(*obj, res.x);
        return res;
    }

private:
    enum class State : std::uint8_t { Basic, AtLower, AtUpper, Free };
    using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    void build(const MilpModel& model, std::span<const double> lower, std::span<const double> upper)
    {
        const std::size_t base = n_ + m_;
        lo_.assign(base, 0.0);
        up_.assign(base, 0.0);
        x_.assign(base, 0.0);
        state_.assign(base, State::AtLower);
        for (std::size_t j = 0; j < n_; ++j) {
            lo_[j] = lower[j];
            up_[j] = upper[j];
            if (std::isfinite(lo_[j])) {
                x_[j] = lo_[j];
                state_[j] = State::AtLower;
            } else if (std::isfinite(up_[j])) {
                x_[j] = up_[j];
                state_[j] = State::AtUpper;
            } else {
                x_[j] = 0.0;
                state_[j] = State::Free;
            }
        }

        // Slack bounds encode the relation: row + s = rhs.
        std::vector<double> residual(m_);
        std::vector<bool> needs_art(m_, false);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& c = model.constraints()[i];
            const std::size_t s = n_ + i;
            switch (c.relation) {
            case Relation::LessEqual: lo_[s] = 0.0; up_[s] = kInf; break;
            case Relation::GreaterEqual: lo_[s] = -kInf; up_[s] = 0.0; break;
            case Relation::Equal: lo_[s] = 0.0; up_[s] = 0.0; break;
            }
            residual[i] = c.rhs - activity(c, std::span<const double>(x_.data(), n_));
            needs_art[i] = residual[i] < lo_[s] - opt_.primal_tol || residual[i] > up_[s] + opt_.primal_tol;
            if (needs_art[i])
                ++artificials_;
        }

        cols_ = base + artificials_;
        lo_.resize(cols_, 0.0);
        up_.resize(cols_, kInf);
        x_.resize(cols_, 0.0);
        state_.resize(cols_, State::AtLower);
        T_ = Tableau::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(cols_ + 1));
        basis_.assign(m_, 0);
        xB_.assign(m_, 0.0);

        std::size_t art = base;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& c = model.constraints()[i];
            const auto r = static_cast<Eigen::Index>(i);
            for (const auto& t : c.terms)
                T_(r, static_cast<Eigen::Index>(t.var.index)) += t.coef;
            const std::size_t s = n_ + i;
            T_(r, static_cast<Eigen::Index>(s)) = 1.0;
            T_(r, static_cast<Eigen::Index>(cols_)) = c.rhs;
            if (!needs_art[i]) {
                basis_[i] = s;
                state_[s] = State::Basic;
                continue;
            }
            // Park the slack at the bound nearest the residual; the artificial
            // takes up the remaining gap with a nonnegative value.
            const double v = std::clamp(residual[i], lo_[s], up_[s]);
            x_[s] = v;
            state_[s] = v == lo_[s] ? State::AtLower : State::AtUpper;
            const double sigma = residual[i] - v > 0.0 ? 1.0 : -1.0;
            T_(r, static_cast<Eigen::Index>(art)) = sigma;
            T_.row(r) /= sigma;
            lo_[art] = 0.0;
            up_[art] = kInf;
            basis_[i] = art;
            state_[art] = State::Basic;
            ++art;
        }
        refresh();
    }

    double value(std::size_t j) const
    {
        if (state_[j] == State::Basic)
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] == j)
                    return xB_[i];
        return x_[j];
    }

    /// Recomputes basic values from the transformed right-hand side.
    void refresh()
    {
        const auto rhs = static_cast<Eigen::Index>(cols_);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            double v = T_(r, rhs);
            for (std::size_t j = 0; j < cols_; ++j)
                if (state_[j] != State::Basic && x_[j] != 0.0)
                    v -= T_(r, static_cast<Eigen::Index>(j)) * x_[j];
            xB_[i] = v;
        }
    }

    LpStatus iterate(const std::vector<double>& cost, const Deadline& deadline)
    {
        // Reduced costs d = c - c_B^T B^{-1} A.
        Eigen::RowVectorXd d(static_cast<Eigen::Index>(cols_));
        for (std::size_t j = 0; j < cols_; ++j)
            d(static_cast<Eigen::Index>(j)) = cost[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb != 0.0)
                d -= cb * T_.row(static_cast<Eigen::Index>(i)).head(static_cast<Eigen::Index>(cols_));
        }

        std::size_t since_refresh = 0;
        for (;;) {
            if (deadline.expired())
                return LpStatus::Timeout;

            // Bland: lowest-index improving column.
            std::size_t q = cols_;
            double dir = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) {
                const auto st = state_[j];
                if (st == State::Basic || lo_[j] == up_[j])
                    continue;
                const double dj = d(static_cast<Eigen::Index>(j));
                if ((st == State::AtLower || st == State::Free) && dj < -opt_.dual_tol) {
                    q = j;
                    dir = 1.0;
                    break;
                }
                if ((st == State::AtUpper || st == State::Free) && dj > opt_.dual_tol) {
                    q = j;
                    dir = -1.0;
                    break;
                }
            }
            if (q == cols_)
                return LpStatus::Optimal;

            const auto qc = static_cast<Eigen::Index>(q);
            double theta = (std::isfinite(lo_[q]) && std::isfinite(up_[q])) ? up_[q] - lo_[q] : kInf;
            std::size_t leave = m_;
            for (std::size_t i = 0; i < m_; ++i) {
                const double alpha = dir * T_(static_cast<Eigen::Index>(i), qc);
                if (std::abs(alpha) <= opt_.pivot_tol)
                    continue;
                const std::size_t b = basis_[i];
                double lim = kInf;
                if (alpha > 0.0 && std::isfinite(lo_[b]))
                    lim = std::max(0.0, (xB_[i] - lo_[b]) / alpha);
                else if (alpha < 0.0 && std::isfinite(up_[b]))
                    lim = std::max(0.0, (up_[b] - xB_[i]) / -alpha);
                if (!std::isfinite(lim))
                    continue;
                if (lim < theta - 1e-12 ||
                    (leave != m_ && std::abs(lim - theta) <= 1e-12 && b < basis_[leave])) {
                    theta = lim;
                    leave = i;
                }
            }
            if (!std::isfinite(theta))
                return LpStatus::Unbounded;

            ++pivots_;
            const double step = dir * theta;
            if (state_[q] == State::Free)
                x_[q] = 0.0;
            x_[q] += step;
            for (std::size_t i = 0; i < m_; ++i)
                xB_[i] -= T_(static_cast<Eigen::Index>(i), qc) * step;

            if (leave == m_) {
                state_[q] = dir > 0.0 ? State::AtUpper : State::AtLower;
                x_[q] = dir > 0.0 ? up_[q] : lo_[q];
                continue;
            }

            const auto r = static_cast<Eigen::Index>(leave);
            const std::size_t out = basis_[leave];
            const double alpha = dir * T_(r, qc);
            state_[out] = alpha > 0.0 ? State::AtLower : State::AtUpper;
            x_[out] = alpha > 0.0 ? lo_[out] : up_[out];
            basis_[leave] = q;
            state_[q] = State::Basic;
            xB_[leave] = x_[q];
            x_[q] = 0.0;

            T_.row(r) /= T_(r, qc);
            const Eigen::RowVectorXd pivot_row = T_.row(r);
            for (std::size_t i = 0; i < m_; ++i) {
                if (i == leave)
                    continue;
                const auto ri = static_cast<Eigen::Index>(i);
                const double f = T_(ri, qc);
                if (f != 0.0) {
                    T_.row(ri) -= f * pivot_row;
                    T_(ri, qc) = 0.0;
                }
            }
            const double dq = d(qc);
            if (dq != 0.0) {
                d -= dq * pivot_row.head(static_cast<Eigen::Index>(cols_));
                d(qc) = 0.0;
            }
            if (++since_refresh >= opt_.refresh_every) {
                refresh();
                since_refresh = 0;
            }
        }
    }

    LpOptions opt_;
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::size_t artificials_ = 0;
    std::size_t cols_ = 0;
    std::size_t pivots_ = 0;
    Tableau T_;
    std::vector<double> lo_, up_, x_, xB_;
    std::vector<State> state_;
    std::vector<std::size_t> basis_;
};

} // namespace detail

/// Solves the LP relaxation of `model` with the given per-variable bounds.
inline LpResult solve_lp(const MilpModel& model, std::span<const double> lower,
                         std::span<const double> upper, const Deadline& deadline,
                         const LpOptions& opt = {})
{
    for (std::size_t j = 0; j < model.variable_count(); ++j)
        if (lower[j] > upper[j] + opt.primal_tol)
            return {LpStatus::Infeasible, {}, 0.0, 0};
    if (deadline.expired())
        return {LpStatus::Timeout, {}, 0.0, 0};
    detail::DenseSimplex lp(model, lower, upper, opt);
    return lp.run(model, deadline);
}

inline LpResult solve_lp(const MilpModel& model, const Deadline& deadline, const LpOptions& opt = {})
{
    std::vector<double> lo, up;
    for (const auto& v : model.variables()) {
        lo.push_back(v.lower);
        up.push_back(v.upper);
    }
    return solve_lp(model, lo, up, deadline, opt);
}

} // namespace snnsafe::milp
