#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcnet/affine_system.hpp"
#include "dcnet/error.hpp"
#include "dcnet/ode/step_control.hpp"
#include "dcnet/ode/tableaux.hpp"
#include "dcnet/ode/types.hpp"

namespace dcnet::ode {

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Common state of the one-step drivers. A stepper advances (t, y) by one
/// accepted step per call to step(), never past t_bound, and logs every
/// attempt into the shared trace and counters.
class Stepper {
public:
    Stepper(const SolverConfig& cfg, SolverStats& stats, std::vector<StepRecord>* trace,
            double h_floor)
        : cfg_(cfg), stats_(stats), trace_(trace), h_floor_(h_floor) {}
    virtual ~Stepper() = default;

    Stepper(const Stepper&) = delete;
    Stepper& operator=(const Stepper&) = delete;

    /// Fresh start: forget step history, re-evaluate f, select a first step.
    virtual void restart(const AffineSystem& sys, double t, std::span<const double> y,
                         double t_bound) = 0;

    /// Swap the offset b mid-run (A unchanged), keeping step history.
    virtual void change_system(const AffineSystem& sys) = 0;

    virtual void step() = 0;

    virtual int order() const = 0;

    double t() const noexcept { return t_; }
    std::span<const double> y() const noexcept { return y_; }
    double t_bound() const noexcept { return t_bound_; }
    double h_abs() const noexcept { return h_abs_; }

protected:
    void eval(std::span<const double> x, std::span<double> out) {
        sys_.rhs(x, out);
        ++stats_.n_rhs;
    }

    void record(double t, double h, bool accepted, double err) {
        if (accepted) {
            ++stats_.n_accepted;
        } else {
            ++stats_.n_rejected;
        }
        if (trace_) {
            trace_->push_back(
                {t, h, accepted, err, order(), stats_.n_rhs, stats_.n_factorizations});
        }
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw IntegrationError(what, t_, std::vector<double>(y_.begin(), y_.end()));
    }

    void check_floor(double h) const {
        if (!cfg_.fixed_step && h < h_floor_) {
            fail("step size " + std::to_string(h) + " below the floor " + std::to_string(h_floor_) +
                 " at t = " + std::to_string(t_));
        }
    }

    /// Initial step from config or the automatic selector.
    double first_step(std::span<const double> f0, int error_order) {
        const double interval = t_bound_ - t_;
        if (cfg_.h_init) return std::min(*cfg_.h_init, cfg_.h_max);
        auto rhs = [this](std::span<const double> x, std::span<double> out) { eval(x, out); };
        return select_initial_step(rhs, y_, f0, interval, cfg_.h_max, error_order, cfg_.rtol,
                                   cfg_.atol);
    }

    /// Clip a trial step to the segment end. Returns (t_new, h).
    std::pair<double, double> clip(double h_abs) const {
        double t_new = t_ + h_abs;
        if (t_new > t_bound_) t_new = t_bound_;
        return {t_new, t_new - t_};
    }

    const SolverConfig& cfg_;
    SolverStats& stats_;
    std::vector<StepRecord>* trace_;
    double h_floor_;

    AffineSystem sys_;
    double t_ = 0.0;
    double t_bound_ = 0.0;
    double h_abs_ = 0.0;
    std::vector<double> y_;
};

/// Embedded explicit Runge-Kutta with first-same-as-last reuse of f(y_new).
/// RHS calls per attempt equal the stage count (3, 6, 12).
class ErkStepper final : public Stepper {
public:
    ErkStepper(const ExplicitTableau& tab, const SolverConfig& cfg, SolverStats& stats,
               std::vector<StepRecord>* trace, double h_floor)
        : Stepper(cfg, stats, trace, h_floor), tab_(tab), ctl_(tab.error_order) {}

    int order() const override { return tab_.order; }

    void restart(const AffineSystem& sys, double t, std::span<const double> y,
                 double t_bound) override {
        sys_ = sys;
        t_ = t;
        t_bound_ = t_bound;
        y_.assign(y.begin(), y.end());
        const std::size_t n = y_.size();
        k_.assign(static_cast<std::size_t>(tab_.stages) + 1, std::vector<double>(n));
        y_new_.resize(n);
        tmp_.resize(n);
        f_.resize(n);
        eval(y_, f_);
        ctl_.reset();
        h_abs_ = first_step(f_, tab_.error_order);
    }

    void change_system(const AffineSystem& sys) override {
        sys_ = sys;
        eval(y_, f_);  // the cached FSAL derivative belongs to the old b
    }

    void step() override {
        const int s = tab_.stages;
        bool rejected = false;
        for (;;) {
            check_floor(h_abs_);
            const auto [t_new, h] = clip(h_abs_);

            k_[0] = f_;
            for (int i = 1; i < s; ++i) {
                tmp_ = y_;
                for (int j = 0; j < i; ++j) axpy(h * tab_.a_at(i, j), k_[j], tmp_);
                eval(tmp_, k_[i]);
            }
            y_new_ = y_;
            for (int j = 0; j < s; ++j) axpy(h * tab_.b[j], k_[j], y_new_);
            eval(y_new_, k_[s]);

            const bool finite = all_finite(y_new_);
            double err = finite ? estimate_error(h) : INFINITY;
            if (!std::isfinite(err)) err = INFINITY;

            if (cfg_.fixed_step) {
                if (!finite) fail("nonfinite state in fixed-step integration");
                record(t_, h, true, err);
                commit(t_new);
                return;
            }
            if (err <= 1.0) {
                record(t_, h, true, err);
                const double factor = ctl_.accept_factor(err, rejected);
                h_abs_ = std::min(h * factor, cfg_.h_max);
                commit(t_new);
                return;
            }
            record(t_, h, false, err);
            h_abs_ = h * ctl_.reject_factor(err);
            rejected = true;
        }
    }

private:
    static void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
        if (a == 0.0) return;
        for (std::size_t r = 0; r < y.size(); ++r) y[r] += a * x[r];
    }

    void commit(double t_new) {
        t_ = t_new;
        y_.swap(y_new_);
        f_.swap(k_[static_cast<std::size_t>(tab_.stages)]);
    }

    double estimate_error(double h) {
        const std::size_t n = y_.size();
        const std::size_t s1 = static_cast<std::size_t>(tab_.stages) + 1;
        if (!tab_.combined_error()) {
            std::fill(tmp_.begin(), tmp_.end(), 0.0);
            for (std::size_t j = 0; j < s1; ++j) axpy(h * tab_.e[j], k_[j], tmp_);
            return error_norm(tmp_, y_, y_new_, cfg_.atol, cfg_.rtol);
        }
        // 8(5,3) estimate: |h| * |e5|^2 / sqrt((|e5|^2 + 0.01 |e3|^2) * N)
        double e5sq = 0.0, e3sq = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double a5 = 0.0, a3 = 0.0;
            for (std::size_t j = 0; j < s1; ++j) {
                a5 += tab_.e[j] * k_[j][r];
                a3 += tab_.e3[j] * k_[j][r];
            }
            const double scale =
                cfg_.atol + cfg_.rtol * std::max(std::abs(y_[r]), std::abs(y_new_[r]));
            e5sq += (a5 / scale) * (a5 / scale);
            e3sq += (a3 / scale) * (a3 / scale);
        }
        if (e5sq == 0.0 && e3sq == 0.0) return 0.0;
        return std::abs(h) * e5sq / std::sqrt((e5sq + 0.01 * e3sq) * static_cast<double>(n));
    }

    const ExplicitTableau& tab_;
    PiController ctl_;
    std::vector<std::vector<double>> k_;
    std::vector<double> f_, y_new_, tmp_;
};

}  // namespace dcnet::ode
