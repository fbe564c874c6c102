#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dcnet/ode/stepper.hpp"
#include "dcnet/sparse_lu.hpp"

namespace dcnet::ode {

namespace bdf {

inline constexpr int max_order = 5;

/// gamma_k = sum_{j<=k} 1/j; for the unmodified BDF family alpha = gamma.
inline double gamma(int k) {
    double g = 0.0;
    for (int j = 1; j <= k; ++j) g += 1.0 / j;
    return g;
}

inline double error_const(int k) { return 1.0 / (k + 1); }

/// (order+1)^2 matrix that maps backward differences at step h to those at
/// step factor*h.
inline std::vector<double> compute_r(int order, double factor) {
    const int s = order + 1;
    std::vector<double> m(static_cast<std::size_t>(s * s), 0.0);
    for (int j = 0; j < s; ++j) m[static_cast<std::size_t>(j)] = 1.0;
    for (int i = 1; i < s; ++i) {
        for (int j = 1; j < s; ++j) {
            m[static_cast<std::size_t>(i * s + j)] = (i - 1 - factor * j) / i;
        }
    }
    for (int i = 1; i < s; ++i) {
        for (int j = 0; j < s; ++j) m[static_cast<std::size_t>(i * s + j)] *= m[static_cast<std::size_t>((i - 1) * s + j)];
    }
    return m;
}

/// D[0..order] <- (R U)^T D[0..order].
inline void change_d(std::vector<std::vector<double>>& d, int order, double factor) {
    const int s = order + 1;
    const auto r = compute_r(order, factor);
    const auto u = compute_r(order, 1.0);
    std::vector<double> ru(static_cast<std::size_t>(s * s), 0.0);
    for (int i = 0; i < s; ++i) {
        for (int k = 0; k < s; ++k) {
            const double rik = r[static_cast<std::size_t>(i * s + k)];
            for (int j = 0; j < s; ++j) {
                ru[static_cast<std::size_t>(i * s + j)] += rik * u[static_cast<std::size_t>(k * s + j)];
            }
        }
    }
    const std::size_t n = d[0].size();
    std::vector<std::vector<double>> out(static_cast<std::size_t>(s), std::vector<double>(n, 0.0));
    for (int j = 0; j < s; ++j) {
        for (int i = 0; i < s; ++i) {
            const double c = ru[static_cast<std::size_t>(i * s + j)];
            if (c == 0.0) continue;
            for (std::size_t r2 = 0; r2 < n; ++r2) out[j][r2] += c * d[i][r2];
        }
    }
    for (int j = 0; j < s; ++j) d[j].swap(out[j]);
}

}  // namespace bdf

/// Variable-order (1..5) variable-step BDF in backward-difference form. Step
/// size changes only after order+1 equal steps (or on rejection), when the
/// order with the largest admissible step is chosen. The corrector is one
/// Newton iteration, exact for the affine right-hand side.
class BdfStepper final : public Stepper {
public:
    BdfStepper(const SolverConfig& cfg, SolverStats& stats, std::vector<StepRecord>* trace,
               double h_floor)
        : Stepper(cfg, stats, trace, h_floor) {}

    int order() const override { return order_; }

    void restart(const AffineSystem& sys, double t, std::span<const double> y,
                 double t_bound) override {
        adopt(sys);
        t_ = t;
        t_bound_ = t_bound;
        y_.assign(y.begin(), y.end());
        const std::size_t n = y_.size();
        std::vector<double> f(n);
        eval(y_, f);
        h_abs_ = first_step(f, 1);
        // always order 1: higher orders need a history (see seed_history)
        order_ = 1;
        allocate(n);
        d_[0] = y_;
        for (std::size_t r = 0; r < n; ++r) d_[1][r] = f[r] * h_abs_;
        n_equal_steps_ = 0;
    }

    /// Installs an exact equal-step history y(t), y(t - h), ..., y(t - k h)
    /// (most recent first) and pins the order to k. For convergence tests.
    void seed_history(const AffineSystem& sys, double t, double h,
                      const std::vector<std::vector<double>>& history, double t_bound) {
        const int k = static_cast<int>(history.size()) - 1;
        if (k < 1 || k > bdf::max_order) throw ConfigError("BDF history must hold 2..6 states");
        adopt(sys);
        t_ = t;
        t_bound_ = t_bound;
        y_ = history[0];
        const std::size_t n = y_.size();
        allocate(n);
        // backward differences of increasing degree
        std::vector<std::vector<double>> diff = history;
        for (int j = 0; j <= k; ++j) {
            d_[static_cast<std::size_t>(j)] = diff[0];
            for (int i = 0; i + 1 < static_cast<int>(diff.size()); ++i) {
                for (std::size_t r = 0; r < n; ++r) diff[i][r] -= diff[i + 1][r];
            }
            diff.pop_back();
        }
        order_ = k;
        h_abs_ = h;
        n_equal_steps_ = 0;
    }

    void change_system(const AffineSystem& sys) override { sys_ = sys; }

    void step() override {
        const std::size_t n = y_.size();
        const double min_step = h_floor_;
        if (h_abs_ > cfg_.h_max) {
            bdf::change_d(d_, order_, cfg_.h_max / h_abs_);
            h_abs_ = cfg_.h_max;
            n_equal_steps_ = 0;
        }
        double h_abs = h_abs_;
        double err = 0.0;
        double t_new = t_;
        for (;;) {
            if (!cfg_.fixed_step && h_abs < min_step) {
                fail("step size " + std::to_string(h_abs) + " below the floor at t = " +
                     std::to_string(t_));
            }
            t_new = t_ + h_abs;
            if (t_new > t_bound_) {
                t_new = t_bound_;
                bdf::change_d(d_, order_, (t_new - t_) / h_abs);
                n_equal_steps_ = 0;
            }
            const double h = t_new - t_;
            h_abs = h;

            std::fill(y_pred_.begin(), y_pred_.end(), 0.0);
            for (int j = 0; j <= order_; ++j) {
                for (std::size_t r = 0; r < n; ++r) y_pred_[r] += d_[j][r];
            }
            const double alpha = bdf::gamma(order_);
            std::fill(psi_.begin(), psi_.end(), 0.0);
            for (int j = 1; j <= order_; ++j) {
                const double g = bdf::gamma(j) / alpha;
                for (std::size_t r = 0; r < n; ++r) psi_[r] += g * d_[j][r];
            }
            const double c = h / alpha;
            factorize(c);

            // (I - cA) dy = c f(y_pred) - psi
            eval(y_pred_, f_);
            for (std::size_t r = 0; r < n; ++r) rhs_[r] = (c * f_[r] - psi_[r]) / c;
            lu_->solve(rhs_, dy_);
            ++stats_.n_linear_solves;
            ++stats_.n_newton_iters;
            for (std::size_t r = 0; r < n; ++r) y_new_[r] = y_pred_[r] + dy_[r];

            const bool finite = all_finite(y_new_);
            if (finite) {
                for (std::size_t r = 0; r < n; ++r) tmp_[r] = bdf::error_const(order_) * dy_[r];
                err = error_norm(tmp_, y_new_, y_new_, cfg_.atol, cfg_.rtol);
            } else {
                err = INFINITY;
            }
            if (!std::isfinite(err)) err = INFINITY;

            if (cfg_.fixed_step) {
                if (!finite) fail("nonfinite state in fixed-step integration");
                break;
            }
            if (err <= 1.0) break;

            record(t_, h, false, err);
            const double factor =
                std::isfinite(err)
                    ? std::max(PiController::min_factor,
                               PiController::safety * std::pow(err, -1.0 / (order_ + 1)))
                    : PiController::min_factor;
            h_abs *= factor;
            bdf::change_d(d_, order_, factor);
            n_equal_steps_ = 0;
        }

        record(t_, t_new - t_, true, err);
        ++n_equal_steps_;
        t_ = t_new;
        y_ = y_new_;
        h_abs_ = h_abs;

        // d = D^{k+1} y_n; roll the difference table forward
        const auto k = static_cast<std::size_t>(order_);
        for (std::size_t r = 0; r < n; ++r) {
            d_[k + 2][r] = dy_[r] - d_[k + 1][r];
            d_[k + 1][r] = dy_[r];
        }
        for (int i = order_; i >= 0; --i) {
            for (std::size_t r = 0; r < n; ++r) d_[i][r] += d_[i + 1][r];
        }

        if (cfg_.fixed_step || n_equal_steps_ < order_ + 1) return;

        const double inf = std::numeric_limits<double>::infinity();
        double err_m = inf, err_p = inf;
        if (order_ > cfg_.bdf_min_order) {
            for (std::size_t r = 0; r < n; ++r) tmp_[r] = bdf::error_const(order_ - 1) * d_[k][r];
            err_m = error_norm(tmp_, y_, y_, cfg_.atol, cfg_.rtol);
        }
        if (order_ < std::min(cfg_.bdf_max_order, bdf::max_order)) {
            for (std::size_t r = 0; r < n; ++r) tmp_[r] = bdf::error_const(order_ + 1) * d_[k + 2][r];
            err_p = error_norm(tmp_, y_, y_, cfg_.atol, cfg_.rtol);
        }
        const std::array<double, 3> norms{err_m, err, err_p};
        std::array<double, 3> factors{};
        for (int i = 0; i < 3; ++i) {
            const double e = norms[static_cast<std::size_t>(i)];
            factors[static_cast<std::size_t>(i)] =
                e == 0.0 ? inf : std::pow(e, -1.0 / (order_ + i));
        }
        const auto best = static_cast<int>(std::max_element(factors.begin(), factors.end()) - factors.begin());
        order_ += best - 1;
        const double factor = std::min(PiController::max_factor,
                                       PiController::safety * factors[static_cast<std::size_t>(best)]);
        h_abs_ *= factor;
        bdf::change_d(d_, order_, factor);
        n_equal_steps_ = 0;
    }

private:
    void adopt(const AffineSystem& sys) {
        if (!analysis_ || sys.shared_jacobian() != jac_) {
            jac_ = sys.shared_jacobian();
            analysis_.emplace(*jac_);
            cached_c_.reset();
        }
        sys_ = sys;
    }

    void allocate(std::size_t n) {
        d_.assign(bdf::max_order + 3, std::vector<double>(n, 0.0));
        y_pred_.resize(n);
        psi_.resize(n);
        f_.resize(n);
        rhs_.resize(n);
        dy_.resize(n);
        y_new_.resize(n);
        tmp_.resize(n);
    }

    // I - cA = c (I/c - A)
    void factorize(double c) {
        if (cached_c_ && *cached_c_ == c) return;
        try {
            lu_ = std::make_unique<ShiftedLu<double>>(ShiftedLu<double>::factorize(*analysis_, 1.0 / c));
        } catch (const SingularMatrixError& e) {
            fail(std::string("BDF iteration matrix is singular: ") + e.what());
        }
        ++stats_.n_factorizations;
        cached_c_ = c;
    }

    int order_ = 1;
    int n_equal_steps_ = 0;
    std::vector<std::vector<double>> d_;
    std::shared_ptr<const CsrMatrix<double>> jac_;
    std::optional<SparseLuAnalysis> analysis_;
    std::optional<double> cached_c_;
    std::unique_ptr<ShiftedLu<double>> lu_;
    std::vector<double> y_pred_, psi_, f_, rhs_, dy_, y_new_, tmp_;
};

}  // namespace dcnet::ode
