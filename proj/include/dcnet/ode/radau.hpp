#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dcnet/ode/stepper.hpp"
#include "dcnet/sparse_lu.hpp"

namespace dcnet::ode {

namespace radau {

inline const double s6 = std::sqrt(6.0);
inline const double c[3] = {(4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0};
inline const double e[3] = {(-13.0 - 7.0 * s6) / 3.0, (-13.0 + 7.0 * s6) / 3.0, -1.0 / 3.0};

// Eigen-decomposition of the 3-stage collocation matrix, A^-1 = T diag(mu) T^-1.
inline const double mu_real = 3.0 + std::cbrt(9.0) - std::cbrt(3.0);
inline const std::complex<double> mu_complex{
    3.0 + 0.5 * (std::cbrt(3.0) - std::cbrt(9.0)),
    -0.5 * (std::pow(3.0, 5.0 / 6.0) + std::pow(3.0, 7.0 / 6.0))};

inline constexpr double T[3][3] = {
    {0.09443876248897524, -0.14125529502095421, 0.03002919410514742},
    {0.25021312296533332, 0.20412935229379994, -0.38294211275726192},
    {1.0, 1.0, 0.0}};
inline constexpr double TI[3][3] = {
    {4.17871859155190428, 0.32768282076106237, 0.52337644549944951},
    {-4.17871859155190428, -0.32768282076106237, 0.47662355450055044},
    {0.50287263494578682, -2.57192694985560522, 0.59603920482822492}};

}  // namespace radau

/// Radau IIA of order 5. The stage system is decoupled into one real and one
/// complex sparse solve per Newton iteration. The right-hand side is affine,
/// so one iteration from Z = 0 with the exact Jacobian solves the stage
/// equations up to rounding.
///
/// Factorizations depend only on A and h, so they are cached by h and kept
/// across restarts. An accepted step whose growth factor lands in [1, 1.2)
/// keeps h unchanged to reuse them.
class RadauStepper final : public Stepper {
public:
    RadauStepper(const SolverConfig& cfg, SolverStats& stats, std::vector<StepRecord>* trace,
                 double h_floor)
        : Stepper(cfg, stats, trace, h_floor), ctl_(3) {}

    int order() const override { return 5; }

    void restart(const AffineSystem& sys, double t, std::span<const double> y,
                 double t_bound) override {
        if (!analysis_ || sys.shared_jacobian() != jac_) {
            jac_ = sys.shared_jacobian();
            analysis_.emplace(*jac_);
            cached_h_.reset();
        }
        sys_ = sys;
        t_ = t;
        t_bound_ = t_bound;
        y_.assign(y.begin(), y.end());
        const std::size_t n = y_.size();
        f_.resize(n);
        y_new_.resize(n);
        err_.resize(n);
        tmp_.resize(n);
        rhs_real_.resize(n);
        w_real_.resize(n);
        rhs_cplx_.resize(n);
        w_cplx_.resize(n);
        for (auto& z : z_) z.resize(n);
        eval(y_, f_);
        ctl_.reset();
        h_abs_ = first_step(f_, 3);
    }

    void change_system(const AffineSystem& sys) override {
        sys_ = sys;
        eval(y_, f_);
    }

    void step() override {
        const std::size_t n = y_.size();
        bool rejected = false;
        for (;;) {
            check_floor(h_abs_);
            const auto [t_new, h] = clip(h_abs_);
            factorize(h);

            // Z0 = 0, so every stage derivative equals f(y).
            double ti_real = 0.0;
            std::complex<double> ti_cplx{};
            for (int j = 0; j < 3; ++j) {
                ti_real += radau::TI[0][j];
                ti_cplx += std::complex<double>(radau::TI[1][j], radau::TI[2][j]);
            }
            for (std::size_t r = 0; r < n; ++r) {
                rhs_real_[r] = ti_real * f_[r];
                rhs_cplx_[r] = ti_cplx * f_[r];
            }
            lu_real_->solve(rhs_real_, w_real_);
            lu_cplx_->solve(rhs_cplx_, w_cplx_);
            stats_.n_linear_solves += 2;
            ++stats_.n_newton_iters;

            for (std::size_t r = 0; r < n; ++r) {
                const double w0 = w_real_[r], w1 = w_cplx_[r].real(), w2 = w_cplx_[r].imag();
                for (int i = 0; i < 3; ++i) {
                    z_[i][r] = radau::T[i][0] * w0 + radau::T[i][1] * w1 + radau::T[i][2] * w2;
                }
                y_new_[r] = y_[r] + z_[2][r];
            }

            // err = (mu_real/h I - A)^-1 (f + Z^T e / h)
            for (std::size_t r = 0; r < n; ++r) {
                tmp_[r] = (radau::e[0] * z_[0][r] + radau::e[1] * z_[1][r] +
                           radau::e[2] * z_[2][r]) / h;
                rhs_real_[r] = f_[r] + tmp_[r];
            }
            lu_real_->solve(rhs_real_, err_);
            ++stats_.n_linear_solves;
            const bool finite = all_finite(y_new_);
            double err = finite ? error_norm(err_, y_, y_new_, cfg_.atol, cfg_.rtol) : INFINITY;
            if (rejected && err > 1.0 && finite) {
                // after a rejection, a stiffer estimate filters spurious growth
                for (std::size_t r = 0; r < n; ++r) rhs_real_[r] = y_[r] + err_[r];
                eval(rhs_real_, w_real_);
                for (std::size_t r = 0; r < n; ++r) rhs_real_[r] = w_real_[r] + tmp_[r];
                lu_real_->solve(rhs_real_, err_);
                ++stats_.n_linear_solves;
                err = error_norm(err_, y_, y_new_, cfg_.atol, cfg_.rtol);
            }
            if (!std::isfinite(err)) err = INFINITY;

            if (cfg_.fixed_step) {
                if (!finite) fail("nonfinite state in fixed-step integration");
                record(t_, h, true, err);
                commit(t_new);
                return;
            }
            if (err <= 1.0) {
                record(t_, h, true, err);
                double factor = ctl_.accept_factor(err, rejected);
                if (factor >= 1.0 && factor < 1.2) factor = 1.0;
                h_abs_ = std::min(h * factor, cfg_.h_max);
                commit(t_new);
                return;
            }
            record(t_, h, false, err);
            h_abs_ = h * ctl_.reject_factor(err);
            rejected = true;
        }
    }

    std::size_t cached_factorizations() const noexcept { return cached_h_ ? 2 : 0; }

private:
    void factorize(double h) {
        if (cached_h_ && *cached_h_ == h) return;
        try {
            lu_real_ = std::make_unique<ShiftedLu<double>>(
                ShiftedLu<double>::factorize(*analysis_, radau::mu_real / h));
            lu_cplx_ = std::make_unique<ShiftedLu<std::complex<double>>>(
                ShiftedLu<std::complex<double>>::factorize(*analysis_, radau::mu_complex / h));
        } catch (const SingularMatrixError& e) {
            fail(std::string("Radau stage matrix is singular: ") + e.what());
        }
        stats_.n_factorizations += 2;
        cached_h_ = h;
    }

    void commit(double t_new) {
        t_ = t_new;
        y_.swap(y_new_);
        eval(y_, f_);
    }

    PiController ctl_;
    std::shared_ptr<const CsrMatrix<double>> jac_;
    std::optional<SparseLuAnalysis> analysis_;
    std::optional<double> cached_h_;
    std::unique_ptr<ShiftedLu<double>> lu_real_;
    std::unique_ptr<ShiftedLu<std::complex<double>>> lu_cplx_;

    std::vector<double> f_, y_new_, err_, tmp_, rhs_real_, w_real_;
    std::vector<std::complex<double>> rhs_cplx_, w_cplx_;
    std::vector<double> z_[3];
};

}  // namespace dcnet::ode
