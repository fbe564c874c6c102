#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dcnet/error.hpp"

namespace dcnet::ode {

/// Scaled RMS norm of a local error estimate:
/// sqrt(mean((err_i / (atol + rtol * max(|y_old_i|, |y_new_i|)))^2)).
/// A step is acceptable iff the result is <= 1.
inline double error_norm(std::span<const double> err, std::span<const double> y_old,
                         std::span<const double> y_new, double atol, double rtol) {
    if (err.size() != y_old.size() || err.size() != y_new.size()) {
        throw ValidationError("error_norm: vector lengths differ");
    }
    if (err.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(y_old[i]), std::abs(y_new[i]));
        const double r = err[i] / scale;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

inline double rms(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum / static_cast<double>(v.size()));
}

/// PI step-size controller (Gustafsson form). With error estimator order q
/// and k = q + 1 the accepted-step factor is
///   safety * err^(-0.7/k) * err_prev^(0.4/k),
/// falling back to the elementary safety * err^(-1/k) when there is no
/// previous accepted error. Factors are clamped to [0.2, 10]; right after a
/// rejection growth is capped at 1.
class PiController {
public:
    static constexpr double safety = 0.9;
    static constexpr double min_factor = 0.2;
    static constexpr double max_factor = 10.0;
    static constexpr double alpha = 0.7;  // exponent on the current error
    static constexpr double beta = 0.4;   // exponent on the previous error

    explicit PiController(int error_order = 4) : k_(error_order + 1) {}

    double accept_factor(double err, bool after_rejection) {
        double f;
        if (err == 0.0) {
            f = max_factor;
        } else if (err_prev_) {
            f = safety * std::pow(err, -alpha / k_) * std::pow(*err_prev_, beta / k_);
        } else {
            f = safety * std::pow(err, -1.0 / k_);
        }
        f = std::clamp(f, min_factor, max_factor);
        if (after_rejection) f = std::min(1.0, f);
        err_prev_ = std::max(err, 1e-4);
        return f;
    }

    double reject_factor(double err) const {
        if (!std::isfinite(err)) return min_factor;
        return std::clamp(safety * std::pow(err, -1.0 / k_), min_factor, 1.0);
    }

    void reset() { err_prev_.reset(); }
    bool has_memory() const noexcept { return err_prev_.has_value(); }
    int k() const noexcept { return k_; }

private:
    int k_;
    std::optional<double> err_prev_;
};

struct StepProposal {
    double h_next;
    bool accepted;
};

/// One controller decision: accept iff err <= 1, then scale h and cap it at
/// h_max. Throws IntegrationError when the proposal falls below h_floor.
inline StepProposal propose_step(double h, double err, PiController& controller, double h_max,
                                 double h_floor, bool after_rejection = false) {
    const bool ok = err <= 1.0;
    const double factor = ok ? controller.accept_factor(err, after_rejection)
                             : controller.reject_factor(err);
    const double h_next = std::min(h * factor, h_max);
    if (h_next < h_floor) {
        throw IntegrationError("step size " + std::to_string(h_next) + " fell below the floor " +
                                   std::to_string(h_floor),
                               0.0, {});
    }
    return {h_next, ok};
}

/// Automatic first step from the size of the initial derivative and the
/// tolerances (Hairer, Norsett & Wanner, section II.4). Costs one extra
/// right-hand-side evaluation, reported through `rhs`.
template <class Rhs>
double select_initial_step(Rhs&& rhs, std::span<const double> y0, std::span<const double> f0,
                           double interval, double h_max, int error_order, double rtol,
                           double atol) {
    if (y0.empty()) return h_max;
    if (interval <= 0.0) return 0.0;
    const std::size_t n = y0.size();
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y0[i] / (atol + std::abs(y0[i]) * rtol);
    const double d0 = rms(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = f0[i] / (atol + std::abs(y0[i]) * rtol);
    const double d1 = rms(tmp);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, interval);

    std::vector<double> y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h0 * f0[i];
    rhs(std::span<const double>(y1), std::span<double>(f1));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = (f1[i] - f0[i]) / (atol + std::abs(y0[i]) * rtol);
    const double d2 = rms(tmp) / h0;

    double h1;
    if (d1 <= 1e-15 && d2 <= 1e-15) {
        h1 = std::max(1e-6, h0 * 1e-3);
    } else {
        h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / (error_order + 1));
    }
    return std::min({100.0 * h0, h1, interval, h_max});
}

}  // namespace dcnet::ode
