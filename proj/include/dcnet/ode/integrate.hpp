#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dcnet/affine_system.hpp"
#include "dcnet/error.hpp"
#include "dcnet/ode/bdf.hpp"
#include "dcnet/ode/radau.hpp"
#include "dcnet/ode/stepper.hpp"
#include "dcnet/ode/tableaux.hpp"
#include "dcnet/ode/types.hpp"

namespace dcnet::ode {

/// Called after every accepted step with the new (t, x).
using StepObserver = std::function<void(double, std::span<const double>)>;

/// Steps below this fraction of the time span count as a stall.
inline constexpr double stall_fraction = 1e-14;

inline std::unique_ptr<Stepper> make_stepper(const SolverConfig& cfg, SolverStats& stats,
                                             std::vector<StepRecord>* trace, double h_floor) {
    switch (cfg.method) {
        case Method::rk23:
        case Method::rk45:
        case Method::dop853:
            return std::make_unique<ErkStepper>(tableau(cfg.method), cfg, stats, trace, h_floor);
        case Method::radau: return std::make_unique<RadauStepper>(cfg, stats, trace, h_floor);
        case Method::bdf: return std::make_unique<BdfStepper>(cfg, stats, trace, h_floor);
    }
    throw ConfigError("unknown method");
}

namespace detail {

class Sampler {
public:
    Sampler(const SolverConfig& cfg, SolverRun& run) : cfg_(cfg), run_(run) {}

    void force(double t, std::span<const double> x) {
        if (!run_.times.empty() && run_.times.back() == t) {
            run_.states.back().assign(x.begin(), x.end());
            return;
        }
        push(t, x);
    }

    void offer(double t, std::span<const double> x) {
        ++count_;
        if (cfg_.sample_stride == 0 || count_ % cfg_.sample_stride != 0) return;
        if (!run_.times.empty() && t - run_.times.back() < cfg_.sample_min_spacing) return;
        push(t, x);
    }

private:
    void push(double t, std::span<const double> x) {
        run_.times.push_back(t);
        run_.states.emplace_back(x.begin(), x.end());
    }

    const SolverConfig& cfg_;
    SolverRun& run_;
    std::size_t count_ = 0;
};

}  // namespace detail

/// Integrates x' = A x + b(t) from t0 to t_end, where b changes at the
/// scheduled load events.
///
/// Restart mode integrates each event-free segment separately, landing
/// exactly on every event time; every segment costs one f evaluation plus
/// one for the automatic initial step. Continuous mode applies an event at
/// the first accepted step boundary at or past its time and keeps the step
/// history (explicit methods re-evaluate the cached f).
///
/// RHS evaluations per attempted step: 3 (rk23), 6 (rk45), 12 (dop853),
/// 1 (bdf predictor), 0 for radau apart from the one f(y_new) per accepted
/// step and one more for a re-estimated error after a rejection.
///
/// Fills `run` as it goes, so samples, trace and counters up to a failure
/// survive an IntegrationError.
inline void integrate_into(SolverRun& run, const AffineSystem& system, std::span<const double> x0,
                           double t0, double t_end, const EventSchedule& events,
                           const SolverConfig& cfg, const StepObserver& observer = {}) {
    cfg.validate();
    if (!(t_end > t0)) throw ConfigError("t_end must exceed t0");
    if (x0.size() != system.dimension()) {
        throw ValidationError("initial state has length " + std::to_string(x0.size()) +
                              ", system dimension is " + std::to_string(system.dimension()));
    }
    validate_events(events, t0, t_end);
    for (const LoadEvent& e : events) {
        if (e.node >= system.n()) throw ConfigError("event targets a node outside the network");
    }

    run = SolverRun{};
    run.method = cfg.method;
    const double h_floor = stall_fraction * (t_end - t0);
    auto stepper = make_stepper(cfg, run.stats, cfg.record_trace ? &run.trace : nullptr, h_floor);
    detail::Sampler sampler(cfg, run);
    sampler.force(t0, x0);

    const auto wall_start = std::chrono::steady_clock::now();
    AffineSystem sys = system;

    auto after_step = [&]() {
        if (!all_finite(stepper->y())) {
            throw IntegrationError("state became nonfinite", stepper->t(),
                                   std::vector<double>(stepper->y().begin(), stepper->y().end()));
        }
        sampler.offer(stepper->t(), stepper->y());
        if (observer) observer(stepper->t(), stepper->y());
    };

    auto stamp = [&]() {
        run.stats.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    };
    try {
        if (cfg.event_mode == EventMode::restart) {
            std::vector<double> x(x0.begin(), x0.end());
            double t = t0;
            for (std::size_t seg = 0; seg <= events.size(); ++seg) {
                const double bound = seg < events.size() ? events[seg].time : t_end;
                stepper->restart(sys, t, x, bound);
                if (seg > 0) ++run.stats.n_restarts;
                while (stepper->t() < bound) {
                    stepper->step();
                    after_step();
                }
                t = bound;
                x.assign(stepper->y().begin(), stepper->y().end());
                sampler.force(t, x);
                if (seg < events.size()) sys = sys.with_load(events[seg].node, events[seg].amps);
            }
        } else {
            stepper->restart(sys, t0, x0, t_end);
            std::size_t next = 0;
            while (stepper->t() < t_end) {
                stepper->step();
                after_step();
                bool changed = false;
                while (next < events.size() && stepper->t() >= events[next].time) {
                    sys = sys.with_load(events[next].node, events[next].amps);
                    ++next;
                    changed = true;
                }
                if (changed) {
                    sampler.force(stepper->t(), stepper->y());
                    stepper->change_system(sys);
                }
            }
            sampler.force(stepper->t(), stepper->y());
        }
    } catch (...) {
        stamp();
        throw;
    }
    stamp();
}

/// Convenience wrapper returning the finished run.
inline SolverRun integrate(const AffineSystem& system, std::span<const double> x0, double t0,
                           double t_end, const EventSchedule& events, const SolverConfig& cfg,
                           const StepObserver& observer = {}) {
    SolverRun run;
    integrate_into(run, system, x0, t0, t_end, events, cfg, observer);
    return run;
}

}  // namespace dcnet::ode
