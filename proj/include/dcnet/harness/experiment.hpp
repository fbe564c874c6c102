#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dcnet/affine_system.hpp"
#include "dcnet/error.hpp"
#include "dcnet/json_io.hpp"
#include "dcnet/ode/integrate.hpp"
#include "dcnet/scenario.hpp"

namespace dcnet::harness {

/// Objective residuals at one state.
struct ObjectiveSample {
    double sharing = 0.0;
    double voltage = 0.0;
};

/// max_i |w_i I_i - c| / |c| over `nodes`, c the mean of w_i I_i there.
/// Infinite when c = 0 and the products are not all zero.
inline double sharing_residual(std::span<const double> w, std::span<const double> current,
                               std::span<const std::size_t> nodes) {
    if (nodes.empty()) return 0.0;
    double c = 0.0;
    for (std::size_t i : nodes) c += w[i] * current[i];
    c /= static_cast<double>(nodes.size());
    double worst = 0.0;
    for (std::size_t i : nodes) worst = std::max(worst, std::abs(w[i] * current[i] - c));
    if (worst == 0.0) return 0.0;
    return c == 0.0 ? std::numeric_limits<double>::infinity() : worst / std::abs(c);
}

/// |1^T W^-1 V - 1^T W^-1 V*| / |1^T W^-1 V*|
inline double voltage_residual(std::span<const double> w, std::span<const double> v,
                               std::span<const double> v_star) {
    double got = 0.0, want = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        got += v[i] / w[i];
        want += v_star[i] / w[i];
    }
    return std::abs(got - want) / std::abs(want);
}

class ObjectiveEvaluator {
public:
    explicit ObjectiveEvaluator(const Scenario& s) : s_(s), layout_{s.n(), s.m()} {
        all_.resize(s.n());
        for (std::size_t i = 0; i < s.n(); ++i) all_[i] = i;
    }

    ObjectiveSample operator()(std::span<const double> x) const {
        const auto current = x.subspan(layout_.current(), layout_.n);
        const auto voltage = x.subspan(layout_.voltage(), layout_.n);
        return {sharing_residual(s_.sharing_weight, current, all_),
                voltage_residual(s_.sharing_weight, voltage, s_.reference_voltage)};
    }

    /// 1^T T_theta theta, constant along exact trajectories.
    double theta_moment(std::span<const double> x) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < layout_.n; ++i) {
            sum += s_.theta_time_constant[i] * x[layout_.theta() + i];
        }
        return sum;
    }

private:
    const Scenario& s_;
    StateLayout layout_;
    std::vector<std::size_t> all_;
};

struct ObjectiveSeries {
    std::vector<double> t;
    std::vector<ObjectiveSample> values;

    std::size_t size() const noexcept { return t.size(); }
};

/// Time window [lo, hi) or [lo, hi].
struct Window {
    double lo = 0.0;
    double hi = 0.0;
    bool closed = false;

    bool contains(double t) const noexcept { return t >= lo && (closed ? t <= hi : t < hi); }
    std::string label() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "[%g, %g%c", lo, hi, closed ? ']' : ')');
        return buf;
    }
};

inline const Window pre_event_window{1.4, 1.5, false};
inline const Window recovered_window{4.5, 5.0, true};

struct ObjectiveCheck {
    Window window;
    double tol_sharing = 0.0;
    double tol_voltage = 0.0;
    std::size_t samples = 0;
    double max_sharing = 0.0;
    double max_voltage = 0.0;
    bool sharing_ok = false;
    bool voltage_ok = false;

    bool passed() const noexcept { return sharing_ok && voltage_ok; }
};

struct ExperimentConfig {
    ode::SolverConfig solver = [] {
        ode::SolverConfig c;
        c.sample_min_spacing = 1e-3;
        return c;
    }();
    double t_end = 5.0;
    double perturb_time = 1.5;
    double restore_time = 2.0;
    double perturbed_amps = 20.0;
    double tol_sharing = 1e-3;
    double tol_voltage = 1e-3;
};

struct ExperimentReport {
    std::string network;
    std::uint64_t seed = 0;
    ExperimentConfig config;
    ode::SolverRun run;
    ObjectiveSeries objectives;  // one entry per accepted step, plus t0
    ode::EventSchedule events;
    std::vector<double> initial_load;
    std::vector<double> final_load;
    double theta_drift = 0.0;  // max |1^T T_theta (theta(t) - theta(0))|
    bool completed = false;
    std::string failure;
    double failure_time = 0.0;
    std::vector<ObjectiveCheck> checks;  // pre-event and recovered windows
    std::size_t n = 0, m = 0, n_gen = 0;
};

/// pass iff every residual sample inside `window` is within tolerance.
inline ObjectiveCheck check_objectives(const ObjectiveSeries& series, double tol_sharing,
                                       double tol_voltage, const Window& window) {
    ObjectiveCheck c{window, tol_sharing, tol_voltage};
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (!window.contains(series.t[k])) continue;
        ++c.samples;
        const auto& v = series.values[k];
        c.max_sharing = std::max(c.max_sharing, v.sharing);
        c.max_voltage = std::max(c.max_voltage, v.voltage);
    }
    if (c.samples == 0) {
        throw ValidationError("objective window " + window.label() + " holds no samples");
    }
    c.sharing_ok = c.max_sharing <= tol_sharing;
    c.voltage_ok = c.max_voltage <= tol_voltage;
    return c;
}

inline ObjectiveCheck check_objectives(const ExperimentReport& report, double tol_sharing,
                                       double tol_voltage, const Window& window) {
    if (!report.completed) throw ValidationError("objective check needs a completed run");
    return check_objectives(report.objectives, tol_sharing, tol_voltage, window);
}

/// The load-step experiment: integrate [0, t_end] from the seeded initial
/// state; at perturb_time the lowest-indexed non-generator node draws
/// perturbed_amps, at restore_time it returns to its own load. Integration
/// failures are captured in the report with the partial run kept.
inline ExperimentReport run_experiment(const Scenario& scenario, const ExperimentConfig& cfg = {}) {
    validate(scenario);
    const std::size_t node = first_non_generator(scenario.topology);

    ExperimentReport rep;
    rep.network = scenario.topology.name;
    rep.seed = scenario.seed;
    rep.config = cfg;
    rep.n = scenario.n();
    rep.m = scenario.m();
    rep.n_gen = scenario.topology.generator_count();
    rep.initial_load = scenario.load_current;
    // a horizon ending before an event simply never reaches it
    for (const ode::LoadEvent& e : {ode::LoadEvent{cfg.perturb_time, node, cfg.perturbed_amps},
                                    ode::LoadEvent{cfg.restore_time, node, scenario.load_current[node]}}) {
        if (e.time < cfg.t_end) rep.events.push_back(e);
    }
    rep.final_load = rep.initial_load;
    for (const auto& e : rep.events) rep.final_load[e.node] = e.amps;

    const AffineSystem system = assemble(scenario);
    const std::vector<double> x0 = generate_initial_state(scenario, scenario.seed).pack();
    const ObjectiveEvaluator eval(scenario);
    const double moment0 = eval.theta_moment(x0);

    auto observe = [&](double t, std::span<const double> x) {
        rep.objectives.t.push_back(t);
        rep.objectives.values.push_back(eval(x));
        rep.theta_drift = std::max(rep.theta_drift, std::abs(eval.theta_moment(x) - moment0));
    };
    observe(0.0, x0);

    try {
        ode::integrate_into(rep.run, system, x0, 0.0, cfg.t_end, rep.events, cfg.solver, observe);
        rep.completed = true;
    } catch (const IntegrationError& e) {
        rep.failure = e.what();
        rep.failure_time = e.time();
        return rep;
    }
    // windows that start past a shortened horizon are skipped
    for (const Window& w : {pre_event_window, recovered_window}) {
        if (w.lo < cfg.t_end) rep.checks.push_back(check_objectives(rep, cfg.tol_sharing, cfg.tol_voltage, w));
    }
    return rep;
}

inline json stats_to_json(const ode::SolverStats& s) {
    return json{{"n_rhs", s.n_rhs},
                {"n_factorizations", s.n_factorizations},
                {"n_linear_solves", s.n_linear_solves},
                {"n_newton_iters", s.n_newton_iters},
                {"n_accepted", s.n_accepted},
                {"n_rejected", s.n_rejected},
                {"n_restarts", s.n_restarts},
                {"wall_time_seconds", s.wall_time_seconds}};
}

inline json solver_config_to_json(const ode::SolverConfig& c) {
    json j{{"method", std::string(ode::to_string(c.method))},
           {"rtol", c.rtol},
           {"atol", c.atol},
           {"h_max", c.h_max},
           {"event_mode", std::string(ode::to_string(c.event_mode))},
           {"bdf_order_bounds", {c.bdf_min_order, c.bdf_max_order}},
           {"step_controller",
            {{"safety", ode::PiController::safety},
             {"alpha", ode::PiController::alpha},
             {"beta", ode::PiController::beta},
             {"min_factor", ode::PiController::min_factor},
             {"max_factor", ode::PiController::max_factor}}}};
    j["h_init"] = c.h_init ? json(*c.h_init) : json(nullptr);
    return j;
}

inline json check_to_json(const ObjectiveCheck& c) {
    return json{{"window", c.window.label()},
                {"samples", c.samples},
                {"max_sharing_residual", c.max_sharing},
                {"max_voltage_residual", c.max_voltage},
                {"tol_sharing", c.tol_sharing},
                {"tol_voltage", c.tol_voltage},
                {"sharing_pass", c.sharing_ok},
                {"voltage_pass", c.voltage_ok}};
}

inline json report_to_json(const ExperimentReport& r) {
    json events = json::array();
    for (const auto& e : r.events) {
        events.push_back({{"time", e.time}, {"node", e.node + 1}, {"amps", e.amps}});
    }
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(check_to_json(c));
    json j{{"network", r.network},
           {"seed", r.seed},
           {"n", r.n},
           {"m", r.m},
           {"n_gen", r.n_gen},
           {"dimension", 4 * r.n + r.m},
           {"t_end", r.config.t_end},
           {"solver", solver_config_to_json(r.config.solver)},
           {"stats", stats_to_json(r.run.stats)},
           {"events", events},
           {"completed", r.completed},
           {"objective_checks", checks},
           {"theta_drift", r.theta_drift},
           {"load_restored", r.final_load == r.initial_load},
           {"machine",
            {{"hardware_threads", std::thread::hardware_concurrency()},
             {"compiler", __VERSION__}}}};
    if (!r.completed) j["failure"] = {{"message", r.failure}, {"time", r.failure_time}};
    if (!r.run.states.empty()) j["final_state"] = r.run.states.back();
    return j;
}

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Step trace: t,h,accepted,n_rhs_cum,n_fact_cum
inline std::string trace_csv(const ode::SolverRun& run) {
    std::string out = "t,h,accepted,n_rhs_cum,n_fact_cum\n";
    for (const auto& s : run.trace) {
        out += format_number(s.t) + ',' + format_number(s.h) + ',' + (s.accepted ? "1" : "0") + ',' +
               std::to_string(s.n_rhs_cum) + ',' + std::to_string(s.n_fact_cum) + '\n';
    }
    return out;
}

inline std::string objectives_csv(const ObjectiveSeries& s) {
    std::string out = "t,sharing_residual,voltage_residual\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        const auto& v = s.values[k];
        out += format_number(s.t[k]) + ',' + format_number(v.sharing) + ',' + format_number(v.voltage) + '\n';
    }
    return out;
}

}  // namespace dcnet::harness
