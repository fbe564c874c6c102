#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcnet/error.hpp"

namespace dcnet::ode {

enum class Method { rk23, rk45, dop853, radau, bdf };

enum class EventMode {
    restart,    // stop exactly at each event, apply it, start afresh
    continuous  // apply at the first step boundary past the event, keep solver state
};

inline constexpr Method all_methods[] = {Method::rk23, Method::rk45, Method::dop853,
                                         Method::radau, Method::bdf};

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::rk23: return "rk23";
        case Method::rk45: return "rk45";
        case Method::dop853: return "dop853";
        case Method::radau: return "radau";
        case Method::bdf: return "bdf";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    for (Method m : all_methods) {
        if (s == to_string(m)) return m;
    }
    throw ConfigError("unknown method '" + std::string(s) + "' (rk23|rk45|dop853|radau|bdf)");
}

inline std::string_view to_string(EventMode m) {
    return m == EventMode::restart ? "restart" : "continuous";
}

inline EventMode parse_event_mode(std::string_view s) {
    if (s == "restart") return EventMode::restart;
    if (s == "continuous") return EventMode::continuous;
    throw ConfigError("unknown event mode '" + std::string(s) + "' (restart|continuous)");
}

inline bool is_implicit(Method m) { return m == Method::radau || m == Method::bdf; }

struct SolverConfig {
    Method method = Method::rk45;
    double rtol = 1e-3;
    double atol = 1e-6;
    std::optional<double> h_init;
    double h_max = 1e-2;
    EventMode event_mode = EventMode::restart;

    /// Constant step size with every step accepted; used for convergence
    /// order measurements. Requires h_init.
    bool fixed_step = false;

    /// Order bounds for BDF (1..5). Equal bounds pin the order.
    int bdf_min_order = 1;
    int bdf_max_order = 5;

    /// Keep every `sample_stride`-th accepted state (0: endpoints and event
    /// times only) ...
    std::size_t sample_stride = 1;
    /// ... and additionally skip samples closer than this to the previous one.
    double sample_min_spacing = 0.0;

    bool record_trace = true;

    void validate() const {
        if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("rtol and atol must be positive");
        if (!(h_max > 0.0)) throw ConfigError("h_max must be positive");
        if (h_init && !(*h_init > 0.0)) throw ConfigError("h_init must be positive");
        if (fixed_step && !h_init) throw ConfigError("fixed-step mode needs h_init");
        if (bdf_min_order < 1 || bdf_max_order > 5 || bdf_min_order > bdf_max_order) {
            throw ConfigError("BDF order bounds must satisfy 1 <= min <= max <= 5");
        }
    }
};

/// One attempted step.
struct StepRecord {
    double t;           // start of the attempt
    double h;
    bool accepted;
    double error_norm;  // scaled error estimate (0 in fixed-step mode)
    int order;          // method order used (BDF varies)
    std::size_t n_rhs_cum;
    std::size_t n_fact_cum;
};

struct SolverStats {
    std::size_t n_rhs = 0;
    std::size_t n_factorizations = 0;
    std::size_t n_linear_solves = 0;
    std::size_t n_newton_iters = 0;
    std::size_t n_accepted = 0;
    std::size_t n_rejected = 0;
    std::size_t n_restarts = 0;
    double wall_time_seconds = 0.0;

    std::size_t n_attempted() const noexcept { return n_accepted + n_rejected; }
};

struct SolverRun {
    Method method = Method::rk45;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<StepRecord> trace;
    SolverStats stats;

    const std::vector<double>& final_state() const { return states.back(); }
};

/// A known-time load change: set I_L at `node` (0-based) to `amps`.
struct LoadEvent {
    double time;
    std::size_t node;
    double amps;
};

using EventSchedule = std::vector<LoadEvent>;

inline void validate_events(const EventSchedule& events, double t0, double t_end) {
    double prev = t0;
    for (const LoadEvent& e : events) {
        if (!(e.time > prev) || !(e.time < t_end)) {
            throw ConfigError("event times must be strictly increasing inside (t0, t_end)");
        }
        prev = e.time;
    }
}

}  // namespace dcnet::ode
