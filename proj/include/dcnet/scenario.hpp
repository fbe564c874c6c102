#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dcnet/error.hpp"
#include "dcnet/graph.hpp"

namespace dcnet {

/// All parameters of a controlled DC network. Values are SI (H, F, Ohm, V, A).
/// Node vectors have length n, line vectors length m, `com.weights` m_com.
struct Scenario {
    NetworkTopology topology;
    CommunicationGraph com;

    std::vector<double> filter_inductance;    // L^f
    std::vector<double> capacitance;          // C^L
    std::vector<double> line_resistance;      // R
    std::vector<double> line_inductance;      // L
    std::vector<double> controller_gain;      // K
    std::vector<double> sharing_weight;       // W
    std::vector<double> theta_time_constant;  // T_theta
    std::vector<double> phi_time_constant;    // T_phi
    std::vector<double> reference_voltage;    // V*
    std::vector<double> load_current;         // I_L, zero at generators

    std::uint64_t seed = 0;

    std::size_t n() const noexcept { return topology.n; }
    std::size_t m() const noexcept { return topology.m(); }
    std::size_t state_dimension() const noexcept { return topology.state_dimension(); }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Offsets of the five blocks in the packed state x = (I, V, f, theta, phi).
struct StateLayout {
    std::size_t n = 0;
    std::size_t m = 0;

    std::size_t dimension() const noexcept { return 4 * n + m; }
    std::size_t current() const noexcept { return 0; }
    std::size_t voltage() const noexcept { return n; }
    std::size_t line() const noexcept { return 2 * n; }
    std::size_t theta() const noexcept { return 2 * n + m; }
    std::size_t phi() const noexcept { return 3 * n + m; }
};

struct StateVector {
    std::vector<double> current;
    std::vector<double> voltage;
    std::vector<double> line_current;
    std::vector<double> theta;
    std::vector<double> phi;

    std::vector<double> pack() const {
        std::vector<double> x;
        x.reserve(4 * current.size() + line_current.size());
        for (const auto* block : {&current, &voltage, &line_current, &theta, &phi}) {
            x.insert(x.end(), block->begin(), block->end());
        }
        return x;
    }

    static StateVector unpack(std::span<const double> x, std::size_t n, std::size_t m) {
        const StateLayout lay{n, m};
        if (x.size() != lay.dimension()) {
            throw ValidationError("state has length " + std::to_string(x.size()) + ", expected " +
                                  std::to_string(lay.dimension()));
        }
        auto slice = [&](std::size_t at, std::size_t len) {
            return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(at),
                                       x.begin() + static_cast<std::ptrdiff_t>(at + len));
        };
        return {slice(lay.current(), n), slice(lay.voltage(), n), slice(lay.line(), m),
                slice(lay.theta(), n), slice(lay.phi(), n)};
    }

    friend bool operator==(const StateVector&, const StateVector&) = default;
};

namespace detail {

/// Portable uniform draws: mt19937_64 output mapped to [0, 1) with 53 bits,
/// since std::uniform_real_distribution differs between standard libraries.
class UniformStream {
public:
    UniformStream(std::uint64_t seed, std::uint32_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          stream};
        engine_.seed(seq);
    }

    double operator()(double lo, double hi) {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    std::vector<double> draw(std::size_t count, double lo, double hi) {
        std::vector<double> v(count);
        for (auto& x : v) x = (*this)(lo, hi);
        return v;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace detail

/// Throws ValidationError when a vector has the wrong length or a parameter
/// leaves its admissible range.
inline void validate(const Scenario& s) {
    validate(s.topology);
    validate(s.com, s.topology);
    const std::size_t n = s.n();
    const std::size_t m = s.m();

    auto check = [](const std::vector<double>& v, std::size_t len, const char* name, bool allow_zero) {
        if (v.size() != len) {
            throw ValidationError(std::string(name) + " has length " + std::to_string(v.size()) +
                                  ", expected " + std::to_string(len));
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            const bool ok = std::isfinite(v[i]) && (allow_zero ? v[i] >= 0.0 : v[i] > 0.0);
            if (!ok) {
                throw ValidationError(std::string(name) + "[" + std::to_string(i + 1) + "] = " +
                                      std::to_string(v[i]) + " out of range");
            }
        }
    };
    check(s.filter_inductance, n, "Lf", false);
    check(s.capacitance, n, "CL", false);
    check(s.line_resistance, m, "R", false);
    check(s.line_inductance, m, "L", false);
    check(s.controller_gain, n, "K", false);
    check(s.sharing_weight, n, "W", false);
    check(s.theta_time_constant, n, "T_theta", false);
    check(s.phi_time_constant, n, "T_phi", false);
    check(s.reference_voltage, n, "V_star", false);
    check(s.load_current, n, "I_L", true);
    for (std::size_t i = 0; i < n; ++i) {
        if (s.topology.generator[i] && s.load_current[i] != 0.0) {
            throw ValidationError("I_L[" + std::to_string(i + 1) + "] is nonzero at a generator node");
        }
    }
}

/// Random parameters following the DC network parameter table: node filter
/// inductance U[1.5, 3.5] mH, capacitance U[1.5, 2.5] mF, line resistance
/// U[40, 100] Ohm, line inductance U[1.5, 2.5] mH, loads U[10, 20] A on
/// non-generator nodes (ascending node order), fixed controller settings.
/// A pure function of (topology, gamma, seed).
inline Scenario generate_parameters(const NetworkTopology& topology, double com_gamma,
                                    std::uint64_t seed) {
    validate(topology);
    const std::size_t n = topology.n;
    const std::size_t m = topology.m();

    Scenario s;
    s.topology = topology;
    s.com = ring_communication(topology, com_gamma);
    s.seed = seed;

    detail::UniformStream rng(seed, 1);
    s.filter_inductance = rng.draw(n, 1.5e-3, 3.5e-3);
    s.capacitance = rng.draw(n, 1.5e-3, 2.5e-3);
    s.line_resistance = rng.draw(m, 40.0, 100.0);
    s.line_inductance = rng.draw(m, 1.5e-3, 2.5e-3);
    s.load_current.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!topology.generator[i]) s.load_current[i] = rng(10.0, 20.0);
    }

    s.reference_voltage.assign(n, 380.0);
    s.theta_time_constant.assign(n, 1.0);
    s.phi_time_constant.assign(n, 1e-2);
    s.controller_gain.assign(n, 0.5);
    s.sharing_weight.assign(n, 1.0);
    return s;
}

/// Random initial state: I0 ~ U[0, 10] A, V0 ~ U[370, 390] V, lines and
/// controller states at zero.
inline StateVector generate_initial_state(const Scenario& s, std::uint64_t seed) {
    const std::size_t n = s.n();
    detail::UniformStream rng(seed, 2);
    StateVector x;
    x.current = rng.draw(n, 0.0, 10.0);
    x.voltage = rng.draw(n, 370.0, 390.0);
    x.line_current.assign(s.m(), 0.0);
    x.theta.assign(n, 0.0);
    x.phi.assign(n, 0.0);
    return x;
}

struct SteadyStateTargets {
    std::vector<double> current;     // proportional sharing currents
    double weighted_voltage_sum = 0; // 1^T W^-1 V*
};

/// I_bar = W^-1 1 (1^T I_L) / (1^T W^-1 1) and the weighted voltage target
/// 1^T W^-1 V*.
inline SteadyStateTargets steady_state_targets(const Scenario& s) {
    const std::size_t n = s.n();
    double total_load = 0.0;
    double inv_weight_sum = 0.0;
    SteadyStateTargets out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(s.sharing_weight[i] > 0.0)) throw ValidationError("sharing weights must be positive");
        total_load += s.load_current[i];
        inv_weight_sum += 1.0 / s.sharing_weight[i];
        out.weighted_voltage_sum += s.reference_voltage[i] / s.sharing_weight[i];
    }
    out.current.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.current[i] = total_load / (s.sharing_weight[i] * inv_weight_sum);
    }
    return out;
}

/// Lowest-indexed node without a generator flag, the target of the load
/// step experiment. Throws ConfigError when every node is a generator.
inline std::size_t first_non_generator(const NetworkTopology& t) {
    for (std::size_t i = 0; i < t.n; ++i) {
        if (!t.generator[i]) return i;
    }
    throw ConfigError("network '" + t.name + "' has no non-generator node to perturb");
}

}  // namespace dcnet
