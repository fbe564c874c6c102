#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dcnet/harness/experiment.hpp"

namespace dcnet::harness {

struct ScalingRow {
    std::string network;
    std::size_t dimension = 0, n = 0, m = 0, n_gen = 0;
    ode::Method method = ode::Method::rk23;
    double wall_ms_median = 0.0;
    std::size_t n_rhs = 0, n_accepted = 0, n_rejected = 0, n_fact = 0;
};

struct ScalingConfig {
    ExperimentConfig experiment;
    int repetitions = 3;
    double com_gamma = 100.0;
    std::uint64_t seed = 1;
};

inline double median(std::vector<double> v) {
    if (v.empty()) throw ValidationError("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope needs two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("log-log slope needs positive data");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(x.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// A full scenario document, or a bare topology that gets seeded
/// parameters.
inline Scenario load_scenario_or_topology(const std::filesystem::path& path, double com_gamma,
                                          std::uint64_t seed) {
    const json doc = read_json_file(path);
    if (doc.is_object() && doc.contains("topology")) return scenario_from_json(doc);
    NetworkTopology t = topology_from_json(doc);
    if (t.name.empty()) t.name = path.stem().string();
    return generate_parameters(t, com_gamma, seed);
}

inline Scenario load_network(const std::filesystem::path& dir, const std::string& name,
                             double com_gamma, std::uint64_t seed) {
    const auto path = dir / (name + ".json");
    if (!std::filesystem::exists(path)) {
        throw IoError("network '" + name + "': no scenario file " + path.string());
    }
    return load_scenario_or_topology(path, com_gamma, seed);
}

/// Names of every *.json file in `dir`, sorted.
inline std::vector<std::string> list_networks(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("catalog directory " + dir.string() + " not found");
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

/// Times the full experiment for each (network, method), serially.
/// Counters come from the last repetition (they are deterministic).
inline std::vector<ScalingRow> scaling_study(const std::vector<Scenario>& networks,
                                             std::span<const ode::Method> methods,
                                             const ScalingConfig& cfg) {
    if (cfg.repetitions < 1) throw ConfigError("repetitions must be at least 1");
    std::vector<ScalingRow> rows;
    for (const Scenario& s : networks) {
        const AffineSystem system = assemble(s);
        const std::vector<double> x0 = generate_initial_state(s, s.seed).pack();
        const std::size_t node = first_non_generator(s.topology);
        const ode::EventSchedule events = {
            {cfg.experiment.perturb_time, node, cfg.experiment.perturbed_amps},
            {cfg.experiment.restore_time, node, s.load_current[node]}};
        for (ode::Method method : methods) {
            ode::SolverConfig sc = cfg.experiment.solver;
            sc.method = method;
            sc.record_trace = false;
            sc.sample_stride = 0;
            std::vector<double> wall;
            ode::SolverRun run;
            for (int r = 0; r < cfg.repetitions; ++r) {
                run = ode::integrate(system, x0, 0.0, cfg.experiment.t_end, events, sc);
                wall.push_back(run.stats.wall_time_seconds * 1e3);
            }
            rows.push_back({s.topology.name, s.topology.state_dimension(), s.n(), s.m(),
                            s.topology.generator_count(), method, median(wall), run.stats.n_rhs,
                            run.stats.n_accepted, run.stats.n_rejected, run.stats.n_factorizations});
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ScalingRow& a, const ScalingRow& b) { return a.dimension < b.dimension; });
    return rows;
}

inline std::string scaling_csv(std::span<const ScalingRow> rows) {
    std::string out = "network,dimension,n,m,n_gen,method,wall_ms_median,n_rhs,n_accepted,n_rejected,n_fact\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6f", r.wall_ms_median);
        out += r.network + ',' + std::to_string(r.dimension) + ',' + std::to_string(r.n) + ',' +
               std::to_string(r.m) + ',' + std::to_string(r.n_gen) + ',' +
               std::string(ode::to_string(r.method)) + ',' + buf + ',' + std::to_string(r.n_rhs) + ',' +
               std::to_string(r.n_accepted) + ',' + std::to_string(r.n_rejected) + ',' +
               std::to_string(r.n_fact) + '\n';
    }
    return out;
}

/// Inverse of scaling_csv, for plotting a stored table.
inline std::vector<ScalingRow> parse_scaling_csv(const std::string& text) {
    std::vector<ScalingRow> rows;
    std::size_t pos = text.find('\n');
    if (pos == std::string::npos || text.compare(0, 8, "network,") != 0) {
        throw SchemaError("scaling table: missing header");
    }
    std::size_t line_no = 1;
    while (++pos < text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const std::string line = text.substr(pos, end - pos);
        pos = end;
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t a = 0;
        for (std::size_t b; (b = line.find(',', a)) != std::string::npos; a = b + 1) f.push_back(line.substr(a, b - a));
        f.push_back(line.substr(a));
        if (f.size() != 11) throw SchemaError("scaling table line " + std::to_string(line_no) + ": expected 11 fields");
        try {
            rows.push_back({f[0], std::stoul(f[1]), std::stoul(f[2]), std::stoul(f[3]), std::stoul(f[4]),
                            ode::parse_method(f[5]), std::stod(f[6]), std::stoul(f[7]), std::stoul(f[8]),
                            std::stoul(f[9]), std::stoul(f[10])});
        } catch (const std::logic_error&) {
            throw SchemaError("scaling table line " + std::to_string(line_no) + ": bad number");
        }
    }
    return rows;
}

/// Per-method log-log slope of median wall time against dimension.
inline std::map<ode::Method, double> scaling_slopes(std::span<const ScalingRow> rows) {
    std::map<ode::Method, std::pair<std::vector<double>, std::vector<double>>> pts;
    for (const auto& r : rows) {
        pts[r.method].first.push_back(static_cast<double>(r.dimension));
        pts[r.method].second.push_back(r.wall_ms_median);
    }
    std::map<ode::Method, double> out;
    for (const auto& [m, xy] : pts) {
        if (xy.first.size() >= 2) out[m] = loglog_slope(xy.first, xy.second);
    }
    return out;
}

}  // namespace dcnet::harness
