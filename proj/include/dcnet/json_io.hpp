#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dcnet/error.hpp"
#include "dcnet/graph.hpp"
#include "dcnet/scenario.hpp"

namespace dcnet {

using json = nlohmann::json;

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

namespace detail {

inline json edges_to_json(std::span<const Edge> edges) {
    json arr = json::array();
    for (const Edge& e : edges) arr.push_back({e.from + 1, e.to + 1});
    return arr;
}

inline std::vector<std::pair<std::size_t, std::size_t>> edges_from_json(const json& arr,
                                                                        std::size_t n,
                                                                        const char* what) {
    if (!arr.is_array()) throw SchemaError(std::string(what) + " must be an array");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(arr.size());
    for (const json& item : arr) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() ||
            !item[1].is_number_integer()) {
            throw SchemaError(std::string(what) + " entries must be [i, j] integer pairs");
        }
        const auto i = item[0].get<long long>();
        const auto j = item[1].get<long long>();
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > n || static_cast<std::size_t>(j) > n) {
            throw ValidationError(std::string(what) + " entry [" + std::to_string(i) + ", " +
                                  std::to_string(j) + "] has a node outside [1, " +
                                  std::to_string(n) + "]");
        }
        out.emplace_back(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
    }
    return out;
}

inline std::vector<double> numbers(const json& doc, const char* key) {
    if (!doc.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    const json& arr = doc.at(key);
    if (!arr.is_array()) throw SchemaError(std::string("field '") + key + "' must be an array");
    std::vector<double> v;
    v.reserve(arr.size());
    for (const json& x : arr) {
        if (!x.is_number()) throw SchemaError(std::string("field '") + key + "' must hold numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

}  // namespace detail

inline json topology_to_json(const NetworkTopology& t) {
    json gens = json::array();
    for (std::size_t g : t.generator_nodes()) gens.push_back(g + 1);
    return json{{"name", t.name}, {"n", t.n}, {"edges", detail::edges_to_json(t.edges)},
                {"generators", gens}};
}

/// Parses the neutral topology document
/// `{ "name", "n", "edges": [[i, j], ...], "generators": [...] }` (1-based).
inline NetworkTopology topology_from_json(const json& doc,
                                          std::vector<std::string>* warnings = nullptr) {
    try {
        if (!doc.is_object()) throw SchemaError("topology must be a JSON object");
        const std::string name = doc.value("name", std::string{});
        if (!doc.contains("n") || !doc.at("n").is_number_integer() || doc.at("n").get<long long>() < 1) {
            throw SchemaError("topology field 'n' must be a positive integer");
        }
        const auto n = doc.at("n").get<std::size_t>();
        const auto pairs = detail::edges_from_json(doc.at("edges"), n, "edges");
        std::vector<std::size_t> gens;
        for (const json& g : doc.value("generators", json::array())) {
            if (!g.is_number_integer()) throw SchemaError("generators must be integers");
            const auto v = g.get<long long>();
            if (v < 1 || static_cast<std::size_t>(v) > n) {
                throw ValidationError("generator " + std::to_string(v) + " outside [1, " +
                                      std::to_string(n) + "]");
            }
            gens.push_back(static_cast<std::size_t>(v - 1));
        }
        return make_topology(name, n, pairs, gens, warnings);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("topology document: ") + e.what());
    }
}

inline NetworkTopology load_topology(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings = nullptr) {
    return topology_from_json(read_json_file(path), warnings);
}

inline json scenario_to_json(const Scenario& s) {
    return json{{"topology", topology_to_json(s.topology)},
                {"com_edges", detail::edges_to_json(s.com.edges)},
                {"gamma", s.com.weights},
                {"Lf", s.filter_inductance},
                {"CL", s.capacitance},
                {"R", s.line_resistance},
                {"L", s.line_inductance},
                {"K", s.controller_gain},
                {"W", s.sharing_weight},
                {"T_theta", s.theta_time_constant},
                {"T_phi", s.phi_time_constant},
                {"V_star", s.reference_voltage},
                {"I_L", s.load_current},
                {"seed", s.seed}};
}

/// Parses a scenario document and enforces every Scenario invariant;
/// violations surface as SchemaError.
inline Scenario scenario_from_json(const json& doc) {
    try {
        if (!doc.is_object() || !doc.contains("topology")) {
            throw SchemaError("scenario must be an object with a 'topology' block");
        }
        Scenario s;
        s.topology = topology_from_json(doc.at("topology"));
        for (const auto& [a, b] : detail::edges_from_json(doc.at("com_edges"), s.n(), "com_edges")) {
            s.com.edges.push_back({std::max(a, b), std::min(a, b)});
        }
        s.com.weights = detail::numbers(doc, "gamma");
        s.filter_inductance = detail::numbers(doc, "Lf");
        s.capacitance = detail::numbers(doc, "CL");
        s.line_resistance = detail::numbers(doc, "R");
        s.line_inductance = detail::numbers(doc, "L");
        s.controller_gain = detail::numbers(doc, "K");
        s.sharing_weight = detail::numbers(doc, "W");
        s.theta_time_constant = detail::numbers(doc, "T_theta");
        s.phi_time_constant = detail::numbers(doc, "T_phi");
        s.reference_voltage = detail::numbers(doc, "V_star");
        s.load_current = detail::numbers(doc, "I_L");
        if (!doc.contains("seed") || !doc.at("seed").is_number_unsigned()) {
            throw SchemaError("field 'seed' must be an unsigned integer");
        }
        s.seed = doc.at("seed").get<std::uint64_t>();
        validate(s);
        return s;
    } catch (const ValidationError& e) {
        throw SchemaError(std::string("scenario violates its invariants: ") + e.what());
    } catch (const json::exception& e) {
        throw SchemaError(std::string("scenario document: ") + e.what());
    }
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    write_text_file(path, scenario_to_json(s).dump(1) + "\n");
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    return scenario_from_json(read_json_file(path));
}

}  // namespace dcnet
