// dcnet command line: simulate, scaling, validate, gen, export.
//
// Exit codes: 0 pass, 1 a check failed (or integration broke down),
// 2 bad input. Errors are printed to stderr as one JSON object.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcnet/harness/experiment.hpp"
#include "dcnet/harness/invariants.hpp"
#include "dcnet/harness/plots.hpp"
#include "dcnet/harness/scaling.hpp"

namespace fs = std::filesystem;
using namespace dcnet;
using namespace dcnet::harness;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_error = 2;

int report_error(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
    return exit_error;
}

struct SolverOptions {
    std::string method = "radau";
    double rtol = 1e-3;
    double atol = 1e-6;
    double hmax = 1e-2;
    std::string event_mode = "restart";

    void attach(CLI::App* app) {
        app->add_option("--method", method, "rk23|rk45|dop853|radau|bdf")->capture_default_str();
        app->add_option("--rtol", rtol)->capture_default_str();
        app->add_option("--atol", atol)->capture_default_str();
        app->add_option("--hmax", hmax, "largest step [s]")->capture_default_str();
        app->add_option("--event-mode", event_mode, "restart|continuous")->capture_default_str();
    }

    ode::SolverConfig to_config() const {
        ode::SolverConfig c;
        c.method = ode::parse_method(method);
        c.rtol = rtol;
        c.atol = atol;
        c.h_max = hmax;
        c.event_mode = ode::parse_event_mode(event_mode);
        c.validate();
        return c;
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string samples_csv(const ode::SolverRun& run) {
    std::string out = "t";
    if (!run.states.empty()) {
        for (std::size_t i = 0; i < run.states[0].size(); ++i) out += ",x" + std::to_string(i);
    }
    out += '\n';
    for (std::size_t k = 0; k < run.times.size(); ++k) {
        out += format_number(run.times[k]);
        for (double v : run.states[k]) out += ',' + format_number(v);
        out += '\n';
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-domain simulator for controlled DC networks"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run the load-step experiment on one network");
    fs::path sim_scenario, sim_out;
    SolverOptions sim_solver;
    std::uint64_t sim_seed = 1;
    double sim_gamma = 100.0, sim_t_end = 5.0;
    bool sim_no_plots = false, sim_samples = false, sim_check = false;
    sim->add_option("--scenario", sim_scenario, "scenario or topology JSON")->required();
    sim->add_option("--out", sim_out, "output directory")->required();
    sim_solver.attach(sim);
    sim->add_option("--seed", sim_seed, "seed when --scenario is a bare topology")->capture_default_str();
    sim->add_option("--gamma", sim_gamma, "communication weight for a bare topology")->capture_default_str();
    sim->add_option("--t-end", sim_t_end, "horizon [s]")->capture_default_str();
    sim->add_flag("--no-plots", sim_no_plots, "skip SVG output");
    sim->add_flag("--samples", sim_samples, "also write every sampled state to samples.csv");
    sim->add_flag("--check-objectives", sim_check, "exit 1 unless both objectives hold in both windows");

    // scaling
    auto* sca = app.add_subcommand("scaling", "time the experiment across a catalog");
    fs::path sca_catalog, sca_out, sca_plot;
    std::string sca_methods = "rk23,rk45,dop853,radau,bdf", sca_networks;
    int sca_reps = 3;
    std::size_t sca_max_dim = 1611;
    std::uint64_t sca_seed = 1;
    SolverOptions sca_solver;
    sca->add_option("--catalog", sca_catalog, "directory of scenario or topology JSON files")->required();
    sca->add_option("--out", sca_out, "CSV file")->required();
    sca->add_option("--methods", sca_methods, "comma-separated methods")->capture_default_str();
    sca->add_option("--reps", sca_reps, "timing repetitions (median)")->capture_default_str();
    sca->add_option("--networks", sca_networks, "comma-separated names (default: whole catalog)");
    sca->add_option("--max-dimension", sca_max_dim, "skip larger networks when --networks is absent")
        ->capture_default_str();
    sca->add_option("--seed", sca_seed)->capture_default_str();
    sca->add_option("--plot", sca_plot, "directory for scaling.svg");
    sca->add_option("--rtol", sca_solver.rtol)->capture_default_str();
    sca->add_option("--atol", sca_solver.atol)->capture_default_str();
    sca->add_option("--hmax", sca_solver.hmax)->capture_default_str();

    // validate
    auto* val = app.add_subcommand("validate", "run the invariant suite on one scenario");
    fs::path val_scenario;
    val->add_option("--scenario", val_scenario, "scenario or topology JSON")->required();

    // gen
    auto* gen = app.add_subcommand("gen", "seeded parameters for a topology");
    fs::path gen_topology, gen_out;
    std::uint64_t gen_seed = 1;
    double gen_gamma = 100.0;
    gen->add_option("--topology", gen_topology)->required();
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_option("--gamma", gen_gamma)->capture_default_str();
    gen->add_option("--out", gen_out, "scenario JSON")->required();

    // export
    auto* exp = app.add_subcommand("export", "write A (Matrix Market) and b for one scenario");
    fs::path exp_scenario, exp_out, exp_rhs;
    exp->add_option("--scenario", exp_scenario)->required();
    exp->add_option("--out", exp_out, ".mtx file for A")->required();
    exp->add_option("--rhs", exp_rhs, "JSON file for b");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what());
    }

    try {
        if (*sim) {
            ExperimentConfig cfg;
            cfg.solver = sim_solver.to_config();
            cfg.solver.sample_min_spacing = 1e-3;
            cfg.t_end = sim_t_end;
            const Scenario s = load_scenario_or_topology(sim_scenario, sim_gamma, sim_seed);
            const ExperimentReport r = run_experiment(s, cfg);
            fs::create_directories(sim_out);
            const json summary = report_to_json(r);
            write_text_file(sim_out / "summary.json", summary.dump(2) + "\n");
            write_text_file(sim_out / "trace.csv", trace_csv(r.run));
            write_text_file(sim_out / "objectives.csv", objectives_csv(r.objectives));
            if (sim_samples) write_text_file(sim_out / "samples.csv", samples_csv(r.run));
            if (!sim_no_plots && r.run.times.size() >= 2) emit_plots(r, sim_out);
            json brief{{"network", r.network},
                       {"method", summary["solver"]["method"]},
                       {"completed", r.completed},
                       {"stats", summary["stats"]},
                       {"objective_checks", summary["objective_checks"]}};
            if (!r.completed) brief["failure"] = summary["failure"];
            std::cout << brief.dump(2) << "\n";
            if (!r.completed) return exit_fail;
            if (sim_check) {
                for (const auto& c : r.checks) {
                    if (!c.passed()) return exit_fail;
                }
            }
            return exit_pass;
        }

        if (*sca) {
            ScalingConfig cfg;
            cfg.repetitions = sca_reps;
            cfg.seed = sca_seed;
            cfg.experiment.solver = sca_solver.to_config();
            std::vector<ode::Method> methods;
            for (const auto& m : split_list(sca_methods)) methods.push_back(ode::parse_method(m));
            if (methods.empty()) throw ConfigError("no methods given");
            std::vector<Scenario> nets;
            if (!sca_networks.empty()) {
                for (const auto& name : split_list(sca_networks)) {
                    nets.push_back(load_network(sca_catalog, name, cfg.com_gamma, cfg.seed));
                }
            } else {
                for (const auto& name : list_networks(sca_catalog)) {
                    Scenario s = load_network(sca_catalog, name, cfg.com_gamma, cfg.seed);
                    if (s.topology.state_dimension() <= sca_max_dim) nets.push_back(std::move(s));
                }
            }
            if (nets.empty()) throw ConfigError("no networks selected");
            const auto rows = scaling_study(nets, methods, cfg);
            write_text_file(sca_out, scaling_csv(rows));
            if (!sca_plot.empty()) emit_scaling_plot(rows, sca_plot);
            json slopes = json::object();
            for (const auto& [m, v] : scaling_slopes(rows)) slopes[std::string(ode::to_string(m))] = v;
            std::cout << json{{"rows", rows.size()}, {"csv", sca_out.string()}, {"loglog_slopes", slopes}}.dump(2)
                      << "\n";
            return exit_pass;
        }

        if (*val) {
            const Scenario s = load_scenario_or_topology(val_scenario, 100.0, 1);
            json checks = json::array();
            bool ok = true;
            for (const auto& r : check_invariants(s)) {
                checks.push_back({{"name", r.name}, {"pass", r.passed}, {"detail", r.detail}});
                ok = ok && r.passed;
            }
            json warnings = json::array();
            for (const auto& w : topology_warnings(s.topology)) warnings.push_back(w);
            std::cout << json{{"network", s.topology.name}, {"pass", ok}, {"checks", checks}, {"warnings", warnings}}
                             .dump(2)
                      << "\n";
            return ok ? exit_pass : exit_fail;
        }

        if (*gen) {
            const Scenario s = generate_parameters(load_topology(gen_topology), gen_gamma, gen_seed);
            save_scenario(s, gen_out);
            std::cout << json{{"network", s.topology.name},
                              {"seed", gen_seed},
                              {"dimension", s.topology.state_dimension()},
                              {"out", gen_out.string()}}
                             .dump(2)
                      << "\n";
            return exit_pass;
        }

        if (*exp) {
            const Scenario s = load_scenario_or_topology(exp_scenario, 100.0, 1);
            const AffineSystem sys = assemble(s);
            std::ostringstream mtx;
            write_matrix_market(sys.jacobian(), mtx);
            write_text_file(exp_out, mtx.str());
            if (!exp_rhs.empty()) {
                write_text_file(exp_rhs, json(std::vector<double>(sys.offset().begin(), sys.offset().end())).dump() + "\n");
            }
            std::cout << json{{"dimension", sys.dimension()}, {"nnz", sys.jacobian().nnz()}}.dump(2) << "\n";
            return exit_pass;
        }
    } catch (const dcnet::Error& e) {
        return report_error(e.kind(), e.what());
    } catch (const fs::filesystem_error& e) {
        return report_error("io", e.what());
    } catch (const std::exception& e) {
        return report_error("internal", e.what());
    }
    return exit_error;
}
