#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "sbdkit/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sbdkit: packet-level multipath simulation and shared-bottleneck detection"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "run";
    std::optional<unsigned long long> seed_override;
    CLI::App* sim = app.add_subcommand("simulate", "Run a scenario and write its artifacts");
    sim->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sim->add_option("--out", out_dir, "Output directory (created if missing)");
    unsigned long long seed_value = 0;
    CLI::Option* seed_opt =
        sim->add_option("--seed", seed_value, "Override the scenario's RNG seed");

    std::vector<std::string> traces;
    std::string config_path;
    std::string detect_out;
    CLI::App* det = app.add_subcommand("detect", "Classify two RTT traces per decision window");
    det->add_option("--trace", traces, "RTT trace CSV (give exactly twice)")
        ->required()
        ->expected(2);
    det->add_option("--config", config_path, "Detector config JSON");
    det->add_option("--out", detect_out, "Verdicts CSV path (default: stdout)");

    std::string run_dir;
    std::string eval_out;
    CLI::App* ev = app.add_subcommand("evaluate", "Compute metrics for a finished run");
    ev->add_option("--run", run_dir, "Run directory from 'simulate'")->required();
    ev->add_option("--out", eval_out, "Report CSV path (default: <run>/report.csv)");

    std::vector<std::string> report_runs;
    std::string report_out;
    CLI::App* rep = app.add_subcommand("report", "Tabulate metrics across runs");
    rep->add_option("--run", report_runs, "Run directories (repeatable)")->required();
    rep->add_option("--out", report_out, "Table CSV path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            if (seed_opt->count() > 0) seed_override = seed_value;
            return sbd::cli::cmd_simulate(scenario_path, out_dir, seed_override);
        }
        if (det->parsed()) {
            return sbd::cli::cmd_detect(traces[0], traces[1], config_path, detect_out);
        }
        if (ev->parsed()) {
            return sbd::cli::cmd_evaluate(run_dir, eval_out);
        }
        if (rep->parsed()) {
            return sbd::cli::cmd_report(report_runs, report_out);
        }
    } catch (const sbd::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", e.what());
        return 1;
    }
    return 0;
}
