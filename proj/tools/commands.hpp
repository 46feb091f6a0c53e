#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sbd::cli {

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::optional<unsigned long long> seed_override);

int cmd_detect(const std::string& trace_a, const std::string& trace_b,
               const std::string& config_path, const std::string& out_path);

// One evaluated scenario: fairness, throughput ratio, detection intervals and
// the sqrt-law fit of the busiest queue's longest filling episode.
struct RunEvaluation {
    std::string scenario;
    std::optional<double> jain;
    std::optional<double> ratio;
    std::optional<double> ttfp_s;  // time to first positive verdict
    std::size_t positive_windows = 0;
    std::size_t evaluated_windows = 0;
    std::optional<double> sqrt_fit_r2;
    std::optional<double> sqrt_fit_coeff;
};

RunEvaluation evaluate_run(const std::string& run_dir);

int cmd_evaluate(const std::string& run_dir, const std::string& out_path);

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_path);

}  // namespace sbd::cli
