#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "sbdkit/flow_trace.hpp"

namespace sbd::eval {

// Two-term Jain's fairness index over the mean single-path rate and the
// multipath session rate: (a + b)^2 / (2 (a^2 + b^2)), in (0.5, 1].
double jain_index(double x_sp_mean, double x_mp);

// Multipath rate over the mean best-path single-flow rate.
double throughput_ratio(double x_mp, double x_sp_mean);

struct FitReport {
    double coeff = 0.0;      // fitted slope of rtt^2 against time, s^2 per s
    double intercept = 0.0;  // fitted rtt^2 at segment start, s^2
    double r_squared = 0.0;
    double start_ms = 0.0;
    double end_ms = 0.0;
    std::size_t n = 0;
};

// Fits rtt(t) = sqrt(coeff * t + intercept) over a queue-filling segment by
// linear least squares of rtt^2 against time (seconds, segment-relative).
// For n homogeneous flows through a bottleneck of C packets/s the expected
// coeff is 2n/C. Requires at least 5 samples.
FitReport fit_sqrt_law(const std::vector<RttSample>& segment);

// Idealized delay trend slope n/C expressed in ms/s, with the capacity given
// in Mbps and converted to packets using the mss.
double predicted_slope_ms_per_s(double n_flows, double c_mbps, int mss_bytes = 1500);

// AIMD equilibrium rate (packets/s) of one path: (1/rtt) * sqrt(2(1-p)/p).
double reno_equilibrium_pps(double rtt_s, double loss_p);

// Aggregate equilibrium over (rtt_s, loss_p) paths: coupled LIA matches the
// best path, uncoupled sums the per-path rates.
double lia_equilibrium_pps(const std::vector<std::pair<double, double>>& paths);
double uncoupled_equilibrium_pps(const std::vector<std::pair<double, double>>& paths);

struct WindowFlag {
    double start_ms = 0.0;
    double end_ms = 0.0;
    bool positive = false;
};

struct PositiveIntervals {
    std::vector<std::pair<double, double>> intervals_ms;  // coalesced positive spans
    std::optional<double> first_positive_ms;
};

PositiveIntervals positive_intervals(const std::vector<WindowFlag>& windows);

// Mean rate in Mbps over [t0_ms, t1_ms) from fixed-width byte bins.
double mean_rate_mbps(const std::vector<double>& bin_bytes, double bin_ms, double t0_ms,
                      double t1_ms);

}  // namespace sbd::eval
