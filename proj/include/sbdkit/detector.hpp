#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sbdkit/flow_trace.hpp"

namespace sbd::detect {

// Exponential smoothing of the raw round trip delay signal. The first sample
// seeds the state.
struct SmoothingState {
    double alpha = 0.9;  // in (0, 1]
    double s = 0.0;
    bool primed = false;
};

// Returns the new smoothed value and advances the state. rtt_ms must be > 0.
double smooth(SmoothingState& state, double rtt_ms);

std::vector<RttSample> smooth_trace(const std::vector<RttSample>& samples, double alpha);

// A run of consecutive samples with non-decreasing smoothed delay. Timestamps
// are strictly increasing within a group; groups are disjoint and ordered.
struct Group {
    std::vector<RttSample> points;

    double start_ms() const { return points.front().t_ms; }
    double end_ms() const { return points.back().t_ms; }
    double last_rtt() const { return points.back().rtt_ms; }
    double mean_rtt() const;
};

// Splits a smoothed trace into maximal non-decreasing delay runs. A strictly
// decreasing step terminates a run; runs start at index >= 1 and runs shorter
// than two samples are discarded.
std::vector<Group> extract_groups(const std::vector<RttSample>& smoothed);

// Merges adjacent groups that belong to the same queue filling episode:
// the last delay of group i must be below the mean delay of group i+1 and the
// time gap between them below delta_ms. Merges chain transitively; the point
// multiset is preserved.
std::vector<Group> merge_groups(const std::vector<Group>& groups, double delta_ms);

struct SlopeEstimate {
    double slope = 0.0;  // delay growth rate, ms/s
    double start_ms = 0.0;
    double end_ms = 0.0;
    std::size_t n_points = 0;
};

// Ordinary least squares slope of smoothed delay against time, with the
// group's first timestamp as origin, scaled to ms/s. Groups with fewer than
// min_points samples or a degenerate time axis yield no estimate.
std::optional<SlopeEstimate> regress_slope(const Group& group, std::size_t min_points = 5);

// The estimate with the most points among groups ending inside
// [window_start_ms, window_end_ms); ties go to the earliest-ending group.
std::optional<SlopeEstimate> pick_dominant_slope(const std::vector<SlopeEstimate>& estimates,
                                                 double window_start_ms, double window_end_ms);

struct Verdict {
    bool shared = false;
    double error = 0.0;       // NaN when not evaluated
    bool time_gated = false;  // spans too far apart, error not evaluated
    bool degenerate = false;  // non-positive slopes, error not evaluated
    SlopeEstimate a;
    SlopeEstimate b;
};

// Pairwise shared-bottleneck decision: slopes must agree within epsilon and
// their time spans must overlap, or lie within tau_ms of each other.
Verdict decide(const SlopeEstimate& a, const SlopeEstimate& b, double epsilon, double tau_ms);

struct DetectorConfig {
    double alpha = 0.9;
    double delta_ms = 50.0;
    double epsilon = 0.2;
    double tau_ms = 1000.0;
    double window_ms = 5000.0;
    std::size_t min_group_points = 5;
};

// Loads a JSON config with keys alpha, delta_ms, epsilon, tau_ms, window_ms,
// min_group_points. Missing keys keep their defaults.
DetectorConfig load_detector_config(const std::string& path);
void validate(const DetectorConfig& cfg);

// smooth -> extract -> merge -> regress for one trace; negative slopes and
// undersized groups are dropped.
std::vector<SlopeEstimate> trace_slopes(const std::vector<RttSample>& samples,
                                        const DetectorConfig& cfg);

struct WindowVerdict {
    double window_start_ms = 0.0;
    double window_end_ms = 0.0;
    Verdict verdict;
};

// Full pipeline over tumbling windows (aligned to the trace epoch) covering
// the overlapping span of the two traces. Windows where either flow has no
// dominant slope yield no verdict.
std::vector<WindowVerdict> run_detector(const FlowTrace& a, const FlowTrace& b,
                                        const DetectorConfig& cfg);

}  // namespace sbd::detect
