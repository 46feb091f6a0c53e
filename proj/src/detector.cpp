#include "sbdkit/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "sbdkit/error.hpp"

namespace sbd::detect {

double smooth(SmoothingState& state, double rtt_ms) {
    if (rtt_ms <= 0.0) {
        throw Error("input", "smooth: rtt must be positive");
    }
    if (state.alpha <= 0.0 || state.alpha > 1.0) {
        throw Error("input", "smooth: alpha must be in (0,1]");
    }
    if (!state.primed) {
        state.s = rtt_ms;
        state.primed = true;
    } else {
        state.s = state.alpha * rtt_ms + (1.0 - state.alpha) * state.s;
    }
    return state.s;
}

std::vector<RttSample> smooth_trace(const std::vector<RttSample>& samples, double alpha) {
    SmoothingState st;
    st.alpha = alpha;
    std::vector<RttSample> out;
    out.reserve(samples.size());
    for (const RttSample& s : samples) {
        out.push_back({s.t_ms, smooth(st, s.rtt_ms)});
    }
    return out;
}

double Group::mean_rtt() const {
    double sum = 0.0;
    for (const RttSample& p : points) {
        sum += p.rtt_ms;
    }
    return sum / static_cast<double>(points.size());
}

std::vector<Group> extract_groups(const std::vector<RttSample>& smoothed) {
    std::vector<Group> groups;
    Group cur;
    auto flush = [&] {
        if (cur.points.size() >= 2) {
            groups.push_back(std::move(cur));
        }
        cur.points.clear();
    };
    for (std::size_t i = 1; i < smoothed.size(); ++i) {
        if (smoothed[i].rtt_ms >= smoothed[i - 1].rtt_ms) {
            cur.points.push_back(smoothed[i]);
        } else {
            flush();
        }
    }
    flush();
    return groups;
}

std::vector<Group> merge_groups(const std::vector<Group>& groups, double delta_ms) {
    std::vector<Group> merged;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        // Merge conditions are evaluated against the original neighbour, not
        // the accumulated chain.
        const bool chain = i > 0 && !merged.empty() &&
                           groups[i - 1].last_rtt() < groups[i].mean_rtt() &&
                           groups[i].start_ms() - groups[i - 1].end_ms() < delta_ms;
        if (chain) {
            Group& tail = merged.back();
            tail.points.insert(tail.points.end(), groups[i].points.begin(),
                               groups[i].points.end());
        } else {
            merged.push_back(groups[i]);
        }
    }
    return merged;
}

std::optional<SlopeEstimate> regress_slope(const Group& group, std::size_t min_points) {
    const std::vector<RttSample>& pts = group.points;
    if (pts.size() < std::max<std::size_t>(min_points, 2)) {
        return std::nullopt;
    }
    const double x0 = pts.front().t_ms;
    double sx = 0.0;
    double sy = 0.0;
    for (const RttSample& p : pts) {
        sx += p.t_ms - x0;
        sy += p.rtt_ms;
    }
    const double n = static_cast<double>(pts.size());
    const double mx = sx / n;
    const double my = sy / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (const RttSample& p : pts) {
        const double dx = (p.t_ms - x0) - mx;
        sxy += dx * (p.rtt_ms - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) {
        return std::nullopt;
    }
    SlopeEstimate est;
    est.slope = 1000.0 * sxy / sxx;  // ms per ms, scaled to ms/s
    est.start_ms = pts.front().t_ms;
    est.end_ms = pts.back().t_ms;
    est.n_points = pts.size();
    return est;
}

std::optional<SlopeEstimate> pick_dominant_slope(const std::vector<SlopeEstimate>& estimates,
                                                 double window_start_ms, double window_end_ms) {
    const SlopeEstimate* best = nullptr;
    for (const SlopeEstimate& e : estimates) {
        if (e.end_ms < window_start_ms || e.end_ms >= window_end_ms) {
            continue;
        }
        if (best == nullptr || e.n_points > best->n_points ||
            (e.n_points == best->n_points && e.end_ms < best->end_ms)) {
            best = &e;
        }
    }
    if (best == nullptr) {
        return std::nullopt;
    }
    return *best;
}

Verdict decide(const SlopeEstimate& a, const SlopeEstimate& b, double epsilon, double tau_ms) {
    Verdict v;
    v.a = a;
    v.b = b;
    v.error = std::numeric_limits<double>::quiet_NaN();
    const double s = std::max(a.start_ms, b.start_ms);
    const double e = std::min(a.end_ms, b.end_ms);
    if (e - s < 0.0 && std::abs(e - s) > tau_ms) {
        v.shared = false;
        v.time_gated = true;
        return v;
    }
    const double hi = std::max(a.slope, b.slope);
    if (hi <= 0.0) {
        v.shared = false;
        v.degenerate = true;
        return v;
    }
    v.error = std::abs(a.slope - b.slope) / hi;
    v.shared = v.error <= epsilon;
    return v;
}

void validate(const DetectorConfig& cfg) {
    if (cfg.alpha <= 0.0 || cfg.alpha > 1.0) {
        throw Error("parse", "detector config: alpha must be in (0,1]");
    }
    if (cfg.delta_ms <= 0.0 || cfg.epsilon < 0.0 || cfg.tau_ms < 0.0 || cfg.window_ms <= 0.0) {
        throw Error("parse", "detector config: negative or zero parameter");
    }
    if (cfg.min_group_points < 2) {
        throw Error("parse", "detector config: min_group_points must be >= 2");
    }
}

DetectorConfig load_detector_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("io", "cannot open detector config " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse", path + ": " + e.what());
    }
    DetectorConfig cfg;
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.delta_ms = j.value("delta_ms", cfg.delta_ms);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.tau_ms = j.value("tau_ms", cfg.tau_ms);
    cfg.window_ms = j.value("window_ms", cfg.window_ms);
    cfg.min_group_points = j.value("min_group_points", cfg.min_group_points);
    validate(cfg);
    return cfg;
}

std::vector<SlopeEstimate> trace_slopes(const std::vector<RttSample>& samples,
                                        const DetectorConfig& cfg) {
    std::vector<SlopeEstimate> out;
    const std::vector<Group> merged =
        merge_groups(extract_groups(smooth_trace(samples, cfg.alpha)), cfg.delta_ms);
    for (const Group& g : merged) {
        std::optional<SlopeEstimate> est = regress_slope(g, cfg.min_group_points);
        if (est && est->slope >= 0.0) {
            out.push_back(*est);
        }
    }
    return out;
}

std::vector<WindowVerdict> run_detector(const FlowTrace& a, const FlowTrace& b,
                                        const DetectorConfig& cfg) {
    validate(cfg);
    std::vector<WindowVerdict> out;
    if (a.samples.empty() || b.samples.empty()) {
        return out;
    }
    const double lo = std::max(a.samples.front().t_ms, b.samples.front().t_ms);
    const double hi = std::min(a.samples.back().t_ms, b.samples.back().t_ms);
    if (hi < lo) {
        return out;
    }
    const std::vector<SlopeEstimate> ea = trace_slopes(a.samples, cfg);
    const std::vector<SlopeEstimate> eb = trace_slopes(b.samples, cfg);

    const long first = static_cast<long>(std::floor(lo / cfg.window_ms));
    const long last = static_cast<long>(std::floor(hi / cfg.window_ms));
    for (long k = first; k <= last; ++k) {
        const double w0 = static_cast<double>(k) * cfg.window_ms;
        const double w1 = w0 + cfg.window_ms;
        std::optional<SlopeEstimate> da = pick_dominant_slope(ea, w0, w1);
        std::optional<SlopeEstimate> db = pick_dominant_slope(eb, w0, w1);
        if (!da || !db) {
            continue;
        }
        out.push_back({w0, w1, decide(*da, *db, cfg.epsilon, cfg.tau_ms)});
    }
    return out;
}

}  // namespace sbd::detect
