#include "sbdkit/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sbdkit/error.hpp"

namespace sbd::eval {

double jain_index(double x_sp_mean, double x_mp) {
    if (x_sp_mean < 0.0 || x_mp < 0.0 || (x_sp_mean == 0.0 && x_mp == 0.0)) {
        throw Error("input", "jain_index: rates must be non-negative and not both zero");
    }
    const double s = x_sp_mean + x_mp;
    return s * s / (2.0 * (x_sp_mean * x_sp_mean + x_mp * x_mp));
}

double throughput_ratio(double x_mp, double x_sp_mean) {
    if (x_sp_mean <= 0.0) {
        throw Error("input", "throughput_ratio: single-path mean rate must be positive");
    }
    return x_mp / x_sp_mean;
}

FitReport fit_sqrt_law(const std::vector<RttSample>& segment) {
    if (segment.size() < 5) {
        throw Error("input", "fit_sqrt_law: need at least 5 samples");
    }
    const double t0 = segment.front().t_ms;
    const double n = static_cast<double>(segment.size());
    double mx = 0.0;
    double my = 0.0;
    for (const RttSample& s : segment) {
        const double r = s.rtt_ms / 1000.0;
        mx += (s.t_ms - t0) / 1000.0;
        my += r * r;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (const RttSample& s : segment) {
        const double r = s.rtt_ms / 1000.0;
        const double dx = (s.t_ms - t0) / 1000.0 - mx;
        const double dy = r * r - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        throw Error("input", "fit_sqrt_law: degenerate time axis");
    }
    FitReport rep;
    rep.coeff = sxy / sxx;
    rep.intercept = my - rep.coeff * mx;
    if (syy == 0.0) {
        rep.r_squared = 1.0;
    } else {
        const double ss_res = syy - sxy * sxy / sxx;
        rep.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    rep.start_ms = segment.front().t_ms;
    rep.end_ms = segment.back().t_ms;
    rep.n = segment.size();
    return rep;
}

double predicted_slope_ms_per_s(double n_flows, double c_mbps, int mss_bytes) {
    if (c_mbps <= 0.0) {
        throw Error("input", "predicted_slope: capacity must be positive");
    }
    const double c_pps = c_mbps * 1e6 / (8.0 * static_cast<double>(mss_bytes));
    return 1000.0 * n_flows / c_pps;
}

double reno_equilibrium_pps(double rtt_s, double loss_p) {
    if (rtt_s <= 0.0 || loss_p <= 0.0 || loss_p >= 1.0) {
        throw Error("input", "reno_equilibrium: need rtt > 0 and p in (0,1)");
    }
    return std::sqrt(2.0 * (1.0 - loss_p) / loss_p) / rtt_s;
}

double lia_equilibrium_pps(const std::vector<std::pair<double, double>>& paths) {
    double best = 0.0;
    for (const auto& [rtt_s, p] : paths) {
        best = std::max(best, reno_equilibrium_pps(rtt_s, p));
    }
    return best;
}

double uncoupled_equilibrium_pps(const std::vector<std::pair<double, double>>& paths) {
    double sum = 0.0;
    for (const auto& [rtt_s, p] : paths) {
        sum += reno_equilibrium_pps(rtt_s, p);
    }
    return sum;
}

PositiveIntervals positive_intervals(const std::vector<WindowFlag>& windows) {
    PositiveIntervals out;
    for (const WindowFlag& w : windows) {
        if (!w.positive) {
            continue;
        }
        if (!out.first_positive_ms) {
            out.first_positive_ms = w.start_ms;
        }
        if (!out.intervals_ms.empty() && out.intervals_ms.back().second >= w.start_ms) {
            out.intervals_ms.back().second = std::max(out.intervals_ms.back().second, w.end_ms);
        } else {
            out.intervals_ms.emplace_back(w.start_ms, w.end_ms);
        }
    }
    return out;
}

double mean_rate_mbps(const std::vector<double>& bin_bytes, double bin_ms, double t0_ms,
                      double t1_ms) {
    if (t1_ms <= t0_ms) {
        throw Error("input", "mean_rate: empty interval");
    }
    const long b0 = std::max(0L, static_cast<long>(std::floor(t0_ms / bin_ms)));
    const long b1 = std::min(static_cast<long>(bin_bytes.size()),
                             static_cast<long>(std::ceil(t1_ms / bin_ms)));
    double bytes = 0.0;
    for (long i = b0; i < b1; ++i) {
        bytes += bin_bytes[static_cast<std::size_t>(i)];
    }
    return bytes * 8.0 / ((t1_ms - t0_ms) * 1000.0);  // bytes per ms span -> Mbps
}

}  // namespace sbd::eval
