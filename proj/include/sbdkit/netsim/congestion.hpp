#pragma once

#include <limits>

namespace sbd::net {

enum class Phase { slow_start, congestion_avoidance };

struct CongestionState {
    double cwnd = 2.0;  // packets, >= 1
    double ssthresh = 1e9;
    double srtt_ms = 0.0;  // 0 until measured
    double min_rtt_ms = std::numeric_limits<double>::infinity();
    Phase phase = Phase::slow_start;
};

// Additive increase: +1 per ack in slow start (until ssthresh), +1/cwnd in
// congestion avoidance.
void reno_on_ack(CongestionState& s);

// Multiplicative decrease: halve with a floor of one packet, then continue in
// congestion avoidance.
void reno_on_loss(CongestionState& s);

// Cubic window as a function of time since the last loss, in seconds.
// W(t) = c*(t - K)^3 + w_max with K = cbrt(w_max * beta / c).
double cubic_window(double t_since_loss_s, double w_max, double c = 0.4, double beta = 0.3);

}  // namespace sbd::net
