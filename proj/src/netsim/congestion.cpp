#include "sbdkit/netsim/congestion.hpp"

#include <algorithm>
#include <cmath>

namespace sbd::net {

void reno_on_ack(CongestionState& s) {
    if (s.phase == Phase::slow_start) {
        s.cwnd += 1.0;
        if (s.cwnd >= s.ssthresh) {
            s.phase = Phase::congestion_avoidance;
        }
    } else {
        s.cwnd += 1.0 / s.cwnd;
    }
}

void reno_on_loss(CongestionState& s) {
    s.cwnd = std::max(1.0, s.cwnd / 2.0);
    s.ssthresh = s.cwnd;
    s.phase = Phase::congestion_avoidance;
}

double cubic_window(double t_since_loss_s, double w_max, double c, double beta) {
    const double k = std::cbrt(w_max * beta / c);
    const double d = t_since_loss_s - k;
    return c * d * d * d + w_max;
}

}  // namespace sbd::net
