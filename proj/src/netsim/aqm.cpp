#include "sbdkit/netsim/aqm.hpp"

namespace sbd::net {

bool droptail_accept(const QueueState& q) {
    return q.len < q.capacity;
}

bool red_accept(QueueState& q, const RedParams& red, std::mt19937_64& rng) {
    q.red_avg = (1.0 - red.weight) * q.red_avg + red.weight * static_cast<double>(q.len);
    if (q.len >= q.capacity) {
        return false;
    }
    if (q.red_avg < red.min_th) {
        return true;
    }
    if (q.red_avg >= red.max_th) {
        return false;
    }
    const double p = red.max_p * (q.red_avg - red.min_th) / (red.max_th - red.min_th);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) >= p;
}

}  // namespace sbd::net
