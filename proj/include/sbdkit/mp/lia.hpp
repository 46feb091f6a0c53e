#pragma once

#include <cstddef>
#include <vector>

namespace sbd::mp {

struct SubflowView {
    double cwnd = 1.0;    // packets
    double rtt_ms = 0.0;  // smoothed rtt; must be > 0
};

// Coupled per-ack window increment for the subflow at acked_index:
//   max_k(w_k / rtt_k^2) / (sum_k w_k / rtt_k)^2
// capped at the single-path increment 1/w_r. Unit of rtt cancels out.
double lia_increase(const std::vector<SubflowView>& subflows, std::size_t acked_index);

// Per-subflow multiplicative decrease, floor one packet.
double lia_decrease(double cwnd);

}  // namespace sbd::mp
