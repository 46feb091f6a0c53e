#pragma once

#include <cstddef>
#include <random>

namespace sbd::net {

struct RedParams {
    double min_th = 100.0;     // packets
    double max_th = 120.0;     // packets
    double queue_limit = 140;  // hard capacity, packets
    double max_p = 0.1;        // drop probability at max_th
    double weight = 0.002;     // EWMA weight for the average queue
};

struct QueueState {
    std::size_t len = 0;        // packets waiting
    std::size_t capacity = 0;   // drop-tail capacity / RED queue_limit
    double red_avg = 0.0;       // RED average queue, packets
};

// Drop-tail: accept unless the queue is full.
bool droptail_accept(const QueueState& q);

// RED: updates the average queue estimate, then accepts below min_th, drops
// above max_th (or at the hard limit), and drops with linearly rising
// probability in between. Uses only the supplied seeded generator.
bool red_accept(QueueState& q, const RedParams& red, std::mt19937_64& rng);

}  // namespace sbd::net
