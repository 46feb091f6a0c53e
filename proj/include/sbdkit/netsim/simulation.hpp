#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbdkit/detector.hpp"
#include "sbdkit/flow_trace.hpp"
#include "sbdkit/netsim/scenario.hpp"

namespace sbd::net {

struct FlowStats {
    std::string flow_id;
    std::uint64_t delivered_bytes = 0;
    std::uint64_t data_pkts_sent = 0;  // includes retransmissions
    std::uint64_t data_pkts_dropped = 0;
    double mean_rate_mbps = 0.0;
    double loss_rate = 0.0;
    FlowTrace rtt_trace;                 // ack-arrival timestamps at the sender
    std::vector<double> rate_bin_bytes;  // delivered bytes per 100 ms bin
};

struct QueueSample {
    double t_ms = 0.0;
    int q_pkts = 0;
};

struct SessionVerdictRow {
    double window_start_ms = 0.0;
    double window_end_ms = 0.0;
    bool shared = false;
    double error = 0.0;  // NaN when not evaluated
    double slope_a = 0.0;
    double slope_b = 0.0;
    bool coupled_after = false;  // controller mode after consuming the verdict
};

// Per-directed-link accounting; conservation must hold exactly at all times:
// enqueued == dequeued + dropped + in_queue (+ the packet in transmission).
struct LinkAudit {
    std::string name;  // "a->b"
    std::uint64_t enqueued = 0;
    std::uint64_t dequeued = 0;
    std::uint64_t dropped = 0;
    std::uint64_t in_queue = 0;  // at end of run, including in-flight tx
    int capacity_pkts = 0;
    int max_queue_seen = 0;
    std::vector<QueueSample> samples;  // 100 ms cadence when recording enabled
};

struct RunResult {
    std::vector<FlowStats> flows;
    std::vector<std::vector<std::string>> flow_paths;  // node lists, same order
    std::vector<LinkAudit> links;
    std::vector<SessionVerdictRow> verdicts;  // empty without a multipath session
    double duration_ms = 0.0;
    std::uint64_t seed = 0;
};

// Deterministic discrete-event run: identical scenario and seed produce an
// identical event sequence and identical outputs. Throws Error("topology") on
// unroutable flows.
RunResult simulate(const Scenario& sc);

// Writes trace_<flow>.csv per flow, summary.csv, rates.csv, qtrace.csv,
// verdicts.csv (when a multipath session ran) and manifest.json to out_dir.
void write_run_outputs(const Scenario& sc, const RunResult& res, const std::string& out_dir,
                       const std::string& scenario_hash);

// FNV-1a 64-bit over a byte string, hex encoded; used for scenario hashes.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace sbd::net
