#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sbdkit/detector.hpp"
#include "sbdkit/netsim/aqm.hpp"

namespace sbd::net {

enum class Aqm { droptail, red };

struct LinkConfig {
    std::string a;
    std::string b;
    double bandwidth_mbps = 0.0;
    double delay_ms = 0.0;  // one-way propagation
    int queue_pkts = -1;    // direct packet capacity, or
    double queue_delay_ms = -1.0;  // delay-form capacity, converted via q = B*Q/MTU
    Aqm aqm = Aqm::droptail;
    RedParams red;
};

enum class CcAlgo { reno, cubic, mp_subflow };

struct FlowSpec {
    std::string id;
    std::string src;
    std::string dst;
    CcAlgo cc = CcAlgo::reno;
    double start_ms = -1.0;  // < 0: uniform in [0, 1s) from the run seed
    int mss = 1500;
    std::vector<std::string> path;  // optional explicit node route
};

struct CouplingConfig {
    double fallback_ms = 100000.0;
    detect::DetectorConfig detector;
};

struct MultipathSpec {
    std::string session;
    std::vector<std::string> subflows;  // flow ids with cc = multipath-subflow
    CouplingConfig coupling;
};

struct Scenario {
    int schema_version = 1;
    std::string name;
    double duration_ms = 0.0;
    std::uint64_t seed = 1;
    std::vector<std::string> nodes;
    std::vector<LinkConfig> links;
    std::vector<FlowSpec> flows;
    std::optional<MultipathSpec> multipath;
    bool record_queues = true;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& name);

// Queue capacity in packets; delay-form configs convert bandwidth * delay to
// packets of mtu bytes, floored, minimum 1.
int queue_capacity_pkts(const LinkConfig& link, int mtu_bytes = 1500);

}  // namespace sbd::net
