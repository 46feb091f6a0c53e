#pragma once

#include <string>
#include <vector>

namespace sbd {

// One acknowledgement observation: arrival time and the round trip delay
// measured on that ack. Timestamps count milliseconds since the trace epoch
// and must be strictly increasing within a trace.
struct RttSample {
    double t_ms = 0.0;
    double rtt_ms = 0.0;
};

struct FlowTrace {
    std::string flow_id;
    std::vector<RttSample> samples;
};

// CSV trace format: header "t_ms,rtt_ms", rows ascending in t_ms.
FlowTrace read_trace_csv(const std::string& path, const std::string& flow_id = "");
void write_trace_csv(const std::string& path, const FlowTrace& trace);

}  // namespace sbd
