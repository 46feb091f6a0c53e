#include "sbdkit/flow_trace.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbdkit/error.hpp"

namespace sbd {

FlowTrace read_trace_csv(const std::string& path, const std::string& flow_id) {
    std::ifstream in(path);
    if (!in) {
        throw Error("io", "cannot open trace file " + path);
    }
    FlowTrace trace;
    trace.flow_id = flow_id.empty() ? std::filesystem::path(path).stem().string() : flow_id;

    std::string line;
    if (!std::getline(in, line)) {
        throw Error("parse", path + ": empty trace file");
    }
    if (line != "t_ms,rtt_ms") {
        throw Error("parse", path + ": expected header 't_ms,rtt_ms', got '" + line + "'");
    }
    std::size_t lineno = 1;
    double prev_t = -1.0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        RttSample s;
        char extra = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf%c", &s.t_ms, &s.rtt_ms, &extra) != 2) {
            throw Error("parse", path + ":" + std::to_string(lineno) + ": bad row '" + line + "'");
        }
        if (s.rtt_ms <= 0.0) {
            throw Error("parse", path + ":" + std::to_string(lineno) + ": rtt_ms must be positive");
        }
        if (s.t_ms <= prev_t) {
            throw Error("parse",
                        path + ":" + std::to_string(lineno) + ": t_ms not strictly increasing");
        }
        prev_t = s.t_ms;
        trace.samples.push_back(s);
    }
    return trace;
}

void write_trace_csv(const std::string& path, const FlowTrace& trace) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) {
        throw Error("io", "cannot write trace file " + path);
    }
    std::fputs("t_ms,rtt_ms\n", f);
    for (const RttSample& s : trace.samples) {
        std::fprintf(f, "%.6f,%.6f\n", s.t_ms, s.rtt_ms);
    }
    std::fclose(f);
}

}  // namespace sbd
