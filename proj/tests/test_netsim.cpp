#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "sbdkit/error.hpp"
#include "sbdkit/netsim/aqm.hpp"
#include "sbdkit/netsim/congestion.hpp"
#include "sbdkit/netsim/scenario.hpp"
#include "sbdkit/netsim/simulation.hpp"

using namespace sbd;
using namespace sbd::net;

namespace {

Scenario scenario_from(const std::string& json, const std::string& name = "inline") {
    return parse_scenario(json, name);
}

// Two nodes, one flow; parameters spliced into a template.
std::string p2p_json(double bw_mbps, double delay_ms, int queue_pkts, double duration_ms,
                     unsigned seed = 7) {
    std::ostringstream os;
    os << R"({"schema_version":1,"duration_ms":)" << duration_ms << R"(,"seed":)" << seed
       << R"(,"nodes":["a","b"],"links":[{"a":"a","b":"b","bandwidth_mbps":)" << bw_mbps
       << R"(,"delay_ms":)" << delay_ms << R"(,"queue":{"pkts":)" << queue_pkts
       << R"(}}],"flows":[{"id":"f0","src":"a","dst":"b","cc":"reno","start_ms":0}]})";
    return os.str();
}

}  // namespace

TEST_CASE("droptail accepts until full") {
    QueueState q;
    q.capacity = 3;
    q.len = 0;
    CHECK(droptail_accept(q));
    q.len = 2;
    CHECK(droptail_accept(q));  // capacity-1 still accepts
    q.len = 3;
    CHECK(!droptail_accept(q));
}

TEST_CASE("red regimes: below min, above max, hard limit") {
    RedParams red{10.0, 30.0, 50.0, 0.1, 1.0};  // weight 1: avg tracks len exactly
    std::mt19937_64 rng(1);
    QueueState q;
    q.capacity = 50;

    q.len = 5;
    q.red_avg = 5.0;
    for (int i = 0; i < 1000; ++i) CHECK(red_accept(q, red, rng));

    q.len = 35;
    q.red_avg = 35.0;
    for (int i = 0; i < 1000; ++i) CHECK(!red_accept(q, red, rng));

    q.len = 50;  // at the hard limit drops regardless of the average
    q.red_avg = 0.0;
    CHECK(!red_accept(q, red, rng));
}

TEST_CASE("red midpoint drop rate matches the linear formula") {
    // hold the average at the midpoint with a vanishing EWMA weight
    RedParams red{10.0, 30.0, 100.0, 0.1, 1e-12};
    std::mt19937_64 rng(99);
    QueueState q;
    q.capacity = 100;
    q.len = 20;
    q.red_avg = 20.0;
    int drops = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        if (!red_accept(q, red, rng)) ++drops;
    }
    CHECK(static_cast<double>(drops) / trials == doctest::Approx(0.05).epsilon(0.1));
    CHECK(std::fabs(static_cast<double>(drops) / trials - 0.05) < 0.005);
}

TEST_CASE("reno window rules") {
    CongestionState s;
    s.cwnd = 10.0;
    s.phase = Phase::congestion_avoidance;
    reno_on_ack(s);
    CHECK(s.cwnd == doctest::Approx(10.1));

    CongestionState ss;
    ss.cwnd = 2.0;
    ss.ssthresh = 8.0;
    ss.phase = Phase::slow_start;
    reno_on_ack(ss);
    CHECK(ss.cwnd == doctest::Approx(3.0));

    // one full window of acks in congestion avoidance grows cwnd by ~1
    CongestionState ca;
    ca.cwnd = 40.0;
    ca.phase = Phase::congestion_avoidance;
    for (int i = 0; i < 40; ++i) reno_on_ack(ca);
    CHECK(ca.cwnd == doctest::Approx(41.0).epsilon(0.01));

    CongestionState l;
    l.cwnd = 10.0;
    reno_on_loss(l);
    CHECK(l.cwnd == doctest::Approx(5.0));
    CHECK(l.phase == Phase::congestion_avoidance);
    l.cwnd = 1.0;
    reno_on_loss(l);
    CHECK(l.cwnd == doctest::Approx(1.0));  // floor

    double prev = 64.0;
    CongestionState m;
    m.cwnd = prev;
    for (int i = 0; i < 20; ++i) {
        reno_on_loss(m);
        CHECK(m.cwnd <= prev);
        prev = m.cwnd;
    }
}

TEST_CASE("cubic window shape") {
    const double w_max = 100.0;
    const double k = std::cbrt(w_max * 0.3 / 0.4);
    CHECK(cubic_window(k, w_max) == doctest::Approx(w_max));
    CHECK(cubic_window(0.0, w_max) == doctest::Approx(0.7 * w_max));
    double prev = cubic_window(0.0, w_max);
    for (double t = 0.5; t < 30.0; t += 0.5) {
        const double w = cubic_window(t, w_max);
        CHECK(w >= prev - 1e-12);
        prev = w;
    }
    CHECK(prev > w_max);
}

TEST_CASE("scenario validation failures") {
    CHECK_THROWS_AS(scenario_from("{not json"), Error);
    // unknown node in flow
    CHECK_THROWS_AS(
        scenario_from(
            R"({"schema_version":1,"duration_ms":1000,"nodes":["a","b"],"links":[{"a":"a","b":"b","bandwidth_mbps":1,"delay_ms":1,"queue":{"pkts":5}}],"flows":[{"id":"f","src":"a","dst":"zz"}]})"),
        Error);
    // negative bandwidth
    CHECK_THROWS_AS(
        scenario_from(
            R"({"schema_version":1,"duration_ms":1000,"nodes":["a","b"],"links":[{"a":"a","b":"b","bandwidth_mbps":-1,"delay_ms":1,"queue":{"pkts":5}}],"flows":[]})"),
        Error);
    // disconnected route is a simulation-time topology error
    const Scenario sc = scenario_from(
        R"({"schema_version":1,"duration_ms":1000,"nodes":["a","b","c"],"links":[{"a":"a","b":"b","bandwidth_mbps":1,"delay_ms":1,"queue":{"pkts":5}}],"flows":[{"id":"f","src":"a","dst":"c"}]})");
    CHECK_THROWS_AS(simulate(sc), Error);
}

TEST_CASE("queue capacity conversion from delay form") {
    LinkConfig l;
    l.bandwidth_mbps = 40.0;
    l.queue_delay_ms = 100.0;
    l.queue_pkts = -1;
    CHECK(queue_capacity_pkts(l) == 333);  // 40 * 100 * 125 / 1500
    l.queue_pkts = 42;
    CHECK(queue_capacity_pkts(l) == 42);
    l.queue_pkts = -1;
    l.bandwidth_mbps = 0.01;
    l.queue_delay_ms = 1.0;
    CHECK(queue_capacity_pkts(l) == 1);  // floor but never below one packet
}

TEST_CASE("zero flows deliver zero bytes") {
    const Scenario sc = scenario_from(
        R"({"schema_version":1,"duration_ms":2000,"nodes":["a","b"],"links":[{"a":"a","b":"b","bandwidth_mbps":1,"delay_ms":1,"queue":{"pkts":5}}],"flows":[]})");
    const RunResult res = simulate(sc);
    CHECK(res.flows.empty());
    for (const LinkAudit& l : res.links) CHECK(l.enqueued == 0);
}

TEST_CASE("single reno flow: rtt band, saturation ack rate, sqrt growth inputs") {
    // 1 Mbps, 50 ms one way, 40-packet queue
    const Scenario sc = scenario_from(p2p_json(1.0, 50.0, 40, 120000.0));
    const RunResult res = simulate(sc);
    REQUIRE(res.flows.size() == 1);
    const FlowStats& f = res.flows[0];
    REQUIRE(!f.rtt_trace.samples.empty());

    const double ser_data = 1500.0 * 8.0 / 1000.0;  // 12 ms at 1 Mbps
    const double ser_ack = 40.0 * 8.0 / 1000.0;
    const double r_min = 2.0 * 50.0 + ser_data + ser_ack;
    const double r_max = r_min + 40.0 * ser_data;  // full queue ahead of the packet

    double lo = 1e18, hi = 0.0;
    for (const RttSample& s : f.rtt_trace.samples) {
        lo = std::min(lo, s.rtt_ms);  // earliest packets see an empty queue
        if (s.t_ms >= 10000.0) hi = std::max(hi, s.rtt_ms);
        CHECK(s.rtt_ms >= 2.0 * 50.0);  // hard propagation lower bound
    }
    CHECK(lo == doctest::Approx(r_min).epsilon(0.10));
    CHECK(hi == doctest::Approx(r_max).epsilon(0.10));

    // saturated bottleneck: delivered rate per 1 s window within 5% of capacity
    for (int sec = 20; sec < 110; ++sec) {
        double bytes = 0.0;
        for (int b = 0; b < 10; ++b) {
            const std::size_t bin = static_cast<std::size_t>(sec) * 10 + b;
            if (bin < f.rate_bin_bytes.size()) bytes += f.rate_bin_bytes[bin];
        }
        const double mbps = bytes * 8.0 / 1e6;
        CHECK(mbps == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("identical flows share a bottleneck fairly") {
    // 10 Reno flows on 20 Mbps: 100 s mean within 30% of C/n
    std::ostringstream os;
    os << R"({"schema_version":1,"duration_ms":120000,"seed":3,"nodes":["s","r1","r2","d"],)"
       << R"("links":[{"a":"s","b":"r1","bandwidth_mbps":500,"delay_ms":10,"queue":{"delay_ms":100}},)"
       << R"({"a":"r1","b":"r2","bandwidth_mbps":20,"delay_ms":40,"queue":{"delay_ms":100}},)"
       << R"({"a":"r2","b":"d","bandwidth_mbps":500,"delay_ms":10,"queue":{"delay_ms":100}}],"flows":[)";
    for (int i = 0; i < 10; ++i) os << (i ? "," : "") << R"({"id":"f)" << i << R"(","src":"s","dst":"d"})";
    os << "]}";
    const RunResult res = simulate(scenario_from(os.str()));
    for (const FlowStats& f : res.flows) {
        double bytes = 0.0;
        for (std::size_t b = 200; b < f.rate_bin_bytes.size() && b < 1200; ++b) {
            bytes += f.rate_bin_bytes[b];
        }
        const double mbps = bytes * 8.0 / (100.0 * 1e6);
        CHECK(mbps == doctest::Approx(2.0).epsilon(0.30));
    }
    // aggregate utilization of the 20 Mbps bottleneck
    double total = 0.0;
    for (const FlowStats& f : res.flows) total += f.delivered_bytes;
    CHECK(total * 8.0 / (120.0 * 1e6) >= 0.85 * 20.0);
}

TEST_CASE("conservation, queue bounds, rtt floor over randomized runs") {
    std::mt19937_64 rng(20260826);
    std::size_t audit_checks = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const double bw = 0.5 + static_cast<double>(rng() % 200) / 10.0;
        const double delay = 1.0 + static_cast<double>(rng() % 40);
        const int qp = 5 + static_cast<int>(rng() % 80);
        const int nflows = 1 + static_cast<int>(rng() % 4);
        const double dur = 3000.0 + static_cast<double>(rng() % 5000);
        std::ostringstream os;
        os << R"({"schema_version":1,"duration_ms":)" << dur << R"(,"seed":)" << (rng() % 1000)
           << R"(,"nodes":["a","m","b"],"links":[)"
           << R"({"a":"a","b":"m","bandwidth_mbps":)" << bw * 4 << R"(,"delay_ms":2,"queue":{"pkts":200}},)"
           << R"({"a":"m","b":"b","bandwidth_mbps":)" << bw << R"(,"delay_ms":)" << delay
           << R"(,"queue":{"pkts":)" << qp << R"(}}],"flows":[)";
        for (int i = 0; i < nflows; ++i)
            os << (i ? "," : "") << R"({"id":"f)" << i << R"(","src":"a","dst":"b","cc":")"
               << (rng() % 2 ? "reno" : "cubic") << R"("})";
        os << "]}";
        const RunResult res = simulate(scenario_from(os.str()));
        for (const LinkAudit& l : res.links) {
            CHECK(l.enqueued == l.dequeued + l.dropped + l.in_queue);  // exact conservation
            CHECK(l.max_queue_seen <= l.capacity_pkts);
            for (const QueueSample& s : l.samples) {
                CHECK(s.q_pkts >= 0);
                CHECK(s.q_pkts <= l.capacity_pkts + 1);  // +1 for the packet in transmission
                ++audit_checks;
            }
            audit_checks += 2;
        }
        const double rtt_floor = 2.0 * (2.0 + delay);
        for (const FlowStats& f : res.flows) {
            for (const RttSample& s : f.rtt_trace.samples) {
                CHECK(s.rtt_ms >= rtt_floor - 1e-9);
            }
            audit_checks += f.rtt_trace.samples.size();
        }
    }
    CHECK(audit_checks >= 10000);
}

TEST_CASE("determinism: identical scenario and seed reproduce every sample") {
    const Scenario sc = scenario_from(p2p_json(2.0, 20.0, 30, 120000.0, 11));
    const RunResult r1 = simulate(sc);
    const RunResult r2 = simulate(sc);
    REQUIRE(r1.flows.size() == r2.flows.size());
    std::size_t compared = 0;
    for (std::size_t i = 0; i < r1.flows.size(); ++i) {
        CHECK(r1.flows[i].delivered_bytes == r2.flows[i].delivered_bytes);
        CHECK(r1.flows[i].data_pkts_dropped == r2.flows[i].data_pkts_dropped);
        const auto& a = r1.flows[i].rtt_trace.samples;
        const auto& b = r2.flows[i].rtt_trace.samples;
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(a[k].t_ms == b[k].t_ms);      // bitwise equality expected
            CHECK(a[k].rtt_ms == b[k].rtt_ms);  // bitwise equality expected
            ++compared;
        }
    }
    CHECK(compared >= 10000);
}

TEST_CASE("trace round trip through csv") {
    FlowTrace tr;
    tr.flow_id = "rt";
    std::mt19937_64 rng(6);
    double t = 0.0;
    for (int i = 0; i < 500; ++i) {
        t += 0.25 + static_cast<double>(rng() % 100);
        tr.samples.push_back({t, 1.0 + static_cast<double>(rng() % 100000) / 100.0});
    }
    const std::string path = "/tmp/sbdkit_roundtrip.csv";
    write_trace_csv(path, tr);
    const FlowTrace back = read_trace_csv(path, "rt");
    REQUIRE(back.samples.size() == tr.samples.size());
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
        CHECK(back.samples[i].t_ms == doctest::Approx(tr.samples[i].t_ms).epsilon(1e-9));
        CHECK(back.samples[i].rtt_ms == doctest::Approx(tr.samples[i].rtt_ms).epsilon(1e-9));
    }
}
