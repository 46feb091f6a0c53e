#include "sbdkit/netsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sbdkit/error.hpp"

namespace sbd::net {

namespace {

using nlohmann::json;

CcAlgo parse_cc(const std::string& tag) {
    if (tag == "reno") return CcAlgo::reno;
    if (tag == "cubic") return CcAlgo::cubic;
    if (tag == "multipath-subflow") return CcAlgo::mp_subflow;
    throw Error("parse", "unknown cc '" + tag + "' (expected reno|cubic|multipath-subflow)");
}

Aqm parse_aqm(const std::string& tag) {
    if (tag == "droptail") return Aqm::droptail;
    if (tag == "red") return Aqm::red;
    throw Error("parse", "unknown aqm '" + tag + "' (expected droptail|red)");
}

LinkConfig parse_link(const json& j) {
    LinkConfig l;
    l.a = j.at("a").get<std::string>();
    l.b = j.at("b").get<std::string>();
    l.bandwidth_mbps = j.at("bandwidth_mbps").get<double>();
    l.delay_ms = j.at("delay_ms").get<double>();
    if (l.bandwidth_mbps <= 0.0) {
        throw Error("parse", "link " + l.a + "-" + l.b + ": bandwidth_mbps must be positive");
    }
    if (l.delay_ms < 0.0) {
        throw Error("parse", "link " + l.a + "-" + l.b + ": delay_ms must be non-negative");
    }
    const json& q = j.at("queue");
    if (q.contains("pkts")) {
        l.queue_pkts = q.at("pkts").get<int>();
        if (l.queue_pkts < 1) {
            throw Error("parse", "link " + l.a + "-" + l.b + ": queue.pkts must be >= 1");
        }
    } else if (q.contains("delay_ms")) {
        l.queue_delay_ms = q.at("delay_ms").get<double>();
        if (l.queue_delay_ms <= 0.0) {
            throw Error("parse", "link " + l.a + "-" + l.b + ": queue.delay_ms must be positive");
        }
    } else {
        throw Error("parse", "link " + l.a + "-" + l.b + ": queue needs 'pkts' or 'delay_ms'");
    }
    l.aqm = parse_aqm(j.value("aqm", std::string("droptail")));
    if (l.aqm == Aqm::red) {
        const json& r = j.at("red");
        l.red.min_th = r.at("min_th").get<double>();
        l.red.max_th = r.at("max_th").get<double>();
        l.red.queue_limit = r.at("queue_limit").get<double>();
        l.red.max_p = r.value("max_p", l.red.max_p);
        l.red.weight = r.value("weight", l.red.weight);
        if (!(0.0 < l.red.min_th && l.red.min_th < l.red.max_th &&
              l.red.max_th <= l.red.queue_limit)) {
            throw Error("parse", "link " + l.a + "-" + l.b +
                                     ": red needs 0 < min_th < max_th <= queue_limit");
        }
        if (l.red.max_p <= 0.0 || l.red.max_p > 1.0) {
            throw Error("parse", "link " + l.a + "-" + l.b + ": red.max_p must be in (0,1]");
        }
    }
    return l;
}

}  // namespace

int queue_capacity_pkts(const LinkConfig& link, int mtu_bytes) {
    if (link.queue_pkts >= 1) {
        return link.queue_pkts;
    }
    // bandwidth * max queue delay, in packets: Mbps * ms = 125 bytes
    const double bytes = link.bandwidth_mbps * link.queue_delay_ms * 125.0;
    return std::max(1, static_cast<int>(std::floor(bytes / mtu_bytes)));
}

Scenario parse_scenario(const std::string& json_text, const std::string& name) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error("parse", name + ": " + e.what());
    }
    Scenario sc;
    sc.name = name;
    try {
        sc.schema_version = j.value("schema_version", 1);
        if (sc.schema_version != 1) {
            throw Error("parse", name + ": unsupported schema_version");
        }
        sc.duration_ms = j.at("duration_ms").get<double>();
        if (sc.duration_ms <= 0.0) {
            throw Error("parse", name + ": duration_ms must be positive");
        }
        sc.seed = j.value("seed", std::uint64_t{1});
        sc.record_queues = j.value("record_queues", true);
        sc.nodes = j.at("nodes").get<std::vector<std::string>>();
        std::set<std::string> node_set(sc.nodes.begin(), sc.nodes.end());
        if (node_set.size() != sc.nodes.size()) {
            throw Error("parse", name + ": duplicate node id");
        }
        for (const json& lj : j.at("links")) {
            LinkConfig l = parse_link(lj);
            if (!node_set.count(l.a) || !node_set.count(l.b)) {
                throw Error("parse", name + ": link references unknown node");
            }
            sc.links.push_back(std::move(l));
        }
        std::set<std::string> flow_ids;
        for (const json& fj : j.at("flows")) {
            FlowSpec f;
            f.id = fj.at("id").get<std::string>();
            f.src = fj.at("src").get<std::string>();
            f.dst = fj.at("dst").get<std::string>();
            f.cc = parse_cc(fj.value("cc", std::string("reno")));
            f.start_ms = fj.value("start_ms", -1.0);
            f.mss = fj.value("mss", 1500);
            if (fj.contains("path")) {
                f.path = fj.at("path").get<std::vector<std::string>>();
            }
            if (!flow_ids.insert(f.id).second) {
                throw Error("parse", name + ": duplicate flow id '" + f.id + "'");
            }
            if (!node_set.count(f.src) || !node_set.count(f.dst) || f.src == f.dst) {
                throw Error("parse", name + ": flow '" + f.id + "' has bad src/dst");
            }
            if (f.mss < 100 || f.mss > 9000) {
                throw Error("parse", name + ": flow '" + f.id + "' mss out of range");
            }
            sc.flows.push_back(std::move(f));
        }
        if (j.contains("multipath")) {
            const json& mj = j.at("multipath");
            MultipathSpec mp;
            mp.session = mj.at("session").get<std::string>();
            mp.subflows = mj.at("subflows").get<std::vector<std::string>>();
            if (mp.subflows.size() != 2) {
                throw Error("parse", name + ": multipath session needs exactly 2 subflows");
            }
            for (const std::string& sid : mp.subflows) {
                auto it = std::find_if(sc.flows.begin(), sc.flows.end(),
                                       [&](const FlowSpec& f) { return f.id == sid; });
                if (it == sc.flows.end() || it->cc != CcAlgo::mp_subflow) {
                    throw Error("parse", name + ": subflow '" + sid +
                                             "' must be a flow with cc=multipath-subflow");
                }
            }
            if (mj.contains("coupling")) {
                const json& cj = mj.at("coupling");
                mp.coupling.fallback_ms = cj.value("fallback_s", 100.0) * 1000.0;
                auto& d = mp.coupling.detector;
                d.alpha = cj.value("alpha", d.alpha);
                d.delta_ms = cj.value("delta_ms", d.delta_ms);
                d.epsilon = cj.value("epsilon", d.epsilon);
                d.tau_ms = cj.value("tau_ms", d.tau_ms);
                d.window_ms = cj.value("window_ms", d.window_ms);
                d.min_group_points = cj.value("min_group_points", d.min_group_points);
                detect::validate(d);
            }
            sc.multipath = std::move(mp);
        }
        // every subflow-tagged flow must belong to the session
        for (const FlowSpec& f : sc.flows) {
            if (f.cc == CcAlgo::mp_subflow &&
                (!sc.multipath ||
                 std::find(sc.multipath->subflows.begin(), sc.multipath->subflows.end(), f.id) ==
                     sc.multipath->subflows.end())) {
                throw Error("parse",
                            name + ": subflow '" + f.id + "' not listed in a multipath session");
            }
        }
    } catch (const json::exception& e) {
        throw Error("parse", name + ": " + e.what());
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("io", "cannot open scenario " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), std::filesystem::path(path).stem().string());
}

}  // namespace sbd::net
