#include "sbdkit/netsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <random>

#include "json.hpp"
#include "sbdkit/error.hpp"
#include "sbdkit/mp/coupling.hpp"
#include "sbdkit/mp/lia.hpp"
#include "sbdkit/netsim/congestion.hpp"

namespace sbd::net {

namespace {

constexpr int kAckBytes = 40;
constexpr double kRateBinMs = 100.0;
constexpr double kQueueSampleMs = 100.0;
constexpr int kDupAckThreshold = 3;
constexpr double kMinRtoMs = 1000.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Packet {
    int flow = -1;
    long long seq = 0;
    int size = 0;
    bool ack = false;
    bool retx = false;
    double sent_ms = 0.0;  // original data send time, echoed on the ack
    int hop = 0;           // index into the flow's forward/reverse link path
};

enum class Ev { tx_done, arrive, flow_start, rto_check, queue_sample, sbd_tick };

struct Event {
    double t = 0.0;
    std::uint64_t id = 0;  // insertion order, breaks time ties deterministically
    Ev kind = Ev::arrive;
    int target = -1;  // link, flow or session index depending on kind
    Packet pkt;
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t != b.t) return a.t > b.t;
        return a.id > b.id;
    }
};

struct DirLink {
    int src_node = -1;
    int dst_node = -1;
    double bytes_per_ms = 0.0;
    double prop_ms = 0.0;
    Aqm aqm = Aqm::droptail;
    RedParams red;
    QueueState q;
    std::deque<Packet> buf;
    bool busy = false;
    Packet in_tx;
    LinkAudit audit;
};

struct SentInfo {
    double sent_ms = 0.0;
    bool retx = false;
};

struct FlowRt {
    FlowSpec spec;
    int idx = -1;
    int src_node = -1;
    int dst_node = -1;
    std::vector<int> fwd;  // directed link ids src -> dst
    std::vector<int> rev;
    std::vector<std::string> path_nodes;
    int session = -1;

    CongestionState cc;
    double cubic_w_max = 0.0;
    double cubic_epoch_ms = -1.0;

    long long next_seq = 0;
    long long highest_acked = -1;
    long long recovery_until = -1;
    std::map<long long, SentInfo> outstanding;

    bool started = false;
    double start_ms = 0.0;
    double rto_deadline = kInf;
    bool timer_pending = false;

    FlowStats stats;
};

struct SessionRt {
    MultipathSpec spec;
    std::vector<int> subflows;  // flow indices
    mp::CouplingMode mode;
    std::vector<SessionVerdictRow> rows;
};

class Engine {
public:
    explicit Engine(const Scenario& sc) : sc_(sc), rng_(sc.seed) { build(); }

    RunResult run();

private:
    void build();
    std::vector<int> route(const FlowSpec& f, std::vector<std::string>& nodes_out);

    void push(double t, Ev kind, int target, const Packet& pkt = {}) {
        events_.push({t, next_event_id_++, kind, target, pkt});
    }

    void enqueue(int link_id, const Packet& pkt, double now);
    void start_tx(DirLink& l, const Packet& pkt, double now);
    void handle_tx_done(int link_id, double now);
    void handle_arrive(int link_id, Packet pkt, double now);

    void try_send(FlowRt& f, double now);
    void send_packet(FlowRt& f, long long seq, bool retx, double now);
    void on_ack(FlowRt& f, const Packet& pkt, double now);
    void cwnd_increase(FlowRt& f, double now);
    void cc_on_loss(FlowRt& f, double now);
    void detect_fast_loss(FlowRt& f, double now);
    void ensure_timer(FlowRt& f);
    void handle_rto_check(FlowRt& f, double now);
    double rto_ms(const FlowRt& f) const {
        return std::max(kMinRtoMs, 4.0 * std::max(f.cc.srtt_ms, 0.0));
    }

    void handle_sbd_tick(SessionRt& s, double now);
    void record_rate(FlowRt& f, double now, int bytes);

    const Scenario& sc_;
    std::mt19937_64 rng_;
    std::vector<std::string> node_names_;
    std::map<std::string, int> node_idx_;
    std::vector<DirLink> links_;
    std::map<std::pair<int, int>, int> link_by_nodes_;
    std::vector<FlowRt> flows_;
    std::vector<SessionRt> sessions_;

    std::priority_queue<Event, std::vector<Event>, EventLater> events_;
    std::uint64_t next_event_id_ = 0;
};

void Engine::build() {
    for (const std::string& n : sc_.nodes) {
        node_idx_[n] = static_cast<int>(node_names_.size());
        node_names_.push_back(n);
    }
    for (const LinkConfig& lc : sc_.links) {
        const int cap = queue_capacity_pkts(lc);
        for (int dir = 0; dir < 2; ++dir) {
            DirLink l;
            l.src_node = node_idx_[dir == 0 ? lc.a : lc.b];
            l.dst_node = node_idx_[dir == 0 ? lc.b : lc.a];
            l.bytes_per_ms = lc.bandwidth_mbps * 125.0;  // 1 Mbps = 125 bytes/ms
            l.prop_ms = lc.delay_ms;
            l.aqm = lc.aqm;
            l.red = lc.red;
            l.q.capacity = static_cast<std::size_t>(
                lc.aqm == Aqm::red ? static_cast<int>(lc.red.queue_limit) : cap);
            l.audit.capacity_pkts = static_cast<int>(l.q.capacity);
            l.audit.name = node_names_[l.src_node] + "->" + node_names_[l.dst_node];
            link_by_nodes_[{l.src_node, l.dst_node}] = static_cast<int>(links_.size());
            links_.push_back(std::move(l));
        }
    }
    for (const FlowSpec& fs : sc_.flows) {
        FlowRt f;
        f.spec = fs;
        f.idx = static_cast<int>(flows_.size());
        f.src_node = node_idx_[fs.src];
        f.dst_node = node_idx_[fs.dst];
        f.fwd = route(fs, f.path_nodes);
        f.rev.reserve(f.fwd.size());
        for (auto it = f.fwd.rbegin(); it != f.fwd.rend(); ++it) {
            const DirLink& l = links_[*it];
            f.rev.push_back(link_by_nodes_.at({l.dst_node, l.src_node}));
        }
        f.stats.flow_id = fs.id;
        f.stats.rtt_trace.flow_id = fs.id;
        f.start_ms = fs.start_ms >= 0.0
                         ? fs.start_ms
                         : std::uniform_real_distribution<double>(0.0, 1000.0)(rng_);
        flows_.push_back(std::move(f));
    }
    if (sc_.multipath) {
        SessionRt s;
        s.spec = *sc_.multipath;
        s.mode.fallback_after_ms = s.spec.coupling.fallback_ms;
        for (const std::string& sid : s.spec.subflows) {
            for (FlowRt& f : flows_) {
                if (f.spec.id == sid) {
                    f.session = static_cast<int>(sessions_.size());
                    s.subflows.push_back(f.idx);
                }
            }
        }
        sessions_.push_back(std::move(s));
    }
}

std::vector<int> Engine::route(const FlowSpec& fs, std::vector<std::string>& nodes_out) {
    std::vector<int> hops;
    if (!fs.path.empty()) {
        if (fs.path.front() != fs.src || fs.path.back() != fs.dst) {
            throw Error("topology", "flow '" + fs.id + "': path must run from src to dst");
        }
        for (std::size_t i = 0; i + 1 < fs.path.size(); ++i) {
            auto a = node_idx_.find(fs.path[i]);
            auto b = node_idx_.find(fs.path[i + 1]);
            if (a == node_idx_.end() || b == node_idx_.end()) {
                throw Error("topology", "flow '" + fs.id + "': unknown node in path");
            }
            auto it = link_by_nodes_.find({a->second, b->second});
            if (it == link_by_nodes_.end()) {
                throw Error("topology", "flow '" + fs.id + "': no link " + fs.path[i] + "-" +
                                            fs.path[i + 1]);
            }
            hops.push_back(it->second);
        }
        nodes_out = fs.path;
        return hops;
    }
    // BFS shortest path; neighbor order follows link declaration order.
    const int src = node_idx_[fs.src];
    const int dst = node_idx_[fs.dst];
    std::vector<int> parent_link(node_names_.size(), -1);
    std::vector<bool> seen(node_names_.size(), false);
    std::deque<int> frontier{src};
    seen[src] = true;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop_front();
        if (u == dst) break;
        for (std::size_t li = 0; li < links_.size(); ++li) {
            const DirLink& l = links_[li];
            if (l.src_node == u && !seen[l.dst_node]) {
                seen[l.dst_node] = true;
                parent_link[l.dst_node] = static_cast<int>(li);
                frontier.push_back(l.dst_node);
            }
        }
    }
    if (!seen[dst]) {
        throw Error("topology", "flow '" + fs.id + "': no route from " + fs.src + " to " + fs.dst);
    }
    for (int v = dst; v != src;) {
        const int li = parent_link[v];
        hops.push_back(li);
        v = links_[li].src_node;
    }
    std::reverse(hops.begin(), hops.end());
    nodes_out.push_back(fs.src);
    for (int li : hops) {
        nodes_out.push_back(node_names_[links_[li].dst_node]);
    }
    return hops;
}

void Engine::record_rate(FlowRt& f, double now, int bytes) {
    const std::size_t bin = static_cast<std::size_t>(now / kRateBinMs);
    if (f.stats.rate_bin_bytes.size() <= bin) {
        f.stats.rate_bin_bytes.resize(bin + 1, 0.0);
    }
    f.stats.rate_bin_bytes[bin] += bytes;
}

void Engine::enqueue(int link_id, const Packet& pkt, double now) {
    DirLink& l = links_[link_id];
    l.q.len = l.buf.size();
    l.audit.enqueued++;
    const bool accept =
        l.aqm == Aqm::droptail ? droptail_accept(l.q) : red_accept(l.q, l.red, rng_);
    if (!accept) {
        l.audit.dropped++;
        if (!pkt.ack) {
            flows_[pkt.flow].stats.data_pkts_dropped++;
        }
        return;
    }
    if (!l.busy) {
        start_tx(l, pkt, now);
    } else {
        l.buf.push_back(pkt);
        l.audit.max_queue_seen =
            std::max(l.audit.max_queue_seen, static_cast<int>(l.buf.size()));
    }
}

void Engine::start_tx(DirLink& l, const Packet& pkt, double now) {
    l.busy = true;
    l.in_tx = pkt;
    push(now + pkt.size / l.bytes_per_ms, Ev::tx_done,
         static_cast<int>(&l - links_.data()));
}

void Engine::handle_tx_done(int link_id, double now) {
    DirLink& l = links_[link_id];
    l.audit.dequeued++;
    push(now + l.prop_ms, Ev::arrive, link_id, l.in_tx);
    if (!l.buf.empty()) {
        const Packet next = l.buf.front();
        l.buf.pop_front();
        l.q.len = l.buf.size();
        start_tx(l, next, now);
    } else {
        l.busy = false;
    }
}

void Engine::handle_arrive(int link_id, Packet pkt, double now) {
    const DirLink& l = links_[link_id];
    FlowRt& f = flows_[pkt.flow];
    if (!pkt.ack) {
        if (l.dst_node == f.dst_node) {
            // Receiver: immediate per-packet ack echoing the data send time.
            Packet ack;
            ack.flow = f.idx;
            ack.seq = pkt.seq;
            ack.size = kAckBytes;
            ack.ack = true;
            ack.retx = pkt.retx;
            ack.sent_ms = pkt.sent_ms;
            enqueue(f.rev[0], ack, now);
        } else {
            pkt.hop++;
            enqueue(f.fwd[pkt.hop], pkt, now);
        }
    } else {
        if (l.dst_node == f.src_node) {
            on_ack(f, pkt, now);
        } else {
            pkt.hop++;
            enqueue(f.rev[pkt.hop], pkt, now);
        }
    }
}

void Engine::send_packet(FlowRt& f, long long seq, bool retx, double now) {
    Packet p;
    p.flow = f.idx;
    p.seq = seq;
    p.size = f.spec.mss;
    p.retx = retx;
    p.sent_ms = now;
    f.outstanding[seq] = {now, retx};
    f.stats.data_pkts_sent++;
    enqueue(f.fwd[0], p, now);
}

void Engine::try_send(FlowRt& f, double now) {
    if (!f.started) return;
    if (f.outstanding.empty()) {
        f.rto_deadline = now + rto_ms(f);
    }
    // Limited transmit: while a hole is outstanding, two extra segments may
    // fly so that small windows can still raise three duplicate acks.
    double limit = std::floor(f.cc.cwnd);
    if (!f.outstanding.empty() && f.highest_acked > f.outstanding.begin()->first) {
        limit += 2.0;
    }
    while (static_cast<double>(f.outstanding.size()) < limit) {
        send_packet(f, f.next_seq++, false, now);
    }
    if (!f.outstanding.empty()) {
        ensure_timer(f);
    }
}

void Engine::cwnd_increase(FlowRt& f, double now) {
    CongestionState& cc = f.cc;
    if (cc.phase == Phase::slow_start) {
        cc.cwnd += 1.0;
        if (cc.cwnd >= cc.ssthresh) {
            cc.phase = Phase::congestion_avoidance;
        }
        return;
    }
    switch (f.spec.cc) {
        case CcAlgo::reno:
            cc.cwnd += 1.0 / cc.cwnd;
            break;
        case CcAlgo::cubic: {
            if (f.cubic_epoch_ms < 0.0) {
                f.cubic_w_max = cc.cwnd;
                f.cubic_epoch_ms = now;
            }
            const double t = (now - f.cubic_epoch_ms) / 1000.0;
            const double target = cubic_window(t, f.cubic_w_max);
            cc.cwnd += target > cc.cwnd ? (target - cc.cwnd) / cc.cwnd : 0.01 / cc.cwnd;
            break;
        }
        case CcAlgo::mp_subflow: {
            const SessionRt& s = sessions_[f.session];
            bool measured = s.mode.mode == mp::Mode::coupled;
            std::vector<mp::SubflowView> views;
            std::size_t my_pos = 0;
            if (measured) {
                for (std::size_t i = 0; i < s.subflows.size(); ++i) {
                    const FlowRt& sf = flows_[s.subflows[i]];
                    if (sf.cc.srtt_ms <= 0.0) {
                        measured = false;
                        break;
                    }
                    if (sf.idx == f.idx) my_pos = i;
                    views.push_back({sf.cc.cwnd, sf.cc.srtt_ms});
                }
            }
            cc.cwnd += measured ? mp::lia_increase(views, my_pos) : 1.0 / cc.cwnd;
            break;
        }
    }
}

void Engine::cc_on_loss(FlowRt& f, double now) {
    if (f.spec.cc == CcAlgo::cubic) {
        f.cubic_w_max = f.cc.cwnd;
        f.cubic_epoch_ms = now;
        f.cc.cwnd = std::max(1.0, 0.7 * f.cc.cwnd);
        f.cc.ssthresh = f.cc.cwnd;
        f.cc.phase = Phase::congestion_avoidance;
    } else {
        // Reno and multipath subflows share the halving rule.
        reno_on_loss(f.cc);
    }
}

void Engine::detect_fast_loss(FlowRt& f, double now) {
    // At most one retransmission per incoming ack, keeping recovery
    // ack-clocked instead of bursting every hole into the queue at once.
    if (f.outstanding.empty()) return;
    auto front = f.outstanding.begin();
    if (front->second.retx) return;  // awaiting its retransmission, RTO covers repeat loss
    if (f.highest_acked - front->first < kDupAckThreshold) return;
    const long long missing = front->first;
    f.outstanding.erase(front);
    if (missing > f.recovery_until) {
        cc_on_loss(f, now);
        f.recovery_until = f.next_seq - 1;
    }
    send_packet(f, missing, true, now);
}

void Engine::on_ack(FlowRt& f, const Packet& pkt, double now) {
    auto it = f.outstanding.find(pkt.seq);
    if (it != f.outstanding.end()) {
        const bool front_advanced = it == f.outstanding.begin();
        f.outstanding.erase(it);
        f.stats.delivered_bytes += static_cast<std::uint64_t>(f.spec.mss);
        record_rate(f, now, f.spec.mss);
        f.highest_acked = std::max(f.highest_acked, pkt.seq);
        if (!pkt.retx) {
            const double rtt = now - pkt.sent_ms;
            f.stats.rtt_trace.samples.push_back({now, rtt});
            f.cc.srtt_ms = f.cc.srtt_ms <= 0.0 ? rtt : 0.875 * f.cc.srtt_ms + 0.125 * rtt;
            f.cc.min_rtt_ms = std::min(f.cc.min_rtt_ms, rtt);
        }
        cwnd_increase(f, now);
        detect_fast_loss(f, now);
        // Restart the retransmission timer only on forward progress; acks for
        // newer packets must not keep deferring recovery of a lost front.
        if (front_advanced || f.outstanding.empty()) {
            f.rto_deadline = now + rto_ms(f);
        }
    }
    try_send(f, now);
}

void Engine::ensure_timer(FlowRt& f) {
    if (!f.timer_pending && f.rto_deadline < kInf) {
        f.timer_pending = true;
        push(f.rto_deadline, Ev::rto_check, f.idx);
    }
}

void Engine::handle_rto_check(FlowRt& f, double now) {
    f.timer_pending = false;
    if (f.outstanding.empty()) {
        return;  // re-armed on the next send
    }
    if (now + 1e-9 < f.rto_deadline) {
        ensure_timer(f);  // deadline was pushed out by acks
        return;
    }
    f.cc.ssthresh = std::max(2.0, f.cc.cwnd / 2.0);
    f.cc.cwnd = 1.0;
    f.cc.phase = Phase::slow_start;
    f.recovery_until = f.next_seq - 1;
    const long long lowest = f.outstanding.begin()->first;
    f.outstanding.erase(f.outstanding.begin());
    send_packet(f, lowest, true, now);
    f.rto_deadline = now + rto_ms(f);
    ensure_timer(f);
}

void Engine::handle_sbd_tick(SessionRt& s, double now) {
    if (const char* dbg = std::getenv("SBD_LOG"); dbg && std::string(dbg) == "debug") {
        std::fprintf(stderr, "tick t=%.0f", now);
        for (std::size_t i : s.subflows) {
            std::fprintf(stderr, " [%s w=%.2f ssthresh=%.1f srtt=%.1f phase=%d out=%zu]",
                         flows_[i].spec.id.c_str(), flows_[i].cc.cwnd, flows_[i].cc.ssthresh,
                         flows_[i].cc.srtt_ms, static_cast<int>(flows_[i].cc.phase),
                         flows_[i].outstanding.size());
        }
        std::fprintf(stderr, "\n");
    }
    const detect::DetectorConfig& cfg = s.spec.coupling.detector;
    const FlowRt& fa = flows_[s.subflows[0]];
    const FlowRt& fb = flows_[s.subflows[1]];
    const double w0 = now - cfg.window_ms;
    std::optional<detect::SlopeEstimate> da =
        detect::pick_dominant_slope(detect::trace_slopes(fa.stats.rtt_trace.samples, cfg), w0, now);
    std::optional<detect::SlopeEstimate> db =
        detect::pick_dominant_slope(detect::trace_slopes(fb.stats.rtt_trace.samples, cfg), w0, now);
    if (da && db) {
        const detect::Verdict v = detect::decide(*da, *db, cfg.epsilon, cfg.tau_ms);
        mp::on_sbd_signal(s.mode, v.shared, now);
        mp::on_tick(s.mode, now);
        s.rows.push_back({w0, now, v.shared, v.error, da->slope, db->slope,
                          s.mode.mode == mp::Mode::coupled});
    } else {
        mp::on_tick(s.mode, now);
    }
}

RunResult Engine::run() {
    for (FlowRt& f : flows_) {
        push(f.start_ms, Ev::flow_start, f.idx);
    }
    if (sc_.record_queues) {
        push(kQueueSampleMs, Ev::queue_sample, 0);
    }
    for (std::size_t si = 0; si < sessions_.size(); ++si) {
        push(sessions_[si].spec.coupling.detector.window_ms, Ev::sbd_tick, static_cast<int>(si));
    }

    while (!events_.empty()) {
        const Event ev = events_.top();
        if (ev.t > sc_.duration_ms) break;
        events_.pop();
        switch (ev.kind) {
            case Ev::tx_done:
                handle_tx_done(ev.target, ev.t);
                break;
            case Ev::arrive:
                handle_arrive(ev.target, ev.pkt, ev.t);
                break;
            case Ev::flow_start:
                flows_[ev.target].started = true;
                try_send(flows_[ev.target], ev.t);
                break;
            case Ev::rto_check:
                handle_rto_check(flows_[ev.target], ev.t);
                break;
            case Ev::queue_sample:
                for (DirLink& l : links_) {
                    l.audit.samples.push_back(
                        {ev.t, static_cast<int>(l.buf.size()) + (l.busy ? 1 : 0)});
                }
                push(ev.t + kQueueSampleMs, Ev::queue_sample, 0);
                break;
            case Ev::sbd_tick:
                handle_sbd_tick(sessions_[ev.target], ev.t);
                push(ev.t + sessions_[ev.target].spec.coupling.detector.window_ms, Ev::sbd_tick,
                     ev.target);
                break;
        }
    }

    RunResult res;
    res.duration_ms = sc_.duration_ms;
    res.seed = sc_.seed;
    for (FlowRt& f : flows_) {
        f.stats.mean_rate_mbps =
            static_cast<double>(f.stats.delivered_bytes) * 8.0 / (sc_.duration_ms * 1000.0);
        f.stats.loss_rate =
            f.stats.data_pkts_sent == 0
                ? 0.0
                : static_cast<double>(f.stats.data_pkts_dropped) /
                      static_cast<double>(f.stats.data_pkts_sent);
        f.stats.rate_bin_bytes.resize(
            static_cast<std::size_t>(std::ceil(sc_.duration_ms / kRateBinMs)), 0.0);
        res.flows.push_back(std::move(f.stats));
        res.flow_paths.push_back(f.path_nodes);
    }
    for (DirLink& l : links_) {
        l.audit.in_queue = l.buf.size() + (l.busy ? 1 : 0);
        res.links.push_back(std::move(l.audit));
    }
    for (SessionRt& s : sessions_) {
        res.verdicts = std::move(s.rows);
    }
    return res;
}

}  // namespace

RunResult simulate(const Scenario& sc) {
    Engine engine(sc);
    return engine.run();
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_run_outputs(const Scenario& sc, const RunResult& res, const std::string& out_dir,
                       const std::string& scenario_hash) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw Error("io", "cannot create output directory " + out_dir);
    }
    std::vector<std::string> outputs;

    for (const FlowStats& f : res.flows) {
        const std::string name = "trace_" + f.flow_id + ".csv";
        write_trace_csv(out_dir + "/" + name, f.rtt_trace);
        outputs.push_back(name);
    }

    {
        std::FILE* fp = std::fopen((out_dir + "/summary.csv").c_str(), "w");
        if (!fp) throw Error("io", "cannot write summary.csv");
        std::fputs("flow_id,delivered_bytes,mean_rate_mbps,loss_rate\n", fp);
        for (const FlowStats& f : res.flows) {
            std::fprintf(fp, "%s,%llu,%.6f,%.6f\n", f.flow_id.c_str(),
                         static_cast<unsigned long long>(f.delivered_bytes), f.mean_rate_mbps,
                         f.loss_rate);
        }
        std::fclose(fp);
        outputs.push_back("summary.csv");
    }

    {
        std::FILE* fp = std::fopen((out_dir + "/rates.csv").c_str(), "w");
        if (!fp) throw Error("io", "cannot write rates.csv");
        std::fputs("t_ms,flow_id,rate_mbps\n", fp);
        for (const FlowStats& f : res.flows) {
            for (std::size_t i = 0; i < f.rate_bin_bytes.size(); ++i) {
                std::fprintf(fp, "%.1f,%s,%.6f\n", static_cast<double>(i) * kRateBinMs,
                             f.flow_id.c_str(), f.rate_bin_bytes[i] * 8.0 / (kRateBinMs * 1000.0));
            }
        }
        std::fclose(fp);
        outputs.push_back("rates.csv");
    }

    if (sc.record_queues) {
        std::FILE* fp = std::fopen((out_dir + "/qtrace.csv").c_str(), "w");
        if (!fp) throw Error("io", "cannot write qtrace.csv");
        std::fputs("t_ms,link,q_pkts\n", fp);
        for (const LinkAudit& l : res.links) {
            for (const QueueSample& s : l.samples) {
                std::fprintf(fp, "%.1f,%s,%d\n", s.t_ms, l.name.c_str(), s.q_pkts);
            }
        }
        std::fclose(fp);
        outputs.push_back("qtrace.csv");
    }

    if (!res.verdicts.empty() || sc.multipath) {
        std::FILE* fp = std::fopen((out_dir + "/verdicts.csv").c_str(), "w");
        if (!fp) throw Error("io", "cannot write verdicts.csv");
        std::fputs("window_start_ms,window_end_ms,shared,error,slope_a,slope_b,coupled_after\n",
                   fp);
        for (const SessionVerdictRow& r : res.verdicts) {
            std::fprintf(fp, "%.1f,%.1f,%d,%.6f,%.6f,%.6f,%d\n", r.window_start_ms,
                         r.window_end_ms, r.shared ? 1 : 0, r.error, r.slope_a, r.slope_b,
                         r.coupled_after ? 1 : 0);
        }
        std::fclose(fp);
        outputs.push_back("verdicts.csv");
    }

    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["scenario"] = sc.name;
    manifest["scenario_hash"] = scenario_hash;
    manifest["seed"] = sc.seed;
    manifest["tool_version"] = "0.1.0";
    manifest["duration_ms"] = sc.duration_ms;
    manifest["outputs"] = outputs;
    nlohmann::json jflows = nlohmann::json::array();
    for (std::size_t i = 0; i < res.flows.size(); ++i) {
        nlohmann::json jf;
        jf["id"] = res.flows[i].flow_id;
        const FlowSpec& spec = sc.flows[i];
        jf["cc"] = spec.cc == CcAlgo::reno    ? "reno"
                   : spec.cc == CcAlgo::cubic ? "cubic"
                                              : "multipath-subflow";
        jf["path"] = res.flow_paths[i];
        if (sc.multipath && std::find(sc.multipath->subflows.begin(),
                                      sc.multipath->subflows.end(),
                                      res.flows[i].flow_id) != sc.multipath->subflows.end()) {
            jf["session"] = sc.multipath->session;
        }
        jflows.push_back(std::move(jf));
    }
    manifest["flows"] = std::move(jflows);
    std::ofstream mf(out_dir + "/manifest.json");
    if (!mf) throw Error("io", "cannot write manifest.json");
    mf << manifest.dump(2) << "\n";
}

}  // namespace sbd::net
