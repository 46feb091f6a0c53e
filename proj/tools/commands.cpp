#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "sbdkit/detector.hpp"
#include "sbdkit/error.hpp"
#include "sbdkit/eval/metrics.hpp"
#include "sbdkit/flow_trace.hpp"
#include "sbdkit/netsim/simulation.hpp"

namespace sbd::cli {

namespace {

namespace fs = std::filesystem;

bool log_enabled() {
    const char* v = std::getenv("SBD_LOG");
    return v != nullptr && *v != '\0' && std::string(v) != "quiet";
}

void log_note(const std::string& msg) {
    if (log_enabled()) {
        std::fprintf(stderr, "[sbdkit] %s\n", msg.c_str());
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("io", "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ManifestFlow {
    std::string id;
    std::string cc;
    std::string session;  // empty when single-path
    std::vector<std::string> path;
};

struct Manifest {
    std::string scenario;
    double duration_ms = 0.0;
    std::vector<ManifestFlow> flows;
};

Manifest read_manifest(const std::string& run_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(slurp(run_dir + "/manifest.json"));
        Manifest m;
        m.scenario = j.at("scenario").get<std::string>();
        m.duration_ms = j.at("duration_ms").get<double>();
        for (const nlohmann::json& jf : j.at("flows")) {
            ManifestFlow f;
            f.id = jf.at("id").get<std::string>();
            f.cc = jf.at("cc").get<std::string>();
            f.session = jf.value("session", std::string());
            f.path = jf.at("path").get<std::vector<std::string>>();
            m.flows.push_back(std::move(f));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse", run_dir + "/manifest.json: " + e.what());
    }
}

// rates.csv -> per-flow 100 ms bin rates in Mbps
std::map<std::string, std::vector<double>> read_rates(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("io", "cannot open " + path);
    }
    std::map<std::string, std::vector<double>> out;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double t = 0.0;
        char flow[256];
        double rate = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%255[^,],%lf", &t, flow, &rate) != 3) {
            throw Error("parse", path + ": bad row '" + line + "'");
        }
        std::vector<double>& bins = out[flow];
        const std::size_t idx = static_cast<std::size_t>(t / 100.0);
        if (bins.size() <= idx) bins.resize(idx + 1, 0.0);
        bins[idx] = rate;
    }
    return out;
}

double mean_bin_rate(const std::vector<double>& bins, double t0_ms, double t1_ms) {
    const std::size_t b0 = static_cast<std::size_t>(std::max(0.0, t0_ms / 100.0));
    const std::size_t b1 =
        std::min(bins.size(), static_cast<std::size_t>(std::ceil(t1_ms / 100.0)));
    if (b1 <= b0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = b0; i < b1; ++i) sum += bins[i];
    return sum / static_cast<double>(b1 - b0);
}

struct VerdictRow {
    double w0 = 0.0, w1 = 0.0;
    bool shared = false;
};

std::vector<VerdictRow> read_verdicts(const std::string& path) {
    std::vector<VerdictRow> rows;
    std::ifstream in(path);
    if (!in) return rows;  // optional file
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        VerdictRow r;
        int shared = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%d", &r.w0, &r.w1, &shared) < 3) {
            throw Error("parse", path + ": bad row '" + line + "'");
        }
        r.shared = shared != 0;
        rows.push_back(r);
    }
    return rows;
}

struct QueuePoint {
    double t = 0.0;
    int q = 0;
};

std::map<std::string, std::vector<QueuePoint>> read_qtrace(const std::string& path) {
    std::map<std::string, std::vector<QueuePoint>> out;
    std::ifstream in(path);
    if (!in) return out;  // optional file
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double t = 0.0;
        char link[256];
        int q = 0;
        if (std::sscanf(line.c_str(), "%lf,%255[^,],%d", &t, link, &q) != 3) {
            throw Error("parse", path + ": bad row '" + line + "'");
        }
        out[link].push_back({t, q});
    }
    return out;
}

// Longest filling episode: maximal non-decreasing run with net growth,
// at least min_span_ms long.
std::pair<double, double> longest_filling_span(const std::vector<QueuePoint>& samples,
                                               double min_span_ms) {
    std::pair<double, double> best{0.0, -1.0};
    std::size_t run_start = 0;
    auto consider = [&](std::size_t lo, std::size_t hi) {  // inclusive run [lo, hi]
        if (hi <= lo) return;
        if (samples[hi].q <= samples[lo].q) return;
        const double span = samples[hi].t - samples[lo].t;
        if (span < min_span_ms) return;
        if (span > best.second - best.first) {
            best = {samples[lo].t, samples[hi].t};
        }
    };
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].q < samples[i - 1].q) {
            consider(run_start, i - 1);
            run_start = i;
        }
    }
    if (!samples.empty()) consider(run_start, samples.size() - 1);
    return best;
}

}  // namespace

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::optional<unsigned long long> seed_override) {
    const std::string bytes = slurp(scenario_path);
    net::Scenario sc =
        net::parse_scenario(bytes, fs::path(scenario_path).stem().string());
    if (seed_override) {
        sc.seed = *seed_override;
    }
    log_note("simulating '" + sc.name + "' for " + std::to_string(sc.duration_ms) + " ms");
    const net::RunResult res = net::simulate(sc);
    write_run_outputs(sc, res, out_dir, net::fnv1a_hex(bytes));
    log_note("wrote run outputs to " + out_dir);
    return 0;
}

int cmd_detect(const std::string& trace_a, const std::string& trace_b,
               const std::string& config_path, const std::string& out_path) {
    const FlowTrace a = read_trace_csv(trace_a);
    const FlowTrace b = read_trace_csv(trace_b);
    const detect::DetectorConfig cfg =
        config_path.empty() ? detect::DetectorConfig{} : detect::load_detector_config(config_path);
    if (a.samples.empty() || b.samples.empty() ||
        std::min(a.samples.back().t_ms, b.samples.back().t_ms) <
            std::max(a.samples.front().t_ms, b.samples.front().t_ms)) {
        throw Error("input", "traces have no temporal overlap");
    }
    const std::vector<detect::WindowVerdict> verdicts = detect::run_detector(a, b, cfg);

    std::FILE* fp = out_path.empty() ? stdout : std::fopen(out_path.c_str(), "w");
    if (!fp) {
        throw Error("io", "cannot write " + out_path);
    }
    std::fputs("window_start_ms,window_end_ms,shared,error,slope_a,slope_b\n", fp);
    for (const detect::WindowVerdict& wv : verdicts) {
        std::fprintf(fp, "%.1f,%.1f,%d,%.6f,%.6f,%.6f\n", wv.window_start_ms, wv.window_end_ms,
                     wv.verdict.shared ? 1 : 0, wv.verdict.error, wv.verdict.a.slope,
                     wv.verdict.b.slope);
    }
    if (!out_path.empty()) std::fclose(fp);
    return 0;
}

RunEvaluation evaluate_run(const std::string& run_dir) {
    if (!fs::exists(run_dir + "/manifest.json")) {
        throw Error("input", run_dir + ": not a run directory (missing manifest.json)");
    }
    const Manifest m = read_manifest(run_dir);
    RunEvaluation ev;
    ev.scenario = m.scenario;

    const auto rates = read_rates(run_dir + "/rates.csv");
    const double t1 = m.duration_ms;
    const double t0 = std::max(0.0, t1 - 100000.0);  // final 100 s

    std::vector<const ManifestFlow*> subflows;
    std::vector<const ManifestFlow*> singles;
    for (const ManifestFlow& f : m.flows) {
        (f.session.empty() ? singles : subflows).push_back(&f);
    }

    if (!subflows.empty() && !singles.empty()) {
        double x_mp = 0.0;
        for (const ManifestFlow* f : subflows) {
            x_mp += mean_bin_rate(rates.at(f->id), t0, t1);
        }
        double sp_sum = 0.0;
        std::size_t sp_n = 0;
        std::map<std::string, std::pair<double, std::size_t>> by_path;
        for (const ManifestFlow* f : singles) {
            if (sp_n >= 10) break;  // fairness uses up to 10 single connections
            const double r = mean_bin_rate(rates.at(f->id), t0, t1);
            sp_sum += r;
            ++sp_n;
            std::string key;
            for (const std::string& n : f->path) key += n + ">";
            by_path[key].first += r;
            by_path[key].second += 1;
        }
        const double x_sp = sp_sum / static_cast<double>(sp_n);
        ev.jain = eval::jain_index(x_sp, x_mp);
        double best_path_mean = 0.0;
        for (const auto& [key, agg] : by_path) {
            best_path_mean =
                std::max(best_path_mean, agg.first / static_cast<double>(agg.second));
        }
        if (best_path_mean > 0.0) {
            ev.ratio = eval::throughput_ratio(x_mp, best_path_mean);
        }
    }

    const std::vector<VerdictRow> verdicts = read_verdicts(run_dir + "/verdicts.csv");
    ev.evaluated_windows = verdicts.size();
    std::vector<eval::WindowFlag> flags;
    for (const VerdictRow& r : verdicts) {
        flags.push_back({r.w0, r.w1, r.shared});
        if (r.shared) ++ev.positive_windows;
    }
    const eval::PositiveIntervals pi = eval::positive_intervals(flags);
    if (pi.first_positive_ms) {
        ev.ttfp_s = *pi.first_positive_ms / 1000.0;
    }

    // sqrt-law fit on the busiest queue's longest filling episode
    const auto qtrace = read_qtrace(run_dir + "/qtrace.csv");
    std::string hot_link;
    int hot_q = 0;
    for (const auto& [link, samples] : qtrace) {
        for (const QueuePoint& p : samples) {
            if (p.q > hot_q) {
                hot_q = p.q;
                hot_link = link;
            }
        }
    }
    if (!hot_link.empty()) {
        const auto span = longest_filling_span(qtrace.at(hot_link), 2000.0);
        if (span.second > span.first) {
            // fit the trace of a flow crossing that link
            const std::string a = hot_link.substr(0, hot_link.find("->"));
            const std::string b = hot_link.substr(hot_link.find("->") + 2);
            for (const ManifestFlow& f : m.flows) {
                bool crosses = false;
                for (std::size_t i = 0; i + 1 < f.path.size(); ++i) {
                    if (f.path[i] == a && f.path[i + 1] == b) crosses = true;
                }
                if (!crosses) continue;
                const FlowTrace tr = read_trace_csv(run_dir + "/trace_" + f.id + ".csv", f.id);
                std::vector<RttSample> seg;
                for (const RttSample& s : tr.samples) {
                    if (s.t_ms >= span.first && s.t_ms <= span.second) seg.push_back(s);
                }
                if (seg.size() >= 5) {
                    const eval::FitReport rep = eval::fit_sqrt_law(seg);
                    ev.sqrt_fit_r2 = rep.r_squared;
                    ev.sqrt_fit_coeff = rep.coeff;
                    break;
                }
            }
        }
    }
    return ev;
}

int cmd_evaluate(const std::string& run_dir, const std::string& out_path) {
    const RunEvaluation ev = evaluate_run(run_dir);
    const std::string path = out_path.empty() ? run_dir + "/report.csv" : out_path;
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw Error("io", "cannot write " + path);
    std::fputs("metric,scenario,value\n", fp);
    auto row = [&](const char* metric, double v) {
        std::fprintf(fp, "%s,%s,%.6f\n", metric, ev.scenario.c_str(), v);
    };
    if (ev.jain) row("jain_index", *ev.jain);
    if (ev.ratio) row("throughput_ratio", *ev.ratio);
    if (ev.ttfp_s) row("time_to_first_positive_s", *ev.ttfp_s);
    row("positive_windows", static_cast<double>(ev.positive_windows));
    row("evaluated_windows", static_cast<double>(ev.evaluated_windows));
    if (ev.sqrt_fit_r2) row("sqrt_fit_r2", *ev.sqrt_fit_r2);
    if (ev.sqrt_fit_coeff) row("sqrt_fit_coeff", *ev.sqrt_fit_coeff);
    std::fclose(fp);

    std::printf("scenario %s\n", ev.scenario.c_str());
    if (ev.jain) std::printf("  jain index           %.4f\n", *ev.jain);
    if (ev.ratio) std::printf("  throughput ratio     %.4f\n", *ev.ratio);
    if (ev.ttfp_s) std::printf("  first positive       %.1f s\n", *ev.ttfp_s);
    std::printf("  positive windows     %zu / %zu\n", ev.positive_windows, ev.evaluated_windows);
    if (ev.sqrt_fit_r2) std::printf("  sqrt-law fit r^2     %.4f\n", *ev.sqrt_fit_r2);
    std::printf("  report               %s\n", path.c_str());
    return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_path) {
    if (run_dirs.empty()) {
        throw Error("input", "report: need at least one run directory");
    }
    std::FILE* fp = out_path.empty() ? stdout : std::fopen(out_path.c_str(), "w");
    if (!fp) throw Error("io", "cannot write " + out_path);
    std::fputs("scenario,jain,ratio,ttfp_s,positive_windows,evaluated_windows\n", fp);
    for (const std::string& dir : run_dirs) {
        const RunEvaluation ev = evaluate_run(dir);
        auto opt = [](const std::optional<double>& v) {
            return v ? std::to_string(*v) : std::string("");
        };
        std::fprintf(fp, "%s,%s,%s,%s,%zu,%zu\n", ev.scenario.c_str(), opt(ev.jain).c_str(),
                     opt(ev.ratio).c_str(), opt(ev.ttfp_s).c_str(), ev.positive_windows,
                     ev.evaluated_windows);
    }
    if (!out_path.empty()) std::fclose(fp);
    return 0;
}

}  // namespace sbd::cli
