#include "sbdkit/mp/lia.hpp"

#include <algorithm>

#include "sbdkit/error.hpp"

namespace sbd::mp {

double lia_increase(const std::vector<SubflowView>& subflows, std::size_t acked_index) {
    if (subflows.empty() || acked_index >= subflows.size()) {
        throw Error("input", "lia_increase: bad subflow index");
    }
    double sum = 0.0;
    double best_ratio = -1.0;  // w_k / rtt_k of the argmax of w_k / rtt_k^2
    double best_w = 0.0;
    for (const SubflowView& sf : subflows) {
        if (sf.rtt_ms <= 0.0) {
            throw Error("input", "lia_increase: subflow rtt must be positive");
        }
        const double r = sf.cwnd / sf.rtt_ms;
        sum += r;
        if (r * r / sf.cwnd > (best_w > 0.0 ? best_ratio * best_ratio / best_w : -1.0)) {
            best_ratio = r;
            best_w = sf.cwnd;
        }
    }
    // (w_m/rtt_m^2) / sum^2 written as ((w_m/rtt_m)/sum)^2 / w_m so the
    // single-subflow case reduces to exactly 1/w.
    const double frac = best_ratio / sum;
    const double inc = frac * frac / best_w;
    return std::min(inc, 1.0 / subflows[acked_index].cwnd);
}

double lia_decrease(double cwnd) {
    return std::max(1.0, cwnd / 2.0);
}

}  // namespace sbd::mp
