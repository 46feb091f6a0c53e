#include "sbdkit/mp/coupling.hpp"

namespace sbd::mp {

void on_sbd_signal(CouplingMode& m, bool shared, double now_ms) {
    if (shared) {
        m.mode = Mode::coupled;
        m.last_positive_ms = now_ms;
    }
}

void on_tick(CouplingMode& m, double now_ms) {
    if (m.mode == Mode::coupled && now_ms - m.last_positive_ms > m.fallback_after_ms) {
        m.mode = Mode::uncoupled;
    }
}

}  // namespace sbd::mp
