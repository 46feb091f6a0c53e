#pragma once

namespace sbd::mp {

enum class Mode { uncoupled, coupled };

// Coupling state machine: a positive shared-bottleneck verdict switches (or
// keeps) the session coupled and refreshes last_positive; the only way back
// to uncoupled is the fallback timeout.
struct CouplingMode {
    Mode mode = Mode::uncoupled;
    double last_positive_ms = 0.0;  // meaningful only when coupled
    double fallback_after_ms = 100000.0;
};

void on_sbd_signal(CouplingMode& m, bool shared, double now_ms);
void on_tick(CouplingMode& m, double now_ms);

}  // namespace sbd::mp
