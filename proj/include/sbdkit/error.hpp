#pragma once

#include <stdexcept>
#include <string>

namespace sbd {

// Error with a machine-parseable class tag ("parse", "topology", "input",
// "io"). The CLI prints "error: <cls>: <msg>" and exits nonzero.
class Error : public std::runtime_error {
public:
    Error(std::string cls, const std::string& msg)
        : std::runtime_error(cls + ": " + msg), cls_(std::move(cls)) {}

    const std::string& cls() const { return cls_; }

private:
    std::string cls_;
};

}  // namespace sbd
