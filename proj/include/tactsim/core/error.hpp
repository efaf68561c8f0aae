#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tactsim {

// Carries a stable machine-readable code next to the human message so the
// CLI can emit structured errors without string-matching messages.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void raise(std::string code, const std::string& message) {
    throw Error(std::move(code), message);
}

inline void require(bool cond, const char* code, const std::string& message) {
    if (!cond) throw Error(code, message);
}

}  // namespace tactsim
