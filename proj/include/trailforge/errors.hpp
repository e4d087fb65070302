#pragma once

#include <stdexcept>
#include <string>

namespace trailforge {

enum class errc {
    config,            // bad configuration / invariant violation
    invalid_argument,  // precondition violated by caller
    io,                // filesystem / subprocess plumbing
    parse,             // malformed document
    media_engine,      // engine subprocess reported failure
    adapter,           // adapter transport or adapter-reported error
    schema,            // adapter payload failed schema validation
    phase,             // pipeline phase failed
    internal,
};

class Error : public std::runtime_error {
public:
    Error(errc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace trailforge
