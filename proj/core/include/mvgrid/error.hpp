#pragma once

#include <stdexcept>
#include <string>

namespace mvgrid {

enum class Errc {
    invalid_argument,
    behind_camera,
    ordering,
    missing_cell,
    shape_mismatch,
    degenerate_input,
    out_of_range,
    io,
};

const char* to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so tests
// and the CLI can tell them apart without parsing messages.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, Errc code, const std::string& what) {
    if (!condition) fail(code, what);
}

}  // namespace mvgrid
