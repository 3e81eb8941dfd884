#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace basisgen {

enum class ErrorKind {
    Format,      // malformed file contents
    Io,          // unreadable, unwritable or truncated file
    Domain,      // value outside the domain an operation accepts
    Dimension,   // shape mismatch
    Degenerate,  // zero variance / empty input where spread is required
    Rank,        // numerical rank below the requested dimension
    Config,      // invalid option combination
    Numerical,   // breakdown during an iterative fit
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) {
        fail(kind, what);
    }
}

}  // namespace basisgen
