#include "basisgen/error.hpp"

namespace basisgen {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Format: return "format error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Degenerate: return "degenerate input";
    case ErrorKind::Rank: return "rank error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Numerical: return "numerical error";
    }
    return "error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace basisgen
