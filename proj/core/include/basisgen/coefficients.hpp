#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "basisgen/linalg.hpp"

namespace basisgen {

/// N x d coefficient rows plus provenance tags. This is what flows between
/// the basis, generator and trainer stages.
struct CoefficientMatrix {
    RowMatrix values;
    std::string basis_id;
    std::string dataset_id;
    /// Additional provenance (preprocess, seed, stage.* entries, ...).
    std::map<std::string, std::string> metadata;

    std::size_t n() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t d() const noexcept { return static_cast<std::size_t>(values.cols()); }

    /// Throws a domain error naming the first (row, col) holding NaN/Inf.
    void validate() const;
};

}  // namespace basisgen
