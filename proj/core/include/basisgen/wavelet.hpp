#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "basisgen/coefficients.hpp"
#include "basisgen/dataset.hpp"
#include "basisgen/linalg.hpp"

namespace basisgen {

/// Biorthogonal 1.3 filter bank (length 6), analysis low/high and synthesis low/high.
struct Bior13 {
    static constexpr std::size_t length = 6;
    static const std::array<double, 6> dec_lo;
    static const std::array<double, 6> dec_hi;
    static const std::array<double, 6> rec_lo;
    static const std::array<double, 6> rec_hi;
};

/// Subband naming: first letter is the filter applied along the height (rows
/// axis), second along the width. HH is the diagonal detail block.
struct DwtCoeffs {
    Matrix ll;
    Matrix lh;
    Matrix hl;
    Matrix hh;
    std::pair<std::size_t, std::size_t> source_dims{0, 0};
};

/// Samples produced by one analysis step on a length-n signal: floor((n + 5) / 2).
std::size_t dwt_length(std::size_t n);

/// One-level 1-D analysis with half-point symmetric extension.
void dwt1(std::span<const double> signal, std::span<double> approx, std::span<double> detail);
/// Synthesis; writes exactly `out.size()` samples (the original length).
void idwt1(std::span<const double> approx, std::span<const double> detail, std::span<double> out);

DwtCoeffs dwt2(const Matrix& image);
Matrix idwt2(const DwtCoeffs& coeffs);

/// Per image: LL, LH, HL flattened row-major and concatenated; HH is dropped.
CoefficientMatrix dwt_features(const DatasetTensor& data);
std::size_t dwt_feature_dim(std::size_t height, std::size_t width);

}  // namespace basisgen
