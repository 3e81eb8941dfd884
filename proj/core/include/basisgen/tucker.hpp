#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "basisgen/dataset.hpp"
#include "basisgen/linalg.hpp"

namespace basisgen {

using TuckerRanks = std::array<std::size_t, 3>;

/// Spatial Tucker factors. Per-image coefficients are G_i = U2^T X_i U3, which
/// is well defined for images outside the fitted stack; the sample-mode
/// factor U1 is kept only when the decomposition was computed with it.
struct TuckerBasis {
    std::array<std::size_t, 3> dims{};  // N, H, W of the fitted tensor
    TuckerRanks ranks{};
    Matrix factor_row;     // H x r2
    Matrix factor_col;     // W x r3
    Matrix factor_sample;  // N x r1 (empty when !mode1_used)
    bool mode1_used = false;

    std::size_t coefficient_count() const noexcept { return ranks[1] * ranks[2]; }
};

struct HosvdResult {
    TuckerBasis basis;
    /// r1 x r2 x r3 core, index (a, b, c) at (a * r2 + b) * r3 + c.
    std::vector<double> core;

    double core_at(std::size_t a, std::size_t b, std::size_t c) const {
        return core[(a * basis.ranks[1] + b) * basis.ranks[2] + c];
    }
};

/// Leading left singular vectors of each mode unfolding, then the core
/// T x1 U1^T x2 U2^T x3 U3^T. `with_sample_mode = false` skips U1 and the core.
HosvdResult hosvd(const DatasetTensor& tensor, const TuckerRanks& ranks, bool with_sample_mode = true);

/// Full Tucker reconstruction T^ = core x1 U1 x2 U2 x3 U3 (requires U1).
DatasetTensor tucker_full_reconstruct(const HosvdResult& decomposition, ValueDomain domain);

/// Leading `rank` left singular vectors of `a`, via the Gram matrix when `a`
/// is wide and a thin SVD otherwise. Columns are sign-fixed.
Matrix leading_left_singular_vectors(const Matrix& a, std::size_t rank);

/// One image (H x W) to r2*r3 coefficients, row-major over (b, c).
Vector tucker_project(const TuckerBasis& basis, const Matrix& image);
Matrix tucker_reconstruct(const TuckerBasis& basis, const Eigen::Ref<const Vector>& coeffs);

RowMatrix tucker_project_rows(const TuckerBasis& basis, const Eigen::Ref<const RowMatrix>& images);
RowMatrix tucker_reconstruct_rows(const TuckerBasis& basis, const Eigen::Ref<const RowMatrix>& coeffs);

}  // namespace basisgen
