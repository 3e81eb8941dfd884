#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "basisgen/linalg.hpp"

namespace basisgen {

using RowsRef = Eigen::Ref<const RowMatrix>;

/// Eigenpairs of X^T X (or of the covariance when centred), sorted descending.
/// Each eigenvector is sign-fixed so its largest-magnitude entry is positive.
struct EigenAxes {
    Vector eigenvalues;   // D, descending
    Matrix eigenvectors;  // D x D, column k pairs with eigenvalues(k)
    Vector mean;          // D, zero when not centred
};

/// `centered` subtracts the column mean first; `normalize` divides the scatter
/// matrix by N (covariance) instead of returning the raw sum.
EigenAxes eigen_axes(const RowsRef& x, bool centered, bool normalize);

/// Flips columns so the largest-magnitude entry of each is positive.
void fix_column_signs(Matrix& columns);

/// PCA with eigenvalue-scaled projection: y = F x where F holds the first d
/// rows of Lambda^{1/2} E^T. Reconstruction applies the pseudo-inverse of F.
struct PcaBasis {
    std::size_t dim_full = 0;
    std::size_t dim_reduced = 0;
    Vector eigenvalues;  // D, descending, tiny values clamped to zero
    Matrix forward;      // d x D
    Matrix inverse;      // D x d
    bool centered = false;
    Vector mean;         // D, zero when !centered
};

/// Fits on the raw scatter matrix C = sum_i x_i x_i^T (after mean removal if
/// `centered`). Eigenvalues below 1e-12 * lambda_max are set to zero and their
/// directions kept unscaled so F stays full row rank.
PcaBasis fit_pca(const RowsRef& x, std::size_t d, bool centered = false);

RowMatrix pca_project(const PcaBasis& basis, const RowsRef& x);
RowMatrix pca_reconstruct(const PcaBasis& basis, const RowsRef& y);

/// Keeps the leading d of the fitted directions.
PcaBasis pca_truncate(const PcaBasis& basis, std::size_t d);

/// Mean per-row l2 reconstruction error for each d in `dims`, from a single
/// eigendecomposition: the residual at d is the energy in directions d+1..D.
std::vector<double> pca_error_curve(const RowsRef& x, const std::vector<std::size_t>& dims, bool centered = false);

enum class IcaContrast { LogCosh, Cube };

std::string_view to_string(IcaContrast contrast);
IcaContrast parse_ica_contrast(std::string_view text);

struct IcaOptions {
    IcaContrast nonlinearity = IcaContrast::LogCosh;
    double tolerance = 1e-4;
    std::size_t max_iterations = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

struct IcaBasis {
    std::size_t dim_full = 0;
    std::size_t dim_reduced = 0;
    Matrix whitening;  // d x D
    Matrix unmixing;   // d x d, orthonormal rows
    Matrix mixing;     // D x d
    Vector mean;       // D
    std::size_t iterations_used = 0;
    bool converged = false;
};

/// Symmetric (parallel) FastICA on PCA-whitened data. Non-convergence is not an
/// error: the basis is returned with converged == false.
IcaBasis fit_fastica(const RowsRef& x, std::size_t d, const IcaOptions& opts = {});

RowMatrix ica_transform(const IcaBasis& basis, const RowsRef& x);
RowMatrix ica_inverse(const IcaBasis& basis, const RowsRef& y);

/// Pixel-space baseline: forward and inverse are the identity.
struct IdentityBasis {
    std::size_t dim = 0;
};

IdentityBasis fit_identity_basis(std::size_t dim);

}  // namespace basisgen
