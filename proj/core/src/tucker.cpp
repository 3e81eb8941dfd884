#include "basisgen/tucker.hpp"

#include <algorithm>

#include "basisgen/error.hpp"
#include "basisgen/linear_basis.hpp"

namespace basisgen {

namespace {

Matrix top_eigenvectors(const Matrix& gram, std::size_t rank) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    if (solver.info() != Eigen::Success) {
        fail(ErrorKind::Numerical, "Gram eigendecomposition failed");
    }
    Matrix vectors = solver.eigenvectors().rowwise().reverse().leftCols(static_cast<Eigen::Index>(rank));
    fix_column_signs(vectors);
    return vectors;
}

using ImageMap = Eigen::Map<const RowMatrix>;

ImageMap image_view(const double* data, std::size_t h, std::size_t w) {
    return {data, static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(w)};
}

}  // namespace

Matrix leading_left_singular_vectors(const Matrix& a, std::size_t rank) {
    require(rank >= 1 && rank <= static_cast<std::size_t>(a.rows()), ErrorKind::Dimension,
            "rank exceeds unfolding dimension");
    if (a.cols() >= a.rows()) {
        return top_eigenvectors(a * a.transpose(), rank);
    }
    const bool need_full = rank > static_cast<std::size_t>(a.cols());
    Eigen::BDCSVD<Matrix> svd(a, need_full ? Eigen::ComputeFullU : Eigen::ComputeThinU);
    Matrix vectors = svd.matrixU().leftCols(static_cast<Eigen::Index>(rank));
    fix_column_signs(vectors);
    return vectors;
}

HosvdResult hosvd(const DatasetTensor& tensor, const TuckerRanks& ranks, bool with_sample_mode) {
    const std::size_t n = tensor.size();
    const std::size_t h = tensor.height();
    const std::size_t w = tensor.width();
    const std::array<std::size_t, 3> dims{n, h, w};
    for (int k = 0; k < 3; ++k) {
        require(ranks[k] >= 1 && ranks[k] <= dims[k], ErrorKind::Dimension,
                "Tucker rank " + std::to_string(ranks[k]) + " for mode " + std::to_string(k + 1) +
                    " outside [1, " + std::to_string(dims[k]) + "]");
    }

    HosvdResult result;
    TuckerBasis& basis = result.basis;
    basis.dims = dims;
    basis.ranks = ranks;

    // Mode-2 and mode-3 unfoldings are H x (N W) and W x (N H); their Gram
    // matrices are sums of per-image outer products.
    if (h <= n * w) {
        Matrix gram_row = Matrix::Zero(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(h));
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = image_view(tensor.image(i).data(), h, w);
            gram_row.noalias() += x * x.transpose();
        }
        basis.factor_row = top_eigenvectors(gram_row, ranks[1]);
    } else {
        Matrix unfold(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(n * w));
        for (std::size_t i = 0; i < n; ++i) {
            unfold.middleCols(static_cast<Eigen::Index>(i * w), static_cast<Eigen::Index>(w)) =
                image_view(tensor.image(i).data(), h, w);
        }
        basis.factor_row = leading_left_singular_vectors(unfold, ranks[1]);
    }
    if (w <= n * h) {
        Matrix gram_col = Matrix::Zero(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(w));
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = image_view(tensor.image(i).data(), h, w);
            gram_col.noalias() += x.transpose() * x;
        }
        basis.factor_col = top_eigenvectors(gram_col, ranks[2]);
    } else {
        Matrix unfold(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(n * h));
        for (std::size_t i = 0; i < n; ++i) {
            unfold.middleCols(static_cast<Eigen::Index>(i * h), static_cast<Eigen::Index>(h)) =
                image_view(tensor.image(i).data(), h, w).transpose();
        }
        basis.factor_col = leading_left_singular_vectors(unfold, ranks[2]);
    }

    if (with_sample_mode) {
        // mode-1 unfolding is the N x (H W) sample matrix itself
        const Matrix unfold = tensor.rows();
        basis.factor_sample = leading_left_singular_vectors(unfold, ranks[0]);
        basis.mode1_used = true;

        const RowMatrix spatial = tucker_project_rows(basis, tensor.rows());
        const RowMatrix core = basis.factor_sample.transpose() * spatial;
        result.core.assign(core.data(), core.data() + core.size());
    }
    return result;
}

DatasetTensor tucker_full_reconstruct(const HosvdResult& decomposition, ValueDomain domain) {
    const TuckerBasis& basis = decomposition.basis;
    require(basis.mode1_used, ErrorKind::Config, "full reconstruction needs the sample-mode factor");
    const auto r1 = static_cast<Eigen::Index>(basis.ranks[0]);
    const auto r23 = static_cast<Eigen::Index>(basis.coefficient_count());
    const Eigen::Map<const RowMatrix> core(decomposition.core.data(), r1, r23);
    const RowMatrix spatial = basis.factor_sample * core;
    const RowMatrix images = tucker_reconstruct_rows(basis, spatial);
    return DatasetTensor::from_rows(images, basis.dims[1], basis.dims[2], domain);
}

Vector tucker_project(const TuckerBasis& basis, const Matrix& image) {
    require(static_cast<std::size_t>(image.rows()) == basis.dims[1] &&
                static_cast<std::size_t>(image.cols()) == basis.dims[2],
            ErrorKind::Dimension, "image shape does not match Tucker factors");
    const RowMatrix g = basis.factor_row.transpose() * image * basis.factor_col;
    return Eigen::Map<const Vector>(g.data(), g.size());
}

Matrix tucker_reconstruct(const TuckerBasis& basis, const Eigen::Ref<const Vector>& coeffs) {
    require(static_cast<std::size_t>(coeffs.size()) == basis.coefficient_count(), ErrorKind::Dimension,
            "expected " + std::to_string(basis.coefficient_count()) + " Tucker coefficients, got " +
                std::to_string(coeffs.size()));
    const Eigen::Map<const RowMatrix> g(coeffs.data(), static_cast<Eigen::Index>(basis.ranks[1]),
                                        static_cast<Eigen::Index>(basis.ranks[2]));
    return basis.factor_row * g * basis.factor_col.transpose();
}

RowMatrix tucker_project_rows(const TuckerBasis& basis, const Eigen::Ref<const RowMatrix>& images) {
    const std::size_t h = basis.dims[1];
    const std::size_t w = basis.dims[2];
    require(static_cast<std::size_t>(images.cols()) == h * w, ErrorKind::Dimension,
            "image rows do not match Tucker factor shapes");
    RowMatrix out(images.rows(), static_cast<Eigen::Index>(basis.coefficient_count()));
    RowMatrix g;
    for (Eigen::Index i = 0; i < images.rows(); ++i) {
        const auto x = image_view(images.row(i).data(), h, w);
        g.noalias() = basis.factor_row.transpose() * x * basis.factor_col;
        out.row(i) = Eigen::Map<const Eigen::RowVectorXd>(g.data(), g.size());
    }
    return out;
}

RowMatrix tucker_reconstruct_rows(const TuckerBasis& basis, const Eigen::Ref<const RowMatrix>& coeffs) {
    const std::size_t h = basis.dims[1];
    const std::size_t w = basis.dims[2];
    require(static_cast<std::size_t>(coeffs.cols()) == basis.coefficient_count(), ErrorKind::Dimension,
            "coefficient rows do not match Tucker ranks");
    RowMatrix out(coeffs.rows(), static_cast<Eigen::Index>(h * w));
    RowMatrix x;
    for (Eigen::Index i = 0; i < coeffs.rows(); ++i) {
        const Eigen::Map<const RowMatrix> g(coeffs.row(i).data(), static_cast<Eigen::Index>(basis.ranks[1]),
                                            static_cast<Eigen::Index>(basis.ranks[2]));
        x.noalias() = basis.factor_row * g * basis.factor_col.transpose();
        out.row(i) = Eigen::Map<const Eigen::RowVectorXd>(x.data(), x.size());
    }
    return out;
}

}  // namespace basisgen
