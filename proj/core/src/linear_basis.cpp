#include "basisgen/linear_basis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "basisgen/error.hpp"

namespace basisgen {

namespace {

void require_finite(const RowsRef& x, const char* what) {
    if (!x.allFinite()) {
        fail(ErrorKind::Domain, std::string(what) + " contains non-finite values");
    }
}

void require_cols(const RowsRef& x, std::size_t expected, const char* what) {
    require(static_cast<std::size_t>(x.cols()) == expected, ErrorKind::Dimension,
            std::string(what) + ": expected " + std::to_string(expected) + " columns, got " +
                std::to_string(x.cols()));
}

constexpr double kEigenClamp = 1e-12;

}  // namespace

void fix_column_signs(Matrix& columns) {
    for (Eigen::Index k = 0; k < columns.cols(); ++k) {
        Eigen::Index arg = 0;
        columns.col(k).cwiseAbs().maxCoeff(&arg);
        if (columns(arg, k) < 0.0) {
            columns.col(k) = -columns.col(k);
        }
    }
}

EigenAxes eigen_axes(const RowsRef& x, bool centered, bool normalize) {
    const Eigen::Index dim = x.cols();
    EigenAxes axes;
    axes.mean = Vector::Zero(dim);
    Matrix scatter = Matrix::Zero(dim, dim);
    if (centered) {
        axes.mean = x.colwise().mean().transpose();
        const RowMatrix xc = x.rowwise() - axes.mean.transpose();
        scatter.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose());
    } else {
        scatter.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    }
    if (normalize) {
        scatter /= static_cast<double>(x.rows());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(scatter.selfadjointView<Eigen::Lower>());
    if (solver.info() != Eigen::Success) {
        fail(ErrorKind::Numerical, "symmetric eigendecomposition failed");
    }
    axes.eigenvalues = solver.eigenvalues().reverse();
    axes.eigenvectors = solver.eigenvectors().rowwise().reverse();
    fix_column_signs(axes.eigenvectors);
    return axes;
}

PcaBasis fit_pca(const RowsRef& x, std::size_t d, bool centered) {
    const auto dim = static_cast<std::size_t>(x.cols());
    require(x.rows() >= 2, ErrorKind::Dimension, "PCA needs at least two samples");
    require(d >= 1 && d <= dim, ErrorKind::Dimension,
            "target dimension " + std::to_string(d) + " outside [1, " + std::to_string(dim) + "]");
    require_finite(x, "PCA input");

    EigenAxes axes = eigen_axes(x, centered, false);
    const double lambda_max = std::max(axes.eigenvalues(0), 0.0);
    for (Eigen::Index k = 0; k < axes.eigenvalues.size(); ++k) {
        if (axes.eigenvalues(k) < kEigenClamp * lambda_max) {
            axes.eigenvalues(k) = 0.0;
        }
    }

    PcaBasis basis;
    basis.dim_full = dim;
    basis.dim_reduced = d;
    basis.eigenvalues = axes.eigenvalues;
    basis.centered = centered;
    basis.mean = axes.mean;
    const auto dd = static_cast<Eigen::Index>(d);
    basis.forward.resize(dd, static_cast<Eigen::Index>(dim));
    basis.inverse.resize(static_cast<Eigen::Index>(dim), dd);
    for (Eigen::Index k = 0; k < dd; ++k) {
        const double lambda = axes.eigenvalues(k);
        const double s = lambda > 0.0 ? std::sqrt(lambda) : 1.0;
        basis.forward.row(k) = s * axes.eigenvectors.col(k).transpose();
        basis.inverse.col(k) = axes.eigenvectors.col(k) / s;
    }
    return basis;
}

RowMatrix pca_project(const PcaBasis& basis, const RowsRef& x) {
    require_cols(x, basis.dim_full, "PCA projection");
    if (basis.centered) {
        return (x.rowwise() - basis.mean.transpose()) * basis.forward.transpose();
    }
    return x * basis.forward.transpose();
}

PcaBasis pca_truncate(const PcaBasis& basis, std::size_t d) {
    require(d >= 1 && d <= basis.dim_reduced, ErrorKind::Dimension,
            "cannot truncate a " + std::to_string(basis.dim_reduced) + "-dimensional PCA basis to " + std::to_string(d));
    PcaBasis out = basis;
    out.dim_reduced = d;
    out.forward = basis.forward.topRows(static_cast<Eigen::Index>(d));
    out.inverse = basis.inverse.leftCols(static_cast<Eigen::Index>(d));
    return out;
}

std::vector<double> pca_error_curve(const RowsRef& x, const std::vector<std::size_t>& dims, bool centered) {
    const auto dim = static_cast<std::size_t>(x.cols());
    require(x.rows() >= 2, ErrorKind::Dimension, "PCA needs at least two samples");
    require_finite(x, "PCA input");
    const EigenAxes axes = eigen_axes(x, centered, false);
    const RowMatrix coords = centered ? RowMatrix((x.rowwise() - axes.mean.transpose()) * axes.eigenvectors)
                                      : RowMatrix(x * axes.eigenvectors);
    // tail(i, k) = energy of row i in directions k..D-1
    RowMatrix tail = RowMatrix::Zero(coords.rows(), static_cast<Eigen::Index>(dim) + 1);
    for (Eigen::Index k = static_cast<Eigen::Index>(dim) - 1; k >= 0; --k) {
        tail.col(k) = tail.col(k + 1) + coords.col(k).cwiseAbs2();
    }
    std::vector<double> errors;
    errors.reserve(dims.size());
    for (std::size_t d : dims) {
        require(d >= 1 && d <= dim, ErrorKind::Dimension, "sweep dimension " + std::to_string(d) + " out of range");
        errors.push_back(tail.col(static_cast<Eigen::Index>(d)).cwiseSqrt().mean());
    }
    return errors;
}

RowMatrix pca_reconstruct(const PcaBasis& basis, const RowsRef& y) {
    require_cols(y, basis.dim_reduced, "PCA reconstruction");
    RowMatrix out = y * basis.inverse.transpose();
    if (basis.centered) {
        out.rowwise() += basis.mean.transpose();
    }
    return out;
}

std::string_view to_string(IcaContrast contrast) {
    return contrast == IcaContrast::LogCosh ? "logcosh" : "cube";
}

IcaContrast parse_ica_contrast(std::string_view text) {
    if (text == "logcosh") return IcaContrast::LogCosh;
    if (text == "cube") return IcaContrast::Cube;
    fail(ErrorKind::Config, "unknown ICA contrast '" + std::string(text) + "'");
}

void IcaOptions::validate() const {
    require(tolerance > 0.0, ErrorKind::Config, "ICA tolerance must be positive");
    require(max_iterations >= 1, ErrorKind::Config, "ICA max_iterations must be at least 1");
}

namespace {

// (W W^T)^{-1/2} W
Matrix symmetric_decorrelation(const Matrix& w) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(w * w.transpose());
    const Vector inv_sqrt = solver.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    return solver.eigenvectors() * inv_sqrt.asDiagonal() * solver.eigenvectors().transpose() * w;
}

}  // namespace

IcaBasis fit_fastica(const RowsRef& x, std::size_t d, const IcaOptions& opts) {
    opts.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    const auto dim = static_cast<std::size_t>(x.cols());
    require(d >= 1 && d <= dim, ErrorKind::Dimension,
            "ICA dimension " + std::to_string(d) + " outside [1, " + std::to_string(dim) + "]");
    require(n > d, ErrorKind::Dimension, "FastICA needs more samples than components");
    require_finite(x, "ICA input");

    const auto dd = static_cast<Eigen::Index>(d);
    const EigenAxes axes = eigen_axes(x, true, true);
    const double lambda_max = axes.eigenvalues(0);
    if (!(lambda_max > 0.0) || axes.eigenvalues(dd - 1) <= kEigenClamp * lambda_max) {
        fail(ErrorKind::Rank, "centred data has rank below " + std::to_string(d));
    }
    const Vector lambda = axes.eigenvalues.head(dd);
    const Matrix e_d = axes.eigenvectors.leftCols(dd);

    IcaBasis basis;
    basis.dim_full = dim;
    basis.dim_reduced = d;
    basis.mean = axes.mean;
    basis.whitening = lambda.cwiseSqrt().cwiseInverse().asDiagonal() * e_d.transpose();

    // whitened samples, one per column
    const Matrix z = basis.whitening * (x.rowwise() - axes.mean.transpose()).transpose();
    const double inv_n = 1.0 / static_cast<double>(n);

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix w(dd, dd);
    for (Eigen::Index i = 0; i < dd; ++i) {
        for (Eigen::Index j = 0; j < dd; ++j) {
            w(i, j) = normal(rng);
        }
    }
    w = symmetric_decorrelation(w);

    Matrix g(dd, static_cast<Eigen::Index>(n));
    Vector g_prime_mean(dd);
    for (std::size_t iter = 1; iter <= opts.max_iterations; ++iter) {
        g.noalias() = w * z;
        if (opts.nonlinearity == IcaContrast::LogCosh) {
            g = g.array().tanh();
            g_prime_mean = (1.0 - g.array().square()).rowwise().mean();
        } else {
            g_prime_mean = 3.0 * g.array().square().rowwise().mean();
            g = g.array().cube();
        }
        Matrix w_next = g * z.transpose() * inv_n - g_prime_mean.asDiagonal() * w;
        w_next = symmetric_decorrelation(w_next);
        const double lim = ((w_next.cwiseProduct(w).rowwise().sum()).cwiseAbs().array() - 1.0).abs().maxCoeff();
        w = std::move(w_next);
        basis.iterations_used = iter;
        if (!std::isfinite(lim)) {
            fail(ErrorKind::Numerical, "FastICA iteration diverged");
        }
        if (lim < opts.tolerance) {
            basis.converged = true;
            break;
        }
    }

    basis.mixing = e_d * lambda.cwiseSqrt().asDiagonal() * w.transpose();
    for (Eigen::Index k = 0; k < dd; ++k) {
        Eigen::Index arg = 0;
        basis.mixing.col(k).cwiseAbs().maxCoeff(&arg);
        if (basis.mixing(arg, k) < 0.0) {
            basis.mixing.col(k) = -basis.mixing.col(k);
            w.row(k) = -w.row(k);
        }
    }
    basis.unmixing = std::move(w);
    return basis;
}

RowMatrix ica_transform(const IcaBasis& basis, const RowsRef& x) {
    require_cols(x, basis.dim_full, "ICA transform");
    const Matrix op = basis.unmixing * basis.whitening;
    return (x.rowwise() - basis.mean.transpose()) * op.transpose();
}

RowMatrix ica_inverse(const IcaBasis& basis, const RowsRef& y) {
    require_cols(y, basis.dim_reduced, "ICA inverse");
    RowMatrix out = y * basis.mixing.transpose();
    out.rowwise() += basis.mean.transpose();
    return out;
}

IdentityBasis fit_identity_basis(std::size_t dim) {
    require(dim >= 1, ErrorKind::Dimension, "identity basis dimension must be positive");
    return IdentityBasis{dim};
}

}  // namespace basisgen
