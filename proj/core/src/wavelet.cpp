#include "basisgen/wavelet.hpp"

#include "basisgen/error.hpp"

namespace basisgen {

namespace {

constexpr double kA = 0.08838834764831845;  // 1 / (8 sqrt 2)
constexpr double kB = 0.7071067811865476;   // 1 / sqrt 2

std::size_t reflect(std::ptrdiff_t idx, std::size_t n) {
    const auto len = static_cast<std::ptrdiff_t>(n);
    // half-point symmetric: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...
    while (idx < 0 || idx >= len) {
        idx = idx < 0 ? -idx - 1 : 2 * len - idx - 1;
    }
    return static_cast<std::size_t>(idx);
}

}  // namespace

const std::array<double, 6> Bior13::dec_lo{-kA, kA, kB, kB, kA, -kA};
const std::array<double, 6> Bior13::dec_hi{0.0, 0.0, -kB, kB, 0.0, 0.0};
const std::array<double, 6> Bior13::rec_lo{0.0, 0.0, kB, kB, 0.0, 0.0};
const std::array<double, 6> Bior13::rec_hi{-kA, -kA, kB, -kB, kA, kA};

std::size_t dwt_length(std::size_t n) { return (n + Bior13::length - 1) / 2; }

void dwt1(std::span<const double> signal, std::span<double> approx, std::span<double> detail) {
    const std::size_t n = signal.size();
    const std::size_t m = dwt_length(n);
    require(approx.size() == m && detail.size() == m, ErrorKind::Dimension, "dwt1 output size mismatch");
    for (std::size_t o = 0; o < m; ++o) {
        double lo = 0.0;
        double hi = 0.0;
        const auto centre = static_cast<std::ptrdiff_t>(2 * o + 1);
        for (std::size_t j = 0; j < Bior13::length; ++j) {
            const double x = signal[reflect(centre - static_cast<std::ptrdiff_t>(j), n)];
            lo += Bior13::dec_lo[j] * x;
            hi += Bior13::dec_hi[j] * x;
        }
        approx[o] = lo;
        detail[o] = hi;
    }
}

void idwt1(std::span<const double> approx, std::span<const double> detail, std::span<double> out) {
    const std::size_t m = approx.size();
    constexpr std::size_t half = Bior13::length / 2;
    require(detail.size() == m && m >= half, ErrorKind::Dimension, "idwt1 input size mismatch");
    const std::size_t full = 2 * m - Bior13::length + 2;
    require(out.size() <= full && out.size() + 1 >= full, ErrorKind::Dimension,
            "idwt1 output length inconsistent with coefficient length");
    for (std::size_t t = 0; t + half <= m; ++t) {
        double even = 0.0;
        double odd = 0.0;
        for (std::size_t j = 0; j < half; ++j) {
            const std::size_t k = t + half - 1 - j;
            even += Bior13::rec_lo[2 * j] * approx[k] + Bior13::rec_hi[2 * j] * detail[k];
            odd += Bior13::rec_lo[2 * j + 1] * approx[k] + Bior13::rec_hi[2 * j + 1] * detail[k];
        }
        if (2 * t < out.size()) out[2 * t] = even;
        if (2 * t + 1 < out.size()) out[2 * t + 1] = odd;
    }
}

DwtCoeffs dwt2(const Matrix& image) {
    const auto h = static_cast<std::size_t>(image.rows());
    const auto w = static_cast<std::size_t>(image.cols());
    require(h >= Bior13::length && w >= Bior13::length, ErrorKind::Dimension,
            "image " + std::to_string(h) + "x" + std::to_string(w) + " smaller than the 6-tap filter support");
    const std::size_t mh = dwt_length(h);
    const std::size_t mw = dwt_length(w);
    const auto eh = static_cast<Eigen::Index>(h);
    const auto emh = static_cast<Eigen::Index>(mh);
    const auto emw = static_cast<Eigen::Index>(mw);

    // along the width: each image row
    Matrix low_w(eh, emw), high_w(eh, emw);
    std::vector<double> row(w), a(mw), d(mw);
    for (Eigen::Index r = 0; r < eh; ++r) {
        for (std::size_t c = 0; c < w; ++c) row[c] = image(r, static_cast<Eigen::Index>(c));
        dwt1(row, a, d);
        for (std::size_t c = 0; c < mw; ++c) {
            low_w(r, static_cast<Eigen::Index>(c)) = a[c];
            high_w(r, static_cast<Eigen::Index>(c)) = d[c];
        }
    }

    // along the height: each column of the two half-transformed planes
    DwtCoeffs out;
    out.source_dims = {h, w};
    out.ll.resize(emh, emw);
    out.lh.resize(emh, emw);
    out.hl.resize(emh, emw);
    out.hh.resize(emh, emw);
    std::vector<double> col(h), ca(mh), cd(mh);
    for (Eigen::Index c = 0; c < emw; ++c) {
        for (std::size_t r = 0; r < h; ++r) col[r] = low_w(static_cast<Eigen::Index>(r), c);
        dwt1(col, ca, cd);
        for (std::size_t r = 0; r < mh; ++r) {
            out.ll(static_cast<Eigen::Index>(r), c) = ca[r];
            out.hl(static_cast<Eigen::Index>(r), c) = cd[r];
        }
        for (std::size_t r = 0; r < h; ++r) col[r] = high_w(static_cast<Eigen::Index>(r), c);
        dwt1(col, ca, cd);
        for (std::size_t r = 0; r < mh; ++r) {
            out.lh(static_cast<Eigen::Index>(r), c) = ca[r];
            out.hh(static_cast<Eigen::Index>(r), c) = cd[r];
        }
    }
    return out;
}

Matrix idwt2(const DwtCoeffs& coeffs) {
    const auto [h, w] = coeffs.source_dims;
    const std::size_t mh = dwt_length(h);
    const std::size_t mw = dwt_length(w);
    const auto emh = static_cast<Eigen::Index>(mh);
    const auto emw = static_cast<Eigen::Index>(mw);
    for (const Matrix* band : {&coeffs.ll, &coeffs.lh, &coeffs.hl, &coeffs.hh}) {
        require(band->rows() == emh && band->cols() == emw, ErrorKind::Dimension,
                "subband shape inconsistent with source dimensions " + std::to_string(h) + "x" +
                    std::to_string(w));
    }
    require(h >= Bior13::length && w >= Bior13::length, ErrorKind::Dimension, "source dimensions too small");
    const auto eh = static_cast<Eigen::Index>(h);
    const auto ew = static_cast<Eigen::Index>(w);

    Matrix low_w(eh, emw), high_w(eh, emw);
    std::vector<double> ca(mh), cd(mh), col(h);
    for (Eigen::Index c = 0; c < emw; ++c) {
        for (std::size_t r = 0; r < mh; ++r) {
            ca[r] = coeffs.ll(static_cast<Eigen::Index>(r), c);
            cd[r] = coeffs.hl(static_cast<Eigen::Index>(r), c);
        }
        idwt1(ca, cd, col);
        for (std::size_t r = 0; r < h; ++r) low_w(static_cast<Eigen::Index>(r), c) = col[r];
        for (std::size_t r = 0; r < mh; ++r) {
            ca[r] = coeffs.lh(static_cast<Eigen::Index>(r), c);
            cd[r] = coeffs.hh(static_cast<Eigen::Index>(r), c);
        }
        idwt1(ca, cd, col);
        for (std::size_t r = 0; r < h; ++r) high_w(static_cast<Eigen::Index>(r), c) = col[r];
    }

    Matrix image(eh, ew);
    std::vector<double> a(mw), d(mw), row(w);
    for (Eigen::Index r = 0; r < eh; ++r) {
        for (std::size_t c = 0; c < mw; ++c) {
            a[c] = low_w(r, static_cast<Eigen::Index>(c));
            d[c] = high_w(r, static_cast<Eigen::Index>(c));
        }
        idwt1(a, d, row);
        for (std::size_t c = 0; c < w; ++c) image(r, static_cast<Eigen::Index>(c)) = row[c];
    }
    return image;
}

std::size_t dwt_feature_dim(std::size_t height, std::size_t width) {
    return 3 * dwt_length(height) * dwt_length(width);
}

CoefficientMatrix dwt_features(const DatasetTensor& data) {
    const std::size_t band = dwt_length(data.height()) * dwt_length(data.width());
    CoefficientMatrix out;
    out.values.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(3 * band));
    out.basis_id = "dwt-bior1.3-ll-lh-hl";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const DwtCoeffs c = dwt2(data.image_matrix(i));
        const auto row = static_cast<Eigen::Index>(i);
        Eigen::Index offset = 0;
        for (const Matrix* sub : {&c.ll, &c.lh, &c.hl}) {
            const RowMatrix rm = *sub;
            out.values.row(row).segment(offset, rm.size()) = Eigen::Map<const Eigen::RowVectorXd>(rm.data(), rm.size());
            offset += rm.size();
        }
    }
    return out;
}

}  // namespace basisgen
