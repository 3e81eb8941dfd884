#include <gtest/gtest.h>

#include "basisgen/error.hpp"
#include "basisgen/tucker.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace basisgen;

namespace {

DatasetTensor random_tensor(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed) {
    const RowMatrix x = basisgen::testing::gaussian_rows(static_cast<Eigen::Index>(n),
                                                         static_cast<Eigen::Index>(h * w), seed);
    return DatasetTensor::from_rows(x, h, w, ValueDomain::Raw);
}

double rel_error(const DatasetTensor& a, const DatasetTensor& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        num += d * d;
        den += a.values()[i] * a.values()[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST(Hosvd, FullRankIsExact) {
    const DatasetTensor t = random_tensor(6, 5, 4, 1);
    const HosvdResult r = hosvd(t, {6, 5, 4});
    EXPECT_LT(rel_error(t, tucker_full_reconstruct(r, ValueDomain::Raw)), 1e-8);
}

TEST(Hosvd, FactorsOrthonormal) {
    const HosvdResult r = hosvd(random_tensor(20, 9, 7, 2), {5, 4, 3});
    const auto& b = r.basis;
    EXPECT_LT((b.factor_row.transpose() * b.factor_row - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((b.factor_col.transpose() * b.factor_col - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((b.factor_sample.transpose() * b.factor_sample - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Hosvd, CoreAllOrthogonalAtFullRank) {
    const HosvdResult r = hosvd(random_tensor(4, 5, 3, 3), {4, 5, 3});
    // slices along mode 2 (fixed b) are mutually orthogonal
    const auto& rk = r.basis.ranks;
    for (std::size_t b1 = 0; b1 < rk[1]; ++b1) {
        for (std::size_t b2 = b1 + 1; b2 < rk[1]; ++b2) {
            double dot = 0.0;
            for (std::size_t a = 0; a < rk[0]; ++a) {
                for (std::size_t c = 0; c < rk[2]; ++c) {
                    dot += r.core_at(a, b1, c) * r.core_at(a, b2, c);
                }
            }
            EXPECT_NEAR(dot, 0.0, 1e-6);
        }
    }
}

TEST(Hosvd, RankOneTensorExact) {
    const Vector a = basisgen::testing::gaussian_vector(7, 4);
    const Vector b = basisgen::testing::gaussian_vector(6, 5);
    const Vector c = basisgen::testing::gaussian_vector(5, 6);
    std::vector<double> v;
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 6; ++j) {
            for (int k = 0; k < 5; ++k) {
                v.push_back(a(i) * b(j) * c(k));
            }
        }
    }
    const DatasetTensor t(7, 6, 5, v, ValueDomain::Raw);
    EXPECT_LT(rel_error(t, tucker_full_reconstruct(hosvd(t, {1, 1, 1}), ValueDomain::Raw)), 1e-8);
}

TEST(Hosvd, TruncatedErrorMatchesUnfoldingOracle) {
    const DatasetTensor t = random_tensor(50, 16, 16, 7);
    const HosvdResult r = hosvd(t, {50, 8, 8});
    const double got = rel_error(t, tucker_full_reconstruct(r, ValueDomain::Raw));
    const double want = oracle::truncated_hosvd_error(t.values(), 50, 16, 16, {50, 8, 8});
    EXPECT_NEAR(got, want, 1e-8);
}

TEST(Hosvd, RankAboveDimensionRejected) {
    const DatasetTensor t = random_tensor(3, 4, 4, 8);
    try {
        hosvd(t, {3, 5, 2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Dimension);
    }
    EXPECT_THROW(hosvd(t, {0, 2, 2}), Error);
}

TEST(TuckerProject, InvertsKnownCore) {
    const HosvdResult r = hosvd(random_tensor(30, 10, 8, 9), {30, 4, 3}, false);
    EXPECT_FALSE(r.basis.mode1_used);
    const Matrix g0 = basisgen::testing::gaussian_rows(4, 3, 10);
    const Matrix x = r.basis.factor_row * g0 * r.basis.factor_col.transpose();
    const Vector g = tucker_project(r.basis, x);
    ASSERT_EQ(g.size(), 12);
    for (int b = 0; b < 4; ++b) {
        for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(g(b * 3 + c), g0(b, c), 1e-8);
        }
    }
    EXPECT_LT((tucker_project(r.basis, tucker_reconstruct(r.basis, g)) - g).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(tucker_project(r.basis, Matrix::Zero(10, 8)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(TuckerProject, SingleImageMatchesBestBilinearApproximation) {
    const DatasetTensor t = random_tensor(1, 9, 7, 11);
    const Matrix x = t.image_matrix(0);
    const HosvdResult r = hosvd(t, {1, 3, 3}, false);
    const double got = (tucker_reconstruct(r.basis, tucker_project(r.basis, x)) - x).norm();
    // for one image, the best rank-(3,3) bilinear fit is the rank-3 SVD truncation
    Eigen::JacobiSVD<Matrix> svd(x);
    const Vector sv = svd.singularValues();
    const double best = sv.tail(sv.size() - 3).norm();
    EXPECT_LE(got, best * (1.0 + 1e-8));
}

TEST(TuckerProject, ErrorNonIncreasingInRanks) {
    const DatasetTensor t = random_tensor(40, 12, 12, 12);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t r = 1; r <= 12; ++r) {
        const HosvdResult h = hosvd(t, {1, r, r}, false);
        const RowMatrix back = tucker_reconstruct_rows(h.basis, tucker_project_rows(h.basis, t.rows()));
        const double err = (back - t.rows()).norm();
        EXPECT_LE(err, prev + 1e-9);
        prev = err;
    }
    EXPECT_LT(prev, 1e-8 * t.rows().norm());
}

TEST(TuckerProject, XgcSizedRanksGive324Coefficients) {
    const HosvdResult h = hosvd(random_tensor(40, 32, 32, 13), {1, 18, 18}, false);
    EXPECT_EQ(h.basis.coefficient_count(), 324u);
}

TEST(TuckerProject, ShapeMismatch) {
    const HosvdResult h = hosvd(random_tensor(5, 6, 6, 14), {1, 2, 2}, false);
    EXPECT_THROW(tucker_project(h.basis, Matrix::Zero(5, 6)), Error);
    EXPECT_THROW(tucker_reconstruct(h.basis, Vector::Zero(3)), Error);
}

TEST(LeadingSingularVectors, WideAndTallAgree) {
    const Matrix a = basisgen::testing::gaussian_rows(6, 40, 15);
    const Matrix u_wide = leading_left_singular_vectors(a, 3);
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
    for (int k = 0; k < 3; ++k) {
        EXPECT_LT(oracle::line_angle(u_wide.col(k), svd.matrixU().col(k)), 1e-8);
    }
    const Matrix tall = a.transpose();
    const Matrix u_tall = leading_left_singular_vectors(tall, 3);
    Eigen::JacobiSVD<Matrix> svd2(tall, Eigen::ComputeThinU);
    for (int k = 0; k < 3; ++k) {
        EXPECT_LT(oracle::line_angle(u_tall.col(k), svd2.matrixU().col(k)), 1e-8);
    }
}
