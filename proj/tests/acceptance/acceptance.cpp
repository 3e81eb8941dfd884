// Acceptance checks for the primary pipeline. Prints one PASS/FAIL line per
// criterion and exits non-zero if any fails. Tolerances and time limits are
// fixed here and must not be loosened.
//
// Criteria 9-11 use Fashion-MNIST when BASISGEN_FASHION_IDX points at the
// training images IDX file, otherwise the built-in garment surrogate.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "basisgen/basis.hpp"
#include "basisgen/benchmark.hpp"
#include "basisgen/coeffio.hpp"
#include "basisgen/dataset.hpp"
#include "basisgen/error.hpp"
#include "basisgen/gmm.hpp"
#include "basisgen/kde.hpp"
#include "basisgen/linear_basis.hpp"
#include "basisgen/tucker.hpp"
#include "basisgen/wavelet.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace basisgen;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

RowMatrix normal_rows(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    RowMatrix x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = g(rng);
    }
    return x;
}

// ---- image source for the pipeline criteria ----------------------------

struct ImageSource {
    std::string name;
    DatasetTensor train;     // generator training images
    DatasetTensor held_out;  // reference training and "real" comparison set
};

DatasetTensor slice(const DatasetTensor& t, std::size_t begin, std::size_t count) {
    const std::size_t p = t.pixels();
    std::vector<double> v(t.values().begin() + static_cast<std::ptrdiff_t>(begin * p),
                          t.values().begin() + static_cast<std::ptrdiff_t>((begin + count) * p));
    return DatasetTensor(count, t.height(), t.width(), std::move(v), t.domain());
}

const ImageSource& images() {
    static const ImageSource src = [] {
        if (const char* path = std::getenv("BASISGEN_FASHION_IDX"); path != nullptr && *path != '\0') {
            const DatasetTensor all = load_idx(path);
            require(all.size() >= 2000 && all.height() == 28, ErrorKind::Config,
                    "BASISGEN_FASHION_IDX must hold at least 2000 28x28 images");
            return ImageSource{"fashion-mnist", slice(all, 0, 1000), slice(all, 1000, 1000)};
        }
        return ImageSource{"garment-surrogate", synth_garments({1000, 11}), synth_garments({1000, 12})};
    }();
    return src;
}

// ---- criteria -----------------------------------------------------------

Outcome c1_subband_counts() {
    const DwtCoeffs a = dwt2(Matrix::Random(28, 28));
    const DwtCoeffs b = dwt2(Matrix::Random(32, 32));
    const bool ok = a.ll.size() == 256 && a.lh.size() == 256 && a.hl.size() == 256 && a.hh.size() == 256 &&
                    b.ll.size() == 324 && b.lh.size() == 324 && b.hl.size() == 324 &&
                    dwt_feature_dim(28, 28) == 768 && dwt_feature_dim(32, 32) == 972;
    return {ok, "28x28 -> 3x" + std::to_string(a.ll.size()) + ", 32x32 -> 3x" + std::to_string(b.ll.size())};
}

Outcome c2_perfect_reconstruction() {
    double worst = 0.0;
    std::uint64_t seed = 1;
    for (auto [h, w] : {std::pair<int, int>{28, 28}, {32, 32}, {31, 29}}) {
        for (int i = 0; i < 100; ++i) {
            const Matrix x = normal_rows(h, w, seed++);
            worst = std::max(worst, (idwt2(dwt2(x)) - x).cwiseAbs().maxCoeff());
        }
    }
    return {worst < 1e-8, "max abs roundtrip error " + fmt(worst)};
}

Outcome c3_pca() {
    double worst_angle = 0.0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        RowMatrix x = normal_rows(100, 2, s);
        x.col(1) = 0.4 * x.col(0) + 0.8 * x.col(1);
        const Matrix c = x.transpose() * x;
        const auto ref = oracle::eigen_2x2(c(0, 0), c(0, 1), c(1, 1));
        const PcaBasis b = fit_pca(x, 2);
        for (int k = 0; k < 2; ++k) {
            const Eigen::VectorXd row = b.forward.row(k).transpose();
            worst_angle = std::max(worst_angle, oracle::line_angle(row, ref.vectors[static_cast<std::size_t>(k)]));
        }
    }
    const RowMatrix full = normal_rows(60, 40, 20);
    const PcaBasis fb = fit_pca(full, 40);
    const double rel = (pca_reconstruct(fb, pca_project(fb, full)) - full).norm() / full.norm();

    // Monotonicity over every d from the single-decomposition curve, with the
    // curve itself checked against explicit truncate/project/reconstruct.
    const DatasetTensor& imgs = images().train;
    const RowMatrix x = logit_map(imgs, {}).rows();
    std::vector<std::size_t> dims(static_cast<std::size_t>(x.cols()));
    std::iota(dims.begin(), dims.end(), std::size_t{1});
    const std::vector<double> curve = pca_error_curve(x, dims);
    int violations = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i] > curve[i - 1]) {
            ++violations;
        }
    }
    const PcaBasis big = fit_pca(x, x.cols());
    double curve_gap = 0.0;
    for (std::size_t d : {1u, 8u, 50u, 200u, 500u, 784u}) {
        const PcaBasis t = pca_truncate(big, d);
        const double err = (pca_reconstruct(t, pca_project(t, x)) - x).rowwise().norm().mean();
        curve_gap = std::max(curve_gap, std::abs(err - curve[d - 1]) / std::max(curve[0], 1e-300));
    }
    const bool ok = worst_angle < 1e-8 && rel < 1e-8 && violations == 0 && curve_gap < 1e-8;
    return {ok, "angle " + fmt(worst_angle) + ", full-rank rel error " + fmt(rel) + ", monotonicity violations " +
                    std::to_string(violations) + " over d=1.." + std::to_string(curve.size()) +
                    ", curve vs explicit " + fmt(curve_gap)};
}

Outcome c4_fastica() {
    int passed = 0;
    double worst = 1.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const RowMatrix src = oracle::four_sources(2000, s);
        const RowMatrix x = src * oracle::random_mixing(4, s + 100).transpose();
        IcaOptions opts;
        opts.seed = s;
        const IcaBasis b = fit_fastica(x, 4, opts);
        const double c = oracle::matched_min_abs_corr(src, ica_transform(b, x));
        worst = std::min(worst, c);
        passed += c > 0.95 ? 1 : 0;
    }
    return {passed == 5, std::to_string(passed) + "/5 seeds, min |corr| " + fmt(worst)};
}

double tensor_rel_error(const DatasetTensor& a, const DatasetTensor& b) {
    const Eigen::Map<const Vector> x(a.values().data(), static_cast<Eigen::Index>(a.values().size()));
    const Eigen::Map<const Vector> y(b.values().data(), static_cast<Eigen::Index>(b.values().size()));
    return (x - y).norm() / x.norm();
}

Outcome c5_tucker() {
    const DatasetTensor t = DatasetTensor::from_rows(normal_rows(20, 12 * 10, 1), 12, 10, ValueDomain::Raw);
    const double full = tensor_rel_error(t, tucker_full_reconstruct(hosvd(t, {20, 12, 10}), ValueDomain::Raw));

    std::vector<double> r1;
    const RowMatrix a = normal_rows(1, 8, 2);
    const RowMatrix b = normal_rows(1, 9, 3);
    const RowMatrix c = normal_rows(1, 7, 4);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 9; ++j) {
            for (int k = 0; k < 7; ++k) {
                r1.push_back(a(0, i) * b(0, j) * c(0, k));
            }
        }
    }
    const DatasetTensor rank1(8, 9, 7, r1, ValueDomain::Raw);
    const double rank1_err = tensor_rel_error(rank1, tucker_full_reconstruct(hosvd(rank1, {1, 1, 1}), ValueDomain::Raw));

    const DatasetTensor big = DatasetTensor::from_rows(normal_rows(50, 256, 5), 16, 16, ValueDomain::Raw);
    const double got = tensor_rel_error(big, tucker_full_reconstruct(hosvd(big, {50, 8, 8}), ValueDomain::Raw));
    const double want = oracle::truncated_hosvd_error(big.values(), 50, 16, 16, {50, 8, 8});
    const double gap = std::abs(got - want);
    return {full < 1e-8 && rank1_err < 1e-8 && gap < 1e-8,
            "full-rank " + fmt(full) + ", rank-1 " + fmt(rank1_err) + ", truncated vs oracle " + fmt(gap)};
}

Outcome c6_gmm() {
    int monotone_violations = 0;
    int fits = 0;
    auto track = [&](const GmmModel& m) {
        ++fits;
        for (std::size_t i = 1; i < m.fit_log.size(); ++i) {
            if (m.fit_log[i] - m.fit_log[i - 1] < -1e-9) {
                ++monotone_violations;
            }
        }
    };

    // (a) single component against the closed form
    RowMatrix x = normal_rows(1000, 4, 1);
    x.col(2) += 0.7 * x.col(0);
    EmOptions one;
    one.reg = 1e-4;
    const GmmModel m1 = fit_em(x, one);
    track(m1);
    const Vector mean = x.colwise().mean();
    const RowMatrix cx = x.rowwise() - mean.transpose();
    const Matrix cov = cx.transpose() * cx / 1000.0 + 1e-4 * Matrix::Identity(4, 4);
    const double mle_err = std::max((m1.means.row(0).transpose() - mean).cwiseAbs().maxCoeff(),
                                    (m1.covariances[0] - cov).cwiseAbs().maxCoeff());

    // (c) three-blob recovery
    int recovered = 0;
    double worst_w = 0.0;
    double worst_mu = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        EmOptions o;
        o.k = 3;
        o.seed = s;
        const GmmModel m = fit_em(oracle::ThreeBlobs::sample(10000, s), o);
        track(m);
        std::vector<Eigen::VectorXd> truth(oracle::ThreeBlobs::means.begin(), oracle::ThreeBlobs::means.end());
        const auto idx = oracle::nearest_rows(truth, m.means);
        bool ok = true;
        for (std::size_t k = 0; k < 3; ++k) {
            const double dw = std::abs(m.weights(idx[k]) - oracle::ThreeBlobs::weights[k]);
            const double dm = (m.means.row(idx[k]).transpose() - truth[k]).cwiseAbs().maxCoeff();
            worst_w = std::max(worst_w, dw);
            worst_mu = std::max(worst_mu, dm);
            ok = ok && dw <= 0.02 && dm <= 0.05;
        }
        recovered += ok ? 1 : 0;
    }

    // (b) extra fits across shapes for the monotonicity count
    for (auto type : {CovarianceType::Full, CovarianceType::Diagonal}) {
        for (std::size_t k : {2u, 4u, 8u}) {
            EmOptions o;
            o.k = k;
            o.covariance_type = type;
            o.seed = k;
            o.tol = std::numeric_limits<double>::min();
            o.max_iter = 100;
            track(fit_em(normal_rows(600, 5, 10 + k).array().cube().matrix(), o));
        }
    }

    const bool ok = mle_err < 1e-10 && monotone_violations == 0 && recovered == 5;
    return {ok, "(a) MLE error " + fmt(mle_err) + "; (b) " + std::to_string(monotone_violations) +
                    " decreases over " + std::to_string(fits) + " fits; (c) " + std::to_string(recovered) +
                    "/5 seeds, max weight error " + fmt(worst_w) + ", max mean error " + fmt(worst_mu)};
}

Outcome c7_kde() {
    const KdeModel m = fit_kde(normal_rows(10000, 1, 1), BandwidthRule::silverman());
    const double nll = kde_mean_nll(m, normal_rows(10000, 1, 2));
    const double target = 0.5 * std::log(2.0 * M_PI * M_E);
    return {std::abs(nll - target) <= 0.05, "mean NLL " + fmt(nll, 6) + " vs " + fmt(target, 6)};
}

Outcome c8_l1() {
    const RowMatrix all = normal_rows(10000, 1, 3);
    const Vector v = all.col(0);
    const double self = l1_density_distance(v, v, {});
    double total = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        std::vector<double> w(v.data(), v.data() + v.size());
        std::mt19937_64 rng(s);
        std::shuffle(w.begin(), w.end(), rng);
        total += l1_density_distance(Eigen::Map<const Vector>(w.data(), 5000),
                                     Eigen::Map<const Vector>(w.data() + 5000, 5000), {});
    }
    const double mean = total / 20.0;
    return {self < 1e-12 && mean < 0.15, "identical " + fmt(self) + ", split-half mean " + fmt(mean)};
}

// One generator run: preprocess, basis, GMM, sample, reconstruct.
DatasetTensor generate(const BasisModel& basis, const CoefficientMatrix& coeffs, std::uint64_t seed,
                       const PreprocessConfig& pre) {
    EmOptions em;
    em.k = 10;
    const std::size_t d = coeffs.d();
    em.covariance_type = coeffs.n() > 10 * d * em.k ? CovarianceType::Full : CovarianceType::Diagonal;
    em.seed = seed;
    const GmmModel gmm = fit_em(coeffs, em);
    const CoefficientMatrix samples = gmm_sample(gmm, 1000, seed + 1000);
    return postprocess(reconstruct(basis, samples, 28, 28, ValueDomain::LogitSpace), pre);
}

Outcome c9_ica_vs_pixel() {
    const ImageSource& src = images();
    const PreprocessConfig pre;
    const DatasetTensor train = logit_map(src.train, pre);
    const ReferenceModel ref = build_reference(src.held_out, {}, src.name);
    const KdeReference kref = build_kde_reference(src.held_out, {});

    const BasisModel pixel = fit_identity_basis(784);
    const CoefficientMatrix pixel_coeffs = project(pixel, train, "identity", src.name);

    double ica_dwt = 0.0, ica_l1 = 0.0, pix_dwt = 0.0, pix_l1 = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        IcaOptions io;
        io.seed = s;
        const BasisModel ica = fit_fastica(train.rows(), 400, io);
        const CoefficientMatrix ica_coeffs = project(ica, train, "ica-400", src.name);
        const BenchmarkReport a = evaluate(ref, kref, src.held_out, generate(ica, ica_coeffs, s, pre), {});
        const BenchmarkReport b = evaluate(ref, kref, src.held_out, generate(pixel, pixel_coeffs, s, pre), {});
        ica_dwt += a.dwt_entropy / 5.0;
        ica_l1 += a.l1_distance_raw / 5.0;
        pix_dwt += b.dwt_entropy / 5.0;
        pix_l1 += b.l1_distance_raw / 5.0;
    }
    const bool ok = ica_dwt <= pix_dwt && ica_l1 <= pix_l1;
    return {ok, src.name + ", 5 seeds: DWT-E ica " + fmt(ica_dwt, 6) + " vs pixel " + fmt(pix_dwt, 6) +
                    " (real " + fmt(dwt_entropy(ref, src.held_out).mean, 6) + "); l1 ica " + fmt(ica_l1) +
                    " vs pixel " + fmt(pix_l1)};
}

Outcome c10_corruption() {
    const ImageSource& src = images();
    const ReferenceModel ref = build_reference(src.train, {}, src.name);
    int passed = 0;
    std::string worst;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const DatasetTensor real = src.name == "fashion-mnist" ? fixture::shuffle_images(src.held_out, s)
                                                               : synth_garments({1000, 200 + s});
        const double e_real = dwt_entropy(ref, real).mean;
        const double e_noise = dwt_entropy(ref, fixture::add_noise(real, 0.1, s)).mean;
        const double e_perm = dwt_entropy(ref, fixture::permute_pixels(real, s)).mean;
        if (e_real < e_noise && e_noise < e_perm) {
            ++passed;
        }
        if (s == 1) {
            worst = "seed 1: " + fmt(e_real, 6) + " < " + fmt(e_noise, 6) + " < " + fmt(e_perm, 6);
        }
    }
    return {passed == 5, std::to_string(passed) + "/5 seeds strictly increasing; " + worst};
}

std::string pipeline_report(const std::string& scratch) {
    const ImageSource& src = images();
    const PreprocessConfig pre;
    const DatasetTensor train = logit_map(src.train, pre);
    IcaOptions io;
    io.seed = 7;
    const BasisModel ica = fit_fastica(train.rows(), 100, io);
    CoefficientMatrix coeffs = project(ica, train, "ica-100", src.name);
    // pass through the on-disk container like the CLI does
    write_coeffs(coeffs, scratch);
    coeffs = read_coeffs(scratch);
    const DatasetTensor gen = generate(ica, coeffs, 7, pre);
    const ReferenceModel ref = build_reference(src.held_out, {.seed = 3}, src.name);
    const KdeReference kref = build_kde_reference(src.held_out, {});
    BenchmarkConfig cfg;
    cfg.model_id = "gmm:ica-100";
    cfg.basis_id = "ica-100";
    cfg.dataset_id = src.name;
    return format_report(evaluate(ref, kref, src.held_out, gen, cfg));
}

Outcome c11_determinism() {
    const std::string tmp = (std::filesystem::temp_directory_path() / "basisgen_acceptance_c11.hgmc").string();
    const std::string a = pipeline_report(tmp);
    const std::string b = pipeline_report(tmp);
    std::filesystem::remove(tmp);
    return {a == b && !a.empty(), a == b ? std::to_string(a.size()) + "-byte reports identical" : "reports differ"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "DWT subband counts", 1, c1_subband_counts},
        {2, "DWT perfect reconstruction", 5, c2_perfect_reconstruction},
        {3, "PCA oracle equivalence", 10, c3_pca},
        {4, "FastICA source recovery", 30, c4_fastica},
        {5, "Tucker HOSVD", 30, c5_tucker},
        {6, "GMM EM", 60, c6_gmm},
        {7, "KDE entropy calibration", 10, c7_kde},
        {8, "l1 metric calibration", 30, c8_l1},
        {9, "ICA vs pixel ordering", 600, c9_ica_vs_pixel},
        {10, "corruption monotonicity", 120, c10_corruption},
        {11, "pipeline determinism", 600, c11_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_seconds;
        const bool pass = out.ok && in_time;
        failures += pass ? 0 : 1;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << out.detail
                  << "; " << fmt(secs, 3) << " s of " << c.limit_seconds << " s"
                  << (in_time ? "" : " [time limit exceeded]") << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
