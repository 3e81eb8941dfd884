#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "basisgen/dataset.hpp"
#include "basisgen/gmm.hpp"
#include "basisgen/kde.hpp"
#include "basisgen/linalg.hpp"

namespace basisgen {

struct FeatureSpec {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t dim = 0;
    std::string subband_order = "LL,LH,HL";
};

/// Held-out density over non-HH DWT features. It only scores samples; the
/// command line tool refuses to sample from it.
struct ReferenceModel {
    GmmModel gmm;
    FeatureSpec feature_spec;
    std::string dataset_id;
};

struct ReferenceOptions {
    std::size_t k = 10;
    CovarianceType covariance_type = CovarianceType::Diagonal;
    std::uint64_t seed = 0;
    std::size_t max_iter = 500;
    double tol = 1e-5;
    std::optional<double> reg;
};

ReferenceModel build_reference(const DatasetTensor& data, const ReferenceOptions& options,
                               std::string dataset_id = {});

struct NllSample {
    double mean = 0.0;
    Vector per_sample;
};

/// Negative log-likelihood of each image's DWT features under the reference.
NllSample dwt_entropy(const ReferenceModel& ref, const DatasetTensor& images);

struct IntervalRule {
    enum class Kind { Percentile, Fixed };
    Kind kind = Kind::Percentile;
    double lo = 1.0;
    double hi = 99.0;

    std::string to_string() const;
    static IntervalRule parse(const std::string& text);
};

struct NllCurveConfig {
    IntervalRule interval;
    std::size_t grid_points = 512;
    BandwidthRule curve_bandwidth = BandwidthRule::silverman();

    void validate() const;
};

struct DensityCurves {
    Vector grid;
    Vector f_real;
    Vector f_generated;
};

/// Linear-interpolated percentile (q in [0, 100]) of a sample.
double percentile(const Vector& values, double q);

/// One-dimensional KDE curves of both NLL samples on a uniform grid over the
/// interval rule applied to the real sample.
DensityCurves nll_density_curves(const Vector& nll_real, const Vector& nll_generated, const NllCurveConfig& cfg);

/// Trapezoidal integral of |f_real - f_generated| over the curve grid.
double l1_density_distance(const Vector& nll_real, const Vector& nll_generated, const NllCurveConfig& cfg);
double l1_of_curves(const DensityCurves& curves);

/// KDE reference, optionally on an orthonormal principal subspace of the real
/// images (raw pixel-space KDE is vacuous at d = 784).
struct KdeReference {
    std::size_t reduce_dim = 0;  // 0: no projection
    Matrix projection;           // reduce_dim x D orthonormal rows
    Vector mean;                 // D
    KdeModel kde;
};

struct KdeReferenceOptions {
    std::size_t reduce_dim = 50;
    BandwidthRule rule = BandwidthRule::silverman();
};

KdeReference build_kde_reference(const DatasetTensor& real, const KdeReferenceOptions& options);
RowMatrix kde_features(const KdeReference& ref, const DatasetTensor& images);
/// Mean NLL of `images` under the KDE reference.
double kde_entropy(const KdeReference& ref, const DatasetTensor& images);
/// Leave-one-out mean NLL of the reference's own support.
double kde_self_entropy(const KdeReference& ref);

struct BenchmarkConfig {
    NllCurveConfig curve;
    std::string model_id;
    std::string basis_id;
    std::string dataset_id;
    /// Extra key/values stamped into the report (provenance of the inputs).
    std::map<std::string, std::string> provenance;
};

struct BenchmarkReport {
    std::string model_id;
    std::string basis_id;
    std::string dataset_id;
    double dwt_entropy = 0.0;
    double dwt_entropy_real = 0.0;
    double kde_entropy = 0.0;
    double l1_distance_raw = 0.0;
    double l1_distance_scaled = 0.0;  // 100 * raw
    Vector nll_real;
    Vector nll_generated;
    std::map<std::string, std::string> config;
};

BenchmarkReport evaluate(const ReferenceModel& ref, const KdeReference& kde_ref, const DatasetTensor& real,
                         const DatasetTensor& generated, const BenchmarkConfig& cfg);

/// Flat key=value text, keys sorted.
std::string format_report(const BenchmarkReport& report);
/// CSV with header `set,index,nll`.
std::string format_nll_csv(const BenchmarkReport& report);
/// CSV with header `nll,f_real,f_generated`.
std::string format_curves_csv(const DensityCurves& curves);
/// Static SVG line plot of both density curves.
std::string render_curves_svg(const DensityCurves& curves, const std::string& title);

}  // namespace basisgen
