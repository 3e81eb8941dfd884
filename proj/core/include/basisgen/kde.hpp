#pragma once

#include <cstddef>
#include <string>

#include "basisgen/linalg.hpp"

namespace basisgen {

struct BandwidthRule {
    enum class Kind { Scott, Silverman, Fixed };
    Kind kind = Kind::Silverman;
    double value = 0.0;  // only for Fixed

    static BandwidthRule scott() { return {Kind::Scott, 0.0}; }
    static BandwidthRule silverman() { return {Kind::Silverman, 0.0}; }
    static BandwidthRule fixed(double h) { return {Kind::Fixed, h}; }

    /// "scott", "silverman" or "fixed:<h>".
    std::string to_string() const;
    static BandwidthRule parse(const std::string& text);
};

/// Isotropic Gaussian kernel density over retained reference samples.
struct KdeModel {
    RowMatrix support;  // N x d
    double bandwidth = 1.0;
    BandwidthRule rule;

    std::size_t n() const noexcept { return static_cast<std::size_t>(support.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(support.cols()); }
};

/// Mean of the per-dimension sample standard deviations.
double mean_sample_std(const Eigen::Ref<const RowMatrix>& x);

/// Scott: s N^(-1/(d+4)); Silverman: s (4 / ((d+2) N))^(1/(d+4)); s from mean_sample_std.
double bandwidth_for(const BandwidthRule& rule, std::size_t n, std::size_t d, double sigma);

KdeModel fit_kde(const Eigen::Ref<const RowMatrix>& x, const BandwidthRule& rule);

double kde_logpdf(const KdeModel& model, const Eigen::Ref<const Vector>& x);
/// log p(x_i) for each row of `x`.
Vector kde_logpdf_rows(const KdeModel& model, const Eigen::Ref<const RowMatrix>& x);
double kde_mean_nll(const KdeModel& model, const Eigen::Ref<const RowMatrix>& x);

/// Leave-one-out log density of each support point (its own kernel excluded,
/// normalised by N - 1).
Vector kde_loo_logpdf(const KdeModel& model);

}  // namespace basisgen
