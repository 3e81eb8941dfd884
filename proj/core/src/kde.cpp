#include "basisgen/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "basisgen/error.hpp"
#include "basisgen/text.hpp"

namespace basisgen {

std::string BandwidthRule::to_string() const {
    switch (kind) {
    case Kind::Scott: return "scott";
    case Kind::Silverman: return "silverman";
    case Kind::Fixed: return "fixed:" + format_double(value);
    }
    return "silverman";
}

BandwidthRule BandwidthRule::parse(const std::string& text) {
    if (text == "scott") return scott();
    if (text == "silverman") return silverman();
    if (text.rfind("fixed:", 0) == 0) {
        const double h = parse_double(std::string_view(text).substr(6));
        require(h > 0.0, ErrorKind::Config, "fixed bandwidth must be positive");
        return fixed(h);
    }
    fail(ErrorKind::Config, "unknown bandwidth rule '" + text + "'");
}

double mean_sample_std(const Eigen::Ref<const RowMatrix>& x) {
    require(x.rows() >= 2, ErrorKind::Degenerate, "need at least two samples for a spread estimate");
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::RowVectorXd var =
        (x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(x.rows() - 1);
    return var.array().sqrt().mean();
}

double bandwidth_for(const BandwidthRule& rule, std::size_t n, std::size_t d, double sigma) {
    const double nd = static_cast<double>(n);
    const double dd = static_cast<double>(d);
    switch (rule.kind) {
    case BandwidthRule::Kind::Scott: return sigma * std::pow(nd, -1.0 / (dd + 4.0));
    case BandwidthRule::Kind::Silverman: return sigma * std::pow(4.0 / ((dd + 2.0) * nd), 1.0 / (dd + 4.0));
    case BandwidthRule::Kind::Fixed: return rule.value;
    }
    return rule.value;
}

KdeModel fit_kde(const Eigen::Ref<const RowMatrix>& x, const BandwidthRule& rule) {
    require(x.rows() >= 2, ErrorKind::Dimension, "KDE needs at least two reference samples");
    require(x.cols() >= 1, ErrorKind::Dimension, "KDE input has zero dimensions");
    if (!x.allFinite()) {
        fail(ErrorKind::Domain, "KDE support contains non-finite values");
    }
    KdeModel model;
    model.support = x;
    model.rule = rule;
    if (rule.kind == BandwidthRule::Kind::Fixed) {
        require(rule.value > 0.0, ErrorKind::Config, "fixed bandwidth must be positive");
        model.bandwidth = rule.value;
        return model;
    }
    const double sigma = mean_sample_std(x);
    if (!(sigma > 0.0)) {
        fail(ErrorKind::Degenerate, "KDE reference samples have zero variance");
    }
    model.bandwidth = bandwidth_for(rule, model.n(), model.dim(), sigma);
    return model;
}

namespace {

// log sum_i exp(-|x - s_i|^2 / (2 h^2)), optionally skipping one support row.
double log_kernel_sum(const KdeModel& model, const double* x, Eigen::Index skip) {
    const Eigen::Index n = model.support.rows();
    const Eigen::Index d = model.support.cols();
    const double scale = -0.5 / (model.bandwidth * model.bandwidth);
    double best = -std::numeric_limits<double>::infinity();
    Vector expo(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i == skip) {
            expo(i) = -std::numeric_limits<double>::infinity();
            continue;
        }
        const double* s = model.support.row(i).data();
        double dist2 = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double diff = x[j] - s[j];
            dist2 += diff * diff;
        }
        expo(i) = scale * dist2;
        best = std::max(best, expo(i));
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sum += std::exp(expo(i) - best);
    }
    return best + std::log(sum);
}

double log_normaliser(const KdeModel& model, double count) {
    const double h2 = model.bandwidth * model.bandwidth;
    return -std::log(count) - 0.5 * static_cast<double>(model.dim()) * std::log(2.0 * std::numbers::pi * h2);
}

}  // namespace

Vector kde_logpdf_rows(const KdeModel& model, const Eigen::Ref<const RowMatrix>& x) {
    require(static_cast<std::size_t>(x.cols()) == model.dim(), ErrorKind::Dimension,
            "KDE dimension " + std::to_string(model.dim()) + " does not match input dimension " +
                std::to_string(x.cols()));
    const double norm = log_normaliser(model, static_cast<double>(model.n()));
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        out(i) = log_kernel_sum(model, x.row(i).data(), -1) + norm;
    }
    return out;
}

double kde_logpdf(const KdeModel& model, const Eigen::Ref<const Vector>& x) {
    const RowMatrix row = x.transpose();
    return kde_logpdf_rows(model, row)(0);
}

double kde_mean_nll(const KdeModel& model, const Eigen::Ref<const RowMatrix>& x) {
    require(x.rows() > 0, ErrorKind::Degenerate, "mean NLL of an empty sample set");
    return -kde_logpdf_rows(model, x).mean();
}

Vector kde_loo_logpdf(const KdeModel& model) {
    const double norm = log_normaliser(model, static_cast<double>(model.n() - 1));
    Vector out(model.support.rows());
    for (Eigen::Index i = 0; i < model.support.rows(); ++i) {
        out(i) = log_kernel_sum(model, model.support.row(i).data(), i) + norm;
    }
    return out;
}

}  // namespace basisgen
