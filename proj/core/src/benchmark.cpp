#include "basisgen/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "basisgen/error.hpp"
#include "basisgen/linear_basis.hpp"
#include "basisgen/text.hpp"
#include "basisgen/wavelet.hpp"

namespace basisgen {

ReferenceModel build_reference(const DatasetTensor& data, const ReferenceOptions& options,
                               std::string dataset_id) {
    const CoefficientMatrix features = dwt_features(data);
    EmOptions em;
    em.k = options.k;
    em.covariance_type = options.covariance_type;
    em.seed = options.seed;
    em.max_iter = options.max_iter;
    em.tol = options.tol;
    em.reg = options.reg;

    ReferenceModel ref;
    ref.gmm = fit_em(features, em);
    ref.feature_spec = {data.height(), data.width(), features.d(), "LL,LH,HL"};
    ref.dataset_id = std::move(dataset_id);
    return ref;
}

NllSample dwt_entropy(const ReferenceModel& ref, const DatasetTensor& images) {
    require(images.size() > 0, ErrorKind::Degenerate, "DWT entropy of an empty image set");
    require(images.height() == ref.feature_spec.height && images.width() == ref.feature_spec.width,
            ErrorKind::Dimension,
            "images are " + std::to_string(images.height()) + "x" + std::to_string(images.width()) +
                " but the reference was built on " + std::to_string(ref.feature_spec.height) + "x" +
                std::to_string(ref.feature_spec.width));
    const CoefficientMatrix features = dwt_features(images);
    NllSample out;
    out.per_sample = -GmmEvaluator(ref.gmm).logpdf_rows(features.values);
    out.mean = out.per_sample.mean();
    return out;
}

std::string IntervalRule::to_string() const {
    const char* name = kind == Kind::Percentile ? "percentile:" : "fixed:";
    return name + format_double(lo) + "," + format_double(hi);
}

IntervalRule IntervalRule::parse(const std::string& text) {
    const auto colon = text.find(':');
    require(colon != std::string::npos, ErrorKind::Config, "interval rule must be percentile:lo,hi or fixed:a,b");
    const auto bounds = split(std::string_view(text).substr(colon + 1), ',');
    require(bounds.size() == 2, ErrorKind::Config, "interval rule needs two bounds");
    IntervalRule rule;
    const std::string kind = text.substr(0, colon);
    if (kind == "percentile") {
        rule.kind = Kind::Percentile;
    } else if (kind == "fixed") {
        rule.kind = Kind::Fixed;
    } else {
        fail(ErrorKind::Config, "unknown interval rule '" + kind + "'");
    }
    rule.lo = parse_double(bounds[0]);
    rule.hi = parse_double(bounds[1]);
    return rule;
}

void NllCurveConfig::validate() const {
    require(interval.lo < interval.hi, ErrorKind::Config, "interval rule needs lo < hi");
    if (interval.kind == IntervalRule::Kind::Percentile) {
        require(interval.lo >= 0.0 && interval.hi <= 100.0, ErrorKind::Config, "percentiles must lie in [0, 100]");
    }
    require(grid_points >= 16, ErrorKind::Config, "density curves need at least 16 grid points");
}

double percentile(const Vector& values, double q) {
    require(values.size() > 0, ErrorKind::Degenerate, "percentile of an empty sample");
    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto below = static_cast<std::size_t>(std::floor(pos));
    const std::size_t above = std::min(below + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(below);
    return sorted[below] + frac * (sorted[above] - sorted[below]);
}

DensityCurves nll_density_curves(const Vector& nll_real, const Vector& nll_generated, const NllCurveConfig& cfg) {
    cfg.validate();
    require(nll_real.size() >= 10 && nll_generated.size() >= 10, ErrorKind::Degenerate,
            "density curves need at least 10 NLL values per set");
    require(nll_real.allFinite() && nll_generated.allFinite(), ErrorKind::Domain, "NLL values must be finite");

    double a = cfg.interval.lo;
    double b = cfg.interval.hi;
    if (cfg.interval.kind == IntervalRule::Kind::Percentile) {
        a = percentile(nll_real, cfg.interval.lo);
        b = percentile(nll_real, cfg.interval.hi);
    }
    if (!(b > a)) {
        fail(ErrorKind::Degenerate, "real NLL sample is constant over the curve interval");
    }
    const KdeModel real = fit_kde(nll_real, cfg.curve_bandwidth);
    const KdeModel generated = fit_kde(nll_generated, cfg.curve_bandwidth);

    DensityCurves curves;
    const auto points = static_cast<Eigen::Index>(cfg.grid_points);
    curves.grid = Vector::LinSpaced(points, a, b);
    curves.f_real = kde_logpdf_rows(real, curves.grid).array().exp();
    curves.f_generated = kde_logpdf_rows(generated, curves.grid).array().exp();
    return curves;
}

double l1_of_curves(const DensityCurves& curves) {
    const Vector diff = (curves.f_real - curves.f_generated).cwiseAbs();
    double total = 0.0;
    for (Eigen::Index i = 1; i < diff.size(); ++i) {
        total += 0.5 * (diff(i) + diff(i - 1)) * (curves.grid(i) - curves.grid(i - 1));
    }
    return total;
}

double l1_density_distance(const Vector& nll_real, const Vector& nll_generated, const NllCurveConfig& cfg) {
    return l1_of_curves(nll_density_curves(nll_real, nll_generated, cfg));
}

KdeReference build_kde_reference(const DatasetTensor& real, const KdeReferenceOptions& options) {
    KdeReference ref;
    const auto rows = real.rows();
    if (options.reduce_dim > 0 && options.reduce_dim < real.pixels()) {
        const EigenAxes axes = eigen_axes(rows, true, true);
        ref.reduce_dim = options.reduce_dim;
        ref.projection = axes.eigenvectors.leftCols(static_cast<Eigen::Index>(options.reduce_dim)).transpose();
        ref.mean = axes.mean;
    }
    ref.kde = fit_kde(kde_features(ref, real), options.rule);
    return ref;
}

RowMatrix kde_features(const KdeReference& ref, const DatasetTensor& images) {
    if (ref.reduce_dim == 0) {
        return images.rows();
    }
    require(static_cast<Eigen::Index>(images.pixels()) == ref.projection.cols(), ErrorKind::Dimension,
            "image size does not match the KDE reference projection");
    return (images.rows().rowwise() - ref.mean.transpose()) * ref.projection.transpose();
}

double kde_entropy(const KdeReference& ref, const DatasetTensor& images) {
    return kde_mean_nll(ref.kde, kde_features(ref, images));
}

double kde_self_entropy(const KdeReference& ref) { return -kde_loo_logpdf(ref.kde).mean(); }

BenchmarkReport evaluate(const ReferenceModel& ref, const KdeReference& kde_ref, const DatasetTensor& real,
                         const DatasetTensor& generated, const BenchmarkConfig& cfg) {
    require(real.height() == generated.height() && real.width() == generated.width(), ErrorKind::Dimension,
            "real and generated images differ in shape");
    const NllSample real_nll = dwt_entropy(ref, real);
    const NllSample gen_nll = dwt_entropy(ref, generated);

    BenchmarkReport report;
    report.model_id = cfg.model_id;
    report.basis_id = cfg.basis_id;
    report.dataset_id = cfg.dataset_id;
    report.dwt_entropy = gen_nll.mean;
    report.dwt_entropy_real = real_nll.mean;
    report.kde_entropy = kde_entropy(kde_ref, generated);
    report.l1_distance_raw = l1_density_distance(real_nll.per_sample, gen_nll.per_sample, cfg.curve);
    report.l1_distance_scaled = 100.0 * report.l1_distance_raw;
    report.nll_real = real_nll.per_sample;
    report.nll_generated = gen_nll.per_sample;

    auto& c = report.config;
    c["curve.interval"] = cfg.curve.interval.to_string();
    c["curve.grid_points"] = std::to_string(cfg.curve.grid_points);
    c["curve.bandwidth_rule"] = cfg.curve.curve_bandwidth.to_string();
    c["reference.k"] = std::to_string(ref.gmm.k());
    c["reference.covariance"] = std::string(to_string(ref.gmm.covariance_type));
    c["reference.feature_dim"] = std::to_string(ref.feature_spec.dim);
    c["reference.subbands"] = ref.feature_spec.subband_order;
    c["reference.dataset_id"] = ref.dataset_id;
    c["kde.reduce_dim"] = std::to_string(kde_ref.reduce_dim);
    c["kde.bandwidth"] = format_double(kde_ref.kde.bandwidth);
    c["kde.rule"] = kde_ref.kde.rule.to_string();
    c["n_real"] = std::to_string(real.size());
    c["n_generated"] = std::to_string(generated.size());
    for (const auto& [key, value] : cfg.provenance) {
        c["provenance." + key] = value;
    }
    return report;
}

std::string format_report(const BenchmarkReport& report) {
    std::map<std::string, std::string> entries;
    entries["model_id"] = report.model_id;
    entries["basis_id"] = report.basis_id;
    entries["dataset_id"] = report.dataset_id;
    entries["dwt_entropy"] = format_double(report.dwt_entropy);
    entries["dwt_entropy_real"] = format_double(report.dwt_entropy_real);
    entries["kde_entropy"] = format_double(report.kde_entropy);
    entries["l1_distance_raw"] = format_double(report.l1_distance_raw);
    entries["l1_distance_scaled"] = format_double(report.l1_distance_scaled);
    for (const auto& [key, value] : report.config) {
        entries["config." + key] = value;
    }
    return format_key_values(entries);
}

std::string format_nll_csv(const BenchmarkReport& report) {
    std::string out = "set,index,nll\n";
    auto emit = [&](const char* set, const Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            out += set;
            out += ',';
            out += std::to_string(i);
            out += ',';
            out += format_double(v(i));
            out += '\n';
        }
    };
    emit("real", report.nll_real);
    emit("generated", report.nll_generated);
    return out;
}

std::string format_curves_csv(const DensityCurves& curves) {
    std::string out = "nll,f_real,f_generated\n";
    for (Eigen::Index i = 0; i < curves.grid.size(); ++i) {
        out += format_double(curves.grid(i)) + ',' + format_double(curves.f_real(i)) + ',' +
               format_double(curves.f_generated(i)) + '\n';
    }
    return out;
}

namespace {

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace

std::string render_curves_svg(const DensityCurves& curves, const std::string& title) {
    constexpr double width = 640.0;
    constexpr double height = 400.0;
    constexpr double margin = 50.0;
    const double x0 = curves.grid.minCoeff();
    const double x1 = curves.grid.maxCoeff();
    const double ymax = std::max(curves.f_real.maxCoeff(), curves.f_generated.maxCoeff());
    const double ytop = ymax > 0.0 ? ymax * 1.05 : 1.0;
    auto px = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
    auto py = [&](double y) { return height - margin - y / ytop * (height - 2 * margin); };
    auto polyline = [&](const Vector& f, const char* colour) {
        std::ostringstream s;
        s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            s << px(curves.grid(i)) << ',' << py(f(i)) << ' ';
        }
        s << "\"/>\n";
        return s.str();
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">"
        << xml_escape(title) << "</text>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << margin << "\" y=\"" << height - margin + 18 << "\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << format_double(x0) << "</text>\n";
    svg << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 18
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << format_double(x1) << "</text>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">NLL under DWT-GMM</text>\n";
    svg << polyline(curves.f_real, "#1f77b4");
    svg << polyline(curves.f_generated, "#d62728");
    svg << "<text x=\"" << width - margin - 120 << "\" y=\"" << margin + 10
        << "\" fill=\"#1f77b4\" font-family=\"sans-serif\" font-size=\"12\">real</text>\n";
    svg << "<text x=\"" << width - margin - 120 << "\" y=\"" << margin + 28
        << "\" fill=\"#d62728\" font-family=\"sans-serif\" font-size=\"12\">generated</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace basisgen
