#include "basisgen/artifacts.hpp"

#include "basisgen/coeffio.hpp"
#include "basisgen/error.hpp"
#include "basisgen/text.hpp"

namespace fs = std::filesystem;

namespace basisgen {

namespace {

constexpr const char* kMetaFile = "meta.hgmc";

void write_meta(const fs::path& dir, const std::string& kind, Metadata meta, const Metadata& provenance) {
    fs::create_directories(dir);
    for (const auto& [key, value] : provenance) {
        meta[key] = value;
    }
    meta["artifact"] = kind;
    write_vector(Vector(0), dir / kMetaFile, meta);
}

Metadata expect_meta(const fs::path& dir, std::initializer_list<const char*> kinds) {
    Metadata meta = read_meta(dir);
    const std::string kind = meta.count("artifact") ? meta.at("artifact") : "";
    for (const char* k : kinds) {
        if (kind == k) {
            return meta;
        }
    }
    fail(ErrorKind::Format, dir.string() + " holds a '" + kind + "' artifact, expected " + *kinds.begin());
}

const std::string& field(const Metadata& meta, const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) {
        fail(ErrorKind::Format, "artifact metadata lacks '" + key + "'");
    }
    return it->second;
}

std::size_t size_field(const Metadata& meta, const std::string& key) {
    return static_cast<std::size_t>(parse_u64(field(meta, key)));
}

std::string fmt(std::size_t v) { return std::to_string(v); }

RowMatrix read_rows(const fs::path& path) { return read_matrix(path); }

// Full covariances are stacked as (K d) x d; diagonal ones as K x d.
Matrix stack_covariances(const GmmModel& m) {
    const auto k = static_cast<Eigen::Index>(m.k());
    const auto d = static_cast<Eigen::Index>(m.dim());
    if (m.covariance_type == CovarianceType::Diagonal) {
        Matrix out(k, d);
        for (Eigen::Index c = 0; c < k; ++c) {
            out.row(c) = m.covariances[static_cast<std::size_t>(c)].col(0).transpose();
        }
        return out;
    }
    Matrix out(k * d, d);
    for (Eigen::Index c = 0; c < k; ++c) {
        out.middleRows(c * d, d) = m.covariances[static_cast<std::size_t>(c)];
    }
    return out;
}

void save_mixture(const GmmModel& m, const fs::path& dir, Metadata& meta) {
    m.validate();
    fs::create_directories(dir);
    meta["covariance_type"] = std::string(to_string(m.covariance_type));
    meta["k"] = fmt(m.k());
    meta["dim"] = fmt(m.dim());
    meta["reg"] = format_double(m.reg);
    meta["iterations"] = fmt(m.iterations);
    meta["converged"] = m.converged ? "true" : "false";
    write_vector(m.weights, dir / "weights.hgmc");
    write_matrix(m.means, dir / "means.hgmc");
    write_matrix(stack_covariances(m), dir / "covariances.hgmc");
    write_vector(Eigen::Map<const Vector>(m.fit_log.data(), static_cast<Eigen::Index>(m.fit_log.size())),
                 dir / "fit_log.hgmc");
}

GmmModel load_mixture(const fs::path& dir, const Metadata& meta) {
    GmmModel m;
    m.covariance_type = parse_covariance_type(field(meta, "covariance_type"));
    m.reg = parse_double(field(meta, "reg"));
    m.iterations = size_field(meta, "iterations");
    m.converged = field(meta, "converged") == "true";
    m.weights = read_vector(dir / "weights.hgmc");
    m.means = read_matrix(dir / "means.hgmc");
    const Matrix stacked = read_matrix(dir / "covariances.hgmc");
    const Vector log = read_vector(dir / "fit_log.hgmc");
    m.fit_log.assign(log.data(), log.data() + log.size());

    const Eigen::Index k = m.weights.size();
    const Eigen::Index d = m.means.cols();
    require(static_cast<std::size_t>(k) == size_field(meta, "k") && static_cast<std::size_t>(d) == size_field(meta, "dim"),
            ErrorKind::Format, dir.string() + ": mixture arrays disagree with metadata");
    m.covariances.resize(static_cast<std::size_t>(k));
    if (m.covariance_type == CovarianceType::Diagonal) {
        require(stacked.rows() == k && stacked.cols() == d, ErrorKind::Format, "diagonal covariance block shape");
        for (Eigen::Index c = 0; c < k; ++c) {
            m.covariances[static_cast<std::size_t>(c)] = stacked.row(c).transpose();
        }
    } else {
        require(stacked.rows() == k * d && stacked.cols() == d, ErrorKind::Format, "full covariance block shape");
        for (Eigen::Index c = 0; c < k; ++c) {
            m.covariances[static_cast<std::size_t>(c)] = stacked.middleRows(c * d, d);
        }
    }
    m.validate();
    return m;
}

}  // namespace

Metadata provenance_of(const Metadata& meta) {
    Metadata out;
    for (auto it = meta.lower_bound("stage."); it != meta.end() && it->first.rfind("stage.", 0) == 0; ++it) {
        out.insert(*it);
    }
    return out;
}

Metadata read_meta(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        fail(ErrorKind::Io, dir.string() + " is not an artifact directory");
    }
    Metadata meta;
    read_vector(dir / kMetaFile, &meta);
    return meta;
}

std::string artifact_kind(const fs::path& dir) { return field(read_meta(dir), "artifact"); }

void save_dataset(const DatasetArtifact& a, const fs::path& dir) {
    const DatasetTensor& t = a.data;
    fs::create_directories(dir);
    write_matrix(t.rows(), dir / "values.hgmc");
    if (t.per_image_stats()) {
        Matrix stats(static_cast<Eigen::Index>(t.size()), 2);
        for (std::size_t i = 0; i < t.size(); ++i) {
            stats(static_cast<Eigen::Index>(i), 0) = (*t.per_image_stats())[i].mean;
            stats(static_cast<Eigen::Index>(i), 1) = (*t.per_image_stats())[i].std;
        }
        write_matrix(stats, dir / "stats.hgmc");
    } else if (fs::exists(dir / "stats.hgmc")) {
        fs::remove(dir / "stats.hgmc");
    }
    Metadata meta{{"n", fmt(t.size())},
                  {"height", fmt(t.height())},
                  {"width", fmt(t.width())},
                  {"domain", std::string(to_string(t.domain()))},
                  {"dataset_id", a.dataset_id},
                  {"has_stats", t.per_image_stats() ? "true" : "false"}};
    write_meta(dir, "dataset", meta, a.provenance);
}

DatasetArtifact load_dataset(const fs::path& dir) {
    const Metadata meta = expect_meta(dir, {"dataset"});
    const std::size_t n = size_field(meta, "n");
    const std::size_t h = size_field(meta, "height");
    const std::size_t w = size_field(meta, "width");
    const RowMatrix values = read_rows(dir / "values.hgmc");
    require(static_cast<std::size_t>(values.rows()) == n && static_cast<std::size_t>(values.cols()) == h * w,
            ErrorKind::Format, dir.string() + ": values do not match the declared shape");
    std::optional<std::vector<ImageStats>> stats;
    if (field(meta, "has_stats") == "true") {
        const Matrix s = read_matrix(dir / "stats.hgmc");
        require(static_cast<std::size_t>(s.rows()) == n && s.cols() == 2, ErrorKind::Format, "stats shape");
        stats.emplace(n);
        for (std::size_t i = 0; i < n; ++i) {
            (*stats)[i] = {s(static_cast<Eigen::Index>(i), 0), s(static_cast<Eigen::Index>(i), 1)};
        }
    }
    std::vector<double> flat(values.data(), values.data() + values.size());
    return {DatasetTensor(n, h, w, std::move(flat), parse_value_domain(field(meta, "domain")), std::move(stats)),
            field(meta, "dataset_id"), provenance_of(meta)};
}

void save_basis(const BasisArtifact& a, const fs::path& dir) {
    fs::create_directories(dir);
    Metadata meta{{"basis", std::string(basis_kind(a.basis))},
                  {"basis_id", a.basis_id},
                  {"dataset_id", a.dataset_id},
                  {"height", fmt(a.height)},
                  {"width", fmt(a.width)},
                  {"domain", std::string(to_string(a.domain))},
                  {"input_dim", fmt(input_dim(a.basis))},
                  {"coefficient_dim", fmt(coefficient_dim(a.basis))}};
    if (const auto* p = std::get_if<PcaBasis>(&a.basis)) {
        meta["centered"] = p->centered ? "true" : "false";
        write_vector(p->eigenvalues, dir / "eigenvalues.hgmc");
        write_matrix(p->forward, dir / "forward.hgmc");
        write_matrix(p->inverse, dir / "inverse.hgmc");
        write_vector(p->mean, dir / "mean.hgmc");
    } else if (const auto* ica = std::get_if<IcaBasis>(&a.basis)) {
        meta["iterations_used"] = fmt(ica->iterations_used);
        meta["converged"] = ica->converged ? "true" : "false";
        write_matrix(ica->whitening, dir / "whitening.hgmc");
        write_matrix(ica->unmixing, dir / "unmixing.hgmc");
        write_matrix(ica->mixing, dir / "mixing.hgmc");
        write_vector(ica->mean, dir / "mean.hgmc");
    } else if (const auto* t = std::get_if<TuckerBasis>(&a.basis)) {
        meta["dims"] = fmt(t->dims[0]) + "," + fmt(t->dims[1]) + "," + fmt(t->dims[2]);
        meta["ranks"] = fmt(t->ranks[0]) + "," + fmt(t->ranks[1]) + "," + fmt(t->ranks[2]);
        meta["mode1_used"] = t->mode1_used ? "true" : "false";
        write_matrix(t->factor_row, dir / "factor_row.hgmc");
        write_matrix(t->factor_col, dir / "factor_col.hgmc");
        if (t->mode1_used) {
            write_matrix(t->factor_sample, dir / "factor_sample.hgmc");
        }
    }
    write_meta(dir, "basis", meta, a.provenance);
}

BasisArtifact load_basis(const fs::path& dir) {
    const Metadata meta = expect_meta(dir, {"basis"});
    BasisArtifact a;
    a.basis_id = field(meta, "basis_id");
    a.dataset_id = field(meta, "dataset_id");
    a.height = size_field(meta, "height");
    a.width = size_field(meta, "width");
    a.domain = parse_value_domain(field(meta, "domain"));
    a.provenance = provenance_of(meta);
    const std::string& kind = field(meta, "basis");
    const std::size_t dim_full = size_field(meta, "input_dim");
    const std::size_t dim_reduced = size_field(meta, "coefficient_dim");
    if (kind == "pca") {
        PcaBasis p;
        p.dim_full = dim_full;
        p.dim_reduced = dim_reduced;
        p.centered = field(meta, "centered") == "true";
        p.eigenvalues = read_vector(dir / "eigenvalues.hgmc");
        p.forward = read_matrix(dir / "forward.hgmc");
        p.inverse = read_matrix(dir / "inverse.hgmc");
        p.mean = read_vector(dir / "mean.hgmc");
        a.basis = std::move(p);
    } else if (kind == "ica") {
        IcaBasis ica;
        ica.dim_full = dim_full;
        ica.dim_reduced = dim_reduced;
        ica.iterations_used = size_field(meta, "iterations_used");
        ica.converged = field(meta, "converged") == "true";
        ica.whitening = read_matrix(dir / "whitening.hgmc");
        ica.unmixing = read_matrix(dir / "unmixing.hgmc");
        ica.mixing = read_matrix(dir / "mixing.hgmc");
        ica.mean = read_vector(dir / "mean.hgmc");
        a.basis = std::move(ica);
    } else if (kind == "tucker") {
        TuckerBasis t;
        const auto dims = split(field(meta, "dims"), ',');
        const auto ranks = split(field(meta, "ranks"), ',');
        require(dims.size() == 3 && ranks.size() == 3, ErrorKind::Format, "Tucker dims/ranks need three entries");
        for (std::size_t k = 0; k < 3; ++k) {
            t.dims[k] = static_cast<std::size_t>(parse_u64(dims[k]));
            t.ranks[k] = static_cast<std::size_t>(parse_u64(ranks[k]));
        }
        t.mode1_used = field(meta, "mode1_used") == "true";
        t.factor_row = read_matrix(dir / "factor_row.hgmc");
        t.factor_col = read_matrix(dir / "factor_col.hgmc");
        if (t.mode1_used) {
            t.factor_sample = read_matrix(dir / "factor_sample.hgmc");
        }
        a.basis = std::move(t);
    } else if (kind == "identity") {
        a.basis = fit_identity_basis(dim_full);
    } else {
        fail(ErrorKind::Format, dir.string() + ": unknown basis kind '" + kind + "'");
    }
    require(input_dim(a.basis) == dim_full && coefficient_dim(a.basis) == dim_reduced, ErrorKind::Format,
            dir.string() + ": basis arrays disagree with metadata");
    return a;
}

void save_gmm(const GmmArtifact& a, const fs::path& dir) {
    require(a.role == GmmRole::Generator, ErrorKind::Config, "reference mixtures are written with save_reference");
    Metadata meta{{"role", "generator"}, {"basis_id", a.basis_id}, {"dataset_id", a.dataset_id}};
    save_mixture(a.model, dir, meta);
    write_meta(dir, "gmm", meta, a.provenance);
}

GmmArtifact load_gmm(const fs::path& dir) {
    const Metadata meta = expect_meta(dir, {"gmm", "reference"});
    GmmArtifact a;
    a.role = field(meta, "role") == "reference" ? GmmRole::Reference : GmmRole::Generator;
    a.basis_id = meta.count("basis_id") ? meta.at("basis_id") : "";
    a.dataset_id = field(meta, "dataset_id");
    a.provenance = provenance_of(meta);
    a.model = load_mixture(dir, meta);
    return a;
}

void save_reference(const ReferenceArtifact& a, const fs::path& dir) {
    const FeatureSpec& spec = a.dwt.feature_spec;
    Metadata meta{{"role", "reference"},
                  {"basis_id", "dwt-bior1.3-ll-lh-hl"},
                  {"dataset_id", a.dwt.dataset_id},
                  {"feature_height", fmt(spec.height)},
                  {"feature_width", fmt(spec.width)},
                  {"feature_dim", fmt(spec.dim)},
                  {"subbands", spec.subband_order},
                  {"kde_reduce_dim", fmt(a.kde.reduce_dim)},
                  {"kde_bandwidth", format_double(a.kde.kde.bandwidth)},
                  {"kde_rule", a.kde.kde.rule.to_string()}};
    save_mixture(a.dwt.gmm, dir, meta);
    write_matrix(a.kde.kde.support, dir / "kde_support.hgmc");
    if (a.kde.reduce_dim > 0) {
        write_matrix(a.kde.projection, dir / "kde_projection.hgmc");
        write_vector(a.kde.mean, dir / "kde_mean.hgmc");
    }
    write_meta(dir, "reference", meta, a.provenance);
}

ReferenceArtifact load_reference(const fs::path& dir) {
    const Metadata meta = expect_meta(dir, {"reference"});
    ReferenceArtifact a;
    a.provenance = provenance_of(meta);
    a.dwt.gmm = load_mixture(dir, meta);
    a.dwt.dataset_id = field(meta, "dataset_id");
    a.dwt.feature_spec = {size_field(meta, "feature_height"), size_field(meta, "feature_width"),
                          size_field(meta, "feature_dim"), field(meta, "subbands")};
    a.kde.reduce_dim = size_field(meta, "kde_reduce_dim");
    a.kde.kde.support = read_matrix(dir / "kde_support.hgmc");
    a.kde.kde.bandwidth = parse_double(field(meta, "kde_bandwidth"));
    a.kde.kde.rule = BandwidthRule::parse(field(meta, "kde_rule"));
    if (a.kde.reduce_dim > 0) {
        a.kde.projection = read_matrix(dir / "kde_projection.hgmc");
        a.kde.mean = read_vector(dir / "kde_mean.hgmc");
    }
    return a;
}

}  // namespace basisgen
