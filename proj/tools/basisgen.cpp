// basisgen: fit representation bases, coefficient-space mixtures and the
// DWT-GMM benchmark from the command line.
//
// Exit codes: 0 success, 2 usage or configuration, 3 bad or incompatible
// data/artifacts, 4 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "basisgen/artifacts.hpp"
#include "basisgen/basis.hpp"
#include "basisgen/benchmark.hpp"
#include "basisgen/coeffio.hpp"
#include "basisgen/error.hpp"
#include "basisgen/manifest.hpp"
#include "basisgen/text.hpp"
#include "basisgen/wavelet.hpp"

namespace fs = std::filesystem;
using namespace basisgen;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
            return kExitUsage;
        case ErrorKind::Format:
        case ErrorKind::Io:
        case ErrorKind::Domain:
        case ErrorKind::Dimension:
            return kExitData;
        case ErrorKind::Degenerate:
        case ErrorKind::Rank:
        case ErrorKind::Numerical:
            return kExitNumeric;
    }
    return kExitData;
}

std::string short_hash(std::string_view bytes) { return hex64(fnv1a64(bytes)).substr(0, 8); }

std::string content_hash(const DatasetTensor& t) {
    const auto& v = t.values();
    std::string header = std::to_string(t.size()) + "x" + std::to_string(t.height()) + "x" + std::to_string(t.width());
    return short_hash(header + std::string(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)));
}

// Stage configuration is stamped into artifacts as stage.<name>.<key>.
void stamp(Metadata& provenance, const std::string& stage, const Metadata& cfg) {
    for (const auto& [key, value] : cfg) {
        provenance["stage." + stage + "." + key] = value;
    }
}

const std::string* find(const Metadata& m, const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? nullptr : &it->second;
}

std::string fmt(double v) { return format_double(v); }

PreprocessConfig preprocess_from(const Metadata& provenance) {
    PreprocessConfig cfg;
    if (const auto* mode = find(provenance, "stage.preprocess.mode")) {
        cfg.mode = parse_preprocess_mode(*mode);
    }
    if (const auto* eps = find(provenance, "stage.preprocess.epsilon")) {
        cfg.epsilon = parse_double(*eps);
    }
    if (const auto* beta = find(provenance, "stage.preprocess.beta")) {
        cfg.beta = parse_double(*beta);
    }
    return cfg;
}

Metadata preprocess_stage(const PreprocessConfig& cfg) {
    return {{"mode", std::string(to_string(cfg.mode))}, {"epsilon", fmt(cfg.epsilon)}, {"beta", fmt(cfg.beta)}};
}

fs::path manifest_path_for_file(const fs::path& file) {
    fs::path p = file;
    p += ".manifest.txt";
    return p;
}

void ensure_parent(const fs::path& file) {
    if (file.has_parent_path()) {
        fs::create_directories(file.parent_path());
    }
}

struct PreprocessOpts {
    std::string mode;
    double epsilon = 0.001;
    double beta = 1.0;

    void add(CLI::App* cmd, const std::string& default_mode) {
        mode = default_mode;
        cmd->add_option("--preprocess", mode, "logit, zscore or none")
            ->check(CLI::IsMember({"logit", "zscore", "none"}))
            ->capture_default_str();
        cmd->add_option("--epsilon", epsilon, "clamp margin for the logit map")->capture_default_str();
        cmd->add_option("--beta", beta, "logit slope factor")->capture_default_str();
    }

    PreprocessConfig config() const {
        PreprocessConfig cfg;
        cfg.mode = parse_preprocess_mode(mode);
        cfg.epsilon = epsilon;
        cfg.beta = beta;
        cfg.validate();
        return cfg;
    }
};

// Writes a freshly ingested or synthesised dataset with its preprocessing applied.
void save_ingested(const DatasetTensor& raw, const std::string& name, const PreprocessConfig& pre,
                   Metadata source_stage, const std::string& stage, const fs::path& out, RunManifest& manifest) {
    DatasetArtifact a{preprocess(raw, pre), name + "-" + content_hash(raw), {}};
    source_stage["content_hash"] = content_hash(raw);
    stamp(a.provenance, stage, source_stage);
    stamp(a.provenance, "preprocess", preprocess_stage(pre));
    a.provenance["stage.dataset_id"] = a.dataset_id;
    for (const auto& [k, v] : source_stage) {
        manifest.config[k] = v;
    }
    for (const auto& [k, v] : preprocess_stage(pre)) {
        manifest.config["preprocess." + k] = v;
    }
    manifest.config["dataset_id"] = a.dataset_id;
    StageTimer t(manifest, "write");
    save_dataset(a, out);
}

// --- ingest ---------------------------------------------------------------

struct IngestOpts {
    std::string input;
    std::string out;
    std::string name;
    std::size_t limit = 0;
    PreprocessOpts pre;
};

void run_ingest(const IngestOpts& o) {
    RunManifest m{"ingest", {}, {{"path.input", o.input}, {"path.out", o.out}}, {}, {}};
    std::optional<DatasetTensor> raw;
    {
        StageTimer t(m, "load");
        raw.emplace(load_idx(o.input));
        if (o.limit > 0) {
            raw.emplace(raw->head(o.limit));
        }
    }
    const std::string name = o.name.empty() ? fs::path(o.input).stem().string() : o.name;
    save_ingested(*raw, name, o.pre.config(), {{"limit", std::to_string(o.limit)}, {"source", "idx"}}, "ingest",
                  o.out, m);
    write_manifest(m, fs::path(o.out) / "manifest.txt");
}

// --- synth-xgc / synth-fashion ---------------------------------------------

struct SynthXgcOpts {
    std::string out;
    XgcSurrogateConfig cfg;
    PreprocessOpts pre;
};

void run_synth_xgc(const SynthXgcOpts& o) {
    RunManifest m{"synth-xgc", {}, {{"path.out", o.out}}, {}, {}};
    o.cfg.validate();
    std::optional<DatasetTensor> raw;
    {
        StageTimer t(m, "synthesise");
        raw.emplace(synth_xgc(o.cfg));
    }
    Metadata stage{{"n", std::to_string(o.cfg.n_nodes)},
                   {"height", std::to_string(o.cfg.height)},
                   {"width", std::to_string(o.cfg.width)},
                   {"components", std::to_string(o.cfg.components_per_node.first) + "," +
                                      std::to_string(o.cfg.components_per_node.second)},
                   {"scale", fmt(o.cfg.range_scale.first) + "," + fmt(o.cfg.range_scale.second)},
                   {"seed", std::to_string(o.cfg.seed)}};
    save_ingested(*raw, "xgc-surrogate", o.pre.config(), stage, "synth-xgc", o.out, m);
    write_manifest(m, fs::path(o.out) / "manifest.txt");
}

struct SynthFashionOpts {
    std::string out;
    GarmentSurrogateConfig cfg;
    PreprocessOpts pre;
};

void run_synth_fashion(const SynthFashionOpts& o) {
    RunManifest m{"synth-fashion", {}, {{"path.out", o.out}}, {}, {}};
    require(o.cfg.n_images >= 1, ErrorKind::Config, "--n must be at least 1");
    std::optional<DatasetTensor> raw;
    {
        StageTimer t(m, "synthesise");
        raw.emplace(synth_garments(o.cfg));
    }
    Metadata stage{{"n", std::to_string(o.cfg.n_images)}, {"seed", std::to_string(o.cfg.seed)}};
    save_ingested(*raw, "garments", o.pre.config(), stage, "synth-fashion", o.out, m);
    write_manifest(m, fs::path(o.out) / "manifest.txt");
}

// --- fit-basis -------------------------------------------------------------

struct FitBasisOpts {
    std::string kind;
    std::string data;
    std::string out;
    std::size_t d = 0;
    bool centered = false;
    std::string contrast = "logcosh";
    double tol = 1e-4;
    std::size_t max_iter = 200;
    std::uint64_t seed = 0;
    std::string ranks;
    std::size_t sample_rank = 0;
};

TuckerRanks parse_ranks(const std::string& text, std::size_t sample_rank) {
    const auto parts = split(text, ',');
    if (parts.size() != 2) {
        fail(ErrorKind::Config, "--ranks expects R2,R3 (row and column ranks)");
    }
    return {sample_rank, static_cast<std::size_t>(parse_u64(parts[0])),
            static_cast<std::size_t>(parse_u64(parts[1]))};
}

void run_fit_basis(const FitBasisOpts& o) {
    RunManifest m{"fit-basis", {}, {{"path.data", o.data}, {"path.out", o.out}}, {}, {}};
    std::optional<DatasetArtifact> data;
    {
        StageTimer t(m, "load");
        data.emplace(load_dataset(o.data));
    }
    const DatasetTensor& x = data->data;
    Metadata cfg{{"kind", o.kind}};
    std::optional<BasisModel> basis;
    {
        StageTimer t(m, "fit");
        if (o.kind == "pca") {
            require(o.d > 0, ErrorKind::Config, "pca needs --d");
            cfg["d"] = std::to_string(o.d);
            cfg["centered"] = o.centered ? "true" : "false";
            basis.emplace(fit_pca(x.rows(), o.d, o.centered));
        } else if (o.kind == "ica") {
            require(o.d > 0, ErrorKind::Config, "ica needs --d");
            IcaOptions ica;
            ica.nonlinearity = parse_ica_contrast(o.contrast);
            ica.tolerance = o.tol;
            ica.max_iterations = o.max_iter;
            ica.seed = o.seed;
            cfg["d"] = std::to_string(o.d);
            cfg["contrast"] = std::string(to_string(ica.nonlinearity));
            cfg["tol"] = fmt(o.tol);
            cfg["max_iter"] = std::to_string(o.max_iter);
            cfg["seed"] = std::to_string(o.seed);
            IcaBasis fitted = fit_fastica(x.rows(), o.d, ica);
            if (!fitted.converged) {
                std::cerr << "warning: FastICA stopped after " << fitted.iterations_used
                          << " iterations without meeting --tol\n";
            }
            basis.emplace(std::move(fitted));
        } else if (o.kind == "tucker") {
            require(!o.ranks.empty(), ErrorKind::Config, "tucker needs --ranks R2,R3");
            const TuckerRanks ranks = parse_ranks(o.ranks, o.sample_rank == 0 ? 1 : o.sample_rank);
            cfg["ranks"] = o.ranks;
            cfg["sample_rank"] = std::to_string(o.sample_rank);
            basis.emplace(hosvd(x, ranks, o.sample_rank > 0).basis);
        } else {
            cfg["d"] = std::to_string(x.pixels());
            basis.emplace(fit_identity_basis(x.pixels()));
        }
    }
    BasisArtifact a;
    a.basis = std::move(*basis);
    a.basis_id = o.kind + "-" + std::to_string(coefficient_dim(a.basis)) + "-" +
                 short_hash(data->dataset_id + "\n" + format_key_values(cfg));
    a.dataset_id = data->dataset_id;
    a.height = x.height();
    a.width = x.width();
    a.domain = x.domain();
    a.provenance = data->provenance;
    cfg["basis_id"] = a.basis_id;
    stamp(a.provenance, "fit-basis", cfg);
    m.config = cfg;
    m.inputs["dataset_id"] = data->dataset_id;
    {
        StageTimer t(m, "write");
        save_basis(a, o.out);
    }
    write_manifest(m, fs::path(o.out) / "manifest.txt");
}

// --- project ---------------------------------------------------------------

struct ProjectOpts {
    std::string basis;
    std::string data;
    std::string out;
};

void run_project(const ProjectOpts& o) {
    RunManifest m{"project", {}, {{"path.basis", o.basis}, {"path.data", o.data}, {"path.out", o.out}}, {}, {}};
    std::optional<BasisArtifact> basis;
    std::optional<DatasetArtifact> data;
    {
        StageTimer t(m, "load");
        basis.emplace(load_basis(o.basis));
        data.emplace(load_dataset(o.data));
    }
    const DatasetTensor& x = data->data;
    require(x.height() == basis->height && x.width() == basis->width, ErrorKind::Dimension,
            "dataset images are " + std::to_string(x.height()) + "x" + std::to_string(x.width()) +
                ", basis expects " + std::to_string(basis->height) + "x" + std::to_string(basis->width));
    require(x.domain() == basis->domain, ErrorKind::Domain,
            "dataset is in the '" + std::string(to_string(x.domain())) + "' domain, basis was fit in '" +
                std::string(to_string(basis->domain)) + "'");
    std::optional<CoefficientMatrix> coeffs;
    {
        StageTimer t(m, "project");
        coeffs.emplace(project(basis->basis, x, basis->basis_id, data->dataset_id));
    }
    coeffs->metadata = basis->provenance;
    stamp(coeffs->metadata, "project", {{"dataset_id", data->dataset_id}});
    m.config = {{"basis_id", basis->basis_id}, {"dataset_id", data->dataset_id}};
    {
        StageTimer t(m, "write");
        ensure_parent(o.out);
        write_coeffs(*coeffs, o.out);
    }
    write_manifest(m, manifest_path_for_file(o.out));
}

// --- fit-gmm ---------------------------------------------------------------

struct FitGmmOpts {
    std::string coeffs;
    std::string out;
    std::size_t k = 10;
    std::string cov = "auto";
    std::optional<double> reg;
    std::uint64_t seed = 0;
    std::size_t max_iter = 500;
    double tol = 1e-5;
};

CovarianceType resolve_covariance(const std::string& choice, std::size_t n, std::size_t d, std::size_t k) {
    if (choice != "auto") {
        return parse_covariance_type(choice);
    }
    const CovarianceType type = n > 10 * d * k ? CovarianceType::Full : CovarianceType::Diagonal;
    std::cerr << "covariance: " << to_string(type) << " (auto; N=" << n << ", d=" << d << ", K=" << k << ")\n";
    return type;
}

void run_fit_gmm(const FitGmmOpts& o) {
    RunManifest m{"fit-gmm", {}, {{"path.coeffs", o.coeffs}, {"path.out", o.out}}, {}, {}};
    std::optional<CoefficientMatrix> coeffs;
    {
        StageTimer t(m, "load");
        coeffs.emplace(read_coeffs(o.coeffs));
        coeffs->validate();
    }
    EmOptions em;
    em.k = o.k;
    em.covariance_type = resolve_covariance(o.cov, coeffs->n(), coeffs->d(), o.k);
    em.reg = o.reg;
    em.seed = o.seed;
    em.max_iter = o.max_iter;
    em.tol = o.tol;

    GmmArtifact a;
    {
        StageTimer t(m, "fit");
        a.model = fit_em(*coeffs, em);
    }
    if (!a.model.converged) {
        std::cerr << "warning: EM reached --max-iter " << o.max_iter << " before --tol\n";
    }
    a.basis_id = coeffs->basis_id;
    a.dataset_id = coeffs->dataset_id;
    a.provenance = provenance_of(coeffs->metadata);
    Metadata cfg{{"k", std::to_string(o.k)},
                 {"covariance", o.cov},
                 {"covariance_type", std::string(to_string(em.covariance_type))},
                 {"reg", o.reg ? fmt(*o.reg) : "default"},
                 {"seed", std::to_string(o.seed)},
                 {"max_iter", std::to_string(o.max_iter)},
                 {"tol", fmt(o.tol)}};
    stamp(a.provenance, "fit-gmm", cfg);
    m.config = cfg;
    m.inputs["basis_id"] = a.basis_id;
    {
        StageTimer t(m, "write");
        save_gmm(a, o.out);
    }
    write_manifest(m, fs::path(o.out) / "manifest.txt");
}

// --- sample ----------------------------------------------------------------

struct SampleOpts {
    std::string model;
    std::string out;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
};

void run_sample(const SampleOpts& o) {
    RunManifest m{"sample", {}, {{"path.model", o.model}, {"path.out", o.out}}, {}, {}};
    if (artifact_kind(o.model) == "reference") {
        fail(ErrorKind::Domain, o.model + " is a benchmark reference model; it is held out and cannot be sampled");
    }
    std::optional<GmmArtifact> model;
    {
        StageTimer t(m, "load");
        model.emplace(load_gmm(o.model));
    }
    std::optional<CoefficientMatrix> draws;
    {
        StageTimer t(m, "sample");
        draws.emplace(gmm_sample(model->model, o.n, o.seed));
    }
    draws->basis_id = model->basis_id;
    draws->dataset_id = model->dataset_id;
    draws->metadata = model->provenance;
    draws->metadata["generator"] = "gmm";
    const Metadata cfg{{"n", std::to_string(o.n)}, {"seed", std::to_string(o.seed)}};
    stamp(draws->metadata, "sample", cfg);
    m.config = cfg;
    {
        StageTimer t(m, "write");
        ensure_parent(o.out);
        write_coeffs(*draws, o.out);
    }
    write_manifest(m, manifest_path_for_file(o.out));
}

// --- reconstruct -----------------------------------------------------------

struct ReconstructOpts {
    std::string basis;
    std::string coeffs;
    std::string out;
    bool raw = false;
};

void run_reconstruct(const ReconstructOpts& o) {
    RunManifest m{"reconstruct", {}, {{"path.basis", o.basis}, {"path.coeffs", o.coeffs}, {"path.out", o.out}}, {}, {}};
    std::optional<BasisArtifact> basis;
    std::optional<CoefficientMatrix> coeffs;
    {
        StageTimer t(m, "load");
        basis.emplace(load_basis(o.basis));
        coeffs.emplace(read_coeffs(o.coeffs));
        coeffs->validate();
    }
    require(coeffs->basis_id == basis->basis_id, ErrorKind::Domain,
            "coefficients were produced in basis '" + coeffs->basis_id + "', not '" + basis->basis_id + "'");
    std::optional<DatasetTensor> images;
    const PreprocessConfig pre = preprocess_from(basis->provenance);
    {
        StageTimer t(m, "reconstruct");
        images.emplace(reconstruct(basis->basis, *coeffs, basis->height, basis->width, basis->domain));
        if (!o.raw) {
            images.emplace(postprocess(*images, pre));
        }
    }
    DatasetArtifact a{std::move(*images), "", provenance_of(coeffs->metadata)};
    const Metadata cfg{{"basis_id", basis->basis_id}, {"postprocess", o.raw ? "false" : "true"}};
    stamp(a.provenance, "reconstruct", cfg);
    a.dataset_id = "generated-" + short_hash(format_key_values(a.provenance));
    m.config = cfg;
    {
        StageTimer t(m, "write");
        save_dataset(a, o.out);
    }
    write_manifest(m, fs::path(o.out) / "manifest.txt");
}

// --- build-reference -------------------------------------------------------

struct BuildReferenceOpts {
    std::string data;
    std::string out;
    std::size_t k = 10;
    std::string k_sweep;
    std::string cov = "diag";
    std::optional<double> reg;
    std::uint64_t seed = 0;
    std::size_t max_iter = 500;
    double tol = 1e-5;
    std::size_t kde_dim = 50;
    std::string kde_rule = "silverman";
};

// Picks K by mean NLL on the last 20% of the images after fitting on the rest.
std::size_t sweep_reference_k(const DatasetTensor& x, const std::vector<std::size_t>& ks, ReferenceOptions opts) {
    const std::size_t n_train = x.size() * 4 / 5;
    require(n_train >= 2 && n_train < x.size(), ErrorKind::Config, "too few images for a K sweep");
    const CoefficientMatrix all = dwt_features(x);
    const RowMatrix train = all.values.topRows(static_cast<Eigen::Index>(n_train));
    const RowMatrix valid = all.values.bottomRows(static_cast<Eigen::Index>(x.size() - n_train));
    std::size_t best_k = ks.front();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k : ks) {
        EmOptions em;
        em.k = k;
        em.covariance_type = opts.covariance_type;
        em.reg = opts.reg;
        em.seed = opts.seed;
        em.max_iter = opts.max_iter;
        em.tol = opts.tol;
        const double nll = gmm_mean_nll(fit_em(train, em), valid);
        std::cerr << "k-sweep: K=" << k << " validation NLL " << nll << "\n";
        if (nll < best) {
            best = nll;
            best_k = k;
        }
    }
    return best_k;
}

void run_build_reference(const BuildReferenceOpts& o) {
    RunManifest m{"build-reference", {}, {{"path.data", o.data}, {"path.out", o.out}}, {}, {}};
    std::optional<DatasetArtifact> data;
    {
        StageTimer t(m, "load");
        data.emplace(load_dataset(o.data));
    }
    ReferenceOptions ro;
    ro.k = o.k;
    ro.covariance_type = parse_covariance_type(o.cov);
    ro.seed = o.seed;
    ro.max_iter = o.max_iter;
    ro.tol = o.tol;
    ro.reg = o.reg;
    Metadata cfg{{"k", std::to_string(o.k)},
                 {"covariance_type", std::string(to_string(ro.covariance_type))},
                 {"reg", o.reg ? fmt(*o.reg) : "default"},
                 {"seed", std::to_string(o.seed)},
                 {"max_iter", std::to_string(o.max_iter)},
                 {"tol", fmt(o.tol)},
                 {"kde_dim", std::to_string(o.kde_dim)},
                 {"kde_rule", o.kde_rule},
                 {"domain", std::string(to_string(data->data.domain()))},
                 {"dataset_id", data->dataset_id}};
    if (!o.k_sweep.empty()) {
        std::vector<std::size_t> ks;
        for (const auto& part : split(o.k_sweep, ',')) {
            ks.push_back(static_cast<std::size_t>(parse_u64(part)));
        }
        StageTimer t(m, "k-sweep");
        ro.k = sweep_reference_k(data->data, ks, ro);
        cfg["k_sweep"] = o.k_sweep;
        cfg["k"] = std::to_string(ro.k);
    }
    ReferenceArtifact a;
    {
        StageTimer t(m, "fit");
        a.dwt = build_reference(data->data, ro, data->dataset_id);
        a.kde = build_kde_reference(data->data, {o.kde_dim, BandwidthRule::parse(o.kde_rule)});
    }
    a.provenance = data->provenance;
    stamp(a.provenance, "build-reference", cfg);
    m.config = cfg;
    {
        StageTimer t(m, "write");
        save_reference(a, o.out);
    }
    write_manifest(m, fs::path(o.out) / "manifest.txt");
}

// --- evaluate --------------------------------------------------------------

struct EvaluateOpts {
    std::string reference;
    std::string real;
    std::string generated;
    std::string out;
    std::string interval = "percentile:1,99";
    std::size_t grid = 512;
    std::string curve_bandwidth = "silverman";
    std::string model_id;
};

void run_evaluate(const EvaluateOpts& o) {
    RunManifest m{"evaluate",
                  {},
                  {{"path.reference", o.reference}, {"path.real", o.real}, {"path.generated", o.generated},
                   {"path.out", o.out}},
                  {},
                  {}};
    std::optional<ReferenceArtifact> ref;
    std::optional<DatasetArtifact> real;
    std::optional<DatasetArtifact> gen;
    {
        StageTimer t(m, "load");
        ref.emplace(load_reference(o.reference));
        real.emplace(load_dataset(o.real));
        gen.emplace(load_dataset(o.generated));
    }
    if (const auto* domain = find(ref->provenance, "stage.build-reference.domain")) {
        require(*domain == to_string(real->data.domain()), ErrorKind::Domain,
                "reference was built on '" + *domain + "' images, real set is '" +
                    std::string(to_string(real->data.domain())) + "'");
    }
    require(real->data.domain() == gen->data.domain(), ErrorKind::Domain,
            "real images are '" + std::string(to_string(real->data.domain())) + "', generated are '" +
                std::string(to_string(gen->data.domain())) + "'");

    BenchmarkConfig cfg;
    cfg.curve.interval = IntervalRule::parse(o.interval);
    cfg.curve.grid_points = o.grid;
    cfg.curve.curve_bandwidth = BandwidthRule::parse(o.curve_bandwidth);
    cfg.curve.validate();
    const std::string* basis_id = find(gen->provenance, "stage.reconstruct.basis_id");
    cfg.basis_id = basis_id ? *basis_id : "none";
    cfg.dataset_id = real->dataset_id;
    cfg.model_id = o.model_id.empty() ? "gmm:" + cfg.basis_id : o.model_id;
    for (const auto& [key, value] : gen->provenance) {
        cfg.provenance["generated." + key] = value;
    }
    for (const auto& [key, value] : ref->provenance) {
        cfg.provenance["reference." + key] = value;
    }
    cfg.provenance["real.dataset_id"] = real->dataset_id;
    cfg.provenance["generated.dataset_id"] = gen->dataset_id;

    std::optional<BenchmarkReport> report;
    {
        StageTimer t(m, "evaluate");
        report.emplace(evaluate(ref->dwt, ref->kde, real->data, gen->data, cfg));
    }
    m.config = {{"interval", o.interval},
                {"grid", std::to_string(o.grid)},
                {"curve_bandwidth", o.curve_bandwidth},
                {"model_id", cfg.model_id}};
    m.inputs["generated.dataset_id"] = gen->dataset_id;
    m.inputs["real.dataset_id"] = real->dataset_id;
    {
        StageTimer t(m, "write");
        fs::create_directories(o.out);
        write_file(fs::path(o.out) / "report.txt", format_report(*report));
        write_file(fs::path(o.out) / "nll.csv", format_nll_csv(*report));
    }
    std::cout << "dwt_entropy=" << fmt(report->dwt_entropy) << "\n"
              << "dwt_entropy_real=" << fmt(report->dwt_entropy_real) << "\n"
              << "kde_entropy=" << fmt(report->kde_entropy) << "\n"
              << "l1_distance_scaled=" << fmt(report->l1_distance_scaled) << "\n";
    write_manifest(m, fs::path(o.out) / "manifest.txt");
}

// --- plot ------------------------------------------------------------------

struct PlotOpts {
    std::string report;
    std::string out;
    std::string title = "NLL density under the DWT-GMM reference";
};

void run_plot(const PlotOpts& o) {
    RunManifest m{"plot", {}, {{"path.report", o.report}}, {}, {}};
    const fs::path dir = o.report;
    const Metadata report = parse_key_values(read_file(dir / "report.txt"));
    std::vector<double> real;
    std::vector<double> gen;
    {
        std::istringstream csv(read_file(dir / "nll.csv"));
        std::string line;
        std::getline(csv, line);
        require(line == "set,index,nll", ErrorKind::Format, "nll.csv has an unexpected header");
        while (std::getline(csv, line)) {
            if (line.empty()) {
                continue;
            }
            const auto cells = split(line, ',');
            require(cells.size() == 3, ErrorKind::Format, "malformed nll.csv row '" + line + "'");
            (cells[0] == "real" ? real : gen).push_back(parse_double(cells[2]));
        }
    }
    NllCurveConfig curve;
    if (const auto* v = find(report, "config.curve.interval")) {
        curve.interval = IntervalRule::parse(*v);
    }
    if (const auto* v = find(report, "config.curve.grid_points")) {
        curve.grid_points = static_cast<std::size_t>(parse_u64(*v));
    }
    if (const auto* v = find(report, "config.curve.bandwidth_rule")) {
        curve.curve_bandwidth = BandwidthRule::parse(*v);
    }
    const Vector r = Eigen::Map<const Vector>(real.data(), static_cast<Eigen::Index>(real.size()));
    const Vector g = Eigen::Map<const Vector>(gen.data(), static_cast<Eigen::Index>(gen.size()));
    std::optional<DensityCurves> curves;
    {
        StageTimer t(m, "curves");
        curves.emplace(nll_density_curves(r, g, curve));
    }
    const fs::path out = o.out.empty() ? dir : fs::path(o.out);
    fs::create_directories(out);
    write_file(out / "curves.csv", format_curves_csv(*curves));
    write_file(out / "nll_density.svg", render_curves_svg(*curves, o.title));
    m.config = {{"interval", curve.interval.to_string()},
                {"grid_points", std::to_string(curve.grid_points)},
                {"curve_bandwidth", curve.curve_bandwidth.to_string()}};
    m.inputs["path.out"] = out.string();
    write_manifest(m, out / "plot.manifest.txt");
}

// --- sweep-d ---------------------------------------------------------------

struct SweepOpts {
    std::string data;
    std::string out;
    std::size_t d_min = 16;
    std::size_t d_max = 0;
    std::size_t step = 16;
    std::optional<double> threshold;
    bool centered = false;
};

void run_sweep_d(const SweepOpts& o) {
    RunManifest m{"sweep-d", {}, {{"path.data", o.data}, {"path.out", o.out}}, {}, {}};
    std::optional<DatasetArtifact> data;
    {
        StageTimer t(m, "load");
        data.emplace(load_dataset(o.data));
    }
    const std::size_t full = data->data.pixels();
    const std::size_t hi = o.d_max == 0 ? full : std::min(o.d_max, full);
    require(o.d_min >= 1 && o.d_min <= hi && o.step >= 1, ErrorKind::Config, "invalid --d-min/--d-max/--step");
    std::vector<std::size_t> dims;
    for (std::size_t d = o.d_min; d <= hi; d += o.step) {
        dims.push_back(d);
    }
    if (dims.back() != hi) {
        dims.push_back(hi);
    }
    std::vector<double> errors;
    {
        StageTimer t(m, "sweep");
        errors = pca_error_curve(data->data.rows(), dims, o.centered);
    }
    std::string csv = "d,mean_l2_error\n";
    std::optional<std::size_t> selected;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        csv += std::to_string(dims[i]) + "," + fmt(errors[i]) + "\n";
        if (o.threshold && !selected && errors[i] <= *o.threshold) {
            selected = dims[i];
        }
    }
    ensure_parent(o.out);
    write_file(o.out, csv);
    m.config = {{"basis", "pca"},
                {"d_min", std::to_string(o.d_min)},
                {"d_max", std::to_string(hi)},
                {"step", std::to_string(o.step)},
                {"centered", o.centered ? "true" : "false"},
                {"threshold", o.threshold ? fmt(*o.threshold) : "none"}};
    m.inputs["dataset_id"] = data->dataset_id;
    if (o.threshold) {
        const std::string value = selected ? std::to_string(*selected) : "none";
        m.results["selected_d"] = value;
        std::cout << "selected_d=" << value << "\n";
    }
    write_manifest(m, manifest_path_for_file(o.out));
}

// Splices `--key value` pairs from a subcommand's --config file into the
// argument list, skipping keys already given on the command line.
std::vector<std::string> with_config_file(CLI::App& app, int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        return args;
    }
    CLI::App* sub = app.get_subcommand_no_throw(args[0]);
    if (sub == nullptr) {
        return args;
    }
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
    }
    if (path.empty()) {
        return args;
    }
    auto given = [&](const std::string& flag) {
        return std::any_of(args.begin() + 1, args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    std::vector<std::string> extra;
    for (const auto& [key, value] : parse_key_values(read_file(path))) {
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (opt == nullptr || key == "config") {
            throw CLI::ValidationError("--config", "unknown key '" + key + "' for " + args[0]);
        }
        if (given(flag)) {
            continue;
        }
        if (opt->get_type_size() == 0) {
            if (value == "true" || value == "1") {
                extra.push_back(flag);
            }
        } else {
            extra.push_back(flag);
            extra.push_back(value);
        }
    }
    args.insert(args.begin() + 1, extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Representation-basis generative modelling and DWT-GMM benchmarking"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);

    std::string config_file;
    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_file, "flat key=value file; command line flags take precedence");
    };

    IngestOpts ingest;
    auto* c_ingest = app.add_subcommand("ingest", "load an IDX image file and preprocess it");
    c_ingest->add_option("--input", ingest.input, "IDX (ubyte, rank 3) file")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("--out", ingest.out, "output dataset directory")->required();
    c_ingest->add_option("--name", ingest.name, "dataset name (default: file stem)");
    c_ingest->add_option("--limit", ingest.limit, "keep only the first N images (0 = all)")->capture_default_str();
    ingest.pre.add(c_ingest, "logit");
    add_config(c_ingest);
    c_ingest->callback([&] { run_ingest(ingest); });

    SynthXgcOpts xgc;
    std::size_t xgc_cmin = 1;
    std::size_t xgc_cmax = 3;
    auto* c_xgc = app.add_subcommand("synth-xgc", "generate the velocity-histogram surrogate dataset");
    c_xgc->add_option("--out", xgc.out, "output dataset directory")->required();
    c_xgc->add_option("--n", xgc.cfg.n_nodes, "number of images")->capture_default_str();
    c_xgc->add_option("--height", xgc.cfg.height)->capture_default_str();
    c_xgc->add_option("--width", xgc.cfg.width)->capture_default_str();
    c_xgc->add_option("--components-min", xgc_cmin)->capture_default_str();
    c_xgc->add_option("--components-max", xgc_cmax)->capture_default_str();
    c_xgc->add_option("--scale-min", xgc.cfg.range_scale.first)->capture_default_str();
    c_xgc->add_option("--scale-max", xgc.cfg.range_scale.second)->capture_default_str();
    c_xgc->add_option("--seed", xgc.cfg.seed)->capture_default_str();
    xgc.pre.add(c_xgc, "zscore");
    add_config(c_xgc);
    c_xgc->callback([&] {
        xgc.cfg.components_per_node = {xgc_cmin, xgc_cmax};
        run_synth_xgc(xgc);
    });

    SynthFashionOpts fashion;
    auto* c_fashion = app.add_subcommand("synth-fashion", "generate 28x28 garment surrogate images");
    c_fashion->add_option("--out", fashion.out, "output dataset directory")->required();
    c_fashion->add_option("--n", fashion.cfg.n_images, "number of images")->capture_default_str();
    c_fashion->add_option("--seed", fashion.cfg.seed)->capture_default_str();
    fashion.pre.add(c_fashion, "logit");
    add_config(c_fashion);
    c_fashion->callback([&] { run_synth_fashion(fashion); });

    FitBasisOpts fb;
    auto* c_fb = app.add_subcommand("fit-basis", "fit a pca, ica, tucker or identity basis");
    c_fb->add_option("kind", fb.kind, "pca | ica | tucker | identity")
        ->required()
        ->check(CLI::IsMember({"pca", "ica", "tucker", "identity"}));
    c_fb->add_option("--data", fb.data, "input dataset directory")->required();
    c_fb->add_option("--out", fb.out, "output basis directory")->required();
    c_fb->add_option("--d", fb.d, "number of coefficients (pca, ica)");
    c_fb->add_flag("--centered", fb.centered, "subtract the mean before PCA");
    c_fb->add_option("--contrast", fb.contrast, "FastICA nonlinearity: logcosh | cube")->capture_default_str();
    c_fb->add_option("--tol", fb.tol, "FastICA tolerance")->capture_default_str();
    c_fb->add_option("--max-iter", fb.max_iter, "FastICA iteration cap")->capture_default_str();
    c_fb->add_option("--seed", fb.seed, "FastICA initial rotation seed")->capture_default_str();
    c_fb->add_option("--ranks", fb.ranks, "Tucker row,column ranks, e.g. 20,20");
    c_fb->add_option("--sample-rank", fb.sample_rank, "Tucker sample-mode rank (0 skips U1)")->capture_default_str();
    add_config(c_fb);
    c_fb->callback([&] { run_fit_basis(fb); });

    ProjectOpts pj;
    auto* c_pj = app.add_subcommand("project", "map a dataset to basis coefficients");
    c_pj->add_option("--basis", pj.basis, "basis directory")->required();
    c_pj->add_option("--data", pj.data, "dataset directory")->required();
    c_pj->add_option("--out", pj.out, "output coefficient file (.hgmc)")->required();
    add_config(c_pj);
    c_pj->callback([&] { run_project(pj); });

    FitGmmOpts fg;
    auto* c_fg = app.add_subcommand("fit-gmm", "fit a Gaussian mixture to coefficients");
    c_fg->add_option("--coeffs", fg.coeffs, "coefficient file")->required();
    c_fg->add_option("--out", fg.out, "output model directory")->required();
    c_fg->add_option("--k", fg.k, "number of components")->capture_default_str();
    c_fg->add_option("--cov", fg.cov, "full | diag | auto")
        ->check(CLI::IsMember({"full", "diag", "auto"}))
        ->capture_default_str();
    c_fg->add_option("--reg", fg.reg, "covariance ridge (default 1e-6 * trace(cov) / d)");
    c_fg->add_option("--seed", fg.seed)->capture_default_str();
    c_fg->add_option("--max-iter", fg.max_iter)->capture_default_str();
    c_fg->add_option("--tol", fg.tol, "stop when the mean log-likelihood gain falls below this")
        ->capture_default_str();
    add_config(c_fg);
    c_fg->callback([&] { run_fit_gmm(fg); });

    SampleOpts sp;
    auto* c_sp = app.add_subcommand("sample", "draw coefficient rows from a fitted mixture");
    c_sp->add_option("--model", sp.model, "model directory")->required();
    c_sp->add_option("--out", sp.out, "output coefficient file")->required();
    c_sp->add_option("--n", sp.n)->capture_default_str();
    c_sp->add_option("--seed", sp.seed)->capture_default_str();
    add_config(c_sp);
    c_sp->callback([&] { run_sample(sp); });

    ReconstructOpts rc;
    auto* c_rc = app.add_subcommand("reconstruct", "map coefficients back to images");
    c_rc->add_option("--basis", rc.basis, "basis directory")->required();
    c_rc->add_option("--coeffs", rc.coeffs, "coefficient file")->required();
    c_rc->add_option("--out", rc.out, "output dataset directory")->required();
    c_rc->add_flag("--raw", rc.raw, "skip the inverse preprocessing map");
    add_config(c_rc);
    c_rc->callback([&] { run_reconstruct(rc); });

    BuildReferenceOpts br;
    auto* c_br = app.add_subcommand("build-reference", "fit the DWT-GMM and KDE benchmark references");
    c_br->add_option("--data", br.data, "real dataset directory")->required();
    c_br->add_option("--out", br.out, "output reference directory")->required();
    c_br->add_option("--k", br.k)->capture_default_str();
    c_br->add_option("--k-sweep", br.k_sweep, "comma-separated K values chosen by validation NLL");
    c_br->add_option("--cov", br.cov)->check(CLI::IsMember({"full", "diag"}))->capture_default_str();
    c_br->add_option("--reg", br.reg);
    c_br->add_option("--seed", br.seed)->capture_default_str();
    c_br->add_option("--max-iter", br.max_iter)->capture_default_str();
    c_br->add_option("--tol", br.tol)->capture_default_str();
    c_br->add_option("--kde-dim", br.kde_dim, "PCA dimension for the KDE reference (0 = pixels)")
        ->capture_default_str();
    c_br->add_option("--kde-rule", br.kde_rule, "scott | silverman | fixed:<h>")->capture_default_str();
    add_config(c_br);
    c_br->callback([&] { run_build_reference(br); });

    EvaluateOpts ev;
    auto* c_ev = app.add_subcommand("evaluate", "score generated images against the references");
    c_ev->add_option("--reference", ev.reference, "reference directory")->required();
    c_ev->add_option("--real", ev.real, "real dataset directory")->required();
    c_ev->add_option("--generated", ev.generated, "generated dataset directory")->required();
    c_ev->add_option("--out", ev.out, "output directory (report.txt, nll.csv)")->required();
    c_ev->add_option("--interval", ev.interval, "percentile:lo,hi or fixed:a,b")->capture_default_str();
    c_ev->add_option("--grid", ev.grid, "density curve grid points")->capture_default_str();
    c_ev->add_option("--curve-bandwidth", ev.curve_bandwidth)->capture_default_str();
    c_ev->add_option("--model-id", ev.model_id);
    add_config(c_ev);
    c_ev->callback([&] { run_evaluate(ev); });

    PlotOpts pl;
    auto* c_pl = app.add_subcommand("plot", "write NLL density curves as SVG and CSV");
    c_pl->add_option("--report", pl.report, "evaluate output directory")->required();
    c_pl->add_option("--out", pl.out, "output directory (default: the report directory)");
    c_pl->add_option("--title", pl.title)->capture_default_str();
    add_config(c_pl);
    c_pl->callback([&] { run_plot(pl); });

    SweepOpts sw;
    auto* c_sw = app.add_subcommand("sweep-d", "PCA reconstruction error as a function of d");
    c_sw->add_option("--data", sw.data, "dataset directory")->required();
    c_sw->add_option("--out", sw.out, "output CSV")->required();
    c_sw->add_option("--d-min", sw.d_min)->capture_default_str();
    c_sw->add_option("--d-max", sw.d_max, "largest d (0 = H*W)")->capture_default_str();
    c_sw->add_option("--step", sw.step)->capture_default_str();
    c_sw->add_option("--threshold", sw.threshold, "report the smallest d with mean error <= this");
    c_sw->add_flag("--centered", sw.centered);
    add_config(c_sw);
    c_sw->callback([&] { run_sweep_d(sw); });

    try {
        std::vector<std::string> args = with_config_file(app, argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const Error& e) {
        std::cerr << "basisgen: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "basisgen: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "basisgen: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
