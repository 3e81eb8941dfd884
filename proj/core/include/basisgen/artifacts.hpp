#pragma once

// On-disk artifacts are directories of HGMC containers. Each directory holds
// meta.hgmc, an empty vector container whose metadata names the artifact
// kind and carries the provenance of the run that wrote it. Provenance keys
// start with "stage.".

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include "basisgen/basis.hpp"
#include "basisgen/benchmark.hpp"
#include "basisgen/dataset.hpp"
#include "basisgen/gmm.hpp"

namespace basisgen {

using Metadata = std::map<std::string, std::string>;

/// Keys of `meta` that start with "stage.".
Metadata provenance_of(const Metadata& meta);

Metadata read_meta(const std::filesystem::path& dir);
/// Value of the "artifact" key ("dataset", "basis", "gmm", "reference").
std::string artifact_kind(const std::filesystem::path& dir);

struct DatasetArtifact {
    DatasetTensor data;
    std::string dataset_id;
    Metadata provenance;
};

void save_dataset(const DatasetArtifact& a, const std::filesystem::path& dir);
DatasetArtifact load_dataset(const std::filesystem::path& dir);

struct BasisArtifact {
    BasisModel basis;
    std::string basis_id;
    std::string dataset_id;
    std::size_t height = 0;
    std::size_t width = 0;
    ValueDomain domain = ValueDomain::Raw;  // domain of the images the basis was fit on
    Metadata provenance;
};

void save_basis(const BasisArtifact& a, const std::filesystem::path& dir);
BasisArtifact load_basis(const std::filesystem::path& dir);

enum class GmmRole { Generator, Reference };

struct GmmArtifact {
    GmmModel model;
    GmmRole role = GmmRole::Generator;
    std::string basis_id;
    std::string dataset_id;
    Metadata provenance;
};

void save_gmm(const GmmArtifact& a, const std::filesystem::path& dir);
/// Also reads the mixture inside a reference directory (role = Reference).
GmmArtifact load_gmm(const std::filesystem::path& dir);

struct ReferenceArtifact {
    ReferenceModel dwt;
    KdeReference kde;
    Metadata provenance;
};

void save_reference(const ReferenceArtifact& a, const std::filesystem::path& dir);
ReferenceArtifact load_reference(const std::filesystem::path& dir);

}  // namespace basisgen
