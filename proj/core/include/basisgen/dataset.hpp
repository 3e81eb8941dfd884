#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "basisgen/linalg.hpp"

namespace basisgen {

enum class ValueDomain { UnitInterval, LogitSpace, ZScored, Raw };

std::string_view to_string(ValueDomain domain);
ValueDomain parse_value_domain(std::string_view text);

struct ImageStats {
    double mean = 0.0;
    double std = 1.0;
};

/// N stacked H x W grids stored contiguously, image-major then row-major.
///
/// Construction validates every invariant (finite values, unit-interval range
/// when declared, positive per-image std). Instances are immutable afterwards.
class DatasetTensor {
public:
    DatasetTensor(std::size_t n, std::size_t height, std::size_t width, std::vector<double> values,
                  ValueDomain domain, std::optional<std::vector<ImageStats>> stats = std::nullopt);

    /// Wraps a sample-per-row matrix (N x H*W).
    static DatasetTensor from_rows(const RowMatrix& rows, std::size_t height, std::size_t width,
                                   ValueDomain domain);

    std::size_t size() const noexcept { return n_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t pixels() const noexcept { return height_ * width_; }
    ValueDomain domain() const noexcept { return domain_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::optional<std::vector<ImageStats>>& per_image_stats() const noexcept { return stats_; }

    std::span<const double> image(std::size_t index) const;
    double at(std::size_t index, std::size_t row, std::size_t col) const {
        return values_[(index * height_ + row) * width_ + col];
    }

    /// Image `index` as an H x W matrix copy.
    Matrix image_matrix(std::size_t index) const;

    /// View of the data as N x (H*W), one flattened image per row.
    Eigen::Map<const RowMatrix> rows() const;

    /// Subset of the first `count` images (all of them if count >= size()).
    DatasetTensor head(std::size_t count) const;

private:
    std::size_t n_;
    std::size_t height_;
    std::size_t width_;
    std::vector<double> values_;
    ValueDomain domain_;
    std::optional<std::vector<ImageStats>> stats_;
};

enum class PreprocessMode { LogitMap, PerImageZScore, None };

std::string_view to_string(PreprocessMode mode);
PreprocessMode parse_preprocess_mode(std::string_view text);

struct PreprocessConfig {
    double epsilon = 0.001;
    double beta = 1.0;
    PreprocessMode mode = PreprocessMode::LogitMap;

    void validate() const;
};

// IDX (unsigned byte, rank 3): big-endian magic 0x00000803, dims N,H,W, then bytes.
DatasetTensor load_idx(const std::filesystem::path& path);
void write_idx(const DatasetTensor& data, const std::filesystem::path& path);

/// Clamps to [eps, 1-eps] and applies y = ln(x / (beta (1-x))).
DatasetTensor logit_map(const DatasetTensor& data, const PreprocessConfig& cfg);
/// x = beta e^y / (1 + beta e^y), evaluated without overflow for large |y|.
DatasetTensor sigmoid_unmap(const DatasetTensor& data, const PreprocessConfig& cfg);

double logit_value(double x, const PreprocessConfig& cfg);
double sigmoid_value(double y, double beta);

/// Per-image standardisation with population std; original stats are kept.
DatasetTensor zscore_per_image(const DatasetTensor& data);
/// Restores raw values from a ZScored tensor carrying per-image stats.
DatasetTensor zscore_invert(const DatasetTensor& data);

/// Sends values within the clamp band (<= eps or >= 1-eps) back to 0 or 1.
/// Exact inverse of the clamp for data with no values strictly inside the band,
/// such as 8-bit images with eps < 1/255.
DatasetTensor release_clamp(const DatasetTensor& data, const PreprocessConfig& cfg);

/// Applies the preprocessing selected by cfg.mode.
DatasetTensor preprocess(const DatasetTensor& data, const PreprocessConfig& cfg);
/// Inverse of preprocess where one exists: LogitSpace -> sigmoid then release_clamp;
/// ZScored with per-image stats -> Raw; anything else unchanged.
DatasetTensor postprocess(const DatasetTensor& data, const PreprocessConfig& cfg);

struct XgcSurrogateConfig {
    std::size_t n_nodes = 1000;
    std::size_t height = 32;
    std::size_t width = 32;
    std::pair<std::size_t, std::size_t> components_per_node{1, 3};
    std::uint64_t seed = 7;
    std::pair<double, double> range_scale{0.5, 50.0};

    void validate() const;
};

/// Velocity-histogram-like images: each is a mixture of 2D Gaussian bumps
/// discretised on the grid, then scaled by a per-image factor drawn uniformly
/// from range_scale, so images do not share a common value range.
DatasetTensor synth_xgc(const XgcSurrogateConfig& cfg);

struct GarmentSurrogateConfig {
    std::size_t n_images = 1000;
    std::uint64_t seed = 11;
};

/// 28x28 unit-interval garment silhouettes (tops, trousers, dresses, bags,
/// shoes, ...) with textured interiors on a zero background, quantised to
/// 8 bits. Stand-in for Fashion-MNIST when the IDX files are not available.
DatasetTensor synth_garments(const GarmentSurrogateConfig& cfg);

}  // namespace basisgen
