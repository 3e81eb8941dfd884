#include "basisgen/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "basisgen/error.hpp"

namespace basisgen {

std::string_view to_string(ValueDomain domain) {
    switch (domain) {
    case ValueDomain::UnitInterval: return "unit";
    case ValueDomain::LogitSpace: return "logit";
    case ValueDomain::ZScored: return "zscored";
    case ValueDomain::Raw: return "raw";
    }
    return "raw";
}

ValueDomain parse_value_domain(std::string_view text) {
    if (text == "unit") return ValueDomain::UnitInterval;
    if (text == "logit") return ValueDomain::LogitSpace;
    if (text == "zscored") return ValueDomain::ZScored;
    if (text == "raw") return ValueDomain::Raw;
    fail(ErrorKind::Format, "unknown value domain '" + std::string(text) + "'");
}

std::string_view to_string(PreprocessMode mode) {
    switch (mode) {
    case PreprocessMode::LogitMap: return "logit";
    case PreprocessMode::PerImageZScore: return "zscore";
    case PreprocessMode::None: return "none";
    }
    return "none";
}

PreprocessMode parse_preprocess_mode(std::string_view text) {
    if (text == "logit") return PreprocessMode::LogitMap;
    if (text == "zscore") return PreprocessMode::PerImageZScore;
    if (text == "none") return PreprocessMode::None;
    fail(ErrorKind::Config, "unknown preprocess mode '" + std::string(text) + "'");
}

DatasetTensor::DatasetTensor(std::size_t n, std::size_t height, std::size_t width,
                             std::vector<double> values, ValueDomain domain,
                             std::optional<std::vector<ImageStats>> stats)
    : n_(n), height_(height), width_(width), values_(std::move(values)), domain_(domain),
      stats_(std::move(stats)) {
    require(height_ > 0 && width_ > 0, ErrorKind::Dimension, "image dimensions must be positive");
    require(values_.size() == n_ * height_ * width_, ErrorKind::Dimension,
            "value count " + std::to_string(values_.size()) + " does not match N*H*W = " +
                std::to_string(n_ * height_ * width_));
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!std::isfinite(v)) {
            fail(ErrorKind::Domain, "non-finite value in image " + std::to_string(i / pixels()));
        }
        if (domain_ == ValueDomain::UnitInterval && (v < 0.0 || v > 1.0)) {
            fail(ErrorKind::Domain,
                 "unit-interval dataset has value outside [0,1] in image " + std::to_string(i / pixels()));
        }
    }
    if (stats_) {
        require(stats_->size() == n_, ErrorKind::Dimension, "per-image stats length must equal N");
        for (std::size_t i = 0; i < n_; ++i) {
            require((*stats_)[i].std > 0.0 && std::isfinite((*stats_)[i].mean), ErrorKind::Domain,
                    "invalid stats for image " + std::to_string(i));
        }
    }
}

DatasetTensor DatasetTensor::from_rows(const RowMatrix& rows, std::size_t height, std::size_t width,
                                       ValueDomain domain) {
    require(static_cast<std::size_t>(rows.cols()) == height * width, ErrorKind::Dimension,
            "row length does not match H*W");
    std::vector<double> values(rows.data(), rows.data() + rows.size());
    return DatasetTensor(static_cast<std::size_t>(rows.rows()), height, width, std::move(values), domain);
}

std::span<const double> DatasetTensor::image(std::size_t index) const {
    require(index < n_, ErrorKind::Dimension, "image index out of range");
    return {values_.data() + index * pixels(), pixels()};
}

Matrix DatasetTensor::image_matrix(std::size_t index) const {
    auto img = image(index);
    return Eigen::Map<const RowMatrix>(img.data(), static_cast<Eigen::Index>(height_),
                                       static_cast<Eigen::Index>(width_));
}

Eigen::Map<const RowMatrix> DatasetTensor::rows() const {
    return {values_.data(), static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(pixels())};
}

DatasetTensor DatasetTensor::head(std::size_t count) const {
    count = std::min(count, n_);
    std::vector<double> values(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(count * pixels()));
    std::optional<std::vector<ImageStats>> stats;
    if (stats_) {
        stats.emplace(stats_->begin(), stats_->begin() + static_cast<std::ptrdiff_t>(count));
    }
    return DatasetTensor(count, height_, width_, std::move(values), domain_, std::move(stats));
}

void PreprocessConfig::validate() const {
    require(epsilon > 0.0 && epsilon < 0.5, ErrorKind::Config, "epsilon must lie in (0, 0.5)");
    require(beta > 0.0, ErrorKind::Config, "beta must be positive");
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (in.gcount() != 4) {
        fail(ErrorKind::Io, "truncated IDX header in " + path.string());
    }
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>((v >> 16) & 0xFF),
                                static_cast<char>((v >> 8) & 0xFF), static_cast<char>(v & 0xFF)};
    out.write(b.data(), 4);
}

constexpr std::uint32_t kIdxMagicU8Rank3 = 0x00000803;

}  // namespace

DatasetTensor load_idx(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open " + path.string());
    }
    const std::uint32_t magic = read_be32(in, path);
    if (magic != kIdxMagicU8Rank3) {
        char hex[11];
        std::snprintf(hex, sizeof(hex), "0x%08x", magic);
        fail(ErrorKind::Format, path.string() + ": expected IDX magic 0x00000803, found " + hex);
    }
    const std::size_t n = read_be32(in, path);
    const std::size_t h = read_be32(in, path);
    const std::size_t w = read_be32(in, path);
    require(h > 0 && w > 0, ErrorKind::Format, path.string() + ": zero image dimension");

    std::vector<unsigned char> bytes(n * h * w);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        fail(ErrorKind::Io, path.string() + ": truncated payload (expected " + std::to_string(bytes.size()) +
                                " bytes, got " + std::to_string(in.gcount()) + ")");
    }
    std::vector<double> values(bytes.size());
    std::transform(bytes.begin(), bytes.end(), values.begin(),
                   [](unsigned char b) { return static_cast<double>(b) / 255.0; });
    return DatasetTensor(n, h, w, std::move(values), ValueDomain::UnitInterval);
}

void write_idx(const DatasetTensor& data, const std::filesystem::path& path) {
    require(data.domain() == ValueDomain::UnitInterval, ErrorKind::Domain,
            "IDX export requires unit-interval data");
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorKind::Io, "cannot write " + path.string());
    }
    write_be32(out, kIdxMagicU8Rank3);
    write_be32(out, static_cast<std::uint32_t>(data.size()));
    write_be32(out, static_cast<std::uint32_t>(data.height()));
    write_be32(out, static_cast<std::uint32_t>(data.width()));
    std::vector<char> bytes(data.values().size());
    std::transform(data.values().begin(), data.values().end(), bytes.begin(), [](double v) {
        return static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    });
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        fail(ErrorKind::Io, "short write to " + path.string());
    }
}

double logit_value(double x, const PreprocessConfig& cfg) {
    const double c = std::clamp(x, cfg.epsilon, 1.0 - cfg.epsilon);
    return std::log(c / (cfg.beta * (1.0 - c)));
}

double sigmoid_value(double y, double beta) {
    // beta e^y / (1 + beta e^y) == 1 / (1 + e^-(y + ln beta))
    const double t = y + std::log(beta);
    double x;
    if (t >= 0.0) {
        x = 1.0 / (1.0 + std::exp(-t));
    } else {
        const double e = std::exp(t);
        x = e / (1.0 + e);
    }
    // Saturated tails stay strictly inside (0,1).
    return std::clamp(x, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
}

DatasetTensor logit_map(const DatasetTensor& data, const PreprocessConfig& cfg) {
    cfg.validate();
    require(data.domain() == ValueDomain::UnitInterval, ErrorKind::Domain,
            "logit map requires unit-interval data, got " + std::string(to_string(data.domain())));
    std::vector<double> out(data.values().size());
    std::transform(data.values().begin(), data.values().end(), out.begin(),
                   [&](double x) { return logit_value(x, cfg); });
    return DatasetTensor(data.size(), data.height(), data.width(), std::move(out), ValueDomain::LogitSpace);
}

DatasetTensor sigmoid_unmap(const DatasetTensor& data, const PreprocessConfig& cfg) {
    cfg.validate();
    require(data.domain() == ValueDomain::LogitSpace, ErrorKind::Domain,
            "sigmoid unmap requires logit-space data, got " + std::string(to_string(data.domain())));
    std::vector<double> out(data.values().size());
    std::transform(data.values().begin(), data.values().end(), out.begin(),
                   [&](double y) { return sigmoid_value(y, cfg.beta); });
    return DatasetTensor(data.size(), data.height(), data.width(), std::move(out), ValueDomain::UnitInterval);
}

DatasetTensor zscore_per_image(const DatasetTensor& data) {
    const std::size_t p = data.pixels();
    std::vector<double> out(data.values().size());
    std::vector<ImageStats> stats(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto img = data.image(i);
        double sum = 0.0;
        double max_abs = 0.0;
        for (double v : img) {
            sum += v;
            max_abs = std::max(max_abs, std::abs(v));
        }
        const double mean = sum / static_cast<double>(p);
        double ss = 0.0;
        for (double v : img) {
            ss += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(ss / static_cast<double>(p));
        if (!(sd > 1e-12 * max_abs)) {
            fail(ErrorKind::Degenerate, "image " + std::to_string(i) + " has zero variance");
        }
        for (std::size_t j = 0; j < p; ++j) {
            out[i * p + j] = (img[j] - mean) / sd;
        }
        // Re-standardising an already standardised tensor composes the stats so
        // that a single inversion still recovers the raw values.
        if (data.per_image_stats()) {
            const auto& prev = (*data.per_image_stats())[i];
            stats[i] = {prev.mean + prev.std * mean, prev.std * sd};
        } else {
            stats[i] = {mean, sd};
        }
    }
    return DatasetTensor(data.size(), data.height(), data.width(), std::move(out), ValueDomain::ZScored,
                         std::move(stats));
}

DatasetTensor zscore_invert(const DatasetTensor& data) {
    require(data.domain() == ValueDomain::ZScored && data.per_image_stats().has_value(), ErrorKind::Domain,
            "Z-score inversion requires a Z-scored tensor with per-image stats");
    const std::size_t p = data.pixels();
    const auto& stats = *data.per_image_stats();
    std::vector<double> out(data.values().size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            out[i * p + j] = stats[i].mean + stats[i].std * data.values()[i * p + j];
        }
    }
    return DatasetTensor(data.size(), data.height(), data.width(), std::move(out), ValueDomain::Raw);
}

DatasetTensor preprocess(const DatasetTensor& data, const PreprocessConfig& cfg) {
    switch (cfg.mode) {
    case PreprocessMode::LogitMap: return logit_map(data, cfg);
    case PreprocessMode::PerImageZScore: return zscore_per_image(data);
    case PreprocessMode::None: return data;
    }
    return data;
}

DatasetTensor release_clamp(const DatasetTensor& data, const PreprocessConfig& cfg) {
    require(data.domain() == ValueDomain::UnitInterval, ErrorKind::Domain, "release_clamp expects unit-interval data");
    cfg.validate();
    // sigmoid(logit(eps)) can land an ulp or two off eps
    const double lo = cfg.epsilon * (1.0 + 1e-9);
    const double hi = 1.0 - lo;
    std::vector<double> values = data.values();
    for (double& v : values) {
        if (v <= lo) {
            v = 0.0;
        } else if (v >= hi) {
            v = 1.0;
        }
    }
    return DatasetTensor(data.size(), data.height(), data.width(), std::move(values), ValueDomain::UnitInterval,
                         data.per_image_stats());
}

DatasetTensor postprocess(const DatasetTensor& data, const PreprocessConfig& cfg) {
    if (data.domain() == ValueDomain::LogitSpace) {
        return release_clamp(sigmoid_unmap(data, cfg), cfg);
    }
    if (data.domain() == ValueDomain::ZScored && data.per_image_stats()) {
        return zscore_invert(data);
    }
    return data;
}

}  // namespace basisgen
