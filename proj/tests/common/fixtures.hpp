#pragma once

// Corrupted copies of an image set, used for ranking checks on the DWT metric.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "basisgen/dataset.hpp"

namespace basisgen::fixture {

/// Adds N(0, sigma^2) to every pixel; the result is Raw (no clipping).
inline DatasetTensor add_noise(const DatasetTensor& t, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    std::vector<double> v = t.values();
    for (auto& x : v) {
        x += g(rng);
    }
    return DatasetTensor(t.size(), t.height(), t.width(), std::move(v), ValueDomain::Raw);
}

/// Shuffles the pixels of each image independently.
inline DatasetTensor permute_pixels(const DatasetTensor& t, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> v = t.values();
    const std::size_t p = t.pixels();
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::shuffle(v.begin() + static_cast<std::ptrdiff_t>(i * p), v.begin() + static_cast<std::ptrdiff_t>((i + 1) * p),
                     rng);
    }
    return DatasetTensor(t.size(), t.height(), t.width(), std::move(v), t.domain());
}

/// Same images in a different order.
inline DatasetTensor shuffle_images(const DatasetTensor& t, std::uint64_t seed) {
    std::vector<std::size_t> order(t.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> v;
    v.reserve(t.values().size());
    for (std::size_t i : order) {
        const auto img = t.image(i);
        v.insert(v.end(), img.begin(), img.end());
    }
    return DatasetTensor(t.size(), t.height(), t.width(), std::move(v), t.domain());
}

}  // namespace basisgen::fixture
