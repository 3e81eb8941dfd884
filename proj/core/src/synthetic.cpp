#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "basisgen/dataset.hpp"
#include "basisgen/error.hpp"

namespace basisgen {

void XgcSurrogateConfig::validate() const {
    require(n_nodes >= 1, ErrorKind::Config, "n_nodes must be at least 1");
    require(height >= 8 && width >= 8, ErrorKind::Config, "surrogate images must be at least 8x8");
    require(components_per_node.first >= 1 && components_per_node.first <= components_per_node.second,
            ErrorKind::Config, "invalid components_per_node range");
    require(range_scale.first > 0.0 && range_scale.first <= range_scale.second, ErrorKind::Config,
            "range_scale must satisfy 0 < min <= max");
}

DatasetTensor synth_xgc(const XgcSurrogateConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> ncomp(cfg.components_per_node.first, cfg.components_per_node.second);

    const std::size_t h = cfg.height;
    const std::size_t w = cfg.width;
    const std::size_t p = h * w;
    std::vector<double> values(cfg.n_nodes * p);
    std::vector<double> hist(p);

    for (std::size_t i = 0; i < cfg.n_nodes; ++i) {
        std::fill(hist.begin(), hist.end(), 0.0);
        const std::size_t k = ncomp(rng);
        for (std::size_t c = 0; c < k; ++c) {
            // axes: rows ~ parallel velocity, columns ~ perpendicular velocity
            const double mu_r = 0.25 + 0.5 * unit(rng);
            const double mu_c = 0.15 + 0.5 * unit(rng);
            const double sd_r = 0.06 + 0.14 * unit(rng);
            const double sd_c = 0.06 + 0.14 * unit(rng);
            const double rho = -0.5 + unit(rng);
            const double weight = 0.5 + unit(rng);
            const double norm = weight / (2.0 * std::numbers::pi * sd_r * sd_c * std::sqrt(1.0 - rho * rho));
            for (std::size_t r = 0; r < h; ++r) {
                const double zr = ((static_cast<double>(r) + 0.5) / static_cast<double>(h) - mu_r) / sd_r;
                for (std::size_t col = 0; col < w; ++col) {
                    const double zc = ((static_cast<double>(col) + 0.5) / static_cast<double>(w) - mu_c) / sd_c;
                    const double q = (zr * zr - 2.0 * rho * zr * zc + zc * zc) / (1.0 - rho * rho);
                    hist[r * w + col] += norm * std::exp(-0.5 * q);
                }
            }
        }
        // counting noise plus a thin thermal floor
        double total = 0.0;
        for (auto& v : hist) {
            v = std::max(0.0, v * (1.0 + 0.05 * normal(rng)) + 1e-3 * unit(rng));
            total += v;
        }
        const double scale = cfg.range_scale.first + (cfg.range_scale.second - cfg.range_scale.first) * unit(rng);
        // image mean equals the drawn scale factor
        const double factor = scale * static_cast<double>(p) / total;
        for (std::size_t j = 0; j < p; ++j) {
            values[i * p + j] = hist[j] * factor;
        }
    }
    return DatasetTensor(cfg.n_nodes, h, w, std::move(values), ValueDomain::Raw);
}

namespace {

enum class Garment { TShirt, Trouser, Pullover, Dress, Coat, Sandal, Shirt, Sneaker, Bag, AnkleBoot };
constexpr int kGarmentKinds = 10;

struct GarmentShape {
    Garment kind;
    double cx;
    double scale;
    double sleeve;
    double flare;
    double gap;
};

// Coverage test in normalised coordinates: x to the right, y downward, both in [0,1].
bool inside(const GarmentShape& g, double x, double y) {
    const double dx = (x - g.cx) / g.scale;
    const double ax = std::abs(dx);
    switch (g.kind) {
    case Garment::TShirt:
    case Garment::Shirt:
    case Garment::Pullover:
    case Garment::Coat: {
        const bool long_sleeves = g.kind == Garment::Pullover || g.kind == Garment::Coat;
        const double half = g.kind == Garment::Coat ? 0.26 : 0.22;
        const double bottom = g.kind == Garment::Coat ? 0.95 : 0.9;
        const bool neck = std::hypot(dx, y - 0.12) < 0.08;
        const bool torso = ax < half && y > 0.14 && y < bottom;
        const double sleeve_end = long_sleeves ? 0.82 : 0.38 + 0.1 * g.sleeve;
        const bool sleeve = y > 0.14 + 0.25 * (ax - half) && y < sleeve_end &&
                            ax >= half && ax < half + 0.12 + 0.06 * g.sleeve - (long_sleeves ? 0.0 : 0.04);
        return (torso || sleeve) && !neck;
    }
    case Garment::Trouser: {
        const bool waist = y > 0.06 && y < 0.24 && ax < 0.2;
        const double leg_half = 0.09 + 0.02 * g.flare + 0.02 * y;
        const double leg_center = 0.1 + 0.04 * g.gap;
        const bool leg = y >= 0.2 && y < 0.96 && std::abs(ax - leg_center) < leg_half;
        return waist || leg;
    }
    case Garment::Dress: {
        const double half = 0.1 + (0.18 + 0.1 * g.flare) * std::max(0.0, y - 0.1);
        return y > 0.08 && y < 0.95 && ax < half && !(std::hypot(dx, y - 0.06) < 0.06);
    }
    case Garment::Sandal: {
        const bool sole = y > 0.76 && y < 0.84 && x > 0.06 && x < 0.94;
        const double phase = std::fmod((x + g.gap) * 5.0, 1.0);
        const bool strap = y > 0.5 - 0.1 * g.sleeve && y < 0.76 && x > 0.15 && x < 0.85 && phase < 0.5;
        return sole || strap;
    }
    case Garment::Sneaker: {
        const double top = 0.62 - 0.18 * std::clamp(x - 0.35, 0.0, 0.6) / 0.6 - 0.04 * g.flare;
        return x > 0.05 && x < 0.95 && y > top && y < 0.84;
    }
    case Garment::Bag: {
        const bool body = ax < 0.32 && y > 0.38 && y < 0.9;
        const double r = std::hypot(dx, (y - 0.4) * 1.3);
        const bool handle = y < 0.4 && r > 0.16 + 0.03 * g.sleeve && r < 0.22 + 0.03 * g.sleeve;
        return body || handle;
    }
    case Garment::AnkleBoot: {
        const bool shaft = x > 0.5 && x < 0.88 && y > 0.14 + 0.05 * g.flare && y < 0.8;
        const bool foot = x > 0.08 && x < 0.9 && y > 0.58 && y < 0.88;
        return shaft || foot;
    }
    }
    return false;
}

}  // namespace

DatasetTensor synth_garments(const GarmentSurrogateConfig& cfg) {
    constexpr std::size_t side = 28;
    constexpr std::size_t p = side * side;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> kind(0, kGarmentKinds - 1);

    std::vector<double> values(cfg.n_images * p, 0.0);
    for (std::size_t i = 0; i < cfg.n_images; ++i) {
        GarmentShape g{static_cast<Garment>(kind(rng)), 0.5 + 0.05 * (unit(rng) - 0.5), 0.85 + 0.2 * unit(rng),
                       unit(rng), unit(rng), unit(rng)};
        const double brightness = 0.35 + 0.6 * unit(rng);
        const double stripe_amp = unit(rng) < 0.4 ? 0.25 * unit(rng) : 0.0;
        const double stripe_freq = 6.0 + 10.0 * unit(rng);
        const double stripe_angle = std::numbers::pi * unit(rng);
        const double shade = 0.3 * (unit(rng) - 0.5);
        const double ca = std::cos(stripe_angle);
        const double sa = std::sin(stripe_angle);

        for (std::size_t r = 0; r < side; ++r) {
            for (std::size_t c = 0; c < side; ++c) {
                // 3x3 supersampled coverage gives soft silhouette edges
                int hits = 0;
                for (int sy = 0; sy < 3; ++sy) {
                    for (int sx = 0; sx < 3; ++sx) {
                        const double x = (static_cast<double>(c) + (sx + 0.5) / 3.0) / side;
                        const double y = (static_cast<double>(r) + (sy + 0.5) / 3.0) / side;
                        hits += inside(g, x, y) ? 1 : 0;
                    }
                }
                if (hits == 0) {
                    continue;
                }
                const double x = (static_cast<double>(c) + 0.5) / side;
                const double y = (static_cast<double>(r) + 0.5) / side;
                double v = brightness + shade * (y - 0.5) +
                           stripe_amp * std::sin(2.0 * std::numbers::pi * stripe_freq * (ca * x + sa * y)) +
                           0.06 * normal(rng);
                v *= static_cast<double>(hits) / 9.0;
                v = std::clamp(v, 0.0, 1.0);
                values[i * p + r * side + c] = std::round(v * 255.0) / 255.0;
            }
        }
    }
    return DatasetTensor(cfg.n_images, side, side, std::move(values), ValueDomain::UnitInterval);
}

}  // namespace basisgen
