#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <fstream>
#include <random>
#include <set>

#include "basisgen/dataset.hpp"
#include "basisgen/error.hpp"

using namespace basisgen;
namespace fs = std::filesystem;

namespace {

fs::path write_bytes(const std::string& name, const std::vector<unsigned char>& bytes) {
    const fs::path p = fs::path(::testing::TempDir()) / name;
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return p;
}

std::vector<unsigned char> idx_header(std::uint32_t magic, std::uint32_t n, std::uint32_t h, std::uint32_t w) {
    std::vector<unsigned char> b;
    for (std::uint32_t v : {magic, n, h, w}) {
        for (int s = 24; s >= 0; s -= 8) {
            b.push_back(static_cast<unsigned char>((v >> s) & 0xFF));
        }
    }
    return b;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Config;
}

DatasetTensor unit_tensor(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n * h * w);
    for (auto& x : v) {
        x = u(rng);
    }
    return DatasetTensor(n, h, w, std::move(v), ValueDomain::UnitInterval);
}

}  // namespace

TEST(DatasetTensor, RejectsInvariantViolations) {
    EXPECT_EQ(kind_of([] { DatasetTensor(1, 1, 2, {0.5, NAN}, ValueDomain::Raw); }), ErrorKind::Domain);
    EXPECT_EQ(kind_of([] { DatasetTensor(1, 1, 2, {0.5, 1.5}, ValueDomain::UnitInterval); }), ErrorKind::Domain);
    EXPECT_EQ(kind_of([] { DatasetTensor(2, 1, 2, {0.5, 0.5}, ValueDomain::Raw); }), ErrorKind::Dimension);
    EXPECT_EQ(kind_of([] {
                  DatasetTensor(1, 1, 2, {0.5, 0.7}, ValueDomain::Raw, std::vector<ImageStats>{{0.0, 0.0}});
              }),
              ErrorKind::Domain);
}

TEST(LoadIdx, ScalesEndpoints) {
    auto bytes = idx_header(0x00000803, 1, 2, 2);
    bytes.insert(bytes.end(), {0, 255, 0, 255});
    const DatasetTensor t = load_idx(write_bytes("endpoints.idx", bytes));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.height(), 2u);
    EXPECT_EQ(t.values(), (std::vector<double>{0.0, 1.0, 0.0, 1.0}));
    EXPECT_EQ(t.domain(), ValueDomain::UnitInterval);
}

TEST(LoadIdx, RankOneMagicIsFormatError) {
    auto bytes = idx_header(0x00000801, 4, 0, 0);
    EXPECT_EQ(kind_of([&] { load_idx(write_bytes("rank1.idx", bytes)); }), ErrorKind::Format);
}

TEST(LoadIdx, TruncatedPayloadIsIoError) {
    auto bytes = idx_header(0x00000803, 2, 2, 2);
    bytes.insert(bytes.end(), {1, 2, 3});
    EXPECT_EQ(kind_of([&] { load_idx(write_bytes("short.idx", bytes)); }), ErrorKind::Io);
}

TEST(LoadIdx, WriteThenLoadIsIdentityOnByteValues) {
    std::vector<double> v;
    for (int i = 0; i < 2 * 3 * 4; ++i) {
        v.push_back(static_cast<double>((i * 37) % 256) / 255.0);
    }
    const DatasetTensor t(2, 3, 4, v, ValueDomain::UnitInterval);
    const fs::path p = fs::path(::testing::TempDir()) / "rt.idx";
    write_idx(t, p);
    EXPECT_EQ(load_idx(p).values(), v);
    EXPECT_EQ(load_idx(p).values(), load_idx(p).values());
}

TEST(LogitMap, MidpointAndClampedZero) {
    PreprocessConfig cfg;
    EXPECT_EQ(logit_value(0.5, cfg), 0.0);
    // mpmath, 50 digits: ln(0.001 / 0.999)
    EXPECT_NEAR(logit_value(0.0, cfg), -6.9067547786485535185538, 1e-14);
    EXPECT_NEAR(logit_value(1.0, cfg), 6.9067547786485535185538, 1e-14);
    cfg.beta = 2.0;
    EXPECT_NEAR(logit_value(0.25, cfg), -1.7917594692280550008125, 1e-14);
}

TEST(LogitMap, RequiresUnitInterval) {
    const DatasetTensor raw(1, 1, 2, {0.2, 3.0}, ValueDomain::Raw);
    EXPECT_EQ(kind_of([&] { logit_map(raw, {}); }), ErrorKind::Domain);
    const DatasetTensor unit(1, 1, 2, {0.2, 0.3}, ValueDomain::UnitInterval);
    EXPECT_EQ(kind_of([&] { sigmoid_unmap(unit, {}); }), ErrorKind::Domain);
}

TEST(SigmoidUnmap, KnownValuesAndSaturation) {
    EXPECT_EQ(sigmoid_value(0.0, 1.0), 0.5);
    // mpmath: 1 / (1 + e^6.90676)
    EXPECT_NEAR(sigmoid_value(-6.90676, 1.0), 0.00099999478388349533, 1e-17);
    EXPECT_NEAR(sigmoid_value(3.0, 0.5), 0.90944299851274186873, 1e-15);
    const double top = sigmoid_value(1e3, 1.0);
    EXPECT_TRUE(std::isfinite(top));
    EXPECT_LT(top, 1.0);
    const double bottom = sigmoid_value(-1e3, 1.0);
    EXPECT_GT(bottom, 0.0);
}

TEST(SigmoidUnmap, OutputLiesInsideOpenUnitInterval) {
    const DatasetTensor y(1, 1, 4, {-1e308, -800.0, 800.0, 1e308}, ValueDomain::LogitSpace);
    const DatasetTensor x = sigmoid_unmap(y, {});
    for (double v : x.values()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(LogitMap, RoundTripOnClampInterval) {
    PreprocessConfig cfg;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(cfg.epsilon, 1.0 - cfg.epsilon);
    std::vector<double> v(1000);
    for (auto& x : v) {
        x = u(rng);
    }
    const DatasetTensor t(10, 10, 10, v, ValueDomain::UnitInterval);
    const DatasetTensor back = sigmoid_unmap(logit_map(t, cfg), cfg);
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_NEAR(back.values()[i], v[i], 1e-12);
    }
}

TEST(Postprocess, ReleasesClampOnEightBitImages) {
    std::vector<double> v;
    for (int b = 0; b < 256; ++b) {
        v.push_back(b / 255.0);
    }
    const DatasetTensor t(1, 16, 16, v, ValueDomain::UnitInterval);
    PreprocessConfig cfg;
    const DatasetTensor back = postprocess(logit_map(t, cfg), cfg);
    EXPECT_EQ(back.domain(), ValueDomain::UnitInterval);
    EXPECT_EQ(back.values()[0], 0.0);
    EXPECT_EQ(back.values()[255], 1.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_NEAR(back.values()[i], v[i], 1e-12);
    }
}

TEST(ZScore, WorkedExample) {
    const DatasetTensor t(1, 2, 2, {1, 2, 3, 4}, ValueDomain::Raw);
    const DatasetTensor z = zscore_per_image(t);
    ASSERT_TRUE(z.per_image_stats());
    EXPECT_EQ(z.domain(), ValueDomain::ZScored);
    EXPECT_DOUBLE_EQ((*z.per_image_stats())[0].mean, 2.5);
    EXPECT_NEAR((*z.per_image_stats())[0].std, 1.1180339887498948482, 1e-15);
    const std::vector<double> expected{-1.3416407864998738178, -0.44721359549995793928, 0.44721359549995793928,
                                       1.3416407864998738178};
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(z.values()[i], expected[i], 1e-15);
    }
}

TEST(ZScore, IdempotentOnNormalisedInput) {
    const DatasetTensor z = zscore_per_image(unit_tensor(5, 4, 6, 8));
    const DatasetTensor zz = zscore_per_image(z);
    for (std::size_t i = 0; i < z.values().size(); ++i) {
        EXPECT_NEAR(zz.values()[i], z.values()[i], 1e-12);
    }
    // composed stats still invert to the raw values
    const DatasetTensor raw = zscore_invert(zz);
    const DatasetTensor orig = unit_tensor(5, 4, 6, 8);
    for (std::size_t i = 0; i < raw.values().size(); ++i) {
        EXPECT_NEAR(raw.values()[i], orig.values()[i], 1e-10 * std::abs(orig.values()[i]) + 1e-15);
    }
}

TEST(ZScore, ConstantImageNamesIndex) {
    const DatasetTensor t(3, 2, 2, {1, 2, 3, 4, 5, 5, 5, 5, 0, 1, 0, 1}, ValueDomain::Raw);
    try {
        zscore_per_image(t);
        FAIL() << "expected degenerate error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Degenerate);
        EXPECT_NE(std::string(e.what()).find("image 1"), std::string::npos) << e.what();
    }
}

TEST(SynthXgc, DeterministicGivenSeed) {
    XgcSurrogateConfig cfg;
    cfg.n_nodes = 50;
    EXPECT_EQ(synth_xgc(cfg).values(), synth_xgc(cfg).values());
    cfg.seed = 8;
    XgcSurrogateConfig other = cfg;
    other.seed = 9;
    EXPECT_NE(synth_xgc(cfg).values(), synth_xgc(other).values());
}

TEST(SynthXgc, UnitRangeScaleGivesSharedFactor) {
    XgcSurrogateConfig cfg;
    cfg.n_nodes = 40;
    cfg.range_scale = {1.0, 1.0};
    const DatasetTensor t = synth_xgc(cfg);
    for (std::size_t i = 0; i < t.size(); ++i) {
        double sum = 0.0;
        for (double v : t.image(i)) {
            sum += v;
        }
        EXPECT_NEAR(sum / static_cast<double>(t.pixels()), 1.0, 1e-12);
    }
}

TEST(SynthXgc, PerImageMaximaDifferAtFullNodeCount) {
    XgcSurrogateConfig cfg;
    cfg.n_nodes = 12458;
    const DatasetTensor t = synth_xgc(cfg);
    ASSERT_EQ(t.size(), 12458u);
    ASSERT_EQ(t.height(), 32u);
    std::vector<double> maxima(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto img = t.image(i);
        maxima[i] = *std::max_element(img.begin(), img.end());
    }
    // pairs sharing a maximum = sum over groups of size g of g(g-1)/2
    std::map<double, std::size_t> groups;
    for (double m : maxima) {
        ++groups[m];
    }
    double equal_pairs = 0.0;
    for (const auto& [m, g] : groups) {
        equal_pairs += 0.5 * static_cast<double>(g) * static_cast<double>(g - 1);
    }
    const double pairs = 0.5 * 12458.0 * 12457.0;
    EXPECT_GE(1.0 - equal_pairs / pairs, 0.99);
}

TEST(SynthXgc, InvalidConfigRejected) {
    XgcSurrogateConfig cfg;
    cfg.height = 4;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.range_scale = {2.0, 1.0};
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(SynthGarments, EightBitUnitIntervalImages) {
    const DatasetTensor t = synth_garments({200, 3});
    EXPECT_EQ(t.height(), 28u);
    EXPECT_EQ(t.domain(), ValueDomain::UnitInterval);
    std::set<int> levels;
    for (double v : t.values()) {
        const double scaled = v * 255.0;
        EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
        levels.insert(static_cast<int>(std::round(scaled)));
    }
    EXPECT_GT(levels.size(), 100u);
    EXPECT_EQ(synth_garments({20, 3}).values(), synth_garments({20, 3}).values());
}

TEST(PreprocessConfig, Validation) {
    PreprocessConfig cfg;
    cfg.epsilon = 0.5;
    EXPECT_THROW(cfg.validate(), Error);
    cfg.epsilon = 0.001;
    cfg.beta = 0.0;
    EXPECT_THROW(cfg.validate(), Error);
}
