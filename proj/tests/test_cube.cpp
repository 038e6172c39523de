#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "acmamba/cube_io.hpp"
#include "acmamba/errors.hpp"
#include "acmamba/rng.hpp"
#include "acmamba/synth.hpp"

using namespace acmamba;

namespace {

std::string tmpPath(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

HsiCube randomCube(Index h, Index w, Index c, std::uint64_t seed) {
    HsiCube cube(h, w, c);
    Rng rng(seed);
    for (auto& v : cube.values) v = static_cast<float>(rng.uniform(-3.0, 7.0));
    return cube;
}

} // namespace

TEST_CASE("container round-trip is bit-exact") {
    const HsiCube cube = randomCube(5, 7, 3, 11);
    const std::string path = tmpPath("acm_roundtrip.hsc1");
    saveCube(cube, path);
    const HsiCube back = loadCube(path);
    REQUIRE(back.height == cube.height);
    REQUIRE(back.width == cube.width);
    REQUIRE(back.bands == cube.bands);
    REQUIRE(back.values.size() == cube.values.size());
    for (std::size_t i = 0; i < cube.values.size(); ++i)
        CHECK(std::memcmp(&back.values[i], &cube.values[i], 4) == 0);
    std::filesystem::remove(path);
}

TEST_CASE("minimal 1x1x1 cube round-trips") {
    HsiCube cube(1, 1, 1);
    cube.values[0] = 0.5f;
    const std::string path = tmpPath("acm_minimal.hsc1");
    saveCube(cube, path);
    const HsiCube back = loadCube(path);
    CHECK(back.values[0] == 0.5f);
    std::filesystem::remove(path);
}

TEST_CASE("payload shorter than header declares -> SizeMismatch") {
    // header says 2x2x3 f32 (48 payload bytes) but only 40 are present
    const std::string header =
        R"({"height":2,"width":2,"bands":3,"dtype":"f32","layout":"bip"})";
    const std::string path = tmpPath("acm_short.hsc1");
    std::ofstream out(path, std::ios::binary);
    out << "HSC1";
    const std::uint32_t len = static_cast<std::uint32_t>(header.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out << header;
    const std::string payload(40, '\0');
    out << payload;
    out.close();
    CHECK_THROWS_AS(loadCube(path), SizeMismatchError);
    std::filesystem::remove(path);
}

TEST_CASE("missing file and bad magic") {
    CHECK_THROWS_AS(loadCube(tmpPath("acm_does_not_exist.hsc1")), MissingFileError);

    const std::string path = tmpPath("acm_badmagic.hsc1");
    std::ofstream out(path, std::ios::binary);
    out << "NOPE12345678";
    out.close();
    CHECK_THROWS_AS(loadCube(path), CorruptHeaderError);
    std::filesystem::remove(path);
}

TEST_CASE("save writes header + H*W*C*4 bytes exactly") {
    const HsiCube cube = randomCube(2, 2, 2, 3);
    const std::string path = tmpPath("acm_size.hsc1");
    saveCube(cube, path);
    const std::string header =
        R"({"height":2,"width":2,"bands":2,"dtype":"f32","layout":"bip"})";
    CHECK(std::filesystem::file_size(path) == 8 + header.size() + 2 * 2 * 2 * 4);
    std::filesystem::remove(path);
}

TEST_CASE("mask round-trip") {
    GroundTruthMask mask(3, 4);
    mask.at(1, 2) = 1;
    mask.at(2, 3) = 1;
    const std::string path = tmpPath("acm_mask.hsc1");
    saveMask(mask, path);
    const GroundTruthMask back = loadMask(path);
    CHECK(back.count() == 2);
    CHECK(back.at(1, 2) == 1);
    CHECK(back.at(0, 0) == 0);
    std::filesystem::remove(path);
}

TEST_CASE("normalize maps {2,4,6} to {0,0.5,1}") {
    HsiCube cube(1, 3, 1);
    cube.values = {2.0f, 4.0f, 6.0f};
    const HsiCube n = normalize(cube);
    CHECK(n.values[0] == doctest::Approx(0.0));
    CHECK(n.values[1] == doctest::Approx(0.5));
    CHECK(n.values[2] == doctest::Approx(1.0));
}

TEST_CASE("normalize sends constant bands to zero") {
    HsiCube cube(1, 3, 1);
    cube.values = {5.0f, 5.0f, 5.0f};
    const HsiCube n = normalize(cube);
    for (float v : n.values) CHECK(v == 0.0f);
}

TEST_CASE("normalize keeps an exact [0,1] band unchanged") {
    HsiCube cube(1, 3, 1);
    cube.values = {0.0f, 0.25f, 1.0f};
    const HsiCube n = normalize(cube);
    CHECK(n.values[0] == 0.0f);
    CHECK(n.values[1] == 0.25f);
    CHECK(n.values[2] == 1.0f);
}

TEST_CASE("normalize is idempotent") {
    const HsiCube cube = randomCube(6, 5, 4, 99);
    const HsiCube once = normalize(cube);
    const HsiCube twice = normalize(once);
    for (std::size_t i = 0; i < once.values.size(); ++i)
        CHECK(once.values[i] == twice.values[i]);
    for (float v : once.values) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("synth is a pure function of the spec") {
    SceneSpec spec;
    spec.height = 20;
    spec.width = 24;
    spec.bands = 6;
    spec.seed = 7;
    const auto [c1, m1] = synthScene(spec);
    const auto [c2, m2] = synthScene(spec);
    CHECK(c1.values == c2.values);
    CHECK(m1.labels == m2.labels);
}

TEST_CASE("pure mixture stays inside the endmember hull") {
    SceneSpec spec;
    spec.height = 16;
    spec.width = 16;
    spec.bands = 5;
    spec.n_anomalies = 0;
    spec.noise_sigma = 0.0;
    spec.seed = 3;
    const auto [cube, mask] = synthScene(spec);
    CHECK(mask.count() == 0);
    // Convex mixtures of endmembers in [0.05, 0.3] cannot leave that interval.
    for (float v : cube.values) {
        CHECK(v >= 0.05f - 1e-6f);
        CHECK(v <= 0.3f + 1e-6f);
    }
}

TEST_CASE("noise-free anomalies are exactly s * anomaly_spectrum") {
    SceneSpec with;
    with.height = 24;
    with.width = 24;
    with.bands = 8;
    with.n_anomalies = 3;
    with.noise_sigma = 0.0;
    with.seed = 5;
    SceneSpec without = with;
    without.n_anomalies = 0;

    const auto [cube_a, mask] = synthScene(with);
    const auto [cube_b, mask_b] = synthScene(without);
    REQUIRE(mask.count() > 0);
    REQUIRE(mask_b.count() == 0);

    // Backgrounds agree; anomalous pixels differ by a common direction with
    // per-blob scale s in [0.3, 0.7].
    VecXd ref;
    for (Index r = 0; r < with.height; ++r)
        for (Index c = 0; c < with.width; ++c) {
            VecXd diff(with.bands);
            for (Index b = 0; b < with.bands; ++b)
                diff(b) = static_cast<double>(cube_a.at(r, c, b)) - cube_b.at(r, c, b);
            if (!mask.at(r, c)) {
                CHECK(diff.norm() == 0.0);
                continue;
            }
            if (ref.size() == 0) ref = diff / diff.norm();
            const double cosv = std::abs(diff.normalized().dot(ref));
            CHECK(cosv == doctest::Approx(1.0).epsilon(1e-5));
        }
}

TEST_CASE("placement meets the target fraction when blobs are plentiful") {
    SceneSpec spec;
    spec.height = 100;
    spec.width = 100;
    spec.bands = 4;
    spec.n_anomalies = 40; // fraction cap binds first
    spec.anomaly_fraction = 0.01;
    spec.noise_sigma = 0.0;
    spec.seed = 9;
    const auto [cube, mask] = synthScene(spec);
    // target is 100 px; the final blob can overshoot by at most 35
    CHECK(mask.count() >= 50);
    CHECK(mask.count() <= 150);
}

TEST_CASE("toMatrix/fromMatrix round-trip") {
    const HsiCube cube = randomCube(4, 3, 5, 17);
    const MatXd m = cube.toMatrix();
    REQUIRE(m.rows() == 12);
    REQUIRE(m.cols() == 5);
    CHECK(m(1 * 3 + 2, 4) == doctest::Approx(cube.at(1, 2, 4)));
    const HsiCube back = HsiCube::fromMatrix(m, 4, 3);
    CHECK(back.values == cube.values);
}
