#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "acmamba/checkpoint.hpp"
#include "acmamba/commands.hpp"
#include "acmamba/cube_io.hpp"
#include "acmamba/errors.hpp"
#include "acmamba/eval.hpp"

using namespace acmamba;
namespace fs = std::filesystem;

namespace {

std::string freshDir(const std::string& name) {
    const std::string dir = (fs::temp_directory_path() / name).string();
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

// Small, fast scene for command-level tests.
RunConfig tinyConfig(const std::string& out_dir) {
    RunConfig cfg;
    cfg.height = 24;
    cfg.width = 24;
    cfg.bands = 6;
    cfg.n_endmembers = 2;
    cfg.n_anomalies = 2;
    cfg.anomaly_fraction = 0.02;
    cfg.noise_sigma = 0.005;
    cfg.psi = 24.0;
    cfg.epochs = 6;
    cfg.hidden_dim = 12;
    cfg.state_dim = 2;
    cfg.out_dir = out_dir;
    cfg.seed = 5;
    return cfg;
}

} // namespace

TEST_CASE("config file applies known keys and rejects unknown ones") {
    const std::string dir = freshDir("acm_cfg");
    const std::string good = dir + "/good.json";
    std::ofstream(good) << R"({"epochs": 7, "lr": 0.001, "out_dir": "x"})";
    RunConfig cfg;
    applyConfigFile(cfg, good);
    CHECK(cfg.epochs == 7);
    CHECK(cfg.lr == 0.001);
    CHECK(cfg.out_dir == "x");

    const std::string bad = dir + "/bad.json";
    std::ofstream(bad) << R"({"epochz": 7})";
    CHECK_THROWS_AS(applyConfigFile(cfg, bad), ConfigError);

    const std::string range = dir + "/range.json";
    std::ofstream(range) << R"({"eta": 1.5})";
    CHECK_THROWS_AS(applyConfigFile(cfg, range), ConfigError);

    CHECK_THROWS_AS(applyConfigFile(cfg, dir + "/missing.json"), MissingFileError);
    fs::remove_all(dir);
}

TEST_CASE("synth writes reloadable files and is byte-deterministic") {
    const std::string dir_a = freshDir("acm_synth_a");
    const std::string dir_b = freshDir("acm_synth_b");
    RunConfig a = tinyConfig(dir_a);
    RunConfig b = tinyConfig(dir_b);
    REQUIRE(cmdSynth(a) == 0);
    REQUIRE(cmdSynth(b) == 0);

    const HsiCube cube = loadCube(dir_a + "/cube.hsc1");
    CHECK(cube.height == 24);
    CHECK(cube.bands == 6);
    const GroundTruthMask mask = loadMask(dir_a + "/mask.hsc1");
    CHECK(mask.count() > 0);

    CHECK(readFile(dir_a + "/cube.hsc1") == readFile(dir_b + "/cube.hsc1"));
    CHECK(readFile(dir_a + "/mask.hsc1") == readFile(dir_b + "/mask.hsc1"));
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("run demands the mask and names its path") {
    const std::string dir = freshDir("acm_nomask");
    RunConfig cfg = tinyConfig(dir);
    REQUIRE(cmdSynth(cfg) == 0);
    fs::remove(dir + "/mask.hsc1");
    try {
        cmdRun(cfg);
        FAIL("expected MissingFileError");
    } catch (const MissingFileError& e) {
        CHECK(std::string(e.what()).find(dir + "/mask.hsc1") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("end-to-end run writes every artifact and is reproducible") {
    const std::string dir = freshDir("acm_run");
    RunConfig cfg = tinyConfig(dir);
    REQUIRE(cmdSynth(cfg) == 0);
    REQUIRE(cmdRun(cfg) == 0);

    for (const char* name : {"/detection.hsc1", "/holistic.hsc1", "/detail.hsc1",
                             "/roc.csv", "/loss.csv", "/bench.json", "/model.acmk"})
        CHECK(fs::exists(dir + name));

    const MatXd scores = loadRasterF32(dir + "/detection.hsc1");
    CHECK(scores.minCoeff() >= 0.0);
    const GroundTruthMask mask = loadMask(dir + "/mask.hsc1");
    const double run_auc = auc(scores, mask);
    CHECK(run_auc >= 0.0);
    CHECK(run_auc <= 1.0);

    // a second run with the same seed reproduces the outputs byte for byte
    const std::string dir2 = freshDir("acm_run2");
    RunConfig cfg2 = cfg;
    cfg2.out_dir = dir2;
    cfg2.cube_path = dir + "/cube.hsc1";
    cfg2.mask_path = dir + "/mask.hsc1";
    REQUIRE(cmdRun(cfg2) == 0);
    CHECK(readFile(dir + "/detection.hsc1") == readFile(dir2 + "/detection.hsc1"));
    CHECK(readFile(dir + "/loss.csv") == readFile(dir2 + "/loss.csv"));
    CHECK(readFile(dir + "/roc.csv") == readFile(dir2 + "/roc.csv"));

    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("segment command exports the region raster and scan order") {
    const std::string dir = freshDir("acm_seg");
    RunConfig cfg = tinyConfig(dir);
    REQUIRE(cmdSynth(cfg) == 0);
    REQUIRE(cmdSegment(cfg) == 0);

    Index h = 0, w = 0;
    const auto raster = loadRasterU32(dir + "/regions.hsc1", h, w);
    CHECK(h == 24);
    CHECK(w == 24);
    const auto max_label = *std::max_element(raster.begin(), raster.end());
    CHECK(max_label >= 3);

    const std::string order = readFile(dir + "/regions_order.json");
    CHECK(order.front() == '[');
    fs::remove_all(dir);
}

TEST_CASE("train then detect works from the saved checkpoint") {
    const std::string dir = freshDir("acm_traindetect");
    RunConfig cfg = tinyConfig(dir);
    REQUIRE(cmdSynth(cfg) == 0);
    REQUIRE(cmdTrain(cfg) == 0);
    CHECK(fs::exists(dir + "/model.acmk"));
    CHECK(fs::exists(dir + "/loss.csv"));

    const Autoencoder model = loadCheckpoint(dir + "/model.acmk");
    CHECK(model.inDim() == 6);

    REQUIRE(cmdDetect(cfg) == 0);
    const MatXd scores = loadRasterF32(dir + "/detection.hsc1");
    CHECK(scores.allFinite());
    CHECK(scores.minCoeff() >= 0.0);
    fs::remove_all(dir);
}

TEST_CASE("rx command writes the map and its AUC") {
    const std::string dir = freshDir("acm_rx");
    RunConfig cfg = tinyConfig(dir);
    REQUIRE(cmdSynth(cfg) == 0);
    REQUIRE(cmdRx(cfg) == 0);
    CHECK(fs::exists(dir + "/rx.hsc1"));
    const MatXd scores = loadRasterF32(dir + "/rx.hsc1");
    CHECK(scores.minCoeff() >= 0.0);
    const double rx_auc = std::stod(readFile(dir + "/rx_auc.txt"));
    CHECK(rx_auc > 0.5); // additive anomalies are easy for RX
    fs::remove_all(dir);
}

TEST_CASE("rx on a constant cube reports AUC one half with a warning") {
    const std::string dir = freshDir("acm_rx_const");
    RunConfig cfg = tinyConfig(dir);
    HsiCube cube(8, 8, 3);
    for (auto& v : cube.values) v = 0.3f;
    fs::create_directories(dir);
    saveCube(cube, dir + "/cube.hsc1");
    REQUIRE(cmdRx(cfg) == 0);
    CHECK(std::stod(readFile(dir + "/rx_auc.txt")) == doctest::Approx(0.5));
    fs::remove_all(dir);
}

TEST_CASE("single-point sweep matches the full run") {
    const std::string dir = freshDir("acm_sweep");
    RunConfig cfg = tinyConfig(dir);
    REQUIRE(cmdSynth(cfg) == 0);
    REQUIRE(cmdRun(cfg) == 0);
    const double run_auc =
        auc(loadRasterF32(dir + "/detection.hsc1"), loadMask(dir + "/mask.hsc1"));

    REQUIRE(cmdSweep(cfg, "eta", {cfg.eta}) == 0);
    const std::string csv = readFile(dir + "/sweep.csv");
    CHECK(csv.rfind("param,value,auc,train_seconds\n", 0) == 0);

    // the sweep row reproduces the run's AUC exactly (fixed seed)
    const std::size_t line = csv.find('\n') + 1;
    const std::size_t c1 = csv.find(',', line);
    const std::size_t c2 = csv.find(',', c1 + 1);
    const std::size_t c3 = csv.find(',', c2 + 1);
    const double sweep_auc = std::stod(csv.substr(c2 + 1, c3 - c2 - 1));
    CHECK(sweep_auc == doctest::Approx(run_auc).epsilon(1e-15));

    CHECK_THROWS_AS(cmdSweep(cfg, "eta", {}), ConfigError);
    CHECK_THROWS_AS(cmdSweep(cfg, "gamma", {0.1}), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("eta 0 runs with masking disabled") {
    const std::string dir = freshDir("acm_eta0");
    RunConfig cfg = tinyConfig(dir);
    cfg.eta = 0.0;
    cfg.epochs = 3;
    REQUIRE(cmdSynth(cfg) == 0);
    CHECK(cmdRun(cfg) == 0);
    fs::remove_all(dir);
}

TEST_CASE("degenerate segmentation is refused, not silently accepted") {
    const std::string dir = freshDir("acm_degenerate");
    RunConfig cfg = tinyConfig(dir);
    cfg.psi = 24.0 * 24.0; // target collapses to a single region
    REQUIRE(cmdSynth(cfg) == 0);
    CHECK_THROWS_WITH_AS(cmdRun(cfg),
                         doctest::Contains("degenerate segmentation"), Error);
    fs::remove_all(dir);
}
