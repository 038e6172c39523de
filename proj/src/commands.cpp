#include "acmamba/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "acmamba/checkpoint.hpp"
#include "acmamba/cube_io.hpp"
#include "acmamba/errors.hpp"

namespace acmamba {

namespace {

namespace fs = std::filesystem;

std::string joinPath(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string cubePath(const RunConfig& c) {
    return c.cube_path.empty() ? joinPath(c.out_dir, "cube.hsc1") : c.cube_path;
}
std::string maskPath(const RunConfig& c) {
    return c.mask_path.empty() ? joinPath(c.out_dir, "mask.hsc1") : c.mask_path;
}
std::string mapPath(const RunConfig& c) {
    return c.map_path.empty() ? joinPath(c.out_dir, "detection.hsc1") : c.map_path;
}
std::string checkpointPath(const RunConfig& c) {
    return c.checkpoint_path.empty() ? joinPath(c.out_dir, "model.acmk")
                                     : c.checkpoint_path;
}

void ensureOutDir(const RunConfig& c) { fs::create_directories(c.out_dir); }

void writeTextFile(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("short write to '" + path + "'");
}

double elapsedSince(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(name + ": " + e.what());
    }
}

} // namespace

void applyConfigFile(RunConfig& cfg, const std::string& path) {
    if (!fs::exists(path)) throw MissingFileError("config file '" + path + "' not found");
    std::ifstream in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a flat JSON object");

    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "height") cfg.height = value.get<Index>();
            else if (key == "width") cfg.width = value.get<Index>();
            else if (key == "bands") cfg.bands = value.get<Index>();
            else if (key == "n_endmembers") cfg.n_endmembers = value.get<int>();
            else if (key == "n_anomalies") cfg.n_anomalies = value.get<int>();
            else if (key == "anomaly_fraction") cfg.anomaly_fraction = value.get<double>();
            else if (key == "noise_sigma") cfg.noise_sigma = value.get<double>();
            else if (key == "psi") cfg.psi = value.get<double>();
            else if (key == "compactness") cfg.compactness = value.get<double>();
            else if (key == "slic_iters") cfg.slic_iters = value.get<int>();
            else if (key == "epochs") cfg.epochs = value.get<int>();
            else if (key == "lr") cfg.lr = value.get<double>();
            else if (key == "beta_max") cfg.beta_max = value.get<double>();
            else if (key == "eta") cfg.eta = value.get<double>();
            else if (key == "norm_k") cfg.norm_k = value.get<double>();
            else if (key == "weight_decay") cfg.weight_decay = value.get<double>();
            else if (key == "hidden_dim") cfg.hidden_dim = value.get<int>();
            else if (key == "state_dim") cfg.state_dim = value.get<int>();
            else if (key == "full_covariance") cfg.full_covariance = value.get<bool>();
            else if (key == "detail_masked_encoder")
                cfg.detail_masked_encoder = value.get<bool>();
            else if (key == "detail_chunk") cfg.detail_chunk = value.get<int>();
            else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "cube_path") cfg.cube_path = value.get<std::string>();
            else if (key == "mask_path") cfg.mask_path = value.get<std::string>();
            else if (key == "map_path") cfg.map_path = value.get<std::string>();
            else if (key == "checkpoint_path")
                cfg.checkpoint_path = value.get<std::string>();
            else
                throw ConfigError("unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }

    if (cfg.epochs < 0 || cfg.lr <= 0.0 || cfg.psi <= 0.0 || cfg.beta_max < 0.0 ||
        cfg.eta < 0.0 || cfg.eta >= 1.0 || cfg.norm_k < 1.0 || cfg.hidden_dim < 1 ||
        cfg.state_dim < 1)
        throw ConfigError("config values out of range");
}

SceneSpec sceneSpecOf(const RunConfig& cfg) {
    SceneSpec s;
    s.height = cfg.height;
    s.width = cfg.width;
    s.bands = cfg.bands;
    s.n_endmembers = cfg.n_endmembers;
    s.n_anomalies = cfg.n_anomalies;
    s.anomaly_fraction = cfg.anomaly_fraction;
    s.noise_sigma = cfg.noise_sigma;
    s.seed = cfg.seed;
    return s;
}

TrainConfig trainConfigOf(const RunConfig& cfg) {
    TrainConfig t;
    t.epochs = cfg.epochs;
    t.lr = cfg.lr;
    t.psi = cfg.psi;
    t.beta_max = cfg.beta_max;
    t.eta = cfg.eta;
    t.norm_k = cfg.norm_k;
    t.seed = cfg.seed;
    t.hidden_dim = cfg.hidden_dim;
    t.state_dim = cfg.state_dim;
    t.weight_decay = cfg.weight_decay;
    return t;
}

DetectOptions detectOptionsOf(const RunConfig& cfg) {
    DetectOptions d;
    d.norm_k = cfg.norm_k;
    d.full_covariance = cfg.full_covariance;
    d.masked_encoder = cfg.detail_masked_encoder;
    d.chunk = cfg.detail_chunk;
    return d;
}

Index regionTargetOf(const RunConfig& cfg, Index height, Index width) {
    return static_cast<Index>(
        std::ceil(static_cast<double>(height * width) / cfg.psi));
}

PipelineArtifacts runPipeline(const HsiCube& cube, const RunConfig& cfg) {
    PipelineArtifacts art;
    art.normalized = normalize(cube);

    const Index target = regionTargetOf(cfg, cube.height, cube.width);
    const auto t_train0 = std::chrono::steady_clock::now();
    art.map = stage("segment", [&] {
        return segmentRegions(art.normalized, target, cfg.compactness,
                              cfg.slic_iters);
    });
    if (art.map.n_regions < 4)
        throw Error("segment: degenerate segmentation (N_r=" +
                    std::to_string(art.map.n_regions) + ", need >= 4)");
    art.repo = stage("segment",
                     [&] { return buildRepository(art.normalized, art.map); });
    art.trained = stage("train", [&] {
        return train(art.normalized, art.map, art.repo, trainConfigOf(cfg));
    });
    art.train_seconds = elapsedSince(t_train0);

    const auto t_infer0 = std::chrono::steady_clock::now();
    const DetectOptions opts = detectOptionsOf(cfg);
    art.holistic = stage("detect", [&] {
        return holisticMap(art.trained.model, art.repo, art.map, opts);
    });
    art.detail = stage("detect", [&] {
        return detailMap(art.trained.model, art.normalized, opts);
    });
    art.fused = fuse(art.holistic, art.detail);
    art.infer_seconds = elapsedSince(t_infer0);
    return art;
}

int cmdSynth(const RunConfig& cfg) {
    ensureOutDir(cfg);
    const auto [cube, mask] = synthScene(sceneSpecOf(cfg));
    saveCube(cube, cubePath(cfg));
    saveMask(mask, maskPath(cfg));
    const double frac =
        static_cast<double>(mask.count()) / static_cast<double>(cube.pixels());
    std::printf("synth: %lld x %lld x %lld cube -> %s\n",
                static_cast<long long>(cube.height),
                static_cast<long long>(cube.width),
                static_cast<long long>(cube.bands), cubePath(cfg).c_str());
    std::printf("synth: %lld anomaly pixels (fraction %.6f) -> %s\n",
                static_cast<long long>(mask.count()), frac, maskPath(cfg).c_str());
    return 0;
}

int cmdSegment(const RunConfig& cfg) {
    ensureOutDir(cfg);
    const HsiCube cube = loadCube(cubePath(cfg));
    const HsiCube norm = normalize(cube);
    const RegionMap map = segmentRegions(
        norm, regionTargetOf(cfg, cube.height, cube.width), cfg.compactness,
        cfg.slic_iters);

    std::vector<std::uint32_t> raster(map.region_of.begin(), map.region_of.end());
    saveRasterU32(raster, map.height, map.width, joinPath(cfg.out_dir, "regions.hsc1"));
    nlohmann::json order = map.order;
    writeTextFile(joinPath(cfg.out_dir, "regions_order.json"), order.dump() + "\n");
    std::printf("segment: N_r=%lld regions (target %lld)\n",
                static_cast<long long>(map.n_regions),
                static_cast<long long>(regionTargetOf(cfg, cube.height, cube.width)));
    return 0;
}

int cmdTrain(const RunConfig& cfg) {
    ensureOutDir(cfg);
    const HsiCube cube = loadCube(cubePath(cfg));
    const HsiCube norm = normalize(cube);
    const RegionMap map = segmentRegions(
        norm, regionTargetOf(cfg, cube.height, cube.width), cfg.compactness,
        cfg.slic_iters);
    const AttributeRepository repo = buildRepository(norm, map);
    const TrainResult trained = train(norm, map, repo, trainConfigOf(cfg));

    saveCheckpoint(trained.model, checkpointPath(cfg));
    writeTextFile(joinPath(cfg.out_dir, "loss.csv"), lossReportCsv(trained.history));
    if (!trained.history.empty())
        std::printf("train: %d epochs, final loss_ori=%.6g loss_mask=%.6g\n",
                    cfg.epochs, trained.history.back().loss_ori,
                    trained.history.back().loss_mask);
    else
        std::printf("train: 0 epochs, model left at initialization\n");
    return 0;
}

int cmdDetect(const RunConfig& cfg) {
    ensureOutDir(cfg);
    const HsiCube cube = loadCube(cubePath(cfg));
    const HsiCube norm = normalize(cube);
    const Autoencoder model = loadCheckpoint(checkpointPath(cfg));
    const RegionMap map = segmentRegions(
        norm, regionTargetOf(cfg, cube.height, cube.width), cfg.compactness,
        cfg.slic_iters);
    const AttributeRepository repo = buildRepository(norm, map);

    const DetectOptions opts = detectOptionsOf(cfg);
    const MatXd holistic = holisticMap(model, repo, map, opts);
    const MatXd detail = detailMap(model, norm, opts);
    const DetectionMap fused = fuse(holistic, detail);

    saveRasterF32(holistic, joinPath(cfg.out_dir, "holistic.hsc1"));
    saveRasterF32(detail, joinPath(cfg.out_dir, "detail.hsc1"));
    saveRasterF32(fused.scores, mapPath(cfg));
    std::printf("detect: wrote %s (max score %.6g)\n", mapPath(cfg).c_str(),
                fused.scores.maxCoeff());
    return 0;
}

int cmdRx(const RunConfig& cfg) {
    ensureOutDir(cfg);
    const HsiCube cube = loadCube(cubePath(cfg));
    const HsiCube norm = normalize(cube);
    const DetectionMap rx = rxBaseline(norm);
    saveRasterF32(rx.scores, joinPath(cfg.out_dir, "rx.hsc1"));

    double rx_auc = 0.5;
    if (rx.scores.maxCoeff() - rx.scores.minCoeff() <= 0.0) {
        std::printf("rx: warning: all scores identical; AUC defaults to 0.5\n");
    } else if (fs::exists(maskPath(cfg))) {
        const GroundTruthMask mask = loadMask(maskPath(cfg));
        rx_auc = auc(rx.scores, mask);
    } else {
        std::printf("rx: no mask at %s; skipping AUC\n", maskPath(cfg).c_str());
        std::printf("rx: wrote %s\n", joinPath(cfg.out_dir, "rx.hsc1").c_str());
        return 0;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g\n", rx_auc);
    writeTextFile(joinPath(cfg.out_dir, "rx_auc.txt"), buf);
    std::printf("rx: AUC %.6f\n", rx_auc);
    return 0;
}

int cmdEval(const RunConfig& cfg) {
    ensureOutDir(cfg);
    const MatXd scores = loadRasterF32(mapPath(cfg));
    if (!fs::exists(maskPath(cfg)))
        throw MissingFileError("eval: mask not found at '" + maskPath(cfg) + "'");
    const GroundTruthMask mask = loadMask(maskPath(cfg));
    const RocCurve curve = rocCurve(scores, mask);
    writeTextFile(joinPath(cfg.out_dir, "roc.csv"), rocCsv(curve));
    std::printf("eval: AUC %.6f\n", curve.auc);
    return 0;
}

int cmdRun(const RunConfig& cfg) {
    ensureOutDir(cfg);
    const HsiCube cube = stage("load", [&] { return loadCube(cubePath(cfg)); });
    if (!fs::exists(maskPath(cfg)))
        throw MissingFileError("eval: mask not found at '" + maskPath(cfg) + "'");
    const GroundTruthMask mask = stage("load", [&] { return loadMask(maskPath(cfg)); });

    const PipelineArtifacts art = runPipeline(cube, cfg);

    saveRasterF32(art.holistic, joinPath(cfg.out_dir, "holistic.hsc1"));
    saveRasterF32(art.detail, joinPath(cfg.out_dir, "detail.hsc1"));
    saveRasterF32(art.fused.scores, mapPath(cfg));
    saveCheckpoint(art.trained.model, checkpointPath(cfg));
    writeTextFile(joinPath(cfg.out_dir, "loss.csv"),
                  lossReportCsv(art.trained.history));

    const RocCurve curve =
        stage("eval", [&] { return rocCurve(art.fused.scores, mask); });
    writeTextFile(joinPath(cfg.out_dir, "roc.csv"), rocCsv(curve));

    BenchReport bench;
    bench.train_seconds = art.train_seconds;
    bench.infer_seconds = art.infer_seconds;
    bench.samples_per_epoch = art.map.n_regions;
    bench.n_regions = art.map.n_regions;
    bench.n_pixels = cube.pixels();
    writeTextFile(joinPath(cfg.out_dir, "bench.json"), benchJson(bench));

    std::printf("run: N_r=%lld train %.2fs infer %.2fs\n",
                static_cast<long long>(art.map.n_regions), art.train_seconds,
                art.infer_seconds);
    std::printf("AUC %.6f\n", curve.auc);
    return 0;
}

int cmdSweep(const RunConfig& cfg, const std::string& parameter,
             const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep: empty value list");
    if (parameter != "psi" && parameter != "beta" && parameter != "eta")
        throw ConfigError("sweep: parameter must be psi, beta, or eta");
    ensureOutDir(cfg);
    const HsiCube cube = loadCube(cubePath(cfg));
    if (!fs::exists(maskPath(cfg)))
        throw MissingFileError("sweep: mask not found at '" + maskPath(cfg) + "'");
    const GroundTruthMask mask = loadMask(maskPath(cfg));

    std::string csv = "param,value,auc,train_seconds\n";
    for (const double v : values) {
        RunConfig point = cfg;
        if (parameter == "psi") point.psi = v;
        else if (parameter == "beta") point.beta_max = v;
        else point.eta = v;

        const PipelineArtifacts art = runPipeline(cube, point);
        const double point_auc = auc(art.fused.scores, mask);
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", parameter.c_str(),
                      v, point_auc, art.train_seconds);
        csv += buf;
        std::printf("sweep: %s=%.6g AUC %.6f train %.2fs\n", parameter.c_str(), v,
                    point_auc, art.train_seconds);
    }
    writeTextFile(joinPath(cfg.out_dir, "sweep.csv"), csv);
    return 0;
}

} // namespace acmamba
