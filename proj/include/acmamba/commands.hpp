#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acmamba/detection.hpp"
#include "acmamba/eval.hpp"
#include "acmamba/synth.hpp"
#include "acmamba/training.hpp"

namespace acmamba {

// Flat configuration shared by every subcommand. A JSON config file mirrors
// these field names exactly; unknown keys are rejected. Precedence is
// defaults < config file < command-line flags.
struct RunConfig {
    // scene synthesis
    Index height = 100;
    Index width = 100;
    Index bands = 50;
    int n_endmembers = 3;
    int n_anomalies = 5;
    double anomaly_fraction = 0.01;
    double noise_sigma = 0.01;

    // segmentation (region target is ceil(H*W / psi))
    double psi = 150.0;
    double compactness = 0.1;
    int slic_iters = 10;

    // training
    int epochs = 100;
    double lr = 5e-4;
    double beta_max = 2.0;
    double eta = 0.01;
    double norm_k = 2.0;
    double weight_decay = 0.01;
    int hidden_dim = 256;
    int state_dim = 16;

    // detection
    bool full_covariance = false;
    bool detail_masked_encoder = false;
    int detail_chunk = 0;

    // io
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    std::string cube_path;       // defaults to <out_dir>/cube.hsc1
    std::string mask_path;       // defaults to <out_dir>/mask.hsc1
    std::string map_path;        // defaults to <out_dir>/detection.hsc1
    std::string checkpoint_path; // defaults to <out_dir>/model.acmk
};

void applyConfigFile(RunConfig& cfg, const std::string& path);

SceneSpec sceneSpecOf(const RunConfig& cfg);
TrainConfig trainConfigOf(const RunConfig& cfg);
DetectOptions detectOptionsOf(const RunConfig& cfg);
Index regionTargetOf(const RunConfig& cfg, Index height, Index width);

// Everything the segment->train->detect chain produces, with stage timings.
struct PipelineArtifacts {
    HsiCube normalized;
    RegionMap map;
    AttributeRepository repo;
    TrainResult trained;
    MatXd holistic;
    MatXd detail;
    DetectionMap fused;
    double train_seconds = 0.0;
    double infer_seconds = 0.0;
};

PipelineArtifacts runPipeline(const HsiCube& cube, const RunConfig& cfg);

int cmdSynth(const RunConfig& cfg);
int cmdSegment(const RunConfig& cfg);
int cmdTrain(const RunConfig& cfg);
int cmdDetect(const RunConfig& cfg);
int cmdRx(const RunConfig& cfg);
int cmdEval(const RunConfig& cfg);
int cmdRun(const RunConfig& cfg);
int cmdSweep(const RunConfig& cfg, const std::string& parameter,
             const std::vector<double>& values);

} // namespace acmamba
