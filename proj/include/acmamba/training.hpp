#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acmamba/adamw.hpp"
#include "acmamba/autoencoder.hpp"
#include "acmamba/repository.hpp"

namespace acmamba {

using Autoencoder = RsalAutoencoder<double>;

struct TrainConfig {
    int epochs = 100;
    double lr = 5e-4;
    double psi = 150.0;    // pixels per region; consumed by the pipeline
    double beta_max = 2.0;
    double eta = 0.01;     // mask rate
    double norm_k = 2.0;
    std::uint64_t seed = 0;
    int hidden_dim = 256;
    int state_dim = 16;
    double weight_decay = 0.01;
};

// Binary keep/drop vector aligned to RegionMap.order; zeros count is
// round(eta * N_r).
struct MaskVector {
    std::vector<std::uint8_t> keep;
    Index dropped() const {
        Index n = 0;
        for (auto k : keep) n += (k == 0);
        return n;
    }
    static MaskVector allKeep(Index n) {
        MaskVector m;
        m.keep.assign(static_cast<std::size_t>(n), 1);
        return m;
    }
};

// Running sum of per-region reconstruction errors across epochs.
struct DifficultyTracker {
    VecXd cumulative;
    int epoch = 0;

    explicit DifficultyTracker(Index n_regions)
        : cumulative(VecXd::Zero(n_regions)) {}
};

struct EpochStats {
    int epoch = 0;
    double loss_ori = 0.0;
    double loss_mask = 0.0;
    double theta = 0.0;
    bool applied = false;
    VecXd per_region_errors;
};

using LossReport = std::vector<EpochStats>;

// k-norm over a vector and its gradient (zero at the origin).
double normK(const VecXd& v, double k);
VecXd normKGrad(const VecXd& v, double k);

MatXd applyMask(const MatXd& seq, const MaskVector& mask);

// round(eta*N_r) regions drawn without replacement, probability proportional
// to cumulative error + 1e-8 (uniform at epoch 0); drawn regions get keep=0.
MaskVector generateMask(const DifficultyTracker& tracker, double eta, Rng& rng);

struct ConsensusLosses {
    double loss_ori = 0.0;
    double loss_mask = 0.0;
    VecXd per_region_errors; // unmasked-target errors feeding the tracker
};

// L_ori = mean_i || (M⊙X)_i - D(E(X))_i ||_k
// L_mask = mean_i || (M⊙X)_i - D(Ê(M⊙X))_i ||_k
ConsensusLosses consensusLosses(const Autoencoder& model, const MatXd& seq,
                                const MaskVector& mask, double k);

struct ConsensusOutcome {
    ConsensusLosses losses;
    VecXd g_ori;  // full flat gradient; off-path entries exactly zero
    VecXd g_mask;
};

ConsensusOutcome consensusLossesWithGrads(const Autoencoder& model,
                                          const MatXd& seq, const MaskVector& mask,
                                          double k);

struct CalibrationResult {
    VecXd combined;
    double theta = 0.0;
    bool applied = false;
};

// Conflict-aware gradient combination: plain sum when the angle is <= pi/2
// (or either gradient vanishes); otherwise the secondary is projected onto
// the primary's orthogonal plane before summing.
CalibrationResult calibrateGradientsPrimary(const VecXd& g_ori, const VecXd& g_mask,
                                            bool primary_is_ori);

// Draws the primary uniformly at random (one coin per call, drawn always so
// the stream stays aligned), then defers to calibrateGradientsPrimary.
CalibrationResult calibrateGradients(const VecXd& g_ori, const VecXd& g_mask,
                                     Rng& rng);

struct TrainResult {
    Autoencoder model;
    LossReport history;
    DifficultyTracker tracker{0};
};

// Per epoch: redraw the representative sequence (fresh beta per region),
// generate the difficulty mask, evaluate both loss paths, calibrate, take one
// AdamW step, then accumulate the tracker. The whole regional sequence is the
// batch, so one epoch equals one optimization step.
TrainResult train(const HsiCube& cube, const RegionMap& map,
                  const AttributeRepository& repo, const TrainConfig& cfg);

std::string lossReportCsv(const LossReport& history);

} // namespace acmamba
