#include "acmamba/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "acmamba/errors.hpp"

namespace acmamba {

double normK(const VecXd& v, double k) {
    if (k == 2.0) return v.norm();
    return std::pow(v.array().abs().pow(k).sum(), 1.0 / k);
}

VecXd normKGrad(const VecXd& v, double k) {
    const double n = normK(v, k);
    if (n < 1e-300) return VecXd::Zero(v.size());
    if (k == 2.0) return v / n;
    return (v.array().sign() * v.array().abs().pow(k - 1.0) * std::pow(n, 1.0 - k))
        .matrix();
}

MatXd applyMask(const MatXd& seq, const MaskVector& mask) {
    if (static_cast<Index>(mask.keep.size()) != seq.rows())
        throw DimMismatchError("mask length != sequence rows");
    MatXd out = seq;
    for (Index i = 0; i < seq.rows(); ++i)
        if (!mask.keep[static_cast<std::size_t>(i)]) out.row(i).setZero();
    return out;
}

MaskVector generateMask(const DifficultyTracker& tracker, double eta, Rng& rng) {
    const Index n = tracker.cumulative.size();
    const Index m = static_cast<Index>(std::llround(eta * static_cast<double>(n)));
    MaskVector mask = MaskVector::allKeep(n);
    if (m <= 0) return mask;

    VecXd weight = tracker.cumulative.array() + 1e-8;
    for (Index draw = 0; draw < m; ++draw) {
        const double total = weight.sum();
        double u = rng.uniform(0.0, total);
        Index pick = -1;
        for (Index i = 0; i < n; ++i) {
            if (weight(i) <= 0.0) continue;
            u -= weight(i);
            if (u < 0.0) {
                pick = i;
                break;
            }
        }
        if (pick < 0) { // rounding spill: take the last eligible region
            for (Index i = n - 1; i >= 0; --i)
                if (weight(i) > 0.0) {
                    pick = i;
                    break;
                }
        }
        mask.keep[static_cast<std::size_t>(pick)] = 0;
        weight(pick) = 0.0;
    }
    return mask;
}

namespace {

struct LossGrad {
    double loss = 0.0;
    MatXd d_recon; // dL/d(reconstruction)
};

// mean over rows of ||target_i - recon_i||_k and its recon gradient
LossGrad meanRowNorm(const MatXd& target, const MatXd& recon, double k,
                     bool want_grad) {
    LossGrad out;
    const double inv_n = 1.0 / static_cast<double>(target.rows());
    if (want_grad) out.d_recon = MatXd::Zero(recon.rows(), recon.cols());
    for (Index i = 0; i < target.rows(); ++i) {
        const VecXd diff = target.row(i).transpose() - recon.row(i).transpose();
        out.loss += inv_n * normK(diff, k);
        if (want_grad)
            out.d_recon.row(i) = (-inv_n) * normKGrad(diff, k).transpose();
    }
    return out;
}

VecXd perRegionErrors(const MatXd& seq, const MatXd& recon_ori, double k) {
    VecXd err(seq.rows());
    for (Index i = 0; i < seq.rows(); ++i)
        err(i) = normK(seq.row(i).transpose() - recon_ori.row(i).transpose(), k);
    return err;
}

} // namespace

ConsensusLosses consensusLosses(const Autoencoder& model, const MatXd& seq,
                                const MaskVector& mask, double k) {
    const MatXd masked = applyMask(seq, mask);
    const MatXd recon_ori = autoencoderForward(model, seq, EncoderPath::Original);
    const MatXd recon_mask = autoencoderForward(model, masked, EncoderPath::Masked);
    ConsensusLosses out;
    out.loss_ori = meanRowNorm(masked, recon_ori, k, false).loss;
    out.loss_mask = meanRowNorm(masked, recon_mask, k, false).loss;
    out.per_region_errors = perRegionErrors(seq, recon_ori, k);
    return out;
}

ConsensusOutcome consensusLossesWithGrads(const Autoencoder& model,
                                          const MatXd& seq, const MaskVector& mask,
                                          double k) {
    const MatXd masked = applyMask(seq, mask);

    AutoencoderTape<double> tape_ori, tape_mask;
    const MatXd recon_ori =
        autoencoderForward(model, seq, EncoderPath::Original, &tape_ori);
    const MatXd recon_mask =
        autoencoderForward(model, masked, EncoderPath::Masked, &tape_mask);

    const LossGrad ori = meanRowNorm(masked, recon_ori, k, true);
    const LossGrad msk = meanRowNorm(masked, recon_mask, k, true);

    Autoencoder grad_ori = Autoencoder::zerosLike(model);
    Autoencoder grad_mask = Autoencoder::zerosLike(model);
    autoencoderBackward(model, tape_ori, ori.d_recon, grad_ori);
    autoencoderBackward(model, tape_mask, msk.d_recon, grad_mask);

    ConsensusOutcome out;
    out.losses.loss_ori = ori.loss;
    out.losses.loss_mask = msk.loss;
    out.losses.per_region_errors = perRegionErrors(seq, recon_ori, k);
    out.g_ori = flattenTensors(grad_ori);
    out.g_mask = flattenTensors(grad_mask);
    return out;
}

CalibrationResult calibrateGradientsPrimary(const VecXd& g_ori, const VecXd& g_mask,
                                            bool primary_is_ori) {
    if (g_ori.size() != g_mask.size())
        throw DimMismatchError("gradient vectors differ in length");

    CalibrationResult res;
    const double n_ori = g_ori.norm(), n_mask = g_mask.norm();
    if (n_ori == 0.0 || n_mask == 0.0) {
        res.combined = g_ori + g_mask;
        res.theta = std::numbers::pi / 2.0;
        res.applied = false;
        return res;
    }

    const double cosv =
        std::clamp(g_ori.dot(g_mask) / (n_ori * n_mask), -1.0, 1.0);
    res.theta = std::acos(cosv);
    if (res.theta <= std::numbers::pi / 2.0) {
        res.combined = g_ori + g_mask;
        res.applied = false;
        return res;
    }

    const VecXd& primary = primary_is_ori ? g_ori : g_mask;
    const VecXd& secondary = primary_is_ori ? g_mask : g_ori;
    const VecXd projected =
        secondary - (secondary.dot(primary) / primary.squaredNorm()) * primary;
    res.combined = primary + projected;
    res.applied = true;
    return res;
}

CalibrationResult calibrateGradients(const VecXd& g_ori, const VecXd& g_mask,
                                     Rng& rng) {
    const bool primary_is_ori = rng.coin();
    return calibrateGradientsPrimary(g_ori, g_mask, primary_is_ori);
}

TrainResult train(const HsiCube& cube, const RegionMap& map,
                  const AttributeRepository& repo, const TrainConfig& cfg) {
    if (cube.height != map.height || cube.width != map.width)
        throw DimMismatchError("cube and region map dimensions differ");
    if (repo.nRegions() != map.n_regions)
        throw DimMismatchError("repository and region map disagree on region count");

    TrainResult result;
    result.model = makeAutoencoder<double>(cube.bands, cfg.hidden_dim,
                                           cfg.state_dim, cfg.seed);
    result.tracker = DifficultyTracker(map.n_regions);

    VecXd params = flattenTensors(result.model);
    AdamWState<double> opt(params.size());
    opt.lr = cfg.lr;
    opt.weight_decay = cfg.weight_decay;

    Rng rng(cfg.seed + 1); // model init consumes cfg.seed

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const RegionSequence seq =
            drawRepresentative(repo, map, cfg.beta_max, rng);
        const MaskVector mask = generateMask(result.tracker, cfg.eta, rng);

        const ConsensusOutcome outcome =
            consensusLossesWithGrads(result.model, seq.values, mask, cfg.norm_k);
        const CalibrationResult calib =
            calibrateGradients(outcome.g_ori, outcome.g_mask, rng);

        adamwStep(params, calib.combined, opt);
        assignTensors(result.model, params);

        result.tracker.cumulative += outcome.losses.per_region_errors;
        result.tracker.epoch = epoch + 1;

        EpochStats stats;
        stats.epoch = epoch;
        stats.loss_ori = outcome.losses.loss_ori;
        stats.loss_mask = outcome.losses.loss_mask;
        stats.theta = calib.theta;
        stats.applied = calib.applied;
        stats.per_region_errors = outcome.losses.per_region_errors;
        result.history.push_back(std::move(stats));
    }
    return result;
}

std::string lossReportCsv(const LossReport& history) {
    std::string csv = "epoch,loss_ori,loss_mask,theta,applied\n";
    char buf[160];
    for (const auto& e : history) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%d\n", e.epoch,
                      e.loss_ori, e.loss_mask, e.theta, e.applied ? 1 : 0);
        csv += buf;
    }
    return csv;
}

} // namespace acmamba
