// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "acmamba/commands.hpp"
#include "acmamba/cube_io.hpp"
#include "acmamba/detection.hpp"
#include "acmamba/errors.hpp"
#include "acmamba/eval.hpp"

using namespace acmamba;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

double seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

MatXd randomMat(Index r, Index c, std::uint64_t seed, double lo, double hi) {
    MatXd m(r, c);
    Rng rng(seed);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

// The acceptance scene: 100x100x50, 3 endmembers, 5 blobs, fraction 0.01,
// noise 0.01, seed 42, paper-default hyperparameters.
RunConfig acceptanceConfig(const std::string& out_dir) {
    RunConfig cfg;
    cfg.height = 100;
    cfg.width = 100;
    cfg.bands = 50;
    cfg.n_endmembers = 3;
    cfg.n_anomalies = 5;
    cfg.anomaly_fraction = 0.01;
    cfg.noise_sigma = 0.01;
    cfg.psi = 150.0;
    cfg.hidden_dim = 256;
    cfg.state_dim = 16;
    cfg.beta_max = 2.0;
    cfg.eta = 0.01;
    cfg.epochs = 100;
    cfg.lr = 5e-4;
    cfg.seed = 42;
    cfg.out_dir = out_dir;
    return cfg;
}

// --- criterion 2: gradient correctness -------------------------------------

void criterionGradients() {
    const auto start = std::chrono::steady_clock::now();
    const Index t_len = 3, c = 4, d = 4, n = 2;
    const auto model = makeAutoencoder<double>(c, d, n, 7);
    const MatXd seq = randomMat(t_len, c, 8, -0.8, 0.8);
    MaskVector mask = MaskVector::allKeep(t_len);
    mask.keep[2] = 0;

    const ConsensusOutcome out = consensusLossesWithGrads(model, seq, mask, 2.0);
    const VecXd params = flattenTensors(model);
    const double h = 1e-5;
    double worst = 0.0;
    for (Index i = 0; i < params.size(); ++i) {
        VecXd p = params;
        Autoencoder probe = model;
        p(i) += h;
        assignTensors(probe, p);
        const ConsensusLosses plus = consensusLosses(probe, seq, mask, 2.0);
        p(i) = params(i) - h;
        assignTensors(probe, p);
        const ConsensusLosses minus = consensusLosses(probe, seq, mask, 2.0);
        const double fd_ori = (plus.loss_ori - minus.loss_ori) / (2.0 * h);
        const double fd_mask = (plus.loss_mask - minus.loss_mask) / (2.0 * h);
        const auto rel = [](double a, double b) {
            return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
        };
        worst = std::max({worst, rel(fd_ori, out.g_ori(i)), rel(fd_mask, out.g_mask(i))});
    }
    const double elapsed = seconds(start);
    report(2, "gradient correctness vs central differences",
           worst < 1e-3 && elapsed < 10.0,
           fmt("worst rel err %.3g, %.2fs", worst, elapsed));
}

// --- criterion 3: discretization analytics ---------------------------------

void criterionDiscretize() {
    const auto [a1, b1] = discretize(-1.0, 1.0, std::log(2.0));
    const bool closed = std::abs(a1 - 0.5) < 1e-10 && std::abs(b1 - 0.5) < 1e-10;

    const auto [a2, b2] = discretize(-1.0, 1.0, 1e-9);
    const bool small_delta = std::abs(a2 - 1.0) < 1e-8 && std::abs(b2 - 1e-9) < 1e-8;

    const auto [a3, b3] = discretize(-1e-9, 2.0, 0.1);
    const bool a_limit = std::abs(b3 - 0.2) < 1e-8 && std::abs(a3 - 1.0) < 1e-8;

    report(3, "ZOH discretization analytic values", closed && small_delta && a_limit,
           fmt("ln2 -> (%.12f, %.12f)", a1, b1));
}

// --- criterion 4: gradient calibration -------------------------------------

void criterionCalibration() {
    Rng rng(99);
    bool ok = true;
    std::string why = "1000 pairs clean";
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const Index dim = 24;
        VecXd a(dim), b(dim);
        for (Index i = 0; i < dim; ++i) {
            a(i) = rng.normal();
            b(i) = rng.normal();
        }
        const VecXd a_copy = a, b_copy = b;
        const bool primary_is_ori = rng.coin();
        const CalibrationResult r = calibrateGradientsPrimary(a, b, primary_is_ori);

        if ((a - a_copy).cwiseAbs().maxCoeff() != 0.0 ||
            (b - b_copy).cwiseAbs().maxCoeff() != 0.0) {
            ok = false;
            why = "inputs mutated";
            break;
        }
        const double cosv = a.dot(b) / (a.norm() * b.norm());
        if (cosv >= 0.0) {
            if (r.applied || (r.combined - (a + b)).cwiseAbs().maxCoeff() != 0.0) {
                ok = false;
                why = fmt("trial %d: non-conflicting pair not returned as plain sum",
                          trial);
            }
        } else {
            const VecXd& p = primary_is_ori ? a : b;
            const VecXd& s = primary_is_ori ? b : a;
            const VecXd proj = r.combined - p;
            if (!r.applied || std::abs(proj.dot(p)) > 1e-9 * p.norm() * s.norm()) {
                ok = false;
                why = fmt("trial %d: projection not orthogonal", trial);
            }
        }
    }
    report(4, "gradient calibration orthogonality and exact sums", ok, why);
}

// --- criterion 5: masking statistics ----------------------------------------

void criterionMasking() {
    Rng rng(123);
    bool cardinality = true;
    DifficultyTracker t8(8);
    t8.cumulative << 3, 1, 4, 1, 5, 9, 2, 6;
    for (int i = 0; i < 1000; ++i) {
        if (generateMask(t8, 0.25, rng).dropped() != 2) cardinality = false;
        if (generateMask(t8, 0.5, rng).dropped() != 4) cardinality = false;
    }

    DifficultyTracker heavy(4);
    heavy.cumulative << 100, 1, 1, 1;
    int hits = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        if (!generateMask(heavy, 0.25, rng).keep[0]) ++hits;
    const double freq = hits / static_cast<double>(draws);
    const double expect = 100.0 / 103.0;
    const bool weighted = std::abs(freq - expect) <= 0.02;

    report(5, "difficulty masking cardinality and weighting",
           cardinality && weighted,
           fmt("heavy-region frequency %.4f vs %.4f", freq, expect));
}

// --- criterion 6: AUC oracle ------------------------------------------------

void criterionAucOracle() {
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const Index n = 200;
        Rng rng(500 + static_cast<std::uint64_t>(inst));
        MatXd scores(1, n);
        GroundTruthMask mask(1, n);
        for (Index i = 0; i < n; ++i) {
            double s = rng.uniform01();
            if (inst % 2 == 0) s = std::round(s * 10.0) / 10.0; // force ties
            scores(0, i) = s;
            mask.at(0, i) = rng.uniform01() < 0.25 ? 1 : 0;
        }
        mask.at(0, 0) = 1;
        mask.at(0, n - 1) = 0;

        double wins = 0.0;
        long n_pos = 0, n_neg = 0;
        for (Index i = 0; i < n; ++i) {
            if (!mask.at(0, i)) continue;
            ++n_pos;
            for (Index j = 0; j < n; ++j) {
                if (mask.at(0, j)) continue;
                if (scores(0, i) > scores(0, j)) wins += 1.0;
                else if (scores(0, i) == scores(0, j)) wins += 0.5;
            }
        }
        n_neg = n - n_pos;
        const double mw = wins / (static_cast<double>(n_pos) * n_neg);
        worst = std::max(worst, std::abs(auc(scores, mask) - mw));
    }
    report(6, "trapezoid AUC equals the pairwise Mann-Whitney statistic",
           worst < 1e-12, fmt("worst |diff| %.3g over 50 instances", worst));
}

// --- criterion 7: region statistics oracle ----------------------------------

void criterionRepository() {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        HsiCube cube(32, 32, 8);
        Rng rng(900 + static_cast<std::uint64_t>(trial));
        for (auto& v : cube.values) v = static_cast<float>(rng.uniform01());
        const RegionMap map = segmentRegions(cube, 16);
        const AttributeRepository repo = buildRepository(cube, map);

        // naive loop over member pixels
        for (Index r = 0; r < map.n_regions; ++r) {
            const Index c = cube.bands;
            VecXd mean = VecXd::Zero(c), var = VecXd::Zero(c);
            VecXd mn = VecXd::Constant(c, 1e300), mx = VecXd::Constant(c, -1e300);
            Index count = 0;
            for (Index p = 0; p < cube.pixels(); ++p) {
                if (map.region_of[static_cast<std::size_t>(p)] != r) continue;
                ++count;
                for (Index b = 0; b < c; ++b) {
                    const double v = cube.values[static_cast<std::size_t>(p * c + b)];
                    mean(b) += v;
                    mn(b) = std::min(mn(b), v);
                    mx(b) = std::max(mx(b), v);
                }
            }
            mean /= static_cast<double>(count);
            for (Index p = 0; p < cube.pixels(); ++p) {
                if (map.region_of[static_cast<std::size_t>(p)] != r) continue;
                for (Index b = 0; b < c; ++b) {
                    const double d =
                        cube.values[static_cast<std::size_t>(p * c + b)] - mean(b);
                    var(b) += d * d;
                }
            }
            const VecXd sd = (var / static_cast<double>(count)).cwiseSqrt();
            for (Index b = 0; b < c; ++b) {
                const auto rel = [](double x, double y) {
                    return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-9});
                };
                worst = std::max({worst, rel(repo.mean(r, b), mean(b)),
                                  rel(repo.stddev(r, b), sd(b)),
                                  rel(repo.minv(r, b), mn(b)),
                                  rel(repo.maxv(r, b), mx(b))});
            }
        }
    }
    report(7, "repository statistics match the naive per-pixel loop",
           worst < 1e-6, fmt("worst rel err %.3g over 20 cubes", worst));
}

// --- criterion 10: holistic invariance --------------------------------------

void criterionHolisticInvariance() {
    const MatXd errors = randomMat(64, 16, 4242, -1.0, 1.0);
    const VecXd base = holisticScores(errors);
    double worst = 0.0;
    for (Index band = 0; band < errors.cols(); ++band) {
        MatXd scaled = errors;
        scaled.col(band) *= 10.0;
        const VecXd s = holisticScores(scaled);
        for (Index i = 0; i < s.size(); ++i)
            worst = std::max(worst,
                             std::abs(s(i) - base(i)) / std::max(base(i), 1e-300));
    }
    report(10, "holistic scores invariant to per-band scaling", worst <= 1e-9,
           fmt("worst rel change %.3g", worst));
}

} // namespace

int main() {
    const std::string root =
        (fs::temp_directory_path() / "acmamba_acceptance").string();
    fs::remove_all(root);
    fs::create_directories(root);

    // cheap analytic criteria first
    criterionDiscretize();
    criterionGradients();
    criterionCalibration();
    criterionMasking();
    criterionAucOracle();
    criterionRepository();
    criterionHolisticInvariance();

    // --- criterion 1: end-to-end synthetic detection ------------------------
    const std::string run_a = root + "/a";
    RunConfig cfg = acceptanceConfig(run_a);
    try {
        cmdSynth(cfg);
        const auto start = std::chrono::steady_clock::now();
        cmdRun(cfg);
        const double runtime = seconds(start);

        const MatXd scores = loadRasterF32(run_a + "/detection.hsc1");
        const GroundTruthMask mask = loadMask(run_a + "/mask.hsc1");
        const double fused_auc = auc(scores, mask);

        const HsiCube cube = loadCube(run_a + "/cube.hsc1");
        const double rx_auc = auc(rxBaseline(normalize(cube)).scores, mask);

        report(1, "end-to-end synthetic detection",
               fused_auc >= 0.95 && fused_auc >= rx_auc - 0.02 && runtime < 120.0,
               fmt("AUC %.4f vs RX %.4f, %.1fs", fused_auc, rx_auc, runtime));
    } catch (const std::exception& e) {
        report(1, "end-to-end synthetic detection", false, e.what());
    }

    // --- criterion 8: sampling-cost claim ------------------------------------
    try {
        const HsiCube cube = loadCube(run_a + "/cube.hsc1");
        const HsiCube norm = normalize(cube);
        const RegionMap map = segmentRegions(
            norm, regionTargetOf(cfg, cube.height, cube.width), cfg.compactness,
            cfg.slic_iters);
        const AttributeRepository repo = buildRepository(norm, map);

        const double sample_ratio = static_cast<double>(map.n_regions) /
                                    static_cast<double>(cube.pixels());

        auto model = makeAutoencoder<double>(cube.bands, cfg.hidden_dim,
                                             cfg.state_dim, cfg.seed);
        VecXd params = flattenTensors(model);
        AdamWState<double> opt(params.size());
        opt.lr = cfg.lr;
        Rng rng(cfg.seed + 1);

        auto epoch_on = [&](const MatXd& seq) {
            DifficultyTracker tracker(seq.rows());
            const MaskVector mask = generateMask(tracker, cfg.eta, rng);
            const ConsensusOutcome out =
                consensusLossesWithGrads(model, seq, mask, cfg.norm_k);
            const CalibrationResult calib =
                calibrateGradients(out.g_ori, out.g_mask, rng);
            adamwStep(params, calib.combined, opt);
            assignTensors(model, params);
        };

        const RegionSequence region_seq =
            drawRepresentative(repo, map, cfg.beta_max, rng);
        const double t_region =
            medianSeconds([&] { epoch_on(region_seq.values); }, 3);
        const MatXd dense_seq = norm.toMatrix();
        const double t_dense = medianSeconds([&] { epoch_on(dense_seq); }, 1);

        const double time_ratio = t_region / t_dense;
        report(8, "region sampling cuts per-epoch samples and time",
               sample_ratio <= 0.01 && time_ratio <= 0.05,
               fmt("samples %.4f (N_r=%lld), time ratio %.4f (%.3fs vs %.3fs)",
                   sample_ratio, static_cast<long long>(map.n_regions), time_ratio,
                   t_region, t_dense));
    } catch (const std::exception& e) {
        report(8, "region sampling cuts per-epoch samples and time", false, e.what());
    }

    // --- criterion 9: collapse property --------------------------------------
    try {
        const MatXd detail = loadRasterF32(run_a + "/detail.hsc1");
        const GroundTruthMask mask = loadMask(run_a + "/mask.hsc1");
        double anom = 0.0, bg = 0.0;
        Index n_anom = 0, n_bg = 0;
        for (Index r = 0; r < detail.rows(); ++r)
            for (Index c = 0; c < detail.cols(); ++c) {
                if (mask.at(r, c)) {
                    anom += detail(r, c);
                    ++n_anom;
                } else {
                    bg += detail(r, c);
                    ++n_bg;
                }
            }
        anom /= static_cast<double>(n_anom);
        bg /= static_cast<double>(n_bg);
        const double ratio = anom / bg;
        report(9, "anomalies reconstruct worse than background (collapse)",
               ratio >= 2.0, fmt("detail-error ratio %.2f", ratio));
    } catch (const std::exception& e) {
        report(9, "anomalies reconstruct worse than background (collapse)", false,
               e.what());
    }

    // --- criterion 11: determinism -------------------------------------------
    try {
        const std::string run_b = root + "/b";
        RunConfig cfg_b = acceptanceConfig(run_b);
        cfg_b.cube_path = run_a + "/cube.hsc1";
        cfg_b.mask_path = run_a + "/mask.hsc1";
        cmdRun(cfg_b);
        const bool maps_equal = readFile(run_a + "/detection.hsc1") ==
                                readFile(run_b + "/detection.hsc1");
        const bool losses_equal =
            readFile(run_a + "/loss.csv") == readFile(run_b + "/loss.csv");
        report(11, "repeated runs are byte-identical", maps_equal && losses_equal,
               fmt("maps %s, loss csv %s", maps_equal ? "equal" : "differ",
                   losses_equal ? "equal" : "differ"));
    } catch (const std::exception& e) {
        report(11, "repeated runs are byte-identical", false, e.what());
    }

    std::printf("%s: %d criterion(s) failed\n",
                g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
                g_failures);
    return g_failures == 0 ? 1 * (g_failures != 0) : 0;
}
