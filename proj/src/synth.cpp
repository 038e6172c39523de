#include "acmamba/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "acmamba/errors.hpp"
#include "acmamba/rng.hpp"

namespace acmamba {

namespace {

void validate(const SceneSpec& s) {
    if (s.height < 2 || s.width < 2 || s.bands < 1)
        throw DimMismatchError("scene dimensions must satisfy H>=2, W>=2, C>=1");
    if (s.n_endmembers < 2)
        throw DimMismatchError("scene needs at least 2 endmembers");
    if (s.anomaly_fraction <= 0.0 || s.anomaly_fraction > 0.1)
        throw DimMismatchError("anomaly_fraction must lie in (0, 0.1]");
    if (s.n_anomalies < 0 || s.noise_sigma < 0.0)
        throw DimMismatchError("negative anomaly count or noise sigma");
}

// Separable Gaussian blur with reflected borders.
MatXd gaussianBlur(const MatXd& img, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    VecXd kernel(2 * radius + 1);
    for (int i = -radius; i <= radius; ++i)
        kernel(i + radius) = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel /= kernel.sum();

    const Index h = img.rows(), w = img.cols();
    auto reflect = [](Index i, Index n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
        return std::clamp<Index>(i, 0, n - 1);
    };

    MatXd tmp(h, w), out(h, w);
    for (Index r = 0; r < h; ++r)
        for (Index c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel(k + radius) * img(r, reflect(c + k, w));
            tmp(r, c) = acc;
        }
    for (Index r = 0; r < h; ++r)
        for (Index c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel(k + radius) * tmp(reflect(r + k, h), c);
            out(r, c) = acc;
        }
    return out;
}

} // namespace

std::pair<HsiCube, GroundTruthMask> synthScene(const SceneSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);

    const Index H = spec.height, W = spec.width, C = spec.bands;
    const int E = spec.n_endmembers;

    // Endmembers confined to [0.05, 0.3] so that background + 0.7 * anomaly
    // spectrum stays below 1 and clipping cannot distort the additive model.
    MatXd endmembers(E, C);
    for (int e = 0; e < E; ++e)
        for (Index c = 0; c < C; ++c)
            endmembers(e, c) = rng.uniform(0.05, 0.3);
    // Smooth along the band axis so spectra look material-like.
    for (int e = 0; e < E; ++e) {
        VecXd row = endmembers.row(e);
        VecXd sm = row;
        for (Index c = 0; c < C; ++c) {
            double acc = 0.0;
            int n = 0;
            for (Index k = std::max<Index>(0, c - 2); k <= std::min<Index>(C - 1, c + 2); ++k) {
                acc += row(k);
                ++n;
            }
            sm(c) = acc / n;
        }
        endmembers.row(e) = sm;
    }

    // Abundance fields: blurred uniform noise, renormalized per pixel.
    std::vector<MatXd> abundance(E);
    const double blur_sigma = std::max(2.0, std::min(H, W) / 25.0);
    for (int e = 0; e < E; ++e) {
        MatXd field(H, W);
        for (Index r = 0; r < H; ++r)
            for (Index c = 0; c < W; ++c) field(r, c) = rng.uniform01();
        abundance[e] = gaussianBlur(field, blur_sigma);
    }
    for (Index r = 0; r < H; ++r)
        for (Index c = 0; c < W; ++c) {
            double sum = 0.0;
            for (int e = 0; e < E; ++e) sum += abundance[e](r, c);
            for (int e = 0; e < E; ++e) abundance[e](r, c) /= sum;
        }

    // One anomaly spectrum per scene, drawn before placement so the
    // background is independent of n_anomalies.
    VecXd anomaly_spectrum(C);
    for (Index c = 0; c < C; ++c) anomaly_spectrum(c) = rng.uniform01();

    HsiCube cube(H, W, C);
    for (Index r = 0; r < H; ++r)
        for (Index c = 0; c < W; ++c)
            for (Index b = 0; b < C; ++b) {
                double v = 0.0;
                for (int e = 0; e < E; ++e) v += abundance[e](r, c) * endmembers(e, b);
                cube.at(r, c, b) = static_cast<float>(v);
            }

    // Blob placement: axis-aligned rectangles, sides 2..6 px, no overlap.
    GroundTruthMask mask(H, W);
    Index target_px =
        static_cast<Index>(std::llround(spec.anomaly_fraction * H * W));
    if (spec.n_anomalies > 0) target_px = std::max<Index>(1, target_px);
    Index placed_px = 0;
    int placed = 0;
    constexpr int kMaxAttempts = 1000;
    while (placed < spec.n_anomalies && placed_px < target_px) {
        bool ok = false;
        for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
            const Index bh = 2 + static_cast<Index>(rng.below(5));
            const Index bw = 2 + static_cast<Index>(rng.below(5));
            if (bh > H || bw > W) continue;
            const Index r0 = static_cast<Index>(rng.below(H - bh + 1));
            const Index c0 = static_cast<Index>(rng.below(W - bw + 1));
            bool overlap = false;
            for (Index r = r0; r < r0 + bh && !overlap; ++r)
                for (Index c = c0; c < c0 + bw && !overlap; ++c)
                    if (mask.at(r, c)) overlap = true;
            if (overlap) continue;

            const double s = rng.uniform(0.3, 0.7);
            for (Index r = r0; r < r0 + bh; ++r)
                for (Index c = c0; c < c0 + bw; ++c) {
                    mask.at(r, c) = 1;
                    for (Index b = 0; b < C; ++b)
                        cube.at(r, c, b) +=
                            static_cast<float>(s * anomaly_spectrum(b));
                }
            placed_px += bh * bw;
            ok = true;
        }
        if (!ok)
            throw PlacementError("could not place anomaly blob " +
                                 std::to_string(placed) + " without overlap");
        ++placed;
    }

    if (spec.noise_sigma > 0.0) {
        for (auto& v : cube.values)
            v += static_cast<float>(spec.noise_sigma * rng.normal());
    }
    for (auto& v : cube.values) v = std::clamp(v, 0.0f, 1.0f);

    return {std::move(cube), std::move(mask)};
}

} // namespace acmamba
