#pragma once

#include <cmath>

#include "acmamba/autoencoder.hpp"
#include "acmamba/repository.hpp"
#include "acmamba/slic.hpp"
#include "acmamba/training.hpp"

namespace acmamba {

// Nonnegative anomaly-score raster; threshold is optional (NaN = unset) and
// binarization is score > threshold.
struct DetectionMap {
    MatXd scores;
    double threshold = std::numeric_limits<double>::quiet_NaN();

    bool hasThreshold() const { return !std::isnan(threshold); }
    std::vector<std::uint8_t> binarize() const;
};

struct HolisticStats {
    VecXd gamma;      // mean regional error vector
    VecXd sigma_diag; // per-band variance, floored at eps
};

struct DetectOptions {
    double norm_k = 2.0;
    bool full_covariance = false;   // holistic Mahalanobis with full covariance
    bool masked_encoder = false;    // detail path through Ê instead of E
    Index chunk = 0;                // detail sequence chunk length, 0 = whole image
    double eps = 1e-6;
};

// Mahalanobis score of each row of `errors` against the rows' own mean and
// per-band variance (variance floored at eps so zero-variance bands stay
// finite while nondegenerate bands cancel scale exactly). The full-covariance
// variant regularizes with eps*I and solves instead.
VecXd holisticScores(const MatXd& errors, bool full_covariance = false,
                     double eps = 1e-6);

HolisticStats holisticStatsOf(const MatXd& errors, double eps = 1e-6);

// Regional Mahalanobis map: deterministic mean sequence (beta = 0) through
// the original path, error vectors scored and projected back to pixels.
MatXd holisticMap(const Autoencoder& model, const AttributeRepository& repo,
                  const RegionMap& map, const DetectOptions& opts = {});

// Dense per-pixel reconstruction-error map; pixels are fed row-major as one
// sequence (or in chunks of opts.chunk steps).
MatXd detailMap(const Autoencoder& model, const HsiCube& cube,
                const DetectOptions& opts = {});

// Elementwise product of the two cue maps.
DetectionMap fuse(const MatXd& holistic, const MatXd& detail);

// Global RX: Mahalanobis distance of every pixel to the scene mean under the
// eps-regularized pixel covariance.
DetectionMap rxBaseline(const HsiCube& cube, double eps = 1e-6);

} // namespace acmamba
