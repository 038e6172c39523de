#pragma once

#include <cstdint>
#include <utility>

#include "acmamba/cube.hpp"

namespace acmamba {

// Parameters for a synthetic scene: a smooth convex mixture of endmember
// spectra as background, plus rectangular anomaly blobs built additively
// from one distinct anomaly spectrum.
struct SceneSpec {
    Index height = 100;
    Index width = 100;
    Index bands = 50;
    int n_endmembers = 3;
    int n_anomalies = 5;
    double anomaly_fraction = 0.01; // in (0, 0.1]
    double noise_sigma = 0.01;
    std::uint64_t seed = 0;
};

// Generates cube + ground truth. Background pixels are convex mixtures of
// the endmembers (abundances from blurred noise, renormalized to sum 1);
// anomaly pixels additionally receive s * anomaly_spectrum with s drawn in
// [0.3, 0.7] per blob. Gaussian noise is added last and the result clipped
// to [0, 1]; endmember scaling keeps the clip a no-op when noise_sigma = 0.
// Deterministic in the seed; the background draw does not depend on
// n_anomalies.
std::pair<HsiCube, GroundTruthMask> synthScene(const SceneSpec& spec);

} // namespace acmamba
