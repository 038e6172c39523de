#pragma once

#include <cstdint>
#include <vector>

#include "acmamba/types.hpp"

namespace acmamba {

// Hyperspectral reflectance cube. Values are stored pixel-major (row-major
// over (h, w)) with bands innermost: values[(h*width + w)*bands + c].
struct HsiCube {
    Index height = 0;
    Index width = 0;
    Index bands = 0;
    std::vector<float> values;

    HsiCube() = default;
    HsiCube(Index h, Index w, Index c)
        : height(h), width(w), bands(c),
          values(static_cast<std::size_t>(h) * w * c, 0.0f) {}

    Index pixels() const { return height * width; }

    float& at(Index h, Index w, Index c) {
        return values[static_cast<std::size_t>((h * width + w) * bands + c)];
    }
    float at(Index h, Index w, Index c) const {
        return values[static_cast<std::size_t>((h * width + w) * bands + c)];
    }

    bool valid() const {
        return height >= 2 && width >= 2 && bands >= 1 &&
               values.size() == static_cast<std::size_t>(height) * width * bands;
    }

    // Pixel matrix view: (H*W) x C in double precision, row p = pixel
    // (p / W, p % W). All downstream math runs on this layout.
    MatXd toMatrix() const;
    static HsiCube fromMatrix(const MatXd& pixels, Index height, Index width);
};

// Binary anomaly labels paired with a cube (1 = anomaly).
struct GroundTruthMask {
    Index height = 0;
    Index width = 0;
    std::vector<std::uint8_t> labels;

    GroundTruthMask() = default;
    GroundTruthMask(Index h, Index w)
        : height(h), width(w), labels(static_cast<std::size_t>(h) * w, 0) {}

    std::uint8_t& at(Index h, Index w) {
        return labels[static_cast<std::size_t>(h * width + w)];
    }
    std::uint8_t at(Index h, Index w) const {
        return labels[static_cast<std::size_t>(h * width + w)];
    }

    Index count() const;
};

// Per-band min-max scaling to [0, 1]; a band with zero range maps to 0.
// Idempotent.
HsiCube normalize(const HsiCube& cube);

} // namespace acmamba
