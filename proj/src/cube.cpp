#include "acmamba/cube.hpp"

namespace acmamba {

MatXd HsiCube::toMatrix() const {
    MatXd m(pixels(), bands);
    for (Index p = 0; p < pixels(); ++p)
        for (Index c = 0; c < bands; ++c)
            m(p, c) = values[static_cast<std::size_t>(p * bands + c)];
    return m;
}

HsiCube HsiCube::fromMatrix(const MatXd& pixels, Index height, Index width) {
    HsiCube cube(height, width, pixels.cols());
    for (Index p = 0; p < pixels.rows(); ++p)
        for (Index c = 0; c < pixels.cols(); ++c)
            cube.values[static_cast<std::size_t>(p * pixels.cols() + c)] =
                static_cast<float>(pixels(p, c));
    return cube;
}

Index GroundTruthMask::count() const {
    Index n = 0;
    for (auto v : labels) n += (v != 0);
    return n;
}

HsiCube normalize(const HsiCube& cube) {
    HsiCube out(cube.height, cube.width, cube.bands);
    const Index n = cube.pixels();
    for (Index c = 0; c < cube.bands; ++c) {
        float lo = cube.values[static_cast<std::size_t>(c)];
        float hi = lo;
        for (Index p = 0; p < n; ++p) {
            const float v = cube.values[static_cast<std::size_t>(p * cube.bands + c)];
            if (v < lo) lo = v;
            if (v > hi) hi = v;
        }
        const float range = hi - lo;
        for (Index p = 0; p < n; ++p) {
            const std::size_t i = static_cast<std::size_t>(p * cube.bands + c);
            out.values[i] = range > 0.0f ? (cube.values[i] - lo) / range : 0.0f;
        }
    }
    return out;
}

} // namespace acmamba
