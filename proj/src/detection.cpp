#include "acmamba/detection.hpp"

#include <Eigen/Cholesky>

#include "acmamba/errors.hpp"

namespace acmamba {

std::vector<std::uint8_t> DetectionMap::binarize() const {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(scores.size()), 0);
    if (!hasThreshold()) return out;
    for (Index r = 0; r < scores.rows(); ++r)
        for (Index c = 0; c < scores.cols(); ++c)
            out[static_cast<std::size_t>(r * scores.cols() + c)] =
                scores(r, c) > threshold ? 1 : 0;
    return out;
}

HolisticStats holisticStatsOf(const MatXd& errors, double eps) {
    HolisticStats st;
    st.gamma = errors.colwise().mean().transpose();
    const MatXd centered = errors.rowwise() - st.gamma.transpose();
    st.sigma_diag = (centered.array().square().colwise().mean().transpose())
                        .cwiseMax(eps)
                        .matrix();
    return st;
}

VecXd holisticScores(const MatXd& errors, bool full_covariance, double eps) {
    const Index n = errors.rows(), c = errors.cols();
    const VecXd gamma = errors.colwise().mean().transpose();
    const MatXd centered = errors.rowwise() - gamma.transpose();

    VecXd scores(n);
    if (!full_covariance) {
        const VecXd sigma = (centered.array().square().colwise().mean().transpose())
                                .cwiseMax(eps)
                                .matrix();
        for (Index i = 0; i < n; ++i)
            scores(i) =
                (centered.row(i).transpose().array().square() / sigma.array()).sum();
    } else {
        MatXd cov = centered.transpose() * centered / static_cast<double>(n);
        cov += eps * MatXd::Identity(c, c);
        const Eigen::LDLT<MatXd> solver(cov);
        const MatXd solved = solver.solve(centered.transpose()); // c x n
        for (Index i = 0; i < n; ++i)
            scores(i) = centered.row(i).dot(solved.col(i));
    }
    return scores.cwiseMax(0.0);
}

MatXd holisticMap(const Autoencoder& model, const AttributeRepository& repo,
                  const RegionMap& map, const DetectOptions& opts) {
    if (!model.initialized)
        throw UntrainedModelError("holisticMap needs an initialized model");
    if (repo.nRegions() != map.n_regions)
        throw DimMismatchError("repository and region map disagree on region count");

    const MatXd seq = meanSequence(repo, map);
    const MatXd recon = autoencoderForward(model, seq, EncoderPath::Original);
    const MatXd errors = seq - recon; // rows in scan order

    const VecXd row_scores =
        holisticScores(errors, opts.full_covariance, opts.eps);
    VecXd by_region(map.n_regions);
    for (Index k = 0; k < map.n_regions; ++k)
        by_region(map.order[static_cast<std::size_t>(k)]) = row_scores(k);
    return projectRegionsToPixels(by_region, map);
}

MatXd detailMap(const Autoencoder& model, const HsiCube& cube,
                const DetectOptions& opts) {
    if (!model.initialized)
        throw UntrainedModelError("detailMap needs an initialized model");
    if (cube.bands != model.inDim())
        throw DimMismatchError("cube band count != model input dim");

    const MatXd pixels = cube.toMatrix(); // (H*W) x C row-major pixels
    const Index n_px = pixels.rows();
    const Index chunk = opts.chunk > 0 ? opts.chunk : n_px;
    const EncoderPath path =
        opts.masked_encoder ? EncoderPath::Masked : EncoderPath::Original;

    MatXd scores_flat(n_px, 1);
    for (Index start = 0; start < n_px; start += chunk) {
        const Index len = std::min(chunk, n_px - start);
        const MatXd block = pixels.middleRows(start, len);
        const MatXd recon = autoencoderForward(model, block, path);
        for (Index i = 0; i < len; ++i)
            scores_flat(start + i, 0) = normK(
                block.row(i).transpose() - recon.row(i).transpose(), opts.norm_k);
    }

    MatXd raster(cube.height, cube.width);
    for (Index p = 0; p < n_px; ++p)
        raster(p / cube.width, p % cube.width) = scores_flat(p, 0);
    return raster;
}

DetectionMap fuse(const MatXd& holistic, const MatXd& detail) {
    if (holistic.rows() != detail.rows() || holistic.cols() != detail.cols())
        throw DimMismatchError("fuse: raster dimensions differ");
    DetectionMap out;
    out.scores = (holistic.array() * detail.array()).matrix();
    return out;
}

DetectionMap rxBaseline(const HsiCube& cube, double eps) {
    const MatXd pixels = cube.toMatrix();
    const Index n = pixels.rows(), c = pixels.cols();

    const VecXd mu = pixels.colwise().mean().transpose();
    const MatXd centered = pixels.rowwise() - mu.transpose();
    MatXd cov = centered.transpose() * centered / static_cast<double>(n);
    cov += eps * MatXd::Identity(c, c);

    const Eigen::LDLT<MatXd> solver(cov);
    const MatXd solved = solver.solve(centered.transpose()); // c x n

    DetectionMap out;
    out.scores.resize(cube.height, cube.width);
    for (Index p = 0; p < n; ++p)
        out.scores(p / cube.width, p % cube.width) =
            std::max(0.0, centered.row(p).dot(solved.col(p)));
    return out;
}

} // namespace acmamba
