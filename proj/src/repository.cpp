#include "acmamba/repository.hpp"

#include <cmath>
#include <limits>

#include "acmamba/errors.hpp"

namespace acmamba {

AttributeRepository buildRepository(const HsiCube& cube, const RegionMap& map) {
    if (cube.height != map.height || cube.width != map.width)
        throw DimMismatchError("cube and region map dimensions differ");

    const Index n_r = map.n_regions, c = cube.bands, n_px = cube.pixels();
    AttributeRepository repo;
    repo.mean = MatXd::Zero(n_r, c);
    repo.stddev = MatXd::Zero(n_r, c);
    repo.minv = MatXd::Constant(n_r, c, std::numeric_limits<double>::max());
    repo.maxv = MatXd::Constant(n_r, c, std::numeric_limits<double>::lowest());

    std::vector<Index> size(static_cast<std::size_t>(n_r), 0);
    for (Index p = 0; p < n_px; ++p) {
        const Index r = map.region_of[static_cast<std::size_t>(p)];
        ++size[r];
        for (Index b = 0; b < c; ++b) {
            const double v = cube.values[static_cast<std::size_t>(p * c + b)];
            repo.mean(r, b) += v;
            repo.minv(r, b) = std::min(repo.minv(r, b), v);
            repo.maxv(r, b) = std::max(repo.maxv(r, b), v);
        }
    }
    for (Index r = 0; r < n_r; ++r) repo.mean.row(r) /= static_cast<double>(size[r]);

    // Second pass keeps the variance numerically clean.
    for (Index p = 0; p < n_px; ++p) {
        const Index r = map.region_of[static_cast<std::size_t>(p)];
        for (Index b = 0; b < c; ++b) {
            const double d =
                cube.values[static_cast<std::size_t>(p * c + b)] - repo.mean(r, b);
            repo.stddev(r, b) += d * d;
        }
    }
    for (Index r = 0; r < n_r; ++r)
        repo.stddev.row(r) =
            (repo.stddev.row(r) / static_cast<double>(size[r])).cwiseSqrt();
    return repo;
}

VecXd representativeFor(const AttributeRepository& repo, Index region, double beta) {
    VecXd candidate =
        repo.mean.row(region).transpose() + beta * repo.stddev.row(region).transpose();
    for (Index b = 0; b < repo.bands(); ++b)
        if (candidate(b) < repo.minv(region, b) || candidate(b) > repo.maxv(region, b))
            return repo.mean.row(region).transpose();
    return candidate;
}

RegionSequence drawRepresentative(const AttributeRepository& repo,
                                  const RegionMap& map, double beta_max, Rng& rng) {
    if (repo.nRegions() != map.n_regions)
        throw DimMismatchError("repository and region map disagree on region count");
    RegionSequence seq;
    seq.values.resize(repo.nRegions(), repo.bands());
    seq.beta_used.resize(repo.nRegions());
    for (Index k = 0; k < map.n_regions; ++k) {
        const Index region = map.order[static_cast<std::size_t>(k)];
        const double beta = rng.uniform(-beta_max, beta_max);
        seq.beta_used(k) = beta;
        seq.values.row(k) = representativeFor(repo, region, beta).transpose();
    }
    return seq;
}

MatXd meanSequence(const AttributeRepository& repo, const RegionMap& map) {
    MatXd seq(repo.nRegions(), repo.bands());
    for (Index k = 0; k < map.n_regions; ++k)
        seq.row(k) = repo.mean.row(map.order[static_cast<std::size_t>(k)]);
    return seq;
}

} // namespace acmamba
