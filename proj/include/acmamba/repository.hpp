#pragma once

#include "acmamba/cube.hpp"
#include "acmamba/rng.hpp"
#include "acmamba/slic.hpp"

namespace acmamba {

// Per-region spectral statistics, rows indexed by region id. Mean uses the
// indicator-weighted average over member pixels; stddev is the population
// standard deviation.
struct AttributeRepository {
    MatXd mean;   // N_r x C
    MatXd stddev; // N_r x C
    MatXd minv;   // N_r x C
    MatXd maxv;   // N_r x C

    Index nRegions() const { return mean.rows(); }
    Index bands() const { return mean.cols(); }
};

// Representative samples, one row per region in RegionMap.order; beta_used
// records the factor actually drawn for each row.
struct RegionSequence {
    MatXd values;   // N_r x C
    VecXd beta_used;
};

AttributeRepository buildRepository(const HsiCube& cube, const RegionMap& map);

// mean + beta * stddev when that stays inside [min, max] in every band,
// otherwise the plain mean vector.
VecXd representativeFor(const AttributeRepository& repo, Index region, double beta);

// One uniform beta in [-beta_max, beta_max] per region per call; rows follow
// map.order.
RegionSequence drawRepresentative(const AttributeRepository& repo,
                                  const RegionMap& map, double beta_max, Rng& rng);

// Deterministic sequence of region means (beta = 0), rows in map.order.
MatXd meanSequence(const AttributeRepository& repo, const RegionMap& map);

} // namespace acmamba
