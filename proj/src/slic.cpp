#include "acmamba/slic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "acmamba/errors.hpp"

namespace acmamba {

namespace {

// Seed grid: pick (rows, cols) whose product is closest to the target,
// preferring square-ish cells, then wider grids.
std::pair<Index, Index> seedGrid(Index h, Index w, Index target) {
    Index best_r = 1, best_c = 1;
    double best_prod_err = std::numeric_limits<double>::max();
    double best_aspect = std::numeric_limits<double>::max();
    for (Index nr = 1; nr <= std::min<Index>(h, target); ++nr) {
        Index nc = std::clamp<Index>(
            static_cast<Index>(std::llround(static_cast<double>(target) / nr)), 1, w);
        for (Index cand : {nc, nc + 1}) {
            if (cand < 1 || cand > w) continue;
            const double prod_err = std::abs(static_cast<double>(nr * cand - target));
            const double cell_h = static_cast<double>(h) / nr;
            const double cell_w = static_cast<double>(w) / cand;
            const double aspect = std::max(cell_h, cell_w) / std::min(cell_h, cell_w);
            const bool better =
                prod_err < best_prod_err ||
                (prod_err == best_prod_err &&
                 (aspect < best_aspect - 1e-12 ||
                  (std::abs(aspect - best_aspect) <= 1e-12 && cand > best_c)));
            if (better) {
                best_prod_err = prod_err;
                best_aspect = aspect;
                best_r = nr;
                best_c = cand;
            }
        }
    }
    return {best_r, best_c};
}

struct Cluster {
    VecXd spectrum;   // mean spectrum of members
    double row = 0.0; // spatial centroid
    double col = 0.0;
    Index size = 0;
};

// Merge orphan connected components into the largest adjacent region and
// compact ids so that every region in [0, n_regions) owns >= 1 pixel.
void enforceConnectivity(std::vector<std::int32_t>& label, Index h, Index w,
                         Index n_clusters) {
    const Index n_px = h * w;
    std::vector<std::int32_t> comp(static_cast<std::size_t>(n_px), -1);
    std::vector<Index> comp_size;
    std::vector<std::int32_t> comp_label;
    std::vector<Index> comp_first;

    std::vector<Index> stack;
    std::int32_t n_comp = 0;
    for (Index p = 0; p < n_px; ++p) {
        if (comp[p] >= 0) continue;
        const std::int32_t lbl = label[p];
        comp_size.push_back(0);
        comp_label.push_back(lbl);
        comp_first.push_back(p);
        stack.push_back(p);
        comp[p] = n_comp;
        while (!stack.empty()) {
            const Index q = stack.back();
            stack.pop_back();
            ++comp_size[n_comp];
            const Index r = q / w, c = q % w;
            const Index nbr[4] = {q - w, q + w, q - 1, q + 1};
            const bool ok[4] = {r > 0, r < h - 1, c > 0, c < w - 1};
            for (int k = 0; k < 4; ++k) {
                if (!ok[k]) continue;
                const Index t = nbr[k];
                if (comp[t] < 0 && label[t] == lbl) {
                    comp[t] = n_comp;
                    stack.push_back(t);
                }
            }
        }
        ++n_comp;
    }

    // Largest component per label keeps the id; ties go to the component
    // seen first in raster order.
    std::vector<std::int32_t> keeper(static_cast<std::size_t>(n_clusters), -1);
    for (std::int32_t ci = 0; ci < n_comp; ++ci) {
        const std::int32_t lbl = comp_label[ci];
        if (keeper[lbl] < 0 || comp_size[ci] > comp_size[keeper[lbl]]) keeper[lbl] = ci;
    }

    // Relabel orphan components in raster order of their first pixel.
    std::vector<std::int32_t> comp_order(static_cast<std::size_t>(n_comp));
    std::iota(comp_order.begin(), comp_order.end(), 0);
    std::sort(comp_order.begin(), comp_order.end(),
              [&](std::int32_t a, std::int32_t b) { return comp_first[a] < comp_first[b]; });

    std::vector<Index> region_size(static_cast<std::size_t>(n_clusters), 0);
    for (Index p = 0; p < n_px; ++p)
        if (comp[p] == keeper[label[p]]) ++region_size[label[p]];

    for (std::int32_t oc : comp_order) {
        if (oc == keeper[comp_label[oc]]) continue;
        // Collect the orphan's pixels and adjacent regions.
        std::vector<Index> members;
        members.reserve(comp_size[oc]);
        for (Index p = 0; p < n_px; ++p)
            if (comp[p] == oc) members.push_back(p);

        std::int32_t best = -1;
        Index best_size = -1;
        for (Index p : members) {
            const Index r = p / w, c = p % w;
            const Index nbr[4] = {p - w, p + w, p - 1, p + 1};
            const bool ok[4] = {r > 0, r < h - 1, c > 0, c < w - 1};
            for (int k = 0; k < 4; ++k) {
                if (!ok[k]) continue;
                const std::int32_t nl = label[nbr[k]];
                if (comp[nbr[k]] == oc) continue;
                if (region_size[nl] > best_size ||
                    (region_size[nl] == best_size && nl < best)) {
                    best = nl;
                    best_size = region_size[nl];
                }
            }
        }
        if (best < 0) continue; // whole image is one component
        for (Index p : members) {
            label[p] = best;
            comp[p] = keeper[best]; // absorbed; treat as part of the keeper
        }
        region_size[best] += comp_size[oc];
    }

    // Compact ids, dropping emptied clusters, preserving id order.
    std::vector<std::int32_t> remap(static_cast<std::size_t>(n_clusters), -1);
    std::int32_t next = 0;
    std::vector<Index> final_size(static_cast<std::size_t>(n_clusters), 0);
    for (Index p = 0; p < n_px; ++p) ++final_size[label[p]];
    for (std::int32_t l = 0; l < n_clusters; ++l)
        if (final_size[l] > 0) remap[l] = next++;
    for (Index p = 0; p < n_px; ++p) label[p] = remap[label[p]];
}

} // namespace

std::vector<Index> RegionMap::regionSizes() const {
    std::vector<Index> sizes(static_cast<std::size_t>(n_regions), 0);
    for (auto l : region_of) ++sizes[l];
    return sizes;
}

RegionMap segmentRegions(const HsiCube& cube, Index n_regions_target,
                         double compactness, int iters) {
    const Index h = cube.height, w = cube.width, bands = cube.bands;
    const Index n_px = h * w;
    if (n_regions_target < 1 || n_regions_target > n_px)
        throw InvalidTargetError("region target " + std::to_string(n_regions_target) +
                                 " outside [1, " + std::to_string(n_px) + "]");
    if (compactness <= 0.0 || iters < 1)
        throw InvalidTargetError("compactness and iters must be positive");

    const MatXd feat = normalize(cube).toMatrix(); // n_px x C in [0,1]
    const double S = std::sqrt(static_cast<double>(n_px) / n_regions_target);
    const double spatial_w = compactness / S;

    const auto [rows, cols] = seedGrid(h, w, n_regions_target);
    const Index k = rows * cols;
    std::vector<Cluster> clusters(static_cast<std::size_t>(k));
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) {
            Cluster& cl = clusters[static_cast<std::size_t>(i * cols + j)];
            cl.row = (i + 0.5) * static_cast<double>(h) / rows - 0.5;
            cl.col = (j + 0.5) * static_cast<double>(w) / cols - 0.5;
            const Index pr = std::clamp<Index>(static_cast<Index>(std::llround(cl.row)), 0, h - 1);
            const Index pc = std::clamp<Index>(static_cast<Index>(std::llround(cl.col)), 0, w - 1);
            cl.spectrum = feat.row(pr * w + pc).transpose();
        }

    std::vector<std::int32_t> label(static_cast<std::size_t>(n_px), -1);
    std::vector<double> best_dist(static_cast<std::size_t>(n_px));
    const Index window = std::max<Index>(1, static_cast<Index>(std::ceil(S)));

    for (int it = 0; it < iters; ++it) {
        std::fill(best_dist.begin(), best_dist.end(),
                  std::numeric_limits<double>::max());
        std::fill(label.begin(), label.end(), -1);
        for (Index ci = 0; ci < k; ++ci) {
            const Cluster& cl = clusters[static_cast<std::size_t>(ci)];
            const Index r0 = std::max<Index>(0, static_cast<Index>(std::floor(cl.row)) - window);
            const Index r1 = std::min<Index>(h - 1, static_cast<Index>(std::ceil(cl.row)) + window);
            const Index c0 = std::max<Index>(0, static_cast<Index>(std::floor(cl.col)) - window);
            const Index c1 = std::min<Index>(w - 1, static_cast<Index>(std::ceil(cl.col)) + window);
            for (Index r = r0; r <= r1; ++r)
                for (Index c = c0; c <= c1; ++c) {
                    const Index p = r * w + c;
                    const double dr = (r - cl.row) * spatial_w;
                    const double dc = (c - cl.col) * spatial_w;
                    double d = dr * dr + dc * dc;
                    if (d >= best_dist[p]) continue;
                    d += (feat.row(p).transpose() - cl.spectrum).squaredNorm();
                    if (d < best_dist[p]) {
                        best_dist[p] = d;
                        label[p] = static_cast<std::int32_t>(ci);
                    }
                }
        }
        // Window misses are possible once centroids drift; fall back to the
        // spatially nearest centroid.
        for (Index p = 0; p < n_px; ++p) {
            if (label[p] >= 0) continue;
            const double r = static_cast<double>(p / w), c = static_cast<double>(p % w);
            double best = std::numeric_limits<double>::max();
            for (Index ci = 0; ci < k; ++ci) {
                const Cluster& cl = clusters[static_cast<std::size_t>(ci)];
                const double d = (r - cl.row) * (r - cl.row) + (c - cl.col) * (c - cl.col);
                if (d < best) {
                    best = d;
                    label[p] = static_cast<std::int32_t>(ci);
                }
            }
        }
        // Centroid update; empty clusters keep their previous state.
        std::vector<Cluster> next(static_cast<std::size_t>(k));
        for (Index ci = 0; ci < k; ++ci) {
            next[ci].spectrum = VecXd::Zero(bands);
        }
        for (Index p = 0; p < n_px; ++p) {
            Cluster& cl = next[static_cast<std::size_t>(label[p])];
            cl.spectrum += feat.row(p).transpose();
            cl.row += static_cast<double>(p / w);
            cl.col += static_cast<double>(p % w);
            ++cl.size;
        }
        for (Index ci = 0; ci < k; ++ci) {
            Cluster& cl = next[static_cast<std::size_t>(ci)];
            if (cl.size == 0) {
                next[ci] = clusters[static_cast<std::size_t>(ci)];
                next[ci].size = 0;
                continue;
            }
            cl.spectrum /= static_cast<double>(cl.size);
            cl.row /= static_cast<double>(cl.size);
            cl.col /= static_cast<double>(cl.size);
        }
        clusters = std::move(next);
    }

    enforceConnectivity(label, h, w, k);

    RegionMap map;
    map.height = h;
    map.width = w;
    map.region_of = std::move(label);
    map.n_regions = *std::max_element(map.region_of.begin(), map.region_of.end()) + 1;
    map.order = regionScanOrder(map);
    return map;
}

std::vector<std::int32_t> regionScanOrder(const RegionMap& map) {
    std::vector<double> crow(static_cast<std::size_t>(map.n_regions), 0.0);
    std::vector<double> ccol(static_cast<std::size_t>(map.n_regions), 0.0);
    std::vector<Index> size(static_cast<std::size_t>(map.n_regions), 0);
    for (Index p = 0; p < map.height * map.width; ++p) {
        const std::int32_t l = map.region_of[static_cast<std::size_t>(p)];
        crow[l] += static_cast<double>(p / map.width);
        ccol[l] += static_cast<double>(p % map.width);
        ++size[l];
    }
    for (Index l = 0; l < map.n_regions; ++l) {
        crow[l] /= static_cast<double>(size[l]);
        ccol[l] /= static_cast<double>(size[l]);
    }
    std::vector<std::int32_t> order(static_cast<std::size_t>(map.n_regions));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        if (crow[a] != crow[b]) return crow[a] < crow[b];
        if (ccol[a] != ccol[b]) return ccol[a] < ccol[b];
        return a < b;
    });
    return order;
}

MatXd projectRegionsToPixels(const VecXd& region_values, const RegionMap& map) {
    if (region_values.size() != map.n_regions)
        throw DimMismatchError("value count " + std::to_string(region_values.size()) +
                               " != region count " + std::to_string(map.n_regions));
    MatXd raster(map.height, map.width);
    for (Index p = 0; p < map.height * map.width; ++p)
        raster(p / map.width, p % map.width) =
            region_values(map.region_of[static_cast<std::size_t>(p)]);
    return raster;
}

} // namespace acmamba
