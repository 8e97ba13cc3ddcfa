#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fekete/errors.hpp"
#include "fekete/fieldscan.hpp"
#include "fekete/format.hpp"
#include "fekete/geometry.hpp"
#include "fekete/threads.hpp"
#include "fekete/vec3.hpp"

namespace fekete::fieldscan {

enum class ThresholdMode { Above, Below };

inline const char* to_string(ThresholdMode mode) {
    return mode == ThresholdMode::Above ? "above" : "below";
}

struct GridSpec {
    Vec3 bbox_min;
    Vec3 bbox_max;
    int nx = 0, ny = 0, nz = 0;
};

struct ComponentSummary {
    int id = -1;
    std::size_t voxel_count = 0;
    bool touches_boundary = false;  // reaches a bounding-box face: unbounded
};

// Regular voxel sampling of a potential. values holds U at voxel centers in
// scanline order (x fastest, then y, then z); labels holds the connected
// component id of each in-set voxel, -1 elsewhere.
struct ScalarFieldGrid {
    GridSpec spec;
    double threshold = 0.0;
    ThresholdMode mode = ThresholdMode::Above;
    std::vector<double> values;
    std::vector<std::int32_t> labels;
    std::vector<ComponentSummary> components;

    std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(iz) * spec.ny + iy) * spec.nx + ix;
    }
    Vec3 voxel_center(int ix, int iy, int iz) const {
        const Vec3 d = spec.bbox_max - spec.bbox_min;
        return {spec.bbox_min.x + d.x * (ix + 0.5) / spec.nx,
                spec.bbox_min.y + d.y * (iy + 0.5) / spec.ny,
                spec.bbox_min.z + d.z * (iz + 0.5) / spec.nz};
    }
    std::size_t voxel_count() const {
        return static_cast<std::size_t>(spec.nx) * spec.ny * spec.nz;
    }
};

namespace detail {

inline void check_grid_spec(const GridSpec& spec, int lo = 2, int hi = 1 << 20) {
    for (int n : {spec.nx, spec.ny, spec.nz})
        if (n < lo || n > hi)
            throw ResolutionOutOfRange("grid resolution " + std::to_string(n) +
                                       " outside [" + std::to_string(lo) + ", " +
                                       std::to_string(hi) + "]");
    const Vec3 d = spec.bbox_max - spec.bbox_min;
    if (!(d.x > 0.0 && d.y > 0.0 && d.z > 0.0))
        throw Error("bounding box must have positive extent");
}

}  // namespace detail

/// Samples the Coulomb potential of the source at every voxel center.
inline ScalarFieldGrid sample_grid(const PotentialSource& source, const GridSpec& spec) {
    detail::check_grid_spec(spec);
    ScalarFieldGrid grid;
    grid.spec = spec;
    grid.values.assign(grid.voxel_count(), 0.0);
    const std::size_t plane = static_cast<std::size_t>(spec.nx) * spec.ny;
    parallel_blocks(grid.voxel_count(), plane, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const int ix = static_cast<int>(i % spec.nx);
            const int iy = static_cast<int>((i / spec.nx) % spec.ny);
            const int iz = static_cast<int>(i / plane);
            grid.values[i] = coulomb_potential(source, grid.voxel_center(ix, iy, iz));
        }
    });
    return grid;
}

// Labels the voxels satisfying the threshold by 6-connected flood fill.
// Component ids are assigned in scanline order, so the labeling is
// deterministic; components touching a bounding-box face are flagged.
inline ScalarFieldGrid level_components(const PotentialSource& source, const GridSpec& spec,
                                        double threshold, ThresholdMode mode) {
    detail::check_grid_spec(spec, 8, 512);
    ScalarFieldGrid grid = sample_grid(source, spec);
    grid.threshold = threshold;
    grid.mode = mode;
    grid.labels.assign(grid.voxel_count(), -1);

    auto in_set = [&](std::size_t i) {
        return mode == ThresholdMode::Above ? grid.values[i] >= threshold
                                            : grid.values[i] < threshold;
    };

    const int nx = spec.nx, ny = spec.ny, nz = spec.nz;
    std::vector<std::size_t> queue;
    std::int32_t next_id = 0;
    for (int iz = 0; iz < nz; ++iz) {
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                const std::size_t seed = grid.index(ix, iy, iz);
                if (grid.labels[seed] != -1 || !in_set(seed)) continue;
                ComponentSummary summary;
                summary.id = next_id;
                queue.clear();
                queue.push_back(seed);
                grid.labels[seed] = next_id;
                while (!queue.empty()) {
                    const std::size_t cur = queue.back();
                    queue.pop_back();
                    ++summary.voxel_count;
                    const int cx = static_cast<int>(cur % nx);
                    const int cy = static_cast<int>((cur / nx) % ny);
                    const int cz = static_cast<int>(cur / (static_cast<std::size_t>(nx) * ny));
                    if (cx == 0 || cx == nx - 1 || cy == 0 || cy == ny - 1 || cz == 0 ||
                        cz == nz - 1)
                        summary.touches_boundary = true;
                    const int neighbors[6][3] = {{cx - 1, cy, cz}, {cx + 1, cy, cz},
                                                 {cx, cy - 1, cz}, {cx, cy + 1, cz},
                                                 {cx, cy, cz - 1}, {cx, cy, cz + 1}};
                    for (const auto& nb : neighbors) {
                        if (nb[0] < 0 || nb[0] >= nx || nb[1] < 0 || nb[1] >= ny || nb[2] < 0 ||
                            nb[2] >= nz)
                            continue;
                        const std::size_t ni = grid.index(nb[0], nb[1], nb[2]);
                        if (grid.labels[ni] != -1 || !in_set(ni)) continue;
                        grid.labels[ni] = next_id;
                        queue.push_back(ni);
                    }
                }
                grid.components.push_back(summary);
                ++next_id;
            }
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Jagged-effect sandwich test. Two copies of the order-n spherical lattice, at
// the origin and at (d, 0, 0), carry a per-point charge calibrated so the
// threshold sqrt(N) sits midway inside the smooth-limit feasibility window:
// below the potential at the far pole (so B(0, r-eps) stays in the superlevel
// set) and above the on-axis potential at r+eps (so the set stays inside
// B(0, r+eps)). Whether the window survives the lattice granularity is then
// exactly the jagged question. Returns true when the component nearest the
// origin sandwiches between B(0, r-eps) and B(0, r+eps) on the voxel grid.

inline bool jagged_sandwich_check(int n, double r, double d, double eps, int resolution = 128) {
    if (!(d > 2.0 * r)) throw Error("sandwich check requires center distance d > 2r");
    if (!(eps > 0.0)) throw Error("eps must be positive");
    const auto lattice = geometry::spherical_lattice(n, r);
    const double N = static_cast<double>(lattice.size());
    const double floor_mult = 1.0 / r + 1.0 / (d + r);  // far pole of the sphere
    const double cap = std::min(eps, d / 2.0 - r);       // keep the probe radius sane
    const double ceil_mult = 1.0 / (r + cap) + 1.0 / (d - r - cap);
    const double q = std::sqrt(N) / (N * 0.5 * (floor_mult + ceil_mult));

    pointcharge::ChargeConfiguration config;
    for (const auto& p : lattice.points) {
        config.positions.push_back(p);
        config.charges.push_back(q);
    }
    for (const auto& p : lattice.points) {
        config.positions.push_back(p + Vec3{d, 0.0, 0.0});
        config.charges.push_back(q);
    }

    GridSpec spec;
    spec.bbox_min = {-3.0 * r, -3.0 * r, -3.0 * r};
    spec.bbox_max = {d + 3.0 * r, 3.0 * r, 3.0 * r};
    spec.nx = spec.ny = spec.nz = resolution;

    const auto grid = level_components(PotentialSource{PointSet{std::move(config)}}, spec,
                                       std::sqrt(N), ThresholdMode::Above);

    // component of the in-set voxel nearest the origin
    std::int32_t label = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int iz = 0; iz < spec.nz; ++iz)
        for (int iy = 0; iy < spec.ny; ++iy)
            for (int ix = 0; ix < spec.nx; ++ix) {
                const std::int32_t l = grid.labels[grid.index(ix, iy, iz)];
                if (l < 0) continue;
                const double rho = norm(grid.voxel_center(ix, iy, iz));
                if (rho < best) {
                    best = rho;
                    label = l;
                }
            }
    if (label < 0) return false;
    if (grid.components[label].touches_boundary) return false;

    for (int iz = 0; iz < spec.nz; ++iz) {
        for (int iy = 0; iy < spec.ny; ++iy) {
            for (int ix = 0; ix < spec.nx; ++ix) {
                const Vec3 c = grid.voxel_center(ix, iy, iz);
                const double rho = norm(c);
                const std::int32_t l = grid.labels[grid.index(ix, iy, iz)];
                if (rho <= r - eps && l != label) return false;  // B(0, r-eps) not covered
                if (l == label && rho > r + eps) return false;   // pokes out of B(0, r+eps)
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Serialization: raw little-endian arrays plus a small JSON header.

inline void write_grid_values(const ScalarFieldGrid& grid, const std::string& path) {
    write_f64_le(path, grid.values);
}

inline void write_grid_labels(const ScalarFieldGrid& grid, const std::string& path) {
    write_i32_le(path, grid.labels);
}

/// Header JSON: bbox, resolution, threshold, mode, and component summaries.
inline std::string grid_header_json(const ScalarFieldGrid& grid) {
    std::string out = "{\n";
    out += "  \"bbox_min\": [" + float17(grid.spec.bbox_min.x) + ", " +
           float17(grid.spec.bbox_min.y) + ", " + float17(grid.spec.bbox_min.z) + "],\n";
    out += "  \"bbox_max\": [" + float17(grid.spec.bbox_max.x) + ", " +
           float17(grid.spec.bbox_max.y) + ", " + float17(grid.spec.bbox_max.z) + "],\n";
    out += "  \"resolution\": [" + std::to_string(grid.spec.nx) + ", " +
           std::to_string(grid.spec.ny) + ", " + std::to_string(grid.spec.nz) + "],\n";
    out += "  \"threshold\": " + float17(grid.threshold) + ",\n";
    out += std::string("  \"mode\": \"") + to_string(grid.mode) + "\",\n";
    out += "  \"components\": [";
    for (std::size_t i = 0; i < grid.components.size(); ++i) {
        const auto& c = grid.components[i];
        if (i) out += ",";
        out += "\n    {\"id\": " + std::to_string(c.id) +
               ", \"voxel_count\": " + std::to_string(c.voxel_count) +
               ", \"touches_boundary\": " + (c.touches_boundary ? "true" : "false") + "}";
    }
    out += grid.components.empty() ? "]\n" : "\n  ]\n";
    out += "}\n";
    return out;
}

}  // namespace fekete::fieldscan
