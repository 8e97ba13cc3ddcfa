#pragma once

// Brute-force multi-start oracle for minimal Coulomb energies of n equal unit
// charges on the unit sphere. Deliberately self-contained: its own point type,
// its own energy sum and finite-difference descent, no library includes, so it
// stays independent of the implementation path it is used to check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace thomson_oracle {

struct P3 {
    double x, y, z;
};

inline double energy(const std::vector<P3>& pts) {
    double w = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dx = pts[i].x - pts[j].x;
            const double dy = pts[i].y - pts[j].y;
            const double dz = pts[i].z - pts[j].z;
            w += 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz);
        }
    return w;
}

inline void normalize(P3& p) {
    const double n = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    p.x /= n;
    p.y /= n;
    p.z /= n;
}

// Energy of point k against the rest (the only part that moves with k).
inline double point_energy(const std::vector<P3>& pts, std::size_t k) {
    double w = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        if (j == k) continue;
        const double dx = pts[k].x - pts[j].x;
        const double dy = pts[k].y - pts[j].y;
        const double dz = pts[k].z - pts[j].z;
        w += 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    return w;
}

// One greedy sweep: each point takes a finite-difference downhill step on the
// sphere, with per-call step halving until the move helps.
inline bool sweep(std::vector<P3>& pts, double& step) {
    bool improved = false;
    const double h = 1e-7;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double base = point_energy(pts, k);
        P3 grad{0, 0, 0};
        double* comp[3] = {&pts[k].x, &pts[k].y, &pts[k].z};
        double* gout[3] = {&grad.x, &grad.y, &grad.z};
        for (int c = 0; c < 3; ++c) {
            const P3 saved = pts[k];
            *comp[c] += h;
            normalize(pts[k]);
            const double wp = point_energy(pts, k);
            pts[k] = saved;
            *comp[c] -= h;
            normalize(pts[k]);
            const double wm = point_energy(pts, k);
            pts[k] = saved;
            *gout[c] = (wp - wm) / (2.0 * h);
        }
        double local = step;
        for (int tries = 0; tries < 40; ++tries) {
            const P3 saved = pts[k];
            pts[k].x -= local * grad.x;
            pts[k].y -= local * grad.y;
            pts[k].z -= local * grad.z;
            normalize(pts[k]);
            if (point_energy(pts, k) < base) {
                improved = true;
                break;
            }
            pts[k] = saved;
            local *= 0.5;
        }
    }
    return improved;
}

inline double min_energy(int n, int starts, std::uint64_t seed, int max_sweeps = 4000) {
    std::mt19937_64 gen(seed);
    auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53; };
    double best = 1e300;
    for (int s = 0; s < starts; ++s) {
        std::vector<P3> pts(n);
        for (auto& p : pts) {
            const double z = 1.0 - 2.0 * uniform();
            const double phi = 2.0 * 3.14159265358979323846 * uniform();
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            p = {r * std::cos(phi), r * std::sin(phi), z};
        }
        double step = 0.05;
        int idle = 0;
        for (int it = 0; it < max_sweeps && idle < 3; ++it) {
            if (!sweep(pts, step)) {
                step *= 0.5;
                ++idle;
            } else {
                idle = 0;
            }
            if (step < 1e-12) break;
        }
        best = std::min(best, energy(pts));
    }
    return best;
}

}  // namespace thomson_oracle
