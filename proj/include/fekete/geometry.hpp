#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "fekete/errors.hpp"
#include "fekete/rng.hpp"
#include "fekete/vec3.hpp"

namespace fekete::geometry {

// Conductor geometries. All are compact; Ball and BallUnion have interior
// volume, SphereSurface / NestedShells spheres / Segment are lower-dimensional
// components whose signed distance is nonnegative.

struct Ball {
    Vec3 center;
    double radius = 1.0;
};

struct SphereSurface {
    Vec3 center;
    double radius = 1.0;
};

struct BallUnion {
    std::vector<Ball> balls;  // pairwise disjoint closures
};

// Concentric conductor of §-style layered shells: a solid core of radius
// radii[0], solid annuli [radii[1],radii[2]], [radii[3],radii[4]], ... and a
// conducting spherical surface of radius 1 around everything.
struct NestedShells {
    std::vector<double> radii;  // strictly increasing, all < 1
};

struct Segment {
    Vec3 a;
    Vec3 b;
};

using ConductorDomain = std::variant<Ball, SphereSurface, BallUnion, NestedShells, Segment>;

inline void validate_domain(const ConductorDomain& domain) {
    struct V {
        void operator()(const Ball& b) const {
            if (!(b.radius > 0.0)) throw Error("ball radius must be positive");
        }
        void operator()(const SphereSurface& s) const {
            if (!(s.radius > 0.0)) throw Error("sphere radius must be positive");
        }
        void operator()(const BallUnion& u) const {
            if (u.balls.empty()) throw Error("ball union must contain at least one ball");
            for (const auto& b : u.balls)
                if (!(b.radius > 0.0)) throw Error("ball radius must be positive");
            for (std::size_t i = 0; i < u.balls.size(); ++i)
                for (std::size_t j = i + 1; j < u.balls.size(); ++j) {
                    const double d = distance(u.balls[i].center, u.balls[j].center);
                    if (!(d > u.balls[i].radius + u.balls[j].radius))
                        throw Error("ball union components must have disjoint closures");
                }
        }
        void operator()(const NestedShells& s) const {
            if (s.radii.empty()) throw Error("nested shells need at least one radius");
            if (s.radii.size() > 64) throw Error("at most 64 shells supported");
            double prev = 0.0;
            for (double r : s.radii) {
                if (!(r > prev)) throw Error("shell radii must be positive and strictly increasing");
                prev = r;
            }
            if (!(prev < 1.0)) throw Error("shell radii must be < 1 (outer sphere radius)");
        }
        void operator()(const Segment& s) const {
            if (!(distance(s.a, s.b) > 0.0)) throw Error("segment endpoints must be distinct");
        }
    };
    std::visit(V{}, domain);
}

inline double diameter(const ConductorDomain& domain) {
    struct V {
        double operator()(const Ball& b) const { return 2.0 * b.radius; }
        double operator()(const SphereSurface& s) const { return 2.0 * s.radius; }
        double operator()(const BallUnion& u) const {
            double d = 0.0;
            for (std::size_t i = 0; i < u.balls.size(); ++i) {
                d = std::max(d, 2.0 * u.balls[i].radius);
                for (std::size_t j = i + 1; j < u.balls.size(); ++j)
                    d = std::max(d, distance(u.balls[i].center, u.balls[j].center) +
                                        u.balls[i].radius + u.balls[j].radius);
            }
            return d;
        }
        double operator()(const NestedShells&) const { return 2.0; }
        double operator()(const Segment& s) const { return distance(s.a, s.b); }
    };
    return std::visit(V{}, domain);
}

/// Scale-invariant tolerance for boundary membership tests.
inline double boundary_tolerance(const ConductorDomain& domain) {
    return 1e-9 * diameter(domain);
}

namespace detail {

// Distance of radius s to the nested-shells conductor, measured radially.
// Solid pieces: [0, r0], [r1, r2], [r3, r4], ... (0-based pairs), plus the
// surface at radius 1.
inline double nested_shells_radial_distance(const NestedShells& shells, double s) {
    const auto& r = shells.radii;
    double best = std::abs(s - 1.0);  // outer sphere surface
    if (s <= r[0]) return 0.0;        // inside the solid core counts as on/in
    best = std::min(best, s - r[0]);
    for (std::size_t k = 1; k + 1 < r.size(); k += 2) {
        if (s >= r[k] && s <= r[k + 1]) return 0.0;
        best = std::min(best, std::min(std::abs(s - r[k]), std::abs(s - r[k + 1])));
    }
    if (r.size() % 2 == 0)  // unpaired last sphere is a lone surface
        best = std::min(best, std::abs(s - r.back()));
    return best;
}

inline double segment_parameter(const Segment& seg, const Vec3& x) {
    const Vec3 d = seg.b - seg.a;
    const double t = dot(x - seg.a, d) / norm_squared(d);
    return std::clamp(t, 0.0, 1.0);
}

}  // namespace detail

// Signed distance to the conductor: negative strictly inside, zero on the
// boundary, positive outside. Lower-dimensional domains have no interior, so
// their value is simply the distance to the set.
inline double signed_distance(const ConductorDomain& domain, const Vec3& x) {
    struct V {
        const Vec3& x;
        double operator()(const Ball& b) const { return distance(x, b.center) - b.radius; }
        double operator()(const SphereSurface& s) const {
            return std::abs(distance(x, s.center) - s.radius);
        }
        double operator()(const BallUnion& u) const {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& b : u.balls) d = std::min(d, distance(x, b.center) - b.radius);
            return d;
        }
        double operator()(const NestedShells& s) const {
            const double r = norm(x);
            if (r <= s.radii[0]) return r - s.radii[0];  // inside the solid core
            for (std::size_t k = 1; k + 1 < s.radii.size(); k += 2)
                if (r >= s.radii[k] && r <= s.radii[k + 1])
                    return -std::min(r - s.radii[k], s.radii[k + 1] - r);
            return detail::nested_shells_radial_distance(s, r);
        }
        double operator()(const Segment& s) const {
            const double t = detail::segment_parameter(s, x);
            return distance(x, s.a + (s.b - s.a) * t);
        }
    };
    return std::visit(V{x}, domain);
}

// Unit outward normal at a boundary point. Throws NotOnBoundary when x is not
// within boundary_tolerance of the boundary; Segment domains carry no normal.
inline Vec3 outward_normal(const ConductorDomain& domain, const Vec3& x) {
    const double tol = boundary_tolerance(domain);
    struct V {
        const Vec3& x;
        double tol;
        Vec3 operator()(const Ball& b) const {
            if (std::abs(distance(x, b.center) - b.radius) > tol)
                throw NotOnBoundary("point is not on the ball boundary");
            return normalized(x - b.center);
        }
        Vec3 operator()(const SphereSurface& s) const {
            if (std::abs(distance(x, s.center) - s.radius) > tol)
                throw NotOnBoundary("point is not on the sphere");
            return normalized(x - s.center);
        }
        Vec3 operator()(const BallUnion& u) const {
            const Ball* hit = nullptr;
            for (const auto& b : u.balls) {
                if (std::abs(distance(x, b.center) - b.radius) <= tol) {
                    if (hit) throw AmbiguousNormal("point lies on two ball boundaries");
                    hit = &b;
                }
            }
            if (!hit) throw NotOnBoundary("point is not on any ball boundary");
            return normalized(x - hit->center);
        }
        Vec3 operator()(const NestedShells& s) const {
            const double r = norm(x);
            if (r <= tol) throw NotOnBoundary("center is not a boundary point");
            const Vec3 radial = x / r;
            if (std::abs(r - 1.0) <= tol) return radial;  // outer surface convention
            if (std::abs(r - s.radii[0]) <= tol) return radial;
            for (std::size_t k = 1; k + 1 < s.radii.size(); k += 2) {
                if (std::abs(r - s.radii[k]) <= tol) return -radial;  // annulus inner wall
                if (std::abs(r - s.radii[k + 1]) <= tol) return radial;
            }
            if (s.radii.size() % 2 == 0 && std::abs(r - s.radii.back()) <= tol) return radial;
            throw NotOnBoundary("point is not on a shell boundary");
        }
        Vec3 operator()(const Segment&) const {
            throw UnsupportedDomain("segment domains carry no outward normal");
        }
    };
    return std::visit(V{x, tol}, domain);
}

/// Nearest point of the domain; identity for points already inside.
inline Vec3 project_to_domain(const ConductorDomain& domain, const Vec3& x) {
    struct V {
        const Vec3& x;
        Vec3 operator()(const Ball& b) const {
            const double d = distance(x, b.center);
            if (d <= b.radius) return x;
            return b.center + (x - b.center) * (b.radius / d);
        }
        Vec3 operator()(const SphereSurface& s) const {
            const Vec3 rel = x - s.center;
            const double d = norm(rel);
            if (d == 0.0) return s.center + Vec3{s.radius, 0.0, 0.0};
            return s.center + rel * (s.radius / d);
        }
        Vec3 operator()(const BallUnion& u) const {
            Vec3 best = x;
            double best_d = std::numeric_limits<double>::infinity();
            for (const auto& b : u.balls) {
                const double d = distance(x, b.center) - b.radius;
                if (d <= 0.0) return x;
                if (d < best_d) {
                    best_d = d;
                    best = b.center + (x - b.center) * (b.radius / distance(x, b.center));
                }
            }
            return best;
        }
        Vec3 operator()(const NestedShells& s) const {
            const double r = norm(x);
            const double target = nearest_radial(s, r);
            if (target == r) return x;
            if (r == 0.0) return {target, 0.0, 0.0};
            return x * (target / r);
        }
        Vec3 operator()(const Segment& s) const {
            const double t = detail::segment_parameter(s, x);
            return s.a + (s.b - s.a) * t;
        }

        static double nearest_radial(const NestedShells& s, double r) {
            if (r <= s.radii[0]) return r;
            double best = 1.0;
            double best_d = std::abs(r - 1.0);
            auto consider = [&](double lo, double hi) {
                const double c = std::clamp(r, lo, hi);
                const double d = std::abs(r - c);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            };
            consider(0.0, s.radii[0]);
            for (std::size_t k = 1; k + 1 < s.radii.size(); k += 2)
                consider(s.radii[k], s.radii[k + 1]);
            if (s.radii.size() % 2 == 0) consider(s.radii.back(), s.radii.back());
            return best;
        }
    };
    return std::visit(V{x}, domain);
}

// Kelvin transform (sphere inversion): y = c + R^2 (x - c) / |x - c|^2.
// Fixes the sphere |x - c| = R pointwise and satisfies |x-c| |y-c| = R^2.
inline Vec3 kelvin_transform(const Vec3& center, double R, const Vec3& x) {
    const Vec3 rel = x - center;
    const double d2 = norm_squared(rel);
    if (d2 == 0.0) throw SingularPoint("kelvin transform is singular at the sphere center");
    return center + rel * (R * R / d2);
}

/// Uniform-ish random point on the conductor boundary (segments are sampled
/// along their length). Used to seed minimization restarts.
inline Vec3 random_boundary_point(const ConductorDomain& domain, Rng& rng) {
    struct V {
        Rng& rng;
        Vec3 operator()(const Ball& b) const { return b.center + rng.unit_vector() * b.radius; }
        Vec3 operator()(const SphereSurface& s) const {
            return s.center + rng.unit_vector() * s.radius;
        }
        Vec3 operator()(const BallUnion& u) const {
            const auto& b = u.balls[rng.uniform_index(u.balls.size())];
            return b.center + rng.unit_vector() * b.radius;
        }
        Vec3 operator()(const NestedShells& s) const {
            const std::size_t n = s.radii.size() + 1;
            const std::size_t i = rng.uniform_index(n);
            const double r = (i == s.radii.size()) ? 1.0 : s.radii[i];
            return rng.unit_vector() * r;
        }
        Vec3 operator()(const Segment& s) const { return s.a + (s.b - s.a) * rng.uniform01(); }
    };
    return std::visit(V{rng}, domain);
}

// ---------------------------------------------------------------------------
// Spherical point lattice: rings phi_k = pi/2 + pi k / (2n), k = -n..n, with
// m_k = floor(n sin phi_k) points dividing each ring equally (theta = 2 pi j /
// m_k). Pole rings are empty. Equal division closes each ring, which is what
// makes the 4r/sqrt(N) covering property hold.

struct SphericalLattice {
    int n = 0;
    double r = 0.0;
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
};

inline SphericalLattice spherical_lattice(int n, double r) {
    if (n < 1) throw Error("lattice order must be >= 1");
    if (!(r > 0.0)) throw Error("lattice radius must be positive");
    constexpr double pi = std::numbers::pi;
    SphericalLattice lat;
    lat.n = n;
    lat.r = r;
    for (int k = -n; k <= n; ++k) {
        const double phi = pi / 2.0 + pi * k / (2.0 * n);
        const double s = std::sin(phi);
        const int m = static_cast<int>(std::floor(n * s));
        if (m < 1) continue;
        for (int j = 1; j <= m; ++j) {
            const double theta = 2.0 * pi * j / m;
            lat.points.push_back(
                {r * s * std::cos(theta), r * s * std::sin(theta), r * std::cos(phi)});
        }
    }
    return lat;
}

}  // namespace fekete::geometry
