#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <variant>
#include <vector>

#include "fekete/errors.hpp"
#include "fekete/format.hpp"
#include "fekete/imagecharge.hpp"
#include "fekete/pointcharge.hpp"
#include "fekete/rng.hpp"
#include "fekete/threads.hpp"
#include "fekete/vec3.hpp"

namespace fekete::fieldscan {

struct PointSet {
    pointcharge::ChargeConfiguration config;
};

struct UniformSphere {
    Vec3 center;
    double r0 = 1.0;
    double Q = 1.0;
};

struct TwoBallSystem {
    imagecharge::ImageChargeSystem system;
};

struct Sum;

using PotentialSource = std::variant<PointSet, UniformSphere, TwoBallSystem, Sum>;

struct Sum {
    std::vector<PotentialSource> sources;
};

inline constexpr double singular_distance = 1e-14;

namespace detail {

inline void check_not_singular(double d, const Vec3& x) {
    if (d < singular_distance) {
        throw SingularEvaluation("potential is singular at (" + float17(x.x) + ", " +
                                 float17(x.y) + ", " + float17(x.z) + ")");
    }
}

template <class V, class PointFn, class SphereFn>
inline V evaluate(const PotentialSource& source, const Vec3& x, PointFn&& point_term,
                  SphereFn&& sphere_term) {
    struct Visitor {
        const Vec3& x;
        PointFn& point_term;
        SphereFn& sphere_term;
        V operator()(const PointSet& s) const {
            V acc{};
            for (std::size_t k = 0; k < s.config.size(); ++k)
                acc += point_term(s.config.positions[k], s.config.charges[k], x);
            return acc;
        }
        V operator()(const UniformSphere& s) const { return sphere_term(s, x); }
        V operator()(const TwoBallSystem& s) const {
            V acc{};
            const auto& sys = s.system;
            for (std::size_t n = 0; n < sys.coeff_D.size(); ++n)
                acc += point_term(sys.x_point(n), sys.coeff_D[n], x);
            for (std::size_t n = 0; n < sys.coeff_C.size(); ++n)
                acc += point_term(sys.y_point(n), sys.coeff_C[n], x);
            return acc;
        }
        V operator()(const Sum& s) const {
            V acc{};
            for (const auto& inner : s.sources)
                acc += std::visit(*this, inner);
            return acc;
        }
    };
    return std::visit(Visitor{x, point_term, sphere_term}, source);
}

}  // namespace detail

// Coulomb potential of the source at x. Linear in the charges; a uniform
// sphere of charge Q gives Q * min(1/|x-c|, 1/r0).
inline double coulomb_potential(const PotentialSource& source, const Vec3& x) {
    auto point = [](const Vec3& p, double q, const Vec3& at) {
        const double d = distance(at, p);
        detail::check_not_singular(d, at);
        return q / d;
    };
    auto sphere = [](const UniformSphere& s, const Vec3& at) {
        const double d = distance(at, s.center);
        return s.Q * std::min(1.0 / d, 1.0 / s.r0);
    };
    return detail::evaluate<double>(source, x, point, sphere);
}

/// Analytic gradient of the Coulomb potential.
inline Vec3 coulomb_gradient(const PotentialSource& source, const Vec3& x) {
    auto point = [](const Vec3& p, double q, const Vec3& at) {
        const Vec3 rel = at - p;
        const double d = norm(rel);
        detail::check_not_singular(d, at);
        return rel * (-q / (d * d * d));
    };
    auto sphere = [](const UniformSphere& s, const Vec3& at) -> Vec3 {
        const Vec3 rel = at - s.center;
        const double d = norm(rel);
        if (d <= s.r0) return {};
        return rel * (-s.Q / (d * d * d));
    };
    return detail::evaluate<Vec3>(source, x, point, sphere);
}

// Screened (Yukawa) potential with kernel exp(-s)/s. For a uniform sphere the
// closed form is Q sinh(r0)/r0 * exp(-s)/s outside and Q exp(-r0)/r0 *
// sinh(s)/s inside.
inline double yukawa_potential(const PotentialSource& source, const Vec3& x) {
    auto point = [](const Vec3& p, double q, const Vec3& at) {
        const double d = distance(at, p);
        detail::check_not_singular(d, at);
        return q * std::exp(-d) / d;
    };
    auto sphere = [](const UniformSphere& s, const Vec3& at) {
        const double d = distance(at, s.center);
        if (d >= s.r0) return s.Q * (std::sinh(s.r0) / s.r0) * std::exp(-d) / d;
        const double sinc = d < 1e-8 ? 1.0 + d * d / 6.0 : std::sinh(d) / d;
        return s.Q * (std::exp(-s.r0) / s.r0) * sinc;
    };
    return detail::evaluate<double>(source, x, point, sphere);
}

inline Vec3 yukawa_gradient(const PotentialSource& source, const Vec3& x) {
    auto point = [](const Vec3& p, double q, const Vec3& at) {
        const Vec3 rel = at - p;
        const double d = norm(rel);
        detail::check_not_singular(d, at);
        // d/ds [exp(-s)/s] = -exp(-s)(1+s)/s^2
        return rel * (-q * std::exp(-d) * (1.0 + d) / (d * d * d));
    };
    auto sphere = [](const UniformSphere& s, const Vec3& at) -> Vec3 {
        const Vec3 rel = at - s.center;
        const double d = norm(rel);
        if (d >= s.r0)
            return rel * (-s.Q * (std::sinh(s.r0) / s.r0) * std::exp(-d) * (1.0 + d) / (d * d * d));
        if (d < 1e-8) return {};
        // d/ds [sinh(s)/s] = (s cosh s - sinh s)/s^2
        const double g = (d * std::cosh(d) - std::sinh(d)) / (d * d);
        return rel * (s.Q * (std::exp(-s.r0) / s.r0) * g / d);
    };
    return detail::evaluate<Vec3>(source, x, point, sphere);
}

// ---------------------------------------------------------------------------
// Segment profiles and the two-ball oscillation curve.

struct SegmentProfile {
    Vec3 a;
    Vec3 b;
    std::vector<std::pair<double, double>> samples;  // (t in [0,1], U)
};

inline SegmentProfile segment_profile(const PotentialSource& source, const Vec3& a, const Vec3& b,
                                      int m) {
    if (m < 2) throw Error("segment profile needs at least 2 samples");
    SegmentProfile profile;
    profile.a = a;
    profile.b = b;
    profile.samples.reserve(m);
    for (int i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) / (m - 1);
        const Vec3 x = a + (b - a) * t;
        try {
            profile.samples.emplace_back(t, coulomb_potential(source, x));
        } catch (const SingularEvaluation&) {
            throw SingularEvaluation("segment profile hits a singular point at t = " + float17(t));
        }
    }
    return profile;
}

/// CSV form of a profile: header `t,U`, 17 significant digits.
inline std::string to_csv(const SegmentProfile& profile) {
    std::string out = "t,U\n";
    for (const auto& [t, u] : profile.samples) out += float17(t) + ',' + float17(u) + '\n';
    return out;
}

/// Oscillation of a sampled profile: max sample - min sample.
inline double oscillation(const SegmentProfile& profile) {
    if (profile.samples.empty()) throw Error("oscillation of an empty profile");
    double lo = profile.samples[0].second;
    double hi = lo;
    for (const auto& [t, u] : profile.samples) {
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    return hi - lo;
}

// E(d) for the symmetric two-ball conductor: both radii R, both charges q,
// centers d + 2R apart; the profile runs across the gap between the facing
// sphere surfaces, endpoints included.
inline std::vector<std::pair<double, double>> oscillation_curve(double R, double q,
                                                                const std::vector<double>& d_values,
                                                                int m, double eps_tail = 1e-12,
                                                                int n_max = 200) {
    if (!(R > 0.0)) throw Error("ball radius must be positive");
    std::vector<std::pair<double, double>> curve;
    curve.reserve(d_values.size());
    for (double d : d_values) {
        if (!(d > 0.0)) throw Error("gap must be positive");
        imagecharge::TwoBallSpec spec;
        spec.center1 = {0.0, 0.0, 0.0};
        spec.center2 = {d + 2.0 * R, 0.0, 0.0};
        spec.R = spec.r = R;
        spec.Q = spec.q = q;
        const auto sys = imagecharge::solve_two_balls(spec, eps_tail, n_max);
        const Vec3 a{R, 0.0, 0.0};
        const Vec3 b{R + d, 0.0, 0.0};
        const auto profile = segment_profile(PotentialSource{TwoBallSystem{sys}}, a, b, m);
        curve.emplace_back(d, oscillation(profile));
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Gauss-flux charge recovery on a sphere.

struct FluxResult {
    double enclosed_charge = 0.0;
    int quadrature_points = 0;
    double estimated_error = 0.0;
};

/// Near-uniform unit directions: spherical Fibonacci spiral, deterministic.
inline std::vector<Vec3> fibonacci_sphere(int n) {
    constexpr double golden_angle = 2.39996322972865332;  // pi (3 - sqrt 5)
    std::vector<Vec3> dirs;
    dirs.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * i;
        dirs.push_back({s * std::cos(phi), s * std::sin(phi), z});
    }
    return dirs;
}

namespace detail {

inline void check_sources_off_sphere(const PotentialSource& source, const Vec3& center,
                                     double radius) {
    struct Visitor {
        const Vec3& center;
        double radius;
        void operator()(const PointSet& s) const {
            for (const auto& p : s.config.positions)
                if (std::abs(distance(p, center) - radius) < 1e-6)
                    throw SourceOnSurface("point source within 1e-6 of the quadrature sphere");
        }
        void operator()(const UniformSphere& s) const {
            const double c = distance(s.center, center);
            // surfaces intersect iff |radius - r0| <= c <= radius + r0
            if (c <= radius + s.r0 + 1e-6 && c >= std::abs(radius - s.r0) - 1e-6)
                throw SourceOnSurface("uniform sphere crosses the quadrature sphere");
        }
        void operator()(const TwoBallSystem& s) const {
            const auto& sys = s.system;
            for (std::size_t n = 0; n < sys.coeff_D.size(); ++n)
                if (std::abs(distance(sys.x_point(n), center) - radius) < 1e-6)
                    throw SourceOnSurface("image charge within 1e-6 of the quadrature sphere");
            for (std::size_t n = 0; n < sys.coeff_C.size(); ++n)
                if (std::abs(distance(sys.y_point(n), center) - radius) < 1e-6)
                    throw SourceOnSurface("image charge within 1e-6 of the quadrature sphere");
        }
        void operator()(const Sum& s) const {
            for (const auto& inner : s.sources) std::visit(*this, inner);
        }
    };
    std::visit(Visitor{center, radius}, source);
}

template <class GradFn>
inline double flux_surface_term(const GradFn& grad, const Vec3& center, double radius,
                                int n_quad) {
    const auto dirs = fibonacci_sphere(n_quad);
    // -(1/4pi) * (4pi rho^2 / n) * sum grad U . n  ==  -(rho^2/n) sum grad U . n
    const double sum = parallel_block_sum(dirs.size(), 512, [&](std::size_t i) {
        const Vec3 x = center + dirs[i] * radius;
        return dot(grad(x), dirs[i]);
    });
    return -radius * radius / n_quad * sum;
}

}  // namespace detail

// Recovers the net charge strictly inside the sphere from the flux of the
// analytic field gradient: -(1/4pi) closed-integral dU/dn dS. The error
// estimate compares against the same rule at half the node count.
inline FluxResult gauss_flux(const PotentialSource& source, const Vec3& sphere_center,
                             double sphere_radius, int n_quad) {
    if (n_quad < 8) throw Error("gauss flux needs at least 8 quadrature nodes");
    if (!(sphere_radius > 0.0)) throw Error("quadrature sphere radius must be positive");
    detail::check_sources_off_sphere(source, sphere_center, sphere_radius);
    auto grad = [&](const Vec3& x) { return coulomb_gradient(source, x); };
    FluxResult result;
    result.enclosed_charge =
        detail::flux_surface_term(grad, sphere_center, sphere_radius, n_quad);
    result.quadrature_points = n_quad;
    const double coarse =
        detail::flux_surface_term(grad, sphere_center, sphere_radius, n_quad / 2);
    result.estimated_error = std::abs(result.enclosed_charge - coarse);
    return result;
}

// Yukawa-kernel charge recovery: (1/4pi) int_B U0 dV - (1/4pi) closed-integral
// dU0/dn dS. The volume term is estimated by seeded Monte Carlo over the ball.
inline FluxResult yukawa_flux(const PotentialSource& source, const Vec3& sphere_center,
                              double sphere_radius, int n_quad, int n_vol,
                              std::uint64_t seed = 0) {
    if (n_quad < 8) throw Error("yukawa flux needs at least 8 quadrature nodes");
    if (n_vol < 8) throw Error("yukawa flux needs at least 8 volume nodes");
    if (!(sphere_radius > 0.0)) throw Error("quadrature sphere radius must be positive");
    detail::check_sources_off_sphere(source, sphere_center, sphere_radius);

    auto grad = [&](const Vec3& x) { return yukawa_gradient(source, x); };
    const double surface = detail::flux_surface_term(grad, sphere_center, sphere_radius, n_quad);
    const double surface_coarse =
        detail::flux_surface_term(grad, sphere_center, sphere_radius, n_quad / 2);

    const double volume = 4.0 / 3.0 * std::numbers::pi * sphere_radius * sphere_radius *
                          sphere_radius;
    Rng rng(seed);
    std::vector<Vec3> nodes(static_cast<std::size_t>(n_vol));
    for (auto& node : nodes) node = rng.in_ball(sphere_center, sphere_radius);
    const double mean = parallel_block_sum(nodes.size(), 4096, [&](std::size_t i) {
                            return yukawa_potential(source, nodes[i]);
                        }) /
                        n_vol;
    const double mean_half = [&] {
        double s = 0.0;
        for (int i = 0; i < n_vol / 2; ++i) s += yukawa_potential(source, nodes[i]);
        return s / (n_vol / 2);
    }();
    const double volume_term = volume * mean / (4.0 * std::numbers::pi);
    const double volume_term_half = volume * mean_half / (4.0 * std::numbers::pi);

    FluxResult result;
    result.enclosed_charge = volume_term + surface;
    result.quadrature_points = n_quad;
    result.estimated_error =
        std::abs(surface - surface_coarse) + std::abs(volume_term - volume_term_half);
    return result;
}

// ---------------------------------------------------------------------------
// Electron path in a uniform magnetic field along OZ with initial velocity
// (v, 0, 0): a circle of radius mv/(eH) traversed at angular rate eH/m.

inline Vec3 magnetic_trajectory(double m, double v, double e, double H, double t) {
    if (e * H == 0.0) throw ZeroField("magnetic trajectory requires e*H != 0");
    if (m == 0.0) throw Error("magnetic trajectory requires nonzero mass");
    const double rho = m * v / (e * H);
    const double omega_t = e * H * t / m;
    return {rho * std::sin(omega_t), rho * (1.0 - std::cos(omega_t)), 0.0};
}

}  // namespace fekete::fieldscan
