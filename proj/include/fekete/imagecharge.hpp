#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fekete/errors.hpp"
#include "fekete/geometry.hpp"
#include "fekete/pointcharge.hpp"
#include "fekete/vec3.hpp"

namespace fekete::imagecharge {

// Two disjoint conducting balls with fixed total charges Q and q.
struct TwoBallSpec {
    Vec3 center1;
    double R = 1.0;
    double Q = 1.0;
    Vec3 center2;
    double r = 1.0;
    double q = 1.0;

    double gap() const { return distance(center1, center2) - R - r; }
};

// The solved Kelvin image system. Point n of x_points is the image x_{n+1}
// (x_0 is center1); coeff_D[n] is the charge at x_n, coeff_C[n] the charge at
// y_n. C and D are the monopole prefactors; A is the 2x2 map (C, D) -> (Q, q).
struct ImageChargeSystem {
    TwoBallSpec spec;
    std::vector<Vec3> x_points;  // x_1, x_2, ... strictly inside ball 1
    std::vector<Vec3> y_points;  // y_1, y_2, ... strictly inside ball 2
    std::vector<double> coeff_C;  // C_0 .. C_K at y_0 .. y_K
    std::vector<double> coeff_D;  // D_0 .. D_K at x_0 .. x_K
    double C = 0.0;
    double D = 0.0;
    std::array<std::array<double, 2>, 2> A{};
    int truncation_n = 0;
    double tail_bound = 0.0;

    Vec3 x_point(std::size_t n) const { return n == 0 ? spec.center1 : x_points[n - 1]; }
    Vec3 y_point(std::size_t n) const { return n == 0 ? spec.center2 : y_points[n - 1]; }

    /// All image charges as one configuration (component 0 = ball 1 images).
    pointcharge::ChargeConfiguration as_point_charges() const {
        pointcharge::ChargeConfiguration config;
        for (std::size_t n = 0; n < coeff_D.size(); ++n) {
            config.positions.push_back(x_point(n));
            config.charges.push_back(coeff_D[n]);
            config.component_index.push_back(0);
        }
        for (std::size_t n = 0; n < coeff_C.size(); ++n) {
            config.positions.push_back(y_point(n));
            config.charges.push_back(coeff_C[n]);
            config.component_index.push_back(1);
        }
        return config;
    }
};

namespace detail {

struct CoefficientPass {
    std::vector<double> c;  // C_0 .. C_K
    std::vector<double> d;  // D_0 .. D_K
    double sum_c = 0.0;
    double sum_d = 0.0;
};

// Runs the image recurrence with prefactors (c_pre, d_pre) over precomputed
// image points. Coefficients are linear in the prefactors.
inline CoefficientPass coefficient_pass(const TwoBallSpec& spec, const std::vector<Vec3>& xs,
                                        const std::vector<Vec3>& ys, double c_pre, double d_pre) {
    CoefficientPass pass;
    const std::size_t K = xs.size();
    pass.d.push_back(c_pre);  // D_0 = C at x_0
    pass.c.push_back(d_pre);  // C_0 = D at y_0
    for (std::size_t n = 1; n <= K; ++n) {
        const double dx = distance(xs[n - 1], spec.center1);
        const double dy = distance(ys[n - 1], spec.center2);
        pass.d.push_back(-pass.c[n - 1] * dx / spec.R);
        pass.c.push_back(-pass.d[n - 1] * dy / spec.r);
    }
    for (double v : pass.c) pass.sum_c += v;
    for (double v : pass.d) pass.sum_d += v;
    return pass;
}

}  // namespace detail

// Solves the two-ball equilibrium by the method of image charges: alternating
// Kelvin reflections generate the image points, two unit coefficient passes
// assemble the 2x2 charge system, and (C, D) follow from the fixed totals.
inline ImageChargeSystem solve_two_balls(const TwoBallSpec& spec, double eps_tail = 1e-12,
                                         int n_max = 200) {
    if (!(spec.R > 0.0) || !(spec.r > 0.0)) throw Error("ball radii must be positive");
    if (!(spec.gap() > 0.0)) throw BallsOverlap("two-ball solve requires disjoint balls");
    if (n_max < 1) throw Error("n_max must be >= 1");

    ImageChargeSystem sys;
    sys.spec = spec;

    // Image points: x_n reflects y_{n-1} in sphere 1, y_n reflects x_{n-1} in
    // sphere 2. Their norms contract toward the mutual inverse points, so the
    // point sequences converge geometrically.
    Vec3 x_prev = spec.center1;
    Vec3 y_prev = spec.center2;
    for (int n = 1; n <= n_max; ++n) {
        const Vec3 xn = geometry::kelvin_transform(spec.center1, spec.R, y_prev);
        const Vec3 yn = geometry::kelvin_transform(spec.center2, spec.r, x_prev);
        sys.x_points.push_back(xn);
        sys.y_points.push_back(yn);
        x_prev = xn;
        y_prev = yn;
    }

    // Two linear passes fix A: column 1 from (C, D) = (1, 0), column 2 from
    // (0, 1). Truncate both at the first index where the unit-scale tail is
    // below eps_tail.
    auto pass1 = detail::coefficient_pass(spec, sys.x_points, sys.y_points, 1.0, 0.0);
    auto pass2 = detail::coefficient_pass(spec, sys.x_points, sys.y_points, 0.0, 1.0);

    int K = n_max;
    bool converged = false;
    for (int n = 1; n <= n_max; ++n) {
        const double tail = std::abs(pass1.c[n]) + std::abs(pass1.d[n]) +
                            std::abs(pass2.c[n]) + std::abs(pass2.d[n]);
        if (tail < eps_tail) {
            K = n;
            converged = true;
            break;
        }
    }
    if (!converged)
        throw SeriesNotConverged("image series tail above eps_tail at n_max = " +
                                 std::to_string(n_max));

    sys.x_points.resize(K);
    sys.y_points.resize(K);
    auto truncate = [K](detail::CoefficientPass& p) {
        p.c.resize(K + 1);
        p.d.resize(K + 1);
        p.sum_c = 0.0;
        p.sum_d = 0.0;
        for (double v : p.c) p.sum_c += v;
        for (double v : p.d) p.sum_d += v;
    };
    truncate(pass1);
    truncate(pass2);

    sys.A[0][0] = pass1.sum_d;
    sys.A[0][1] = pass2.sum_d;
    sys.A[1][0] = pass1.sum_c;
    sys.A[1][1] = pass2.sum_c;
    const double det = sys.A[0][0] * sys.A[1][1] - sys.A[0][1] * sys.A[1][0];
    if (det == 0.0) throw SingularSystem("two-ball charge system is singular");
    sys.C = (sys.A[1][1] * spec.Q - sys.A[0][1] * spec.q) / det;
    sys.D = (sys.A[0][0] * spec.q - sys.A[1][0] * spec.Q) / det;

    sys.coeff_C.resize(K + 1);
    sys.coeff_D.resize(K + 1);
    for (int n = 0; n <= K; ++n) {
        sys.coeff_C[n] = sys.C * pass1.c[n] + sys.D * pass2.c[n];
        sys.coeff_D[n] = sys.C * pass1.d[n] + sys.D * pass2.d[n];
    }
    sys.truncation_n = K;
    sys.tail_bound = (std::abs(pass1.c[K]) + std::abs(pass1.d[K]) + std::abs(pass2.c[K]) +
                      std::abs(pass2.d[K])) *
                     std::max(std::abs(sys.C), std::abs(sys.D));
    return sys;
}

// Potential of the solved system at a point outside both closed balls
// (boundary allowed). Equals C/R on sphere 1 and D/r on sphere 2.
inline double two_ball_potential(const ImageChargeSystem& sys, const Vec3& x) {
    const double scale = std::max(sys.spec.R, sys.spec.r);
    const double inside_tol = -1e-12 * scale;
    if (distance(x, sys.spec.center1) - sys.spec.R < inside_tol ||
        distance(x, sys.spec.center2) - sys.spec.r < inside_tol)
        throw InsideConductor("potential is represented only outside the conductor");
    double u = 0.0;
    for (std::size_t n = 0; n < sys.coeff_D.size(); ++n)
        u += sys.coeff_D[n] / distance(x, sys.x_point(n));
    for (std::size_t n = 0; n < sys.coeff_C.size(); ++n)
        u += sys.coeff_C[n] / distance(x, sys.y_point(n));
    return u;
}

// ---------------------------------------------------------------------------
// Nested shells: solid core at radii[0], solid annuli [radii[1], radii[2]],
// ..., optionally enclosed by a neutral conducting sphere of radius 1. The
// core carries q1; every annulus floats neutral.

struct ShellSolution {
    std::vector<double> radii;
    std::vector<double> charges;            // charge on each sphere radii[i]
    std::vector<double> potential_levels;   // per solid component, core first
    bool with_outer_sphere = false;
    double outer_level = 0.0;               // potential on the outer sphere, if present
};

namespace detail {

/// Potential at radius s of a unit charge spread uniformly over the sphere of
/// radius rho: 1/rho inside, 1/s outside.
inline double shell_kernel(double s, double rho) { return s <= rho ? 1.0 / rho : 1.0 / s; }

// Dense Gaussian elimination with partial pivoting; sizes here are <= 63.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        if (std::abs(a[pivot][col]) < 1e-300)
            throw SingularSystem("shell system is singular");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a[row][j] -= f * a[col][j];
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace detail

// Solves for the induced charges on the nested-shell conductor given the core
// charge q1. Constraints: the potential is constant across each solid annulus
// and every floating component is neutral. The solution obeys the alternating
// law q_n = (-1)^(n-1) q1.
inline ShellSolution solve_nested_shells(const std::vector<double>& radii, double q1,
                                         bool with_outer_sphere) {
    if (radii.empty()) throw Error("need at least one shell radius");
    if (radii.size() > 64) throw Error("at most 64 shells supported");
    double prev = 0.0;
    for (double r : radii) {
        if (!(r > prev)) throw Error("shell radii must be positive and strictly increasing");
        prev = r;
    }
    if (with_outer_sphere && !(prev < 1.0))
        throw Error("shell radii must be < 1 when the outer sphere is present");

    const std::size_t M = radii.size();
    const std::size_t unknowns = M - 1;  // q_2 .. q_M (1-based)
    std::vector<double> charges(M, 0.0);
    charges[0] = q1;

    if (unknowns > 0) {
        std::vector<std::vector<double>> a(unknowns, std::vector<double>(unknowns, 0.0));
        std::vector<double> b(unknowns, 0.0);
        std::size_t eq = 0;
        // annulus [radii[lo], radii[hi]] (0-based lo = 1, 3, 5, ...)
        for (std::size_t lo = 1; lo + 1 < M; lo += 2) {
            const std::size_t hi = lo + 1;
            // neutrality of the floating pair
            a[eq][lo - 1] += 1.0;
            a[eq][hi - 1] += 1.0;
            b[eq] = 0.0;
            ++eq;
            // potential constancy across the annulus, assembled from the
            // uniform-shell kernels at two interior probe radii
            const double s1 = radii[lo] + (radii[hi] - radii[lo]) / 3.0;
            const double s2 = radii[lo] + 2.0 * (radii[hi] - radii[lo]) / 3.0;
            for (std::size_t j = 1; j < M; ++j)
                a[eq][j - 1] +=
                    detail::shell_kernel(s1, radii[j]) - detail::shell_kernel(s2, radii[j]);
            b[eq] = -q1 * (detail::shell_kernel(s1, radii[0]) - detail::shell_kernel(s2, radii[0]));
            ++eq;
        }
        if (M % 2 == 0) {
            // unpaired outermost sphere floats neutral on its own
            a[eq][M - 2] += 1.0;
            b[eq] = 0.0;
            ++eq;
        }
        if (eq != unknowns) throw SingularSystem("shell system assembly mismatch");
        const auto solved = detail::solve_dense(std::move(a), std::move(b));
        for (std::size_t j = 1; j < M; ++j) charges[j] = solved[j - 1];
    }

    ShellSolution sol;
    sol.radii = radii;
    sol.charges = charges;
    sol.with_outer_sphere = with_outer_sphere;

    auto potential_at = [&](double s) {
        double u = 0.0;
        for (std::size_t j = 0; j < M; ++j) u += charges[j] * detail::shell_kernel(s, radii[j]);
        return u;  // the outer sphere is neutral and contributes nothing
    };
    sol.potential_levels.push_back(potential_at(radii[0] * 0.5));  // core
    for (std::size_t lo = 1; lo + 1 < M; lo += 2)
        sol.potential_levels.push_back(potential_at(0.5 * (radii[lo] + radii[lo + 1])));
    if (with_outer_sphere) sol.outer_level = potential_at(1.0);
    return sol;
}

}  // namespace fekete::imagecharge
