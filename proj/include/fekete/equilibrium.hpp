#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fekete/errors.hpp"
#include "fekete/geometry.hpp"
#include "fekete/pointcharge.hpp"
#include "fekete/rng.hpp"
#include "fekete/vec3.hpp"

namespace fekete::equilibrium {

struct Component {
    geometry::ConductorDomain domain;
    std::size_t count = 0;   // number of charges on this component
    double charge = 1.0;     // per-charge value, same sign within the component
};

struct MinimizeOptions {
    std::size_t max_iterations = 20000;
    double gradient_tol = 0.0;  // 0 = auto: 1e-9 * n * max q^2
    int restarts = 8;
    std::uint64_t rng_seed = 0;
    double step_shrink = 0.5;
    double armijo = 1e-4;
};

struct EquilibriumProblem {
    std::vector<Component> components;
    // immobile background charges: they contribute to the energy and to the
    // forces on the free charges but are not optimization variables
    pointcharge::ChargeConfiguration fixed;
    MinimizeOptions options;
};

struct EquilibriumResult {
    pointcharge::ChargeConfiguration config;
    double energy = 0.0;
    double projected_gradient_norm = 0.0;
    std::vector<double> lagrange_multipliers;  // F.n per boundary charge, when defined
    double boundary_max_distance = 0.0;
    bool converged = false;
};

namespace detail {

inline void validate_problem(const EquilibriumProblem& problem) {
    if (problem.components.empty()) throw InfeasibleProblem("problem has no components");
    pointcharge::validate(problem.fixed);
    std::size_t total = 0;
    for (const auto& c : problem.components) {
        geometry::validate_domain(c.domain);
        if (c.count == 0 && c.charge != 0.0)
            throw InfeasibleProblem("component with zero charge count but nonzero charge value");
        total += c.count;
    }
    if (total == 0) throw InfeasibleProblem("problem has no charges");
    if (!(problem.options.step_shrink > 0.0 && problem.options.step_shrink < 1.0))
        throw Error("step_shrink must lie in (0, 1)");
    if (problem.options.restarts < 1) throw Error("restarts must be >= 1");
}

inline double auto_gradient_tol(const EquilibriumProblem& problem) {
    std::size_t n = 0;
    double maxq = 0.0;
    for (const auto& c : problem.components) {
        n += c.count;
        maxq = std::max(maxq, std::abs(c.charge));
    }
    return 1e-9 * static_cast<double>(n) * maxq * maxq;
}

// Projected gradient of W per charge. On the boundary of a volume domain the
// outward-normal part of the gradient only counts when it points into the
// feasible side; on a surface/segment domain the motion is constrained to the
// set, so only the tangential part remains.
inline double projected_gradient_norm(const std::vector<Vec3>& grad,
                                      const std::vector<Vec3>& pos,
                                      const std::vector<const geometry::ConductorDomain*>& dom) {
    double sum = 0.0;
    for (std::size_t k = 0; k < grad.size(); ++k) {
        const auto& d = *dom[k];
        Vec3 pg = grad[k];
        if (std::holds_alternative<geometry::Segment>(d)) {
            const auto& seg = std::get<geometry::Segment>(d);
            const Vec3 axis = normalized(seg.b - seg.a);
            pg = axis * dot(grad[k], axis);
            const double t = dot(pos[k] - seg.a, seg.b - seg.a) / norm_squared(seg.b - seg.a);
            const double tolb = geometry::boundary_tolerance(d) / norm(seg.b - seg.a);
            // at an endpoint, steps past the end are projected away
            if (t <= tolb && dot(pg, axis) > 0.0) pg = {};
            if (t >= 1.0 - tolb && dot(pg, axis) < 0.0) pg = {};
        } else {
            const double phi = geometry::signed_distance(d, pos[k]);
            const double tolb = geometry::boundary_tolerance(d);
            if (std::abs(phi) <= tolb) {
                const Vec3 n = geometry::outward_normal(d, pos[k]);
                const double gn = dot(grad[k], n);
                const bool surface = std::holds_alternative<geometry::SphereSurface>(d);
                if (surface || gn < 0.0) pg = grad[k] - n * gn;
            }
        }
        sum += norm_squared(pg);
    }
    return std::sqrt(sum);
}

struct RestartOutcome {
    std::vector<Vec3> positions;
    double energy = std::numeric_limits<double>::infinity();
    double pg_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
};

inline RestartOutcome run_restart(const EquilibriumProblem& problem,
                                  const std::vector<double>& charges,
                                  const std::vector<const geometry::ConductorDomain*>& dom,
                                  double gradient_tol, std::uint64_t seed) {
    const std::size_t n = charges.size();
    Rng rng(seed);
    RestartOutcome out;
    out.positions.resize(n);

    // free charges first, immobile charges appended
    std::vector<Vec3> all_pos(n);
    std::vector<double> all_q(charges);
    all_pos.insert(all_pos.end(), problem.fixed.positions.begin(), problem.fixed.positions.end());
    all_q.insert(all_q.end(), problem.fixed.charges.begin(), problem.fixed.charges.end());
    auto combined_energy = [&](const std::vector<Vec3>& free_pos) {
        std::copy(free_pos.begin(), free_pos.end(), all_pos.begin());
        return pointcharge::detail::energy_guarded(all_pos, all_q);
    };

    for (std::size_t k = 0; k < n; ++k)
        out.positions[k] = geometry::random_boundary_point(*dom[k], rng);

    double energy = combined_energy(out.positions);
    for (int tries = 0; !std::isfinite(energy) && tries < 64; ++tries) {
        // re-draw on the (measure-zero) chance of a coincident start
        for (std::size_t k = 0; k < n; ++k)
            out.positions[k] = geometry::random_boundary_point(*dom[k], rng);
        energy = combined_energy(out.positions);
    }

    double domain_scale = 0.0;
    for (const auto& c : problem.components)
        domain_scale = std::max(domain_scale, geometry::diameter(c.domain));

    std::vector<Vec3> grad(n), trial(n);
    std::vector<Vec3> best_positions;
    double step = 0.0;
    double last_accepted_step = 0.0;
    double polish_step = 0.0;  // 0 while the Armijo phase is still making progress
    double best_pg = std::numeric_limits<double>::infinity();
    std::size_t since_improvement = 0;
    std::size_t improvement_streak = 0;
    const MinimizeOptions& opt = problem.options;
    for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
        std::vector<Vec3> forces;
        std::copy(out.positions.begin(), out.positions.end(), all_pos.begin());
        pointcharge::detail::accumulate_forces(all_pos, all_q, forces);
        for (std::size_t k = 0; k < n; ++k) grad[k] = -forces[k];

        out.pg_norm = projected_gradient_norm(grad, out.positions, dom);
        if (out.pg_norm <= gradient_tol) {
            out.converged = true;
            break;
        }

        double gmax = 0.0;
        for (const auto& g : grad) gmax = std::max(gmax, norm(g));
        if (gmax == 0.0) break;

        if (polish_step == 0.0) {
            // globalization phase: backtracking line search with the
            // projected-gradient sufficient-decrease condition
            if (step <= 0.0) step = 0.1 * domain_scale / gmax;
            step = std::min(step * 2.0, 10.0 * domain_scale / gmax);
            bool accepted = false;
            while (step * gmax > 1e-18 * domain_scale) {
                double move2 = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    trial[k] =
                        geometry::project_to_domain(*dom[k], out.positions[k] - grad[k] * step);
                    move2 += norm_squared(trial[k] - out.positions[k]);
                }
                const double trial_energy = combined_energy(trial);
                if (trial_energy < energy &&
                    trial_energy <= energy - opt.armijo / step * move2) {
                    out.positions.swap(trial);
                    energy = trial_energy;
                    last_accepted_step = step;
                    accepted = true;
                    break;
                }
                step *= opt.step_shrink;
            }
            if (!accepted) {
                // energy differences dropped below double resolution; switch
                // to fixed-step projected-gradient polishing, which contracts
                // the gradient itself and needs no energy comparisons
                polish_step = last_accepted_step > 0.0 ? last_accepted_step
                                                       : 0.1 * domain_scale / gmax;
                best_pg = out.pg_norm;
                best_positions = out.positions;
                since_improvement = 0;
            }
        } else {
            if (out.pg_norm < best_pg) {
                best_pg = out.pg_norm;
                best_positions = out.positions;
                since_improvement = 0;
                ++improvement_streak;
                if (improvement_streak >= 20) {
                    // steady contraction: the step can afford to grow back
                    polish_step = std::min(polish_step * 2.0, 10.0 * domain_scale / gmax);
                    improvement_streak = 0;
                }
            } else {
                improvement_streak = 0;
                if (++since_improvement > 50) {
                    // overshooting or stuck: damp the step and restart from
                    // the best iterate seen so far
                    polish_step *= opt.step_shrink;
                    out.positions = best_positions;
                    since_improvement = 0;
                    if (polish_step * gmax < 1e-15 * domain_scale) break;
                    continue;
                }
            }
            for (std::size_t k = 0; k < n; ++k)
                out.positions[k] =
                    geometry::project_to_domain(*dom[k], out.positions[k] - grad[k] * polish_step);
        }
    }
    if (!out.converged && !best_positions.empty() && best_pg < out.pg_norm) {
        out.positions = best_positions;
        out.pg_norm = best_pg;
    }
    out.energy = combined_energy(out.positions);
    return out;
}

}  // namespace detail

// Minimizes the total Coulomb energy with each charge confined to its
// component. Projected gradient descent with a backtracking line search;
// best-of-restarts, deterministic for a fixed seed.
inline EquilibriumResult minimize_energy(const EquilibriumProblem& problem) {
    detail::validate_problem(problem);

    std::vector<double> charges;
    std::vector<int> component_of;
    std::vector<const geometry::ConductorDomain*> dom;
    for (std::size_t c = 0; c < problem.components.size(); ++c) {
        for (std::size_t i = 0; i < problem.components[c].count; ++i) {
            charges.push_back(problem.components[c].charge);
            component_of.push_back(static_cast<int>(c));
            dom.push_back(&problem.components[c].domain);
        }
    }

    const double gradient_tol = problem.options.gradient_tol > 0.0
                                    ? problem.options.gradient_tol
                                    : detail::auto_gradient_tol(problem);

    detail::RestartOutcome best;
    bool have_best = false;
    for (int restart = 0; restart < problem.options.restarts; ++restart) {
        const std::uint64_t seed =
            problem.options.rng_seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(restart + 1);
        auto outcome = detail::run_restart(problem, charges, dom, gradient_tol, seed);
        // restarts landing in the same basin tie in energy up to round-off;
        // among ties prefer the certified (smaller-gradient) outcome
        const double tie = 1e-12 * std::max(1.0, std::abs(outcome.energy));
        const bool better =
            !have_best || outcome.energy < best.energy - tie ||
            (outcome.energy <= best.energy + tie &&
             (outcome.converged > best.converged ||
              (outcome.converged == best.converged && outcome.pg_norm < best.pg_norm)));
        if (better) {
            best = std::move(outcome);
            have_best = true;
        }
    }

    EquilibriumResult result;
    result.config.positions = best.positions;
    result.config.charges = charges;
    result.config.component_index = component_of;
    result.energy = best.energy;
    result.projected_gradient_norm = best.pg_norm;
    result.converged = best.converged;

    pointcharge::ChargeConfiguration full = result.config;
    full.component_index.clear();
    full.positions.insert(full.positions.end(), problem.fixed.positions.begin(),
                          problem.fixed.positions.end());
    full.charges.insert(full.charges.end(), problem.fixed.charges.begin(),
                        problem.fixed.charges.end());
    for (std::size_t k = 0; k < best.positions.size(); ++k) {
        const auto& d = *dom[k];
        result.boundary_max_distance = std::max(
            result.boundary_max_distance, std::abs(geometry::signed_distance(d, best.positions[k])));
        if (std::holds_alternative<geometry::Segment>(d)) continue;
        if (std::abs(geometry::signed_distance(d, best.positions[k])) <=
            geometry::boundary_tolerance(d)) {
            const Vec3 n = geometry::outward_normal(d, best.positions[k]);
            result.lagrange_multipliers.push_back(dot(pointcharge::force_on(full, k), n));
        }
    }
    return result;
}

/// Max distance of the solved charges to the conductor boundary.
inline double verify_boundary(const EquilibriumResult& result, const EquilibriumProblem& problem) {
    double worst = 0.0;
    std::size_t k = 0;
    for (const auto& c : problem.components) {
        for (std::size_t i = 0; i < c.count; ++i, ++k) {
            const Vec3& x = result.config.positions[k];
            double d;
            if (std::holds_alternative<geometry::Ball>(c.domain)) {
                const auto& b = std::get<geometry::Ball>(c.domain);
                d = std::abs(distance(x, b.center) - b.radius);
            } else {
                d = std::abs(geometry::signed_distance(c.domain, x));
            }
            worst = std::max(worst, d);
        }
    }
    return worst;
}

struct LagrangeEntry {
    double lambda;                // F.n at the charge
    double parallelism_residual;  // |F - lambda n|
    bool passed;                  // lambda >= -tol and residual <= tol * max(1, |F|)
};

// Checks the first-order optimality structure on a convex smooth domain: each
// force is an outward multiple of the boundary normal.
inline std::vector<LagrangeEntry> lagrange_check(const EquilibriumResult& result,
                                                 const EquilibriumProblem& problem, double tol) {
    if (problem.components.size() != 1)
        throw NonConvexDomain("lagrange check requires a single convex component");
    const auto& domain = problem.components[0].domain;
    if (!std::holds_alternative<geometry::Ball>(domain) &&
        !std::holds_alternative<geometry::SphereSurface>(domain))
        throw NonConvexDomain("lagrange check requires a ball or sphere domain");

    const double tolb = geometry::boundary_tolerance(domain);
    pointcharge::ChargeConfiguration full = result.config;
    full.component_index.clear();
    full.positions.insert(full.positions.end(), problem.fixed.positions.begin(),
                          problem.fixed.positions.end());
    full.charges.insert(full.charges.end(), problem.fixed.charges.begin(),
                        problem.fixed.charges.end());
    std::vector<LagrangeEntry> entries;
    for (std::size_t k = 0; k < result.config.size(); ++k) {
        const Vec3 f = pointcharge::force_on(full, k);
        double lambda = 0.0;
        double residual = norm(f);
        // off-boundary charges have no normal to align with; the whole force
        // is residual and the entry fails for any nonzero force
        if (std::abs(geometry::signed_distance(domain, result.config.positions[k])) <= tolb) {
            const Vec3 n = geometry::outward_normal(domain, result.config.positions[k]);
            lambda = dot(f, n);
            residual = norm(f - n * lambda);
        }
        const bool ok = lambda >= -tol && residual <= tol * std::max(1.0, norm(f));
        entries.push_back({lambda, residual, ok});
    }
    return entries;
}

}  // namespace fekete::equilibrium
