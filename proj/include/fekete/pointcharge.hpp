#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fekete/errors.hpp"
#include "fekete/format.hpp"
#include "fekete/geometry.hpp"
#include "fekete/threads.hpp"
#include "fekete/vec3.hpp"

namespace fekete::pointcharge {

/// Below this separation 1/r^3 terms stop being numerically meaningful.
inline constexpr double coincidence_threshold = 1e-14;

// A finite family of point charges. component_index, when present, records
// which conductor component each charge belongs to; charges within one
// component must share a sign.
struct ChargeConfiguration {
    std::vector<Vec3> positions;
    std::vector<double> charges;
    std::vector<int> component_index;  // empty when absent

    std::size_t size() const { return positions.size(); }
};

inline void validate(const ChargeConfiguration& config) {
    if (config.positions.size() != config.charges.size())
        throw Error("positions and charges must have the same length");
    if (!config.component_index.empty() &&
        config.component_index.size() != config.positions.size())
        throw Error("component_index must match the number of charges");
    for (const auto& p : config.positions)
        if (!is_finite(p)) throw Error("positions must be finite");
    for (std::size_t i = 0; i < config.positions.size(); ++i)
        for (std::size_t j = i + 1; j < config.positions.size(); ++j)
            if (distance(config.positions[i], config.positions[j]) < coincidence_threshold)
                throw CoincidentCharges("charges " + std::to_string(i) + " and " +
                                        std::to_string(j) + " coincide");
    if (!config.component_index.empty()) {
        // same-sign rule per component
        for (std::size_t i = 0; i < config.size(); ++i)
            for (std::size_t j = i + 1; j < config.size(); ++j)
                if (config.component_index[i] == config.component_index[j] &&
                    config.charges[i] * config.charges[j] < 0.0)
                    throw Error("charges within one component must share a sign");
    }
}

namespace detail {

// Energy with no coincidence check; +inf on collision. The optimizer uses
// this as a rejection value during line searches. Row sums are reduced in
// index order, so the value is independent of the worker count.
inline double energy_guarded(const std::vector<Vec3>& pos, const std::vector<double>& q) {
    const std::size_t n = pos.size();
    std::vector<double> row(n, 0.0);
    std::atomic<bool> coincident{false};
    parallel_blocks(n, 64, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double s = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = distance(pos[i], pos[j]);
                if (d < coincidence_threshold) {
                    coincident.store(true);
                    return;
                }
                s += q[i] * q[j] / d;
            }
            row[i] = s;
        }
    });
    if (coincident.load()) return std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (double r : row) total += r;
    return total;
}

// Each F_k is accumulated wholly by one worker in index order, so the result
// does not depend on the thread count.
inline void accumulate_forces(const std::vector<Vec3>& pos, const std::vector<double>& q,
                              std::vector<Vec3>& out) {
    const std::size_t n = pos.size();
    out.assign(n, Vec3{});
    std::atomic<bool> coincident{false};
    parallel_blocks(n, 64, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            Vec3 f{};
            for (std::size_t j = 0; j < n; ++j) {
                if (j == k) continue;
                const Vec3 rel = pos[k] - pos[j];
                const double d = norm(rel);
                if (d < coincidence_threshold) {
                    coincident.store(true);
                    return;
                }
                f += rel * (q[k] * q[j] / (d * d * d));
            }
            out[k] = f;
        }
    });
    if (coincident.load()) throw CoincidentCharges("configuration contains coincident charges");
}

}  // namespace detail

// Total Coulomb energy W = sum_{i<j} q_i q_j / |x_i - x_j|  (Gaussian units,
// Coulomb constant 1). Pairs are reduced row by row in index order so the
// result is reproducible.
inline double total_energy(const ChargeConfiguration& config) {
    validate(config);
    return detail::energy_guarded(config.positions, config.charges);
}

/// Force on charge k from all others: q_k sum_j q_j (x_k - x_j)/|x_k - x_j|^3.
inline Vec3 force_on(const ChargeConfiguration& config, std::size_t k) {
    if (k >= config.size()) throw Error("charge index out of range");
    Vec3 f{};
    for (std::size_t j = 0; j < config.size(); ++j) {
        if (j == k) continue;
        const Vec3 rel = config.positions[k] - config.positions[j];
        const double d = norm(rel);
        if (d < coincidence_threshold)
            throw CoincidentCharges("charges " + std::to_string(k) + " and " +
                                    std::to_string(j) + " coincide");
        f += rel * (config.charges[k] * config.charges[j] / (d * d * d));
    }
    return f;
}

inline std::vector<Vec3> all_forces(const ChargeConfiguration& config) {
    std::vector<Vec3> forces;
    detail::accumulate_forces(config.positions, config.charges, forces);
    return forces;
}

// ---------------------------------------------------------------------------
// Static state: interior charges feel no force, boundary charges feel only an
// outward normal force.

struct StaticStateReport {
    struct InteriorEntry {
        std::size_t index;
        double force_norm;
    };
    struct BoundaryEntry {
        std::size_t index;
        double tangential_norm;
        double normal_component;  // signed, >= 0 means outward
    };
    std::vector<InteriorEntry> interior_residuals;
    std::vector<BoundaryEntry> boundary_reports;
    bool is_static = false;
};

inline StaticStateReport static_state_check(const ChargeConfiguration& config,
                                            const geometry::ConductorDomain& domain,
                                            double tol) {
    validate(config);
    geometry::validate_domain(domain);
    const double tol_boundary = geometry::boundary_tolerance(domain);
    const bool segment = std::holds_alternative<geometry::Segment>(domain);

    StaticStateReport report;
    report.is_static = true;
    const auto forces = all_forces(config);
    for (std::size_t k = 0; k < config.size(); ++k) {
        const Vec3& x = config.positions[k];
        const double phi = geometry::signed_distance(domain, x);
        if (phi > tol_boundary)
            throw ChargeOutsideDomain("charge " + std::to_string(k) + " lies outside the domain");
        const bool on_boundary = !segment && std::abs(phi) <= tol_boundary;
        if (on_boundary) {
            const Vec3 n = geometry::outward_normal(domain, x);
            const double lambda = dot(forces[k], n);
            const double tangential = norm(forces[k] - n * lambda);
            report.boundary_reports.push_back({k, tangential, lambda});
            if (tangential > tol || lambda < -tol) report.is_static = false;
        } else {
            const double f = norm(forces[k]);
            report.interior_residuals.push_back({k, f});
            if (f > tol) report.is_static = false;
        }
    }
    return report;
}

/// Lower bound |grad U(0)| >= Q/d^2 - q/R^2 for a charged ball of radius R
/// with an external charge Q at distance d > R.
inline double cavendish_bound(double Q, double d, double q, double R) {
    if (!(d > R) || !(R > 0.0)) throw Error("cavendish bound requires d > R > 0");
    return Q / (d * d) - q / (R * R);
}

// ---------------------------------------------------------------------------
// CSV serialization: header `x,y,z,q` or `x,y,z,q,component`.

inline std::string to_csv(const ChargeConfiguration& config) {
    const bool with_component = !config.component_index.empty();
    std::string out = with_component ? "x,y,z,q,component\n" : "x,y,z,q\n";
    for (std::size_t i = 0; i < config.size(); ++i) {
        out += float17(config.positions[i].x) + ',' + float17(config.positions[i].y) + ',' +
               float17(config.positions[i].z) + ',' + float17(config.charges[i]);
        if (with_component) out += ',' + std::to_string(config.component_index[i]);
        out += '\n';
    }
    return out;
}

inline ChargeConfiguration config_from_csv(std::istream& in) {
    ChargeConfiguration config;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty charge CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool with_component = line == "x,y,z,q,component";
    if (!with_component && line != "x,y,z,q")
        throw Error("charge CSV must start with header x,y,z,q[,component]");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<double> vals;
        while (std::getline(row, field, ',')) {
            try {
                vals.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw Error("charge CSV line " + std::to_string(line_no) + ": bad number '" +
                            field + "'");
            }
        }
        if (vals.size() != (with_component ? 5u : 4u))
            throw Error("charge CSV line " + std::to_string(line_no) + ": wrong field count");
        config.positions.push_back({vals[0], vals[1], vals[2]});
        config.charges.push_back(vals[3]);
        if (with_component) config.component_index.push_back(static_cast<int>(vals[4]));
    }
    return config;
}

inline ChargeConfiguration config_from_csv_string(const std::string& text) {
    std::istringstream in(text);
    return config_from_csv(in);
}

}  // namespace fekete::pointcharge
