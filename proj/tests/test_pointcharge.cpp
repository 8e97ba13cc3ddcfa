#include <cmath>

#include "doctest.h"

#include "fekete/geometry.hpp"
#include "fekete/pointcharge.hpp"
#include "fekete/rng.hpp"

using namespace fekete;
using namespace fekete::pointcharge;

namespace {

ChargeConfiguration segment_example() {
    // charges (4, -1, 4) at (-1,0,0), (0,0,0), (1,0,0)
    ChargeConfiguration config;
    config.positions = {{-1, 0, 0}, {0, 0, 0}, {1, 0, 0}};
    config.charges = {4.0, -1.0, 4.0};
    return config;
}

ChargeConfiguration tetrahedron_with_center() {
    // regular tetrahedron with a fifth equal charge at the circumcenter
    const double s3 = std::sqrt(3.0), s2 = std::sqrt(2.0);
    ChargeConfiguration config;
    config.positions = {
        {1, 0, 0}, {-0.5, s3 / 2, 0}, {-0.5, -s3 / 2, 0}, {0, 0, s2}, {0, 0, s2 / 4}};
    config.charges = {1, 1, 1, 1, 1};
    return config;
}

ChargeConfiguration random_config(Rng& rng, int n, bool signed_charges = true) {
    ChargeConfiguration config;
    for (int i = 0; i < n; ++i) {
        config.positions.push_back(rng.unit_vector() * rng.uniform(0.2, 2.0));
        config.charges.push_back(signed_charges ? rng.uniform(-2.0, 2.0)
                                                : rng.uniform(0.1, 2.0));
    }
    return config;
}

}  // namespace

TEST_SUITE_BEGIN("pointcharge");

TEST_CASE("total energy: pair, segment example, tetrahedron") {
    ChargeConfiguration pair;
    pair.positions = {{0, 0, 0}, {1, 0, 0}};
    pair.charges = {1, 1};
    CHECK(total_energy(pair) == doctest::Approx(1.0));

    CHECK(std::abs(total_energy(segment_example())) < 1e-14);

    // unit charges on a regular tetrahedron inscribed in the unit sphere:
    // edge sqrt(8/3), six pairs
    ChargeConfiguration tetra;
    tetra.positions = {{2 * std::sqrt(2.0) / 3, 0, -1.0 / 3},
                       {-std::sqrt(2.0) / 3, std::sqrt(2.0 / 3.0), -1.0 / 3},
                       {-std::sqrt(2.0) / 3, -std::sqrt(2.0 / 3.0), -1.0 / 3},
                       {0, 0, 1}};
    tetra.charges = {1, 1, 1, 1};
    CHECK(total_energy(tetra) == doctest::Approx(6.0 / std::sqrt(8.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("energy scaling and symmetry") {
    Rng rng(3);
    auto config = random_config(rng, 6);
    const double w = total_energy(config);

    auto scaled = config;
    for (auto& q : scaled.charges) q *= 3.0;
    CHECK(total_energy(scaled) == doctest::Approx(9.0 * w).epsilon(1e-12));

    // invariance under rotation + translation
    const double c = std::cos(0.7), s = std::sin(0.7);
    auto moved = config;
    for (auto& p : moved.positions) {
        const Vec3 r{c * p.x - s * p.y, s * p.x + c * p.y, p.z};
        p = r + Vec3{10, -3, 2};
    }
    CHECK(total_energy(moved) == doctest::Approx(w).epsilon(1e-10));
}

TEST_CASE("same-sign energy is strictly positive") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        auto config = random_config(rng, 5, false);
        CHECK(total_energy(config) > 0.0);
    }
}

TEST_CASE("coincident charges are rejected") {
    ChargeConfiguration config;
    config.positions = {{0, 0, 0}, {0, 0, 0}};
    config.charges = {1, 1};
    CHECK_THROWS_AS(total_energy(config), CoincidentCharges);
}

TEST_CASE("forces: segment and tetrahedron examples, Coulomb pair") {
    const auto seg = segment_example();
    for (std::size_t k = 0; k < 3; ++k) CHECK(norm(force_on(seg, k)) < 1e-12);

    const auto tetra = tetrahedron_with_center();
    CHECK(norm(force_on(tetra, 4)) < 1e-12);

    ChargeConfiguration pair;
    pair.positions = {{0, 0, 0}, {2, 0, 0}};
    pair.charges = {1, 1};
    const Vec3 f = force_on(pair, 1);
    CHECK(f.x == doctest::Approx(0.25));
    CHECK(f.y == doctest::Approx(0.0));
    CHECK(norm(f) == doctest::Approx(0.25));
}

TEST_CASE("internal forces cancel") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        auto config = random_config(rng, 7);
        Vec3 total{};
        double fmax = 0.0;
        for (std::size_t k = 0; k < config.size(); ++k) {
            const Vec3 f = force_on(config, k);
            total += f;
            fmax = std::max(fmax, norm(f));
        }
        CHECK(norm(total) < 1e-10 * fmax);
    }
}

TEST_CASE("force equals minus the energy gradient (central differences)") {
    Rng rng(33);
    auto config = random_config(rng, 5);
    const double h = 1e-6;
    for (std::size_t k = 0; k < config.size(); ++k) {
        const Vec3 f = force_on(config, k);
        Vec3 fd{};
        double* comps[3] = {&config.positions[k].x, &config.positions[k].y,
                            &config.positions[k].z};
        double* out[3] = {&fd.x, &fd.y, &fd.z};
        for (int c = 0; c < 3; ++c) {
            const double saved = *comps[c];
            *comps[c] = saved + h;
            const double wp = total_energy(config);
            *comps[c] = saved - h;
            const double wm = total_energy(config);
            *comps[c] = saved;
            *out[c] = -(wp - wm) / (2.0 * h);
        }
        CHECK(distance(f, fd) < 1e-5 * std::max(1.0, norm(f)));
    }
}

TEST_CASE("static state: segment example inside a ball") {
    const auto report =
        static_state_check(segment_example(), geometry::Ball{{0, 0, 0}, 2.0}, 1e-9);
    CHECK(report.is_static);
    CHECK(report.interior_residuals.size() == 3);
    CHECK(report.boundary_reports.empty());
}

TEST_CASE("static state: tetrahedron example on its circumsphere") {
    // circumcenter (0,0,sqrt(2)/4), circumradius 3/(2 sqrt 2)
    const Vec3 center{0, 0, std::sqrt(2.0) / 4.0};
    const double radius = 3.0 / (2.0 * std::sqrt(2.0));
    const auto report =
        static_state_check(tetrahedron_with_center(), geometry::Ball{center, radius}, 1e-9);
    CHECK(report.is_static);
    CHECK(report.interior_residuals.size() == 1);  // the center charge
    CHECK(report.boundary_reports.size() == 4);    // the vertices
    for (const auto& b : report.boundary_reports) CHECK(b.normal_component > 0.0);
}

TEST_CASE("static states are not unique: any rotation of one is another") {
    auto rotated = segment_example();
    for (auto& p : rotated.positions) p = {p.y, p.z, p.x};
    const auto report =
        static_state_check(rotated, geometry::Ball{{0, 0, 0}, 2.0}, 1e-9);
    CHECK(report.is_static);
}

TEST_CASE("static state: interior pair is not static") {
    ChargeConfiguration config;
    config.positions = {{0.3, 0, 0}, {-0.3, 0, 0}};
    config.charges = {1, 1};
    const auto report = static_state_check(config, geometry::Ball{{0, 0, 0}, 1.0}, 1e-9);
    CHECK(!report.is_static);
}

TEST_CASE("static state: charge outside the domain is rejected") {
    ChargeConfiguration config;
    config.positions = {{3, 0, 0}};
    config.charges = {1};
    CHECK_THROWS_AS(static_state_check(config, geometry::Ball{{0, 0, 0}, 1.0}, 1e-9),
                    ChargeOutsideDomain);
}

TEST_CASE("cavendish bound arithmetic") {
    CHECK(cavendish_bound(4, 2, 1, 1) == doctest::Approx(0.0));
    CHECK(cavendish_bound(8, 2, 1, 1) == doctest::Approx(1.0));
    CHECK_THROWS(cavendish_bound(1, 0.5, 1, 1));
}

TEST_CASE("csv round trip") {
    Rng rng(77);
    auto config = random_config(rng, 4);
    config.component_index = {0, 0, 1, 1};
    const std::string csv = to_csv(config);
    const auto parsed = config_from_csv_string(csv);
    REQUIRE(parsed.size() == config.size());
    for (std::size_t i = 0; i < config.size(); ++i) {
        CHECK(parsed.positions[i] == config.positions[i]);  // 17 digits round-trip exactly
        CHECK(parsed.charges[i] == config.charges[i]);
        CHECK(parsed.component_index[i] == config.component_index[i]);
    }
    CHECK_THROWS(config_from_csv_string("a,b\n1,2\n"));
}

TEST_CASE("energies and forces do not depend on the worker count") {
    Rng rng(91);
    auto config = random_config(rng, 150);
    setenv("FEKETE_FIELD_THREADS", "1", 1);
    const double w1 = total_energy(config);
    const auto f1 = all_forces(config);
    setenv("FEKETE_FIELD_THREADS", "3", 1);
    const double w3 = total_energy(config);
    const auto f3 = all_forces(config);
    unsetenv("FEKETE_FIELD_THREADS");
    CHECK(w1 == w3);  // bit identical by construction
    for (std::size_t k = 0; k < f1.size(); ++k) CHECK(f1[k] == f3[k]);
}

TEST_CASE("mixed signs in one component are rejected") {
    ChargeConfiguration config;
    config.positions = {{0, 0, 0}, {1, 0, 0}};
    config.charges = {1, -1};
    config.component_index = {0, 0};
    CHECK_THROWS(validate(config));
}

TEST_SUITE_END();
