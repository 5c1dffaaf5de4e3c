#include "radiant/absorption.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace radiant;

namespace {

AbsorptionField single_term(const Profile &profile) {
    const auto grid = FrequencyGrid::geometric(0.01, 20.0, 8);
    AbsorptionField f;
    f.profiles = {profile};
    f.tables   = {constant_table(grid, 0.5)};
    return f;
}

Eigen::VectorXd level(double k) { return Eigen::VectorXd::Constant(1, k); }

// Unit cube with the block x > 0.5, y > 0.5 removed (all z).
Mesh notched_cube(int n) {
    std::vector<double> ax(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k)
        ax[static_cast<std::size_t>(k)] = static_cast<double>(k) / n;
    return structured_mesh(ax, ax, ax, [](const Vec3 &c) { return !(c.x() > 0.5 && c.y() > 0.5); });
}

} // namespace

TEST_CASE("profiles") {
    CHECK(Profile::constant(2.0)(Vec3(0.3, 1.0, -4.0)) == 2.0);
    const auto a = Profile::affine(1.0, Vec3(-0.5, 0.0, 0.0));
    CHECK(a(Vec3(0.5, 7.0, 1.0)) == doctest::Approx(0.75));
    CHECK(a.is_affine());
    const Eigen::AlignedBox3d box(Vec3(0, 0, 0), Vec3(1, 1, 1));
    std::vector<double> s(8);
    for (int k = 0; k < 8; ++k)
        s[static_cast<std::size_t>(k)] = (k & 1) ? 2.0 : 0.0; // x fastest: value 2x
    const auto g = Profile::sampled(box, Eigen::Array3i(2, 2, 2), s);
    CHECK(g(Vec3(0.25, 0.5, 0.9)) == doctest::Approx(0.5));
    CHECK_FALSE(g.is_affine());
}

TEST_CASE("constant profile on a convex box") {
    const Mesh m      = box_mesh(1.0, 1.0, 2);
    const auto field  = single_term(Profile::constant(1.0));
    const BackgroundGrid grid(m, field, Eigen::Array3i(9, 9, 9));
    CHECK(grid.outside_cells() == 0);
    CHECK(grid.rho(0, Vec3(0.3, 0.1, -0.7)) == doctest::Approx(1.0));
    // |b - a| = 2.
    const auto li = grid.line_integral(Vec3(0.0, -1.0, 0.0), Vec3(0.0, 1.0, 0.0), 0);
    REQUIRE(li);
    CHECK(std::abs(*li - 2.0) < 1e-6);
    CHECK(grid.attenuation(Vec3(0.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), level(0.0)) == 1.0);
    // kappa 0.5 over 1.2.
    CHECK(grid.attenuation(Vec3(0.0, -0.6, 0.0), Vec3(0.0, 0.6, 0.0), level(0.5)) ==
          doctest::Approx(std::exp(-0.6)).epsilon(1e-12));
}

TEST_CASE("affine profile is reproduced") {
    const Mesh m     = box_mesh(1.0, 1.0, 2);
    const auto field = single_term(Profile::affine(1.0, Vec3(-0.5, 0.0, 0.0)));
    const BackgroundGrid grid(m, field, Eigen::Array3i(5, 7, 6));
    CHECK(grid.rho(0, Vec3(0.5, 0.0, 0.0)) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(grid.rho(0, Vec3(0.37, 0.21, -0.66)) == doctest::Approx(1.0 - 0.37 / 2).epsilon(1e-12));
    // int_0^1 (1 - x/2) dx = 3/4.
    const auto li = grid.line_integral(Vec3(0.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), 0);
    REQUIRE(li);
    CHECK(*li == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("sampled profile integrates with the midpoint rule") {
    const Mesh m = box_mesh(1.0, 1.0, 2);
    const Eigen::AlignedBox3d box(Vec3(0, -1, -1), Vec3(1, 1, 1));
    std::vector<double> s;
    const int n = 17;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                s.push_back(1.0 - 0.5 * i / (n - 1.0));
    const auto field = single_term(Profile::sampled(box, Eigen::Array3i(n, n, n), s));
    const BackgroundGrid grid(m, field, Eigen::Array3i(33, 33, 33));
    CHECK_FALSE(grid.exact());
    const auto li = grid.line_integral(Vec3(0.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), 0);
    REQUIRE(li);
    CHECK(*li == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("line integrals are symmetric and attenuation is monotone") {
    const Mesh m     = box_mesh(1.0, 1.0, 2);
    const auto field = single_term(Profile::affine(1.0, Vec3(-0.5, 0.2, 0.1)));
    CloudRegion cloud{0.0, 0.0, 0.4, 0.2, 0.6, 1.5};
    AbsorptionField clouded = field;
    clouded.cloud           = cloud;
    const BackgroundGrid grid(m, clouded, Eigen::Array3i(17, 17, 17));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec3 a(ux(rng), uy(rng), uy(rng)), b(ux(rng), uy(rng), uy(rng));
        const auto ab = grid.line_integral(a, b, 0), ba = grid.line_integral(b, a, 0);
        REQUIRE(ab);
        REQUIRE(ba);
        CHECK(std::abs(*ab - *ba) <= 1e-12 * std::max(1.0, *ab));
        const double t1 = grid.attenuation(a, b, level(0.3)), t2 = grid.attenuation(a, b, level(0.6));
        CHECK(t2 <= t1);
        CHECK(t1 <= 1.0);
        const Vec3 mid = 0.5 * (a + b);
        CHECK(grid.attenuation(a, b, level(0.3)) <= grid.attenuation(a, mid, level(0.3)) + 1e-15);
    }
}

TEST_CASE("cloud multiplies the absorption inside the cylinder") {
    CloudRegion c{0.0, 0.0, 0.3, 0.2, 0.6, 1.5};
    CHECK(c.contains(Vec3(0.4, 0.1, 0.1)));
    CHECK_FALSE(c.contains(Vec3(0.7, 0.0, 0.0)));
    CHECK_FALSE(c.contains(Vec3(0.4, 0.3, 0.1)));
    AbsorptionField f = single_term(Profile::constant(1.0));
    f.cloud           = c;
    CHECK(f.rho(0, Vec3(0.4, 0.0, 0.0)) == 1.5);
    CHECK(f.rho(0, Vec3(0.9, 0.0, 0.0)) == 1.0);
    c.multiplier = 0.0;
    CHECK_THROWS(c.validate());
}

TEST_CASE("cloud line integrals are closed form") {
    const Mesh m      = box_mesh(1.0, 1.0, 2);
    AbsorptionField f = single_term(Profile::constant(1.0));
    f.cloud           = CloudRegion{0.0, 0.0, 0.4, 0.2, 0.6, 1.5};
    const BackgroundGrid grid(m, f, Eigen::Array3i(9, 9, 9));
    CHECK(grid.closed_form());
    CHECK(grid.exact());
    CHECK(grid.rho(0, Vec3(0.4, 0.1, 0.0)) == 1.5);
    // Vertical through the axis: 1 + 0.5 * 0.4.
    CHECK(*grid.line_integral(Vec3(0.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), 0) == doctest::Approx(1.2).epsilon(1e-14));
    // Horizontal at mid altitude: 2 + 0.5 * 0.8.
    CHECK(*grid.line_integral(Vec3(0.4, -1.0, 0.0), Vec3(0.4, 1.0, 0.0), 0) == doctest::Approx(2.4).epsilon(1e-14));
    // Misses the cylinder.
    CHECK(*grid.line_integral(Vec3(0.4, -1.0, 0.5), Vec3(0.4, 1.0, 0.5), 0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("cloud line integrals match brute-force sampling of the field") {
    const Mesh m      = box_mesh(1.0, 1.0, 2);
    AbsorptionField f = single_term(Profile::affine(1.0, Vec3(-0.5, 0.2, 0.1)));
    f.cloud           = CloudRegion{0.1, -0.2, 0.45, 0.25, 0.7, 2.0};
    const BackgroundGrid grid(m, f, Eigen::Array3i(9, 9, 9));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 a(ux(rng), uy(rng), uy(rng)), b(ux(rng), uy(rng), uy(rng));
        const int samples = 200000;
        double brute      = 0.0;
        for (int s = 0; s < samples; ++s)
            brute += f.rho(0, a + (s + 0.5) / samples * (b - a));
        brute *= (b - a).norm() / samples;
        CHECK(*grid.line_integral(a, b, 0) == doctest::Approx(brute).epsilon(1e-4));
    }
}

TEST_CASE("segments through removed cells are fully attenuated") {
    const Mesh m     = notched_cube(4);
    const auto field = single_term(Profile::constant(1.0));
    const BackgroundGrid grid(m, field, Eigen::Array3i(9, 9, 9));
    CHECK(grid.outside_cells() > 0);
    CHECK_FALSE(grid.exact());
    // Both ends inside the domain, the segment crosses the notch.
    const Vec3 a(0.9, 0.25, 0.5), b(0.25, 0.9, 0.5);
    CHECK_FALSE(grid.line_integral(a, b, 0).has_value());
    CHECK(grid.attenuation(a, b, level(0.5)) == 0.0);
    CHECK(grid.attenuation(a, b, level(0.0)) == 0.0);
    // A segment staying inside is unaffected.
    const Vec3 c(0.25, 0.25, 0.5);
    CHECK(grid.attenuation(a, c, level(0.5)) == doctest::Approx(std::exp(-0.5 * (a - c).norm())).epsilon(1e-6));
}

TEST_CASE("occlusion walk skipping agrees with the sampled walk") {
    const Mesh m = notched_cube(8);
    const BackgroundGrid closed(m, single_term(Profile::constant(1.0)), Eigen::Array3i(33, 33, 33));
    const Eigen::AlignedBox3d box(Vec3::Zero(), Vec3::Ones());
    const BackgroundGrid sampled(
        m, single_term(Profile::sampled(box, Eigen::Array3i(2, 2, 2), std::vector<double>(8, 1.0))),
        Eigen::Array3i(33, 33, 33));
    REQUIRE(closed.closed_form());
    REQUIRE_FALSE(sampled.closed_form());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int blocked = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
        const bool open = closed.line_integral(a, b, 0).has_value();
        CHECK(open == sampled.line_integral(a, b, 0).has_value());
        blocked += !open;
    }
    CHECK(blocked > 100);
}

TEST_CASE("invalid grids are rejected") {
    const Mesh m     = box_mesh(1.0, 1.0, 1);
    const auto field = single_term(Profile::constant(1.0));
    CHECK_THROWS(BackgroundGrid(m, field, Eigen::Array3i(1, 4, 4)));
}
