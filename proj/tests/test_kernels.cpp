#include "radiant/kernels.hpp"
#include "radiant/quadrature.hpp"
#include "radiant/stratified.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace radiant;

namespace {

struct Setup {
    Mesh mesh;
    AbsorptionField field;
    std::unique_ptr<BackgroundGrid> grid;
    std::shared_ptr<const KernelGeometry> geometry;

    Setup(Mesh m, double rho = 1.0, Eigen::Array3i res = {17, 17, 17}) : mesh(std::move(m)) {
        const auto fg = FrequencyGrid::geometric(0.01, 20.0, 8);
        field.profiles = {Profile::constant(rho)};
        field.tables   = {constant_table(fg, 0.5)};
        grid           = std::make_unique<BackgroundGrid>(mesh, field, res);
        geometry       = std::make_shared<const KernelGeometry>(mesh, *grid);
    }

    Index nearest(const Vec3 &p) const {
        Index best = 0;
        (mesh.vertices.colwise() - p).colwise().squaredNorm().minCoeff(&best);
        return best;
    }
};

Eigen::VectorXd level(double k) { return Eigen::VectorXd::Constant(1, k); }

// Distance from p to the boundary of the box [lo, hi] along unit direction d.
double exit_distance(const Vec3 &p, const Vec3 &d, const Vec3 &lo, const Vec3 &hi) {
    double t = 1e300;
    for (int a = 0; a < 3; ++a) {
        if (d(a) > 0)
            t = std::min(t, (hi(a) - p(a)) / d(a));
        else if (d(a) < 0)
            t = std::min(t, (lo(a) - p(a)) / d(a));
    }
    return t;
}

// (1/4pi) int_{S^2} (1 - exp(-kappa L(w))) dw: the volume row sum for
// constant kappa, with Gauss-Legendre in cos(theta) and many azimuths.
double row_sum_oracle(const Vec3 &p, double kappa, const Vec3 &lo, const Vec3 &hi) {
    const auto [mu, wmu] = gauss_legendre(400, -1.0, 1.0);
    const int nphi       = 800;
    double sum           = 0.0;
    for (Index a = 0; a < mu.size(); ++a) {
        const double s = std::sqrt(1.0 - mu(a) * mu(a));
        for (int b = 0; b < nphi; ++b) {
            const double phi = 2.0 * pi * (b + 0.5) / nphi;
            const Vec3 d(mu(a), s * std::cos(phi), s * std::sin(phi));
            sum += wmu(a) * (2.0 * pi / nphi) * (1.0 - std::exp(-kappa * exit_distance(p, d, lo, hi)));
        }
    }
    return sum / (4.0 * pi);
}

// View factor from a differential area to a parallel a x b rectangle with one
// corner below it at distance c.
double corner_view_factor(double a, double b, double c) {
    const double A = a / c, B = b / c;
    return (A / std::sqrt(1 + A * A) * std::atan(B / std::sqrt(1 + A * A)) +
            B / std::sqrt(1 + B * B) * std::atan(A / std::sqrt(1 + B * B))) /
           (2.0 * pi);
}

double volume_row_sum(const VolumeKernel &k, Index i) {
    double s = 0.0;
    for (Index j = 0; j < k.cols(); ++j)
        s += k(i, j);
    return s;
}

double surface_row_sum(const SurfaceKernel &k, Index i) {
    double s = 0.0;
    for (Index j = 0; j < k.cols(); ++j)
        s += k(i, j);
    return s;
}

} // namespace

TEST_CASE("zero absorption gives a zero volume operator") {
    std::vector<double> ax{0.0, 1.0};
    Setup s(structured_mesh(ax, ax, ax));
    const VolumeKernel k(s.geometry, level(0.0));
    const Eigen::MatrixXd a = assemble_dense(k);
    CHECK(a.rows() == 8);
    CHECK(a.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("volume entries are non-negative and not symmetric") {
    Setup s(box_mesh(1.0, 1.0, 2, 1.3));
    const VolumeKernel k(s.geometry, level(0.5));
    const Eigen::MatrixXd a = assemble_dense(k);
    CHECK(a.minCoeff() >= 0.0);
    CHECK(a.allFinite());
    CHECK((a - a.transpose()).norm() > 1e-6 * a.norm());
    Eigen::MatrixXd blk;
    const std::vector<Index> rows{0, 5, 17}, cols{3, 4, 40, 41};
    k.block(rows, cols, blk);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            CHECK(blk(static_cast<Index>(r), static_cast<Index>(c)) == doctest::Approx(a(rows[r], cols[c])).epsilon(1e-13));
}

TEST_CASE("far volume entry approaches the point-mass value") {
    Setup s(box_mesh(4.0, 1.0, 2));
    const VolumeKernel k(s.geometry, level(0.5));
    const Index i = s.nearest(Vec3(0.0, -4.0, -4.0)), j = s.nearest(Vec3(0.5, 3.5, 3.5));
    double support = 0.0;
    Vec3 centroid  = Vec3::Zero();
    for (Index t : s.mesh.vertex_tets.of(j)) {
        support += s.mesh.tet_volumes(t);
        centroid += s.mesh.tet_volumes(t) * s.geometry->centroid(t);
    }
    centroid /= support;
    const double d        = (centroid - s.mesh.vertex(i)).norm();
    const double expected = 0.5 * std::exp(-0.5 * d) / (4.0 * pi * d * d) * support / 4.0;
    CHECK(std::abs(k(i, j) - expected) <= 0.2 * expected);
}

TEST_CASE("volume row sums match the angular escape integral") {
    Setup s(box_mesh(1.0, 1.0, 3));
    const VolumeKernel k(s.geometry, level(0.8));
    const Vec3 lo(0, -1, -1), hi(1, 1, 1);
    for (const Vec3 &p : {Vec3(1.0 / 3.0, 0.0, 0.0), Vec3(2.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0), Vec3(0.0, 0.0, 0.0)}) {
        const Index i      = s.nearest(p);
        const double sum   = volume_row_sum(k, i);
        const double exact = row_sum_oracle(s.mesh.vertex(i), 0.8, lo, hi);
        CHECK(sum <= 1.0);
        CHECK(std::abs(sum - exact) <= 0.02 * exact);
    }
}

TEST_CASE("surface view factor without absorption") {
    Setup s(box_mesh(1.0, 1.0, 4));
    const SurfaceKernel k(s.geometry, level(0.0));
    CHECK(k.cols() == 81);
    for (double h : {0.25, 0.5, 1.0}) {
        const Index i      = s.nearest(Vec3(h, 0.0, 0.0));
        // Four 1 x 1 quarters; the Lambertian row sum is F / 4.
        const double exact = 4.0 * corner_view_factor(1.0, 1.0, h) / 4.0;
        CHECK(surface_row_sum(k, i) == doctest::Approx(exact).epsilon(5e-3));
    }
    // Ground vertices carry the free term: half the hemisphere.
    const Index g = s.nearest(Vec3(0.0, 0.0, 0.0));
    CHECK(surface_row_sum(k, g) == doctest::Approx(0.25).epsilon(1e-12));
    const Eigen::MatrixXd a = assemble_dense(k);
    CHECK(a.minCoeff() >= 0.0);
}

TEST_CASE("surface source over a wide ground reproduces the slab E3 law") {
    Setup s(box_mesh(10.0, 1.0, 4, 1.35));
    const SurfaceKernel k(s.geometry, level(0.5));
    for (double x : {0.25, 0.5, 1.0}) {
        const Index i = s.nearest(Vec3(x, 0.0, 0.0));
        CHECK(surface_row_sum(k, i) == doctest::Approx(0.5 * expint(3, 0.5 * x)).epsilon(1e-2));
    }
}

TEST_CASE("entries across a notch vanish") {
    // Two towers joined by a base slab x < 0.25.
    std::vector<double> ax(9);
    for (int k = 0; k <= 8; ++k)
        ax[static_cast<std::size_t>(k)] = k / 8.0;
    Setup s(structured_mesh(ax, ax, ax, [](const Vec3 &c) { return !(c.x() > 0.25 && std::abs(c.y() - 0.5) < 0.125); }),
            1.0, {17, 17, 17});
    const VolumeKernel vk(s.geometry, level(0.5));
    const SurfaceKernel sk(s.geometry, level(0.5));
    const Index a = s.nearest(Vec3(1.0, 0.125, 0.5)), b = s.nearest(Vec3(1.0, 0.875, 0.5));
    const Index a2 = s.nearest(Vec3(0.75, 0.0, 0.25));
    const Index g  = s.geometry->ground_column(s.nearest(Vec3(0.0, 0.875, 0.5)));
    REQUIRE(g >= 0);
    CHECK(vk(a, b) == 0.0);
    CHECK(vk(b, a) == 0.0);
    CHECK(vk(a2, b) == 0.0);
    CHECK(sk(a, g) == 0.0);
    // Same tower: visible.
    CHECK(vk(a, a2) > 0.0);
    CHECK(sk(b, g) > 0.0);
}

TEST_CASE("dense assembly refuses large operators") {
    Setup s(box_mesh(10.0, 1.0, 4));
    REQUIRE(s.mesh.num_vertices() > dense_assembly_limit);
    const VolumeKernel k(s.geometry, level(0.5));
    CHECK_THROWS(assemble_dense(k));
}
