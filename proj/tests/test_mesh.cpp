#include "radiant/log.hpp"
#include "radiant/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace radiant;

namespace {

const char *reference_tet = R"(MeshVersionFormatted 2
Dimension 3
Vertices
4
0 0 0 0
1 0 0 0
0 1 0 0
0 0 1 0
Tetrahedra
1
1 2 3 4 0
Triangles
4
1 3 2 1
1 2 4 2
1 4 3 3
2 3 4 4
End
)";

void check_normals_outward(const Mesh &mesh) {
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
        const auto &tet = mesh.tets[static_cast<std::size_t>(mesh.triangle_tet[static_cast<std::size_t>(t)])];
        const Vec3 c    = (mesh.vertex(tri[0]) + mesh.vertex(tri[1]) + mesh.vertex(tri[2])) / 3.0;
        Index opposite  = -1;
        for (Index v : tet)
            if (v != tri[0] && v != tri[1] && v != tri[2])
                opposite = v;
        REQUIRE(opposite >= 0);
        CHECK(mesh.normals.col(t).norm() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(mesh.normals.col(t).dot(mesh.vertex(opposite) - c) < 0.0);
    }
}

struct CapturedWarnings {
    std::vector<std::string> messages;
    log::Sink previous;
    CapturedWarnings() {
        previous = log::set_sink([this](std::string_view level, std::string_view msg) {
            if (level == "warning")
                messages.emplace_back(msg);
        });
    }
    ~CapturedWarnings() { log::set_sink(previous); }
};

} // namespace

TEST_CASE("reference tetrahedron loads with outward normals") {
    std::istringstream in(reference_tet);
    const Mesh m = read_mesh(in);
    CHECK(m.num_vertices() == 4);
    CHECK(m.num_tets() == 1);
    CHECK(m.tet_volumes(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(m.triangle_areas.sum() == doctest::Approx(1.5 + std::sqrt(3.0) / 2.0).epsilon(1e-14));
    check_normals_outward(m);
}

TEST_CASE("unit cube of six tets") {
    const std::vector<double> ax{0.0, 1.0};
    const Mesh m = structured_mesh(ax, ax, ax);
    CHECK(m.num_tets() == 6);
    CHECK(m.tet_volumes.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.triangle_areas.sum() == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(m.num_triangles() == 12);
    check_normals_outward(m);
}

TEST_CASE("box mesh counts, volume partition and labels") {
    const Mesh m = box_mesh(1.0, 1.0, 1);
    CHECK(m.num_vertices() == 18);
    for (auto [L, H, n] : {std::tuple{1.0, 1.0, 2}, std::tuple{2.5, 0.7, 3}, std::tuple{10.0, 1.0, 1}}) {
        const Mesh b = box_mesh(L, H, n);
        CHECK(std::abs(b.tet_volumes.sum() - 4 * L * L * H) <= 1e-12 * 4 * L * L * H);
        CHECK((b.tet_volumes.array() > 0.0).all());
        check_normals_outward(b);
        double ground = 0.0, top = 0.0;
        for (Index t = 0; t < b.num_triangles(); ++t) {
            const int label = b.triangle_labels[static_cast<std::size_t>(t)];
            if (label == labels::ground) {
                ground += b.triangle_areas(t);
                CHECK(b.normals(0, t) == doctest::Approx(-1.0));
            } else if (label == labels::top) {
                top += b.triangle_areas(t);
                CHECK(b.normals(0, t) == doctest::Approx(1.0));
            } else {
                CHECK(label == labels::lateral);
            }
        }
        CHECK(ground == doctest::Approx(4 * L * L));
        CHECK(top == doctest::Approx(4 * L * L));
    }
    CHECK_THROWS(box_mesh(0.0, 1.0, 1));
    CHECK_THROWS(box_mesh(1.0, 1.0, 0));
}

TEST_CASE("graded lateral axis") {
    const auto ax = graded_axis(10.0, 0.2, 1.25);
    CHECK(ax.front() == -10.0);
    CHECK(ax.back() == 10.0);
    // Symmetric, uniform spacing near the column, growing outwards.
    for (std::size_t k = 0; k < ax.size(); ++k)
        CHECK(ax[k] == doctest::Approx(-ax[ax.size() - 1 - k]));
    const std::size_t mid = ax.size() / 2;
    CHECK(ax[mid] == doctest::Approx(0.0));
    CHECK(ax[mid + 1] - ax[mid] == doctest::Approx(0.2));
    // The last cell is whatever remains, but never a sliver.
    const std::size_t last = ax.size() - 1;
    for (std::size_t k = mid + 1; k + 1 < last; ++k)
        CHECK(ax[k + 1] - ax[k] >= ax[k] - ax[k - 1] - 1e-12);
    CHECK(ax[last] - ax[last - 1] >= 0.5 * (ax[last - 1] - ax[last - 2]));
    const Mesh m = box_mesh(10.0, 1.0, 5, 1.25);
    CHECK(m.tet_volumes.sum() == doctest::Approx(400.0).epsilon(1e-12));
}

TEST_CASE("save and load round-trip bit-identically") {
    const Mesh m = box_mesh(1.0, 1.0, 2, 1.3);
    std::stringstream buffer;
    write_mesh(m, buffer);
    const Mesh r = read_mesh(buffer);
    CHECK(r.vertices == m.vertices);
    CHECK(r.tets == m.tets);
    CHECK(r.triangles == m.triangles);
    CHECK(r.triangle_labels == m.triangle_labels);
}

TEST_CASE("unused vertex is kept with a warning") {
    std::string text = reference_tet;
    text.replace(text.find("Vertices\n4\n"), 11, "Vertices\n5\n");
    text.replace(text.find("Tetrahedra"), 0, "5 5 5 0\n");
    CapturedWarnings warnings;
    std::istringstream in(text);
    const Mesh m = read_mesh(in);
    CHECK(m.num_vertices() == 5);
    CHECK(m.unused_vertices() == std::vector<Index>{4});
    REQUIRE(warnings.messages.size() == 1);
    CHECK(warnings.messages[0].find("5") != std::string::npos);
}

TEST_CASE("malformed files report line numbers") {
    std::string text = reference_tet;
    text.replace(text.find("1 0 0 0"), 7, "1 zero 0 0");
    std::istringstream in(text);
    try {
        read_mesh(in);
        FAIL("expected a parse error");
    } catch (const ParseError &e) {
        CHECK(e.line() == 6);
    }
    std::istringstream truncated("MeshVersionFormatted 2\nDimension 3\nVertices\n2\n0 0 0 0\n");
    CHECK_THROWS_AS(read_mesh(truncated), ParseError);
}

TEST_CASE("inverted tets are rejected or reoriented") {
    std::string text = reference_tet;
    text.replace(text.find("1 2 3 4 0"), 9, "1 3 2 4 0");
    {
        std::istringstream in(text);
        try {
            read_mesh(in);
            FAIL("expected a mesh error");
        } catch (const MeshError &e) {
            CHECK(std::string(e.what()).find("1") != std::string::npos);
        }
    }
    std::istringstream in(text);
    const Mesh m = read_mesh(in, {.reorient = true});
    CHECK(m.tet_volumes(0) == doctest::Approx(1.0 / 6.0));
    check_normals_outward(m);
}

TEST_CASE("dangling boundary triangle is rejected") {
    std::string text = reference_tet;
    text.replace(text.find("Triangles\n4\n"), 12, "Triangles\n5\n");
    text.replace(text.find("End"), 0, "1 2 3 1\n");
    text.replace(text.find("Vertices\n4\n"), 11, "Vertices\n5\n");
    text.replace(text.find("Tetrahedra"), 0, "2 2 2 0\n");
    text.replace(text.find("1 2 3 1\nEnd"), 7, "1 2 5 1");
    std::istringstream in(text);
    CHECK_THROWS_AS(read_mesh(in), MeshError);
}

TEST_CASE("sun rotation of normals") {
    const Mesh m = box_mesh(1.0, 1.0, 1);
    const Eigen::Matrix3Xd same = boundary_normal_rotation(m, Eigen::Matrix3d::Identity());
    CHECK(same == m.normals);
    const Eigen::Matrix3d R = sun_rotation(45.0, 0.0);
    const Vec3 n            = R * Vec3::UnitX();
    CHECK(n(0) == doctest::Approx(std::sqrt(0.5)));
    CHECK(n(1) == doctest::Approx(std::sqrt(0.5)));
    CHECK(n(2) == doctest::Approx(0.0));
    const Eigen::Matrix3Xd rotated = boundary_normal_rotation(m, sun_rotation(45.0, -20.0));
    CHECK((rotated.colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-14);
    Eigen::Matrix3d shear = Eigen::Matrix3d::Identity();
    shear(0, 1)           = 0.5;
    CHECK_THROWS(boundary_normal_rotation(m, shear));
    CHECK_THROWS(boundary_normal_rotation(m, -Eigen::Matrix3d::Identity()));
}

TEST_CASE("point location") {
    const Mesh m = box_mesh(1.0, 1.0, 3, 1.2);
    const TetLocator locator(m);
    for (const Vec3 &p : {Vec3(0.5, 0.1, -0.3), Vec3(0.0, 0.0, 0.0), Vec3(1.0, 1.0, 1.0), Vec3(0.77, -0.9, 0.4)}) {
        const auto hit = locator.locate(p);
        REQUIRE(hit);
        CHECK(hit->barycentric.sum() == doctest::Approx(1.0));
        CHECK(hit->barycentric.minCoeff() >= -1e-10);
        const auto &t = m.tets[static_cast<std::size_t>(hit->tet)];
        Vec3 back     = Vec3::Zero();
        for (int c = 0; c < 4; ++c)
            back += hit->barycentric(c) * m.vertex(t[static_cast<std::size_t>(c)]);
        CHECK((back - p).norm() < 1e-12);
    }
    CHECK_FALSE(locator.inside(Vec3(1.5, 0.0, 0.0)));
    CHECK_FALSE(locator.inside(Vec3(0.5, 0.0, 1.01)));
}

TEST_CASE("structured mesh with a removed block") {
    const std::vector<double> xs{0.0, 0.5, 1.0}, ys{-1.0, 0.0, 1.0}, zs{0.0, 1.0};
    const Mesh m = structured_mesh(xs, ys, zs, [](const Vec3 &c) { return !(c.x() > 0.5 && c.y() > 0.0); });
    CHECK(m.tet_volumes.sum() == doctest::Approx(0.75 * 2.0));
    check_normals_outward(m);
    const TetLocator locator(m);
    CHECK_FALSE(locator.inside(Vec3(0.75, 0.5, 0.5)));
    CHECK(locator.inside(Vec3(0.25, 0.5, 0.5)));
}
