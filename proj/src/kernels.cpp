#include "radiant/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace radiant {

namespace {

constexpr double inv_four_pi = 1.0 / (4.0 * pi);

double tet_circumradius(const Vec3 &p0, const Vec3 &p1, const Vec3 &p2, const Vec3 &p3) {
    Eigen::Matrix3d a;
    a.row(0) = (p1 - p0).transpose();
    a.row(1) = (p2 - p0).transpose();
    a.row(2) = (p3 - p0).transpose();
    const Vec3 b(0.5 * a.row(0).squaredNorm(), 0.5 * a.row(1).squaredNorm(), 0.5 * a.row(2).squaredNorm());
    return a.partialPivLu().solve(b).norm();
}

double tet_volume(const std::array<Vec3, 4> &c) { return std::abs(signed_tet_volume(c[0], c[1], c[2], c[3])); }

// Red refinement of a tet into 8 children, as corner index lists into
// {c0, c1, c2, c3, m01, m02, m03, m12, m13, m23}.
constexpr std::array<std::array<int, 4>, 8> red_children = {{{0, 4, 5, 6},
                                                              {4, 1, 7, 8},
                                                              {5, 7, 2, 9},
                                                              {6, 8, 9, 3},
                                                              {4, 5, 6, 8},
                                                              {4, 5, 7, 8},
                                                              {5, 6, 8, 9},
                                                              {5, 7, 8, 9}}};

} // namespace

KernelGeometry::KernelGeometry(const Mesh &mesh, const BackgroundGrid &grid, KernelOptions options)
    : m_mesh(&mesh), m_grid(&grid), m_options(std::move(options)) {
    const Index nv = mesh.num_vertices(), nt = mesh.num_tets();

    // Ground boundary.
    m_ground_column.assign(static_cast<std::size_t>(nv), -1);
    std::vector<std::array<Index, 3>> ground_local;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const int label = mesh.triangle_labels[static_cast<std::size_t>(t)];
        if (std::find(m_options.ground_labels.begin(), m_options.ground_labels.end(), label) ==
            m_options.ground_labels.end())
            continue;
        m_ground_triangles.push_back(t);
        for (Index v : mesh.triangles[static_cast<std::size_t>(t)])
            m_ground_column[static_cast<std::size_t>(v)] = 0;
    }
    for (Index v = 0; v < nv; ++v)
        if (m_ground_column[static_cast<std::size_t>(v)] == 0) {
            m_ground_column[static_cast<std::size_t>(v)] = static_cast<Index>(m_ground_vertices.size());
            m_ground_vertices.push_back(v);
        }
    const Index ng = static_cast<Index>(m_ground_vertices.size());

    m_ground_adjacency.offsets.assign(static_cast<std::size_t>(ng) + 1, 0);
    for (Index t : m_ground_triangles)
        for (Index v : mesh.triangles[static_cast<std::size_t>(t)])
            ++m_ground_adjacency.offsets[static_cast<std::size_t>(m_ground_column[static_cast<std::size_t>(v)]) + 1];
    for (std::size_t k = 0; k < static_cast<std::size_t>(ng); ++k)
        m_ground_adjacency.offsets[k + 1] += m_ground_adjacency.offsets[k];
    m_ground_adjacency.items.resize(static_cast<std::size_t>(m_ground_adjacency.offsets.back()));
    auto fill = m_ground_adjacency.offsets;

    m_ground_normals = Eigen::Matrix3Xd::Zero(3, ng);
    m_free_term      = Eigen::VectorXd::Zero(ng);
    for (Index t : m_ground_triangles) {
        const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
        for (int k = 0; k < 3; ++k) {
            const Index v   = tri[static_cast<std::size_t>(k)];
            const Index col = m_ground_column[static_cast<std::size_t>(v)];
            m_ground_adjacency.items[static_cast<std::size_t>(fill[static_cast<std::size_t>(col)]++)] = t;
            m_ground_normals.col(col) += mesh.triangle_areas(t) * mesh.normals.col(t);
            const Vec3 e1 = mesh.vertex(tri[static_cast<std::size_t>((k + 1) % 3)]) - mesh.vertex(v);
            const Vec3 e2 = mesh.vertex(tri[static_cast<std::size_t>((k + 2) % 3)]) - mesh.vertex(v);
            m_free_term(col) += std::atan2(e1.cross(e2).norm(), e1.dot(e2)) / (8.0 * pi);
        }
    }
    for (Index c = 0; c < ng; ++c)
        m_ground_normals.col(c).normalize();

    // Per-tet data.
    const QuadratureRule &far = tet_rule(m_options.preset.far);
    m_far_count               = far.size();
    m_circumradius.resize(nt);
    m_centroid.resize(3, nt);
    m_far_points.resize(3, nt * m_far_count);
    m_far_rho.resize(grid.num_terms(), nt * m_far_count);
    for (Index t = 0; t < nt; ++t) {
        const auto &k = mesh.tets[static_cast<std::size_t>(t)];
        const Vec3 p0 = mesh.vertex(k[0]), p1 = mesh.vertex(k[1]), p2 = mesh.vertex(k[2]), p3 = mesh.vertex(k[3]);
        m_circumradius(t) = tet_circumradius(p0, p1, p2, p3);
        m_centroid.col(t) = 0.25 * (p0 + p1 + p2 + p3);
        for (Index q = 0; q < m_far_count; ++q) {
            const auto b  = far.barycentric.row(q);
            const Vec3 x  = b(0) * p0 + b(1) * p1 + b(2) * p2 + b(3) * p3;
            const Index c = t * m_far_count + q;
            m_far_points.col(c) = x;
            for (Index j = 0; j < grid.num_terms(); ++j)
                m_far_rho(j, c) = grid.rho(j, x);
        }
    }
}

std::span<const Index> KernelGeometry::ground_triangles_of(Index j) const { return m_ground_adjacency.of(j); }

VolumeKernel::VolumeKernel(std::shared_ptr<const KernelGeometry> geometry, Eigen::VectorXd levels)
    : m_geometry(std::move(geometry)), m_levels(std::move(levels)) {
    if (m_levels.size() != m_geometry->grid().num_terms())
        throw Error("volume kernel: level count does not match the absorption terms");
    if ((m_levels.array() < 0.0).any())
        throw Error("volume kernel: negative absorption level");
}

double VolumeKernel::kappa(const Vec3 &p) const {
    double k = 0.0;
    for (Index j = 0; j < m_levels.size(); ++j)
        k += m_levels(j) * m_geometry->grid().rho(j, p);
    return k;
}

Eigen::Vector4d VolumeKernel::tet_far(Index t, const Vec3 &xi) const {
    const auto &geo  = *m_geometry;
    const auto &rule = tet_rule(geo.options().preset.far);
    const auto pts   = geo.far_points(t);
    const auto rho   = geo.far_rho(t);
    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    for (Index q = 0; q < rule.size(); ++q) {
        const Vec3 x   = pts.col(q);
        const double k = m_levels.dot(rho.col(q));
        if (k == 0.0)
            continue;
        const double r2 = (x - xi).squaredNorm();
        sum += (rule.weights(q) * k * geo.grid().attenuation(xi, x, m_levels) / r2) * rule.barycentric.row(q).transpose();
    }
    return sum * (6.0 * geo.mesh().tet_volumes(t));
}

Eigen::Vector4d VolumeKernel::tet_near(const std::array<Vec3, 4> &c, const Eigen::Matrix4d &bary, const Vec3 &xi,
                                       int depth, double root_radius) const {
    const Vec3 centroid = 0.25 * (c[0] + c[1] + c[2] + c[3]);
    const double radius = depth == 0 ? root_radius
                                     : std::sqrt(std::max({(c[0] - centroid).squaredNorm(), (c[1] - centroid).squaredNorm(),
                                                           (c[2] - centroid).squaredNorm(), (c[3] - centroid).squaredNorm()}));
    const double dist   = (xi - centroid).norm();
    if (depth < 2 && dist < 1.5 * radius) {
        const std::array<Vec3, 10> p = {c[0], c[1], c[2], c[3], 0.5 * (c[0] + c[1]), 0.5 * (c[0] + c[2]),
                                        0.5 * (c[0] + c[3]), 0.5 * (c[1] + c[2]), 0.5 * (c[1] + c[3]),
                                        0.5 * (c[2] + c[3])};
        constexpr std::array<std::array<int, 2>, 10> from = {
            {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
        Eigen::Vector4d sum = Eigen::Vector4d::Zero();
        for (const auto &child : red_children) {
            std::array<Vec3, 4> cc;
            Eigen::Matrix4d cb;
            for (int k = 0; k < 4; ++k) {
                const auto n                    = static_cast<std::size_t>(child[static_cast<std::size_t>(k)]);
                cc[static_cast<std::size_t>(k)] = p[n];
                cb.col(k)                       = 0.5 * (bary.col(from[n][0]) + bary.col(from[n][1]));
            }
            sum += tet_near(cc, cb, xi, depth + 1, 0.0);
        }
        return sum;
    }
    const auto &preset  = m_geometry->options().preset;
    const auto &rule    = tet_rule(dist < 2.0 * radius ? preset.near : preset.far);
    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    for (Index q = 0; q < rule.size(); ++q) {
        const Eigen::Vector4d b = rule.barycentric.row(q).transpose();
        const Vec3 x            = b(0) * c[0] + b(1) * c[1] + b(2) * c[2] + b(3) * c[3];
        const double k          = kappa(x);
        if (k == 0.0)
            continue;
        sum += (rule.weights(q) * k * m_geometry->grid().attenuation(xi, x, m_levels) / (x - xi).squaredNorm()) *
               (bary * b);
    }
    return sum * (6.0 * tet_volume(c));
}


Eigen::Vector4d VolumeKernel::tet_singular(Index t, int local_i, const Vec3 &xi) const {
    // Rays from the singular vertex v: x' = v + s (y - v), y on the opposite
    // face F. With h the height of v over F, dx' / |x' - v|^2 = h / |y - v|^2 ds dA.
    const auto &geo  = *m_geometry;
    const auto &mesh = geo.mesh();
    const auto &tet  = mesh.tets[static_cast<std::size_t>(t)];
    std::array<Vec3, 3> face;
    std::array<int, 3> face_local{};
    for (int k = 0, f = 0; k < 4; ++k) {
        if (k == local_i)
            continue;
        face[static_cast<std::size_t>(f)]       = mesh.vertex(tet[static_cast<std::size_t>(k)]);
        face_local[static_cast<std::size_t>(f)] = k;
        ++f;
    }
    const Vec3 normal   = (face[1] - face[0]).cross(face[2] - face[0]);
    const double area   = 0.5 * normal.norm();
    const double height = 3.0 * mesh.tet_volumes(t) / area;

    static const auto radial_rules = [] {
        std::array<std::pair<Eigen::VectorXd, Eigen::VectorXd>, 8> r;
        for (int n = 1; n <= 8; ++n)
            r[static_cast<std::size_t>(n - 1)] = gauss_legendre(n, 0.0, 1.0);
        return r;
    }();
    const auto &nodes = radial_rules[static_cast<std::size_t>(std::clamp(geo.options().radial_points, 1, 8) - 1)];
    const auto &tri          = triangle_rule(TriangleRule::Degree5Points7);

    // The face is split into 4 sub-triangles so the h / |y - v|^2 weight is resolved.
    const std::array<Vec3, 6> fp = {face[0], face[1], face[2], 0.5 * (face[0] + face[1]), 0.5 * (face[1] + face[2]),
                                    0.5 * (face[0] + face[2])};
    std::array<Eigen::Vector4d, 6> fb;
    for (int f = 0; f < 3; ++f)
        fb[static_cast<std::size_t>(f)] = Eigen::Vector4d::Unit(face_local[static_cast<std::size_t>(f)]);
    fb[3] = 0.5 * (fb[0] + fb[1]);
    fb[4] = 0.5 * (fb[1] + fb[2]);
    fb[5] = 0.5 * (fb[0] + fb[2]);
    const Eigen::Vector4d bv = Eigen::Vector4d::Unit(local_i);
    constexpr std::array<std::array<int, 3>, 4> subs = {{{0, 3, 5}, {3, 1, 4}, {5, 4, 2}, {3, 4, 5}}};

    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    for (const auto &s : subs) {
        const auto a = static_cast<std::size_t>(s[0]), b1 = static_cast<std::size_t>(s[1]),
                   b2 = static_cast<std::size_t>(s[2]);
        for (Index q = 0; q < tri.size(); ++q) {
            const auto b             = tri.barycentric.row(q);
            const Vec3 y             = b(0) * fp[a] + b(1) * fp[b1] + b(2) * fp[b2];
            const Eigen::Vector4d by = b(0) * fb[a] + b(1) * fb[b1] + b(2) * fb[b2];
            double ray0 = 0.0, ray1 = 0.0; // moments of (1 - s) and s along the ray
            for (Index r = 0; r < nodes.first.size(); ++r) {
                const double sr = nodes.first(r);
                const Vec3 x    = xi + sr * (y - xi);
                const double k  = kappa(x);
                if (k == 0.0)
                    continue;
                const double f = nodes.second(r) * k * geo.grid().attenuation(xi, x, m_levels);
                ray0 += (1.0 - sr) * f;
                ray1 += sr * f;
            }
            // Sub-triangle area is area / 4; the rule weights sum to 1/2.
            const double scale = tri.weights(q) * 2.0 * (area / 4.0) * height / (y - xi).squaredNorm();
            sum += scale * (ray0 * bv + ray1 * by);
        }
    }
    return sum;
}

Eigen::Vector4d VolumeKernel::tet_moments(Index t, const Vec3 &xi, Index i) const {
    const auto &geo  = *m_geometry;
    const auto &mesh = geo.mesh();
    const auto &tet  = mesh.tets[static_cast<std::size_t>(t)];
    for (int k = 0; k < 4; ++k)
        if (tet[static_cast<std::size_t>(k)] == i)
            return tet_singular(t, k, xi);
    if ((xi - geo.centroid(t)).norm() < 2.0 * geo.circumradius(t)) {
        std::array<Vec3, 4> corners;
        for (int k = 0; k < 4; ++k)
            corners[static_cast<std::size_t>(k)] = mesh.vertex(tet[static_cast<std::size_t>(k)]);
        return tet_near(corners, Eigen::Matrix4d::Identity(), xi, 0, geo.circumradius(t));
    }
    return tet_far(t, xi);
}

double VolumeKernel::operator()(Index i, Index j) const {
    const auto &mesh = m_geometry->mesh();
    const Vec3 xi    = mesh.vertex(i);
    double sum       = 0.0;
    for (Index t : mesh.vertex_tets.of(j)) {
        const auto &tet = mesh.tets[static_cast<std::size_t>(t)];
        const int local_j = static_cast<int>(std::find(tet.begin(), tet.end(), j) - tet.begin());
        sum += tet_moments(t, xi, i)(local_j);
    }
    return inv_four_pi * sum;
}

void VolumeKernel::block(std::span<const Index> rows, std::span<const Index> cols, Eigen::MatrixXd &out) const {
    const auto &mesh = m_geometry->mesh();
    out.setZero(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    // Local column of each vertex, and the tets touching any column.
    thread_local std::vector<Index> column;
    thread_local std::vector<Index> tets;
    column.assign(static_cast<std::size_t>(mesh.num_vertices()), -1);
    tets.clear();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        column[static_cast<std::size_t>(cols[c])] = static_cast<Index>(c);
        for (Index t : mesh.vertex_tets.of(cols[c]))
            tets.push_back(t);
    }
    std::sort(tets.begin(), tets.end());
    tets.erase(std::unique(tets.begin(), tets.end()), tets.end());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Vec3 xi = mesh.vertex(rows[r]);
        for (Index t : tets) {
            const Eigen::Vector4d m = tet_moments(t, xi, rows[r]);
            const auto &tet         = mesh.tets[static_cast<std::size_t>(t)];
            for (int k = 0; k < 4; ++k)
                if (const Index c = column[static_cast<std::size_t>(tet[static_cast<std::size_t>(k)])]; c >= 0)
                    out(static_cast<Index>(r), c) += inv_four_pi * m(k);
        }
    }
}

SurfaceKernel::SurfaceKernel(std::shared_ptr<const KernelGeometry> geometry, Eigen::VectorXd levels)
    : m_geometry(std::move(geometry)), m_levels(std::move(levels)) {
    if (m_levels.size() != m_geometry->grid().num_terms())
        throw Error("surface kernel: level count does not match the absorption terms");
    if ((m_levels.array() < 0.0).any())
        throw Error("surface kernel: negative absorption level");
}

double SurfaceKernel::triangle(const std::array<Vec3, 3> &c, const Eigen::Vector3d &wj, const Vec3 &n, const Vec3 &xi,
                               int depth) const {
    const Vec3 centroid = (c[0] + c[1] + c[2]) / 3.0;
    const double size   = std::max({(c[1] - c[0]).norm(), (c[2] - c[1]).norm(), (c[0] - c[2]).norm()});
    const double dist   = (xi - centroid).norm();
    if (size > 0.5 * dist && depth < m_geometry->options().max_refinement) {
        const std::array<Vec3, 6> p      = {c[0], c[1], c[2], 0.5 * (c[0] + c[1]), 0.5 * (c[1] + c[2]),
                                       0.5 * (c[0] + c[2])};
        const std::array<double, 6> w    = {wj(0), wj(1), wj(2), 0.5 * (wj(0) + wj(1)), 0.5 * (wj(1) + wj(2)),
                                         0.5 * (wj(0) + wj(2))};
        constexpr std::array<std::array<int, 3>, 4> subs = {{{0, 3, 5}, {3, 1, 4}, {5, 4, 2}, {3, 4, 5}}};
        double sum = 0.0;
        for (const auto &s : subs)
            sum += triangle({p[static_cast<std::size_t>(s[0])], p[static_cast<std::size_t>(s[1])],
                             p[static_cast<std::size_t>(s[2])]},
                            {w[static_cast<std::size_t>(s[0])], w[static_cast<std::size_t>(s[1])],
                             w[static_cast<std::size_t>(s[2])]},
                            n, xi, depth + 1);
        return sum;
    }
    const auto &rule  = triangle_rule(size > 0.2 * dist ? TriangleRule::Degree5Points7 : TriangleRule::Degree2Points3);
    const double area = 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
    double sum        = 0.0;
    for (Index q = 0; q < rule.size(); ++q) {
        const auto b      = rule.barycentric.row(q);
        const Vec3 x      = b(0) * c[0] + b(1) * c[1] + b(2) * c[2];
        const double wval = b(0) * wj(0) + b(1) * wj(1) + b(2) * wj(2);
        const Vec3 d      = x - xi;
        const double cosp = d.dot(n);
        if (cosp <= 0.0 || wval == 0.0)
            continue;
        const double r2 = d.squaredNorm();
        sum += rule.weights(q) * wval * cosp * cosp / (r2 * r2) * m_geometry->grid().attenuation(xi, x, m_levels);
    }
    return sum * 2.0 * area;
}

double SurfaceKernel::operator()(Index i, Index j) const {
    const auto &geo  = *m_geometry;
    const auto &mesh = geo.mesh();
    const Index vj   = geo.ground_vertices()[static_cast<std::size_t>(j)];
    const Vec3 xi    = mesh.vertex(i);
    double sum       = 0.0;
    for (Index t : geo.ground_triangles_of(j)) {
        const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
        if (tri[0] == i || tri[1] == i || tri[2] == i)
            continue; // x^i lies in the plane of the triangle
        const Vec3 n = mesh.normals.col(t);
        if ((mesh.vertex(tri[0]) - xi).dot(n) <= 0.0 && (mesh.vertex(tri[1]) - xi).dot(n) <= 0.0 &&
            (mesh.vertex(tri[2]) - xi).dot(n) <= 0.0)
            continue; // x^i behind or in the plane
        Eigen::Vector3d wj(tri[0] == vj ? 1.0 : 0.0, tri[1] == vj ? 1.0 : 0.0, tri[2] == vj ? 1.0 : 0.0);
        sum += triangle({mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2])}, wj, n, xi, 0);
    }
    sum *= inv_four_pi;
    if (vj == i)
        sum += geo.free_term(j);
    return sum;
}

} // namespace radiant
