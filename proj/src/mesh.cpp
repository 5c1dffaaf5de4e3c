#include "radiant/mesh.hpp"
#include "radiant/log.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace radiant {

namespace {

using Face = std::array<Index, 3>;

Face sorted_face(Index a, Index b, Index c) {
    Face f{a, b, c};
    std::sort(f.begin(), f.end());
    return f;
}

struct FaceInfo {
    int count      = 0;
    Index tet      = -1;
    Index opposite = -1;
};

// Local face k of a tet is the face opposite vertex k.
constexpr std::array<std::array<int, 3>, 4> tet_faces = {{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

std::map<Face, FaceInfo> collect_faces(const Mesh &mesh) {
    std::map<Face, FaceInfo> faces;
    for (Index t = 0; t < mesh.num_tets(); ++t) {
        const auto &tet = mesh.tets[static_cast<std::size_t>(t)];
        for (int k = 0; k < 4; ++k) {
            const auto &lf = tet_faces[static_cast<std::size_t>(k)];
            auto &info     = faces[sorted_face(tet[lf[0]], tet[lf[1]], tet[lf[2]])];
            ++info.count;
            info.tet      = t;
            info.opposite = tet[static_cast<std::size_t>(k)];
        }
    }
    return faces;
}

template <std::size_t K>
Adjacency build_adjacency(Index num_vertices, const std::vector<std::array<Index, K>> &elements) {
    Adjacency adj;
    adj.offsets.assign(static_cast<std::size_t>(num_vertices) + 1, 0);
    for (const auto &e : elements)
        for (Index v : e)
            ++adj.offsets[static_cast<std::size_t>(v) + 1];
    for (std::size_t v = 0; v < static_cast<std::size_t>(num_vertices); ++v)
        adj.offsets[v + 1] += adj.offsets[v];
    adj.items.resize(static_cast<std::size_t>(adj.offsets.back()));
    auto fill = adj.offsets;
    for (std::size_t e = 0; e < elements.size(); ++e)
        for (Index v : elements[e])
            adj.items[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = static_cast<Index>(e);
    return adj;
}

} // namespace

double signed_tet_volume(const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

Eigen::AlignedBox3d Mesh::bounding_box() const {
    Eigen::AlignedBox3d box;
    for (Index v = 0; v < num_vertices(); ++v)
        box.extend(vertex(v));
    return box;
}

std::vector<Index> Mesh::unused_vertices() const {
    std::vector<char> used(static_cast<std::size_t>(num_vertices()), 0);
    for (const auto &t : tets)
        for (Index v : t)
            used[static_cast<std::size_t>(v)] = 1;
    std::vector<Index> unused;
    for (Index v = 0; v < num_vertices(); ++v)
        if (!used[static_cast<std::size_t>(v)])
            unused.push_back(v);
    return unused;
}

void Mesh::finalize() {
    const Index nv = num_vertices();
    if (vertex_labels.size() != static_cast<std::size_t>(nv))
        vertex_labels.resize(static_cast<std::size_t>(nv), 0);
    if (tet_labels.size() != tets.size())
        tet_labels.resize(tets.size(), 0);
    if (triangle_labels.size() != triangles.size())
        triangle_labels.resize(triangles.size(), 0);

    for (std::size_t t = 0; t < tets.size(); ++t)
        for (Index v : tets[t])
            if (v < 0 || v >= nv)
                throw MeshError("tetrahedron " + std::to_string(t + 1) + " references missing vertex " +
                                std::to_string(v + 1));
    for (std::size_t t = 0; t < triangles.size(); ++t)
        for (Index v : triangles[t])
            if (v < 0 || v >= nv)
                throw MeshError("triangle " + std::to_string(t + 1) + " references missing vertex " +
                                std::to_string(v + 1));

    tet_volumes.resize(num_tets());
    std::vector<Index> inverted;
    for (Index t = 0; t < num_tets(); ++t) {
        const auto &k = tets[static_cast<std::size_t>(t)];
        const double vol = signed_tet_volume(vertex(k[0]), vertex(k[1]), vertex(k[2]), vertex(k[3]));
        tet_volumes(t)   = vol;
        if (!(vol > 0.0))
            inverted.push_back(t);
    }
    if (!inverted.empty()) {
        std::ostringstream msg;
        msg << "tetrahedra with non-positive volume (1-based):";
        for (std::size_t k = 0; k < std::min<std::size_t>(inverted.size(), 20); ++k)
            msg << ' ' << inverted[k] + 1;
        if (inverted.size() > 20)
            msg << " ... (" << inverted.size() << " total)";
        throw MeshError(msg.str());
    }

    const auto faces = collect_faces(*this);
    triangle_areas.resize(num_triangles());
    normals.resize(3, num_triangles());
    triangle_tet.assign(triangles.size(), -1);
    for (Index t = 0; t < num_triangles(); ++t) {
        const auto &tri = triangles[static_cast<std::size_t>(t)];
        const auto it   = faces.find(sorted_face(tri[0], tri[1], tri[2]));
        if (it == faces.end())
            throw MeshError("dangling boundary triangle " + std::to_string(t + 1) + " (" + std::to_string(tri[0] + 1) +
                            " " + std::to_string(tri[1] + 1) + " " + std::to_string(tri[2] + 1) +
                            ") is not a tetrahedron face");
        if (it->second.count != 1)
            throw MeshError("boundary triangle " + std::to_string(t + 1) + " is an interior face");

        const Vec3 a = vertex(tri[0]), b = vertex(tri[1]), c = vertex(tri[2]);
        Vec3 n             = (b - a).cross(c - a);
        triangle_areas(t)  = 0.5 * n.norm();
        n.normalize();
        const Vec3 centroid = (a + b + c) / 3.0;
        if (n.dot(vertex(it->second.opposite) - centroid) > 0.0)
            n = -n;
        normals.col(t)                           = n;
        triangle_tet[static_cast<std::size_t>(t)] = it->second.tet;
    }

    vertex_tets      = build_adjacency(nv, tets);
    vertex_triangles = build_adjacency(nv, triangles);
}

std::vector<double> graded_axis(double half_width, double spacing, double growth) {
    if (!(half_width > 0.0) || !(spacing > 0.0) || !(growth >= 1.0))
        throw Error("graded_axis: need half_width > 0, spacing > 0, growth >= 1");
    std::vector<double> positive{0.0};
    if (growth == 1.0) {
        const auto cells = std::max<long>(1, std::lround(half_width / spacing));
        for (long k = 1; k <= cells; ++k)
            positive.push_back(half_width * static_cast<double>(k) / static_cast<double>(cells));
    } else {
        double h = spacing;
        while (positive.back() + h < half_width * (1.0 - 1e-12)) {
            positive.push_back(positive.back() + h);
            h *= growth;
        }
        // A sliver last cell is merged into its neighbour.
        if (positive.size() > 1 && half_width - positive.back() < 0.5 * (positive.back() - positive[positive.size() - 2]))
            positive.pop_back();
        positive.push_back(half_width);
    }
    std::vector<double> axis;
    for (auto it = positive.rbegin(); it != positive.rend(); ++it)
        if (*it > 0.0)
            axis.push_back(-*it);
    axis.insert(axis.end(), positive.begin(), positive.end());
    return axis;
}

Mesh structured_mesh(std::span<const double> xs, std::span<const double> ys, std::span<const double> zs,
                     const std::function<bool(const Vec3 &)> &keep) {
    if (xs.size() < 2 || ys.size() < 2 || zs.size() < 2)
        throw Error("structured_mesh: need at least two nodes per axis");
    const Index nx = static_cast<Index>(xs.size()), ny = static_cast<Index>(ys.size()), nz = static_cast<Index>(zs.size());
    auto node = [&](Index i, Index j, Index k) { return (k * ny + j) * nx + i; };

    // Cells that survive the mask, then only vertices they touch.
    std::vector<char> cell_kept(static_cast<std::size_t>((nx - 1) * (ny - 1) * (nz - 1)), 1);
    std::vector<Index> vertex_id(static_cast<std::size_t>(nx * ny * nz), -1);
    for (Index k = 0; k + 1 < nz; ++k)
        for (Index j = 0; j + 1 < ny; ++j)
            for (Index i = 0; i + 1 < nx; ++i) {
                const Vec3 centre(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]), 0.5 * (zs[k] + zs[k + 1]));
                const auto c = static_cast<std::size_t>((k * (ny - 1) + j) * (nx - 1) + i);
                cell_kept[c] = !keep || keep(centre);
                if (cell_kept[c])
                    for (Index dk = 0; dk < 2; ++dk)
                        for (Index dj = 0; dj < 2; ++dj)
                            for (Index di = 0; di < 2; ++di)
                                vertex_id[static_cast<std::size_t>(node(i + di, j + dj, k + dk))] = 0;
            }

    Mesh mesh;
    Index count = 0;
    for (auto &id : vertex_id)
        if (id == 0)
            id = count++;
    mesh.vertices.resize(3, count);
    for (Index k = 0; k < nz; ++k)
        for (Index j = 0; j < ny; ++j)
            for (Index i = 0; i < nx; ++i) {
                const Index id = vertex_id[static_cast<std::size_t>(node(i, j, k))];
                if (id >= 0)
                    mesh.vertices.col(id) = Vec3(xs[i], ys[j], zs[k]);
            }
    mesh.vertex_labels.assign(static_cast<std::size_t>(count), 0);

    // Kuhn split: one tet per monotone path from corner 000 to corner 111.
    constexpr std::array<std::array<int, 3>, 6> paths = {
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (Index k = 0; k + 1 < nz; ++k)
        for (Index j = 0; j + 1 < ny; ++j)
            for (Index i = 0; i + 1 < nx; ++i) {
                if (!cell_kept[static_cast<std::size_t>((k * (ny - 1) + j) * (nx - 1) + i)])
                    continue;
                for (const auto &path : paths) {
                    std::array<Index, 3> corner{i, j, k};
                    std::array<Index, 4> tet{};
                    tet[0] = vertex_id[static_cast<std::size_t>(node(corner[0], corner[1], corner[2]))];
                    for (int s = 0; s < 3; ++s) {
                        ++corner[static_cast<std::size_t>(path[static_cast<std::size_t>(s)])];
                        tet[static_cast<std::size_t>(s) + 1] =
                            vertex_id[static_cast<std::size_t>(node(corner[0], corner[1], corner[2]))];
                    }
                    if (signed_tet_volume(mesh.vertex(tet[0]), mesh.vertex(tet[1]), mesh.vertex(tet[2]),
                                          mesh.vertex(tet[3])) < 0.0)
                        std::swap(tet[2], tet[3]);
                    mesh.tets.push_back(tet);
                }
            }
    mesh.tet_labels.assign(mesh.tets.size(), 0);

    const double x_lo = xs.front(), x_hi = xs.back();
    const double tol  = 1e-12 * std::max(1.0, std::abs(x_hi - x_lo));
    for (const auto &[face, info] : collect_faces(mesh)) {
        if (info.count != 1)
            continue;
        const Vec3 a = mesh.vertex(face[0]), b = mesh.vertex(face[1]), c = mesh.vertex(face[2]);
        Vec3 n       = (b - a).cross(c - a);
        if (n.dot(mesh.vertex(info.opposite) - a) > 0.0)
            n = -n;
        int label = labels::lateral;
        if (std::abs(a.x() - x_lo) < tol && std::abs(b.x() - x_lo) < tol && std::abs(c.x() - x_lo) < tol && n.x() < 0.0)
            label = labels::ground;
        else if (std::abs(a.x() - x_hi) < tol && std::abs(b.x() - x_hi) < tol && std::abs(c.x() - x_hi) < tol &&
                 n.x() > 0.0)
            label = labels::top;
        mesh.triangles.push_back(face);
        mesh.triangle_labels.push_back(label);
    }
    mesh.finalize();
    return mesh;
}

Mesh box_mesh(double half_width, double height, int n, double lateral_growth) {
    if (!(half_width > 0.0) || !(height > 0.0) || n < 1)
        throw Error("box_mesh: need L > 0, H > 0, n >= 1");
    const auto vertical = std::max<long>(1, std::lround(height * n));
    std::vector<double> xs;
    for (long k = 0; k <= vertical; ++k)
        xs.push_back(height * static_cast<double>(k) / static_cast<double>(vertical));
    const auto lateral = graded_axis(half_width, 1.0 / n, lateral_growth);
    return structured_mesh(xs, lateral, lateral);
}

Eigen::Matrix3d sun_rotation(double xy_degrees, double xz_degrees) {
    const double a = xy_degrees * pi / 180.0, b = xz_degrees * pi / 180.0;
    Eigen::Matrix3d xy, xz;
    xy << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
    xz << std::cos(b), 0.0, -std::sin(b), 0.0, 1.0, 0.0, std::sin(b), 0.0, std::cos(b);
    return xz * xy;
}

Eigen::Matrix3Xd boundary_normal_rotation(const Mesh &mesh, const Eigen::Matrix3d &rotation) {
    const double orth = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
    if (orth > 1e-10 || std::abs(rotation.determinant() - 1.0) > 1e-10)
        throw Error("boundary_normal_rotation: matrix is not a proper rotation");
    return rotation * mesh.normals;
}

Eigen::Vector4d barycentric(const Mesh &mesh, Index tet, const Vec3 &p) {
    const auto &k = mesh.tets[static_cast<std::size_t>(tet)];
    Eigen::Matrix3d m;
    m.col(0) = mesh.vertex(k[1]) - mesh.vertex(k[0]);
    m.col(1) = mesh.vertex(k[2]) - mesh.vertex(k[0]);
    m.col(2) = mesh.vertex(k[3]) - mesh.vertex(k[0]);
    const Vec3 l = m.partialPivLu().solve(p - mesh.vertex(k[0]));
    return {1.0 - l.sum(), l(0), l(1), l(2)};
}

TetLocator::TetLocator(const Mesh &mesh) : m_mesh(&mesh), m_box(mesh.bounding_box()) {
    const Index nt = mesh.num_tets();
    const Eigen::Array3d extent = m_box.sizes().array().max(1e-12);
    // About two tets per bucket.
    const double target = std::cbrt(extent.prod() / std::max<double>(1.0, static_cast<double>(nt) / 2.0));
    m_dims = (extent / target).ceil().max(1.0).min(512.0).cast<int>();
    m_cell = extent / m_dims.cast<double>();

    const auto total = static_cast<std::size_t>(m_dims.prod());
    std::vector<std::vector<Index>> buckets(total);
    for (Index t = 0; t < nt; ++t) {
        Eigen::AlignedBox3d tb;
        for (Index v : mesh.tets[static_cast<std::size_t>(t)])
            tb.extend(mesh.vertex(v));
        const Eigen::Array3i lo = cell_of(tb.min()), hi = cell_of(tb.max());
        for (int k = lo(2); k <= hi(2); ++k)
            for (int j = lo(1); j <= hi(1); ++j)
                for (int i = lo(0); i <= hi(0); ++i)
                    buckets[static_cast<std::size_t>((k * m_dims(1) + j) * m_dims(0) + i)].push_back(t);
    }
    m_offsets.assign(total + 1, 0);
    for (std::size_t b = 0; b < total; ++b)
        m_offsets[b + 1] = m_offsets[b] + static_cast<Index>(buckets[b].size());
    m_items.reserve(static_cast<std::size_t>(m_offsets.back()));
    for (const auto &b : buckets)
        m_items.insert(m_items.end(), b.begin(), b.end());
}

Eigen::Array3i TetLocator::cell_of(const Vec3 &p) const {
    const Eigen::Array3d rel = (p - m_box.min()).array() / m_cell;
    return rel.floor().cast<int>().max(0).min(m_dims - 1);
}

std::optional<TetLocator::Hit> TetLocator::locate(const Vec3 &p, double tolerance) const {
    const double slack = tolerance * std::max(1.0, m_box.sizes().maxCoeff());
    if ((p.array() < m_box.min().array() - slack).any() || (p.array() > m_box.max().array() + slack).any())
        return std::nullopt;
    const Eigen::Array3i c = cell_of(p);
    const auto b           = static_cast<std::size_t>((c(2) * m_dims(1) + c(1)) * m_dims(0) + c(0));
    for (Index k = m_offsets[b]; k < m_offsets[b + 1]; ++k) {
        const Index t            = m_items[static_cast<std::size_t>(k)];
        const Eigen::Vector4d bc = barycentric(*m_mesh, t, p);
        if (bc.minCoeff() >= -tolerance)
            return Hit{t, bc};
    }
    return std::nullopt;
}

} // namespace radiant
