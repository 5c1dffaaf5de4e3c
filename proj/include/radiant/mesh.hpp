#pragma once

#include "radiant/common.hpp"

#include <Eigen/Geometry>

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace radiant {

/// Boundary labels produced by the structured generators.
namespace labels {
inline constexpr int ground  = 1;
inline constexpr int top     = 2;
inline constexpr int lateral = 3;
} // namespace labels

/// Compressed vertex -> element incidence.
struct Adjacency {
    std::vector<Index> offsets{0};
    std::vector<Index> items;

    std::span<const Index> of(Index v) const {
        return {items.data() + offsets[static_cast<std::size_t>(v)],
                static_cast<std::size_t>(offsets[static_cast<std::size_t>(v) + 1] - offsets[static_cast<std::size_t>(v)])};
    }
};

/// Tetrahedral volume mesh with labelled boundary triangles. Coordinates are
/// in reduced length units (1 unit = 10 km); the x axis is the altitude.
///
/// Fill the raw arrays, then call finalize(): it validates the invariants
/// (positive tet volumes, every boundary triangle is a face of exactly one
/// tet) and computes volumes, areas, outward normals and incidence lists.
struct Mesh {
    Eigen::Matrix3Xd vertices;
    std::vector<int> vertex_labels;
    std::vector<std::array<Index, 4>> tets;
    std::vector<int> tet_labels;
    std::vector<std::array<Index, 3>> triangles;
    std::vector<int> triangle_labels;

    // Derived by finalize().
    Eigen::VectorXd tet_volumes;
    Eigen::VectorXd triangle_areas;
    Eigen::Matrix3Xd normals; // outward unit normal per boundary triangle
    std::vector<Index> triangle_tet;
    Adjacency vertex_tets;
    Adjacency vertex_triangles;

    Index num_vertices() const { return vertices.cols(); }
    Index num_tets() const { return static_cast<Index>(tets.size()); }
    Index num_triangles() const { return static_cast<Index>(triangles.size()); }

    Vec3 vertex(Index v) const { return vertices.col(v); }
    Eigen::AlignedBox3d bounding_box() const;
    std::vector<Index> unused_vertices() const;

    void finalize();
};

double signed_tet_volume(const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d);

struct MeshLoadOptions {
    // Negative-volume tets are an error unless this is set, in which case
    // they are reoriented by swapping their last two vertices.
    bool reorient = false;
};

Mesh load_mesh(const std::filesystem::path &path, const MeshLoadOptions &options = {});
Mesh read_mesh(std::istream &in, const MeshLoadOptions &options = {});
void save_mesh(const Mesh &mesh, const std::filesystem::path &path);
void write_mesh(const Mesh &mesh, std::ostream &out);

/// Kuhn (6 tets per cell) mesh of the tensor grid xs * ys * zs. Cells whose
/// centre fails `keep` are dropped. Boundary faces are labelled ground on the
/// plane x = xs.front() with outward normal -x, top on x = xs.back() with
/// normal +x, lateral otherwise.
Mesh structured_mesh(std::span<const double> xs, std::span<const double> ys, std::span<const double> zs,
                     const std::function<bool(const Vec3 &)> &keep = {});

/// Structured mesh of (0,H) x (-L,L) x (-L,L) with n subdivisions per unit
/// length. With lateral_growth > 1 the lateral spacing starts at 1/n on the
/// central column and grows geometrically towards |y|,|z| = L.
Mesh box_mesh(double half_width, double height, int n, double lateral_growth = 1.0);

/// Node coordinates used by box_mesh along one lateral axis.
std::vector<double> graded_axis(double half_width, double spacing, double growth);

/// Rotation composed of `xy_degrees` in the (x,y) plane followed by
/// `xz_degrees` in the (x,z) plane.
Eigen::Matrix3d sun_rotation(double xy_degrees, double xz_degrees);

/// Rotated copies of the boundary normals; the mesh is not modified.
Eigen::Matrix3Xd boundary_normal_rotation(const Mesh &mesh, const Eigen::Matrix3d &rotation);

/// Point location through a uniform bucket grid over the tets.
class TetLocator {
  public:
    explicit TetLocator(const Mesh &mesh);

    struct Hit {
        Index tet;
        Eigen::Vector4d barycentric;
    };
    std::optional<Hit> locate(const Vec3 &p, double tolerance = 1e-10) const;
    bool inside(const Vec3 &p, double tolerance = 1e-10) const { return locate(p, tolerance).has_value(); }

  private:
    const Mesh *m_mesh;
    Eigen::AlignedBox3d m_box;
    Eigen::Array3i m_dims;
    Eigen::Array3d m_cell;
    std::vector<Index> m_offsets;
    std::vector<Index> m_items;

    Eigen::Array3i cell_of(const Vec3 &p) const;
};

Eigen::Vector4d barycentric(const Mesh &mesh, Index tet, const Vec3 &p);

} // namespace radiant
