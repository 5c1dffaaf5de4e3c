#pragma once

#include "radiant/absorption.hpp"
#include "radiant/mesh.hpp"
#include "radiant/quadrature.hpp"

#include <memory>
#include <span>
#include <vector>

namespace radiant {

struct KernelOptions {
    QuadraturePreset preset = QuadraturePreset::standard();
    std::vector<int> ground_labels{labels::ground};
    int radial_points      = 4; // Gauss points along rays from a singular vertex
    int max_refinement     = 5; // surface triangle subdivision depth
};

/// Mesh-dependent data shared by every kernel built on one mesh and grid:
/// tet circumradii, far-rule points with their rho samples, ground
/// triangles and vertices, ground vertex normals.
class KernelGeometry {
  public:
    KernelGeometry(const Mesh &mesh, const BackgroundGrid &grid, KernelOptions options = {});

    const Mesh &mesh() const { return *m_mesh; }
    const BackgroundGrid &grid() const { return *m_grid; }
    const KernelOptions &options() const { return m_options; }

    /// Ground vertices in increasing mesh index; column j of a surface
    /// kernel refers to ground_vertices()[j].
    const std::vector<Index> &ground_vertices() const { return m_ground_vertices; }
    const std::vector<Index> &ground_triangles() const { return m_ground_triangles; }
    /// Ground triangles adjacent to ground vertex j (column index).
    std::span<const Index> ground_triangles_of(Index j) const;
    /// Area-weighted unit normal at ground vertex j (column index).
    Vec3 ground_normal(Index j) const { return m_ground_normals.col(j); }
    const Eigen::Matrix3Xd &ground_normals() const { return m_ground_normals; }
    /// Sum of the ground-triangle angles at vertex j over 8 pi.
    double free_term(Index j) const { return m_free_term(j); }
    Index ground_column(Index vertex) const { return m_ground_column[static_cast<std::size_t>(vertex)]; }

    double circumradius(Index tet) const { return m_circumradius(tet); }
    Vec3 centroid(Index tet) const { return m_centroid.col(tet); }

    /// Far-rule points of tet t: positions (3 x q) and rho per term (terms x q).
    Eigen::Ref<const Eigen::Matrix3Xd> far_points(Index tet) const {
        return m_far_points.middleCols(tet * m_far_count, m_far_count);
    }
    Eigen::Ref<const Eigen::MatrixXd> far_rho(Index tet) const {
        return m_far_rho.middleCols(tet * m_far_count, m_far_count);
    }
    Index far_count() const { return m_far_count; }

  private:
    const Mesh *m_mesh;
    const BackgroundGrid *m_grid;
    KernelOptions m_options;

    std::vector<Index> m_ground_vertices, m_ground_triangles, m_ground_column;
    Adjacency m_ground_adjacency;
    Eigen::Matrix3Xd m_ground_normals;
    Eigen::VectorXd m_free_term;

    Eigen::VectorXd m_circumradius;
    Eigen::Matrix3Xd m_centroid;
    Index m_far_count = 0;
    Eigen::Matrix3Xd m_far_points;
    Eigen::MatrixXd m_far_rho;
};

/// G^{ij} = 1/(4 pi) int kappa(x') exp(-int_[x^i,x'] kappa) / |x^i - x'|^2
/// w_j(x') dx' for one absorption level tuple.
class VolumeKernel {
  public:
    VolumeKernel(std::shared_ptr<const KernelGeometry> geometry, Eigen::VectorXd levels);

    Index rows() const { return m_geometry->mesh().num_vertices(); }
    Index cols() const { return m_geometry->mesh().num_vertices(); }
    double operator()(Index i, Index j) const;
    /// Entries (rows x cols) at once; each tet is integrated once per row.
    void block(std::span<const Index> rows, std::span<const Index> cols, Eigen::MatrixXd &out) const;

    const Eigen::VectorXd &levels() const { return m_levels; }

  private:
    std::shared_ptr<const KernelGeometry> m_geometry;
    Eigen::VectorXd m_levels;

    double kappa(const Vec3 &p) const;
    /// Integrals of the four corner hat functions of tet t seen from x^i.
    Eigen::Vector4d tet_moments(Index t, const Vec3 &xi, Index i) const;
    Eigen::Vector4d tet_far(Index t, const Vec3 &xi) const;
    Eigen::Vector4d tet_singular(Index t, int local_i, const Vec3 &xi) const;
    /// `bary` maps barycentric coordinates of `corners` to those of the mesh
    /// tet. Sub-tets measure their size by the largest centroid distance.
    Eigen::Vector4d tet_near(const std::array<Vec3, 4> &corners, const Eigen::Matrix4d &bary, const Vec3 &xi,
                             int depth, double root_radius) const;
};

/// S^{ij} = 1/(4 pi) int_ground w_j(x') exp(-int kappa) ([(x' - x^i).n]^+)^2
/// / |x' - x^i|^4 dA, plus the free term on the diagonal of ground vertices.
/// Columns index ground vertices.
class SurfaceKernel {
  public:
    SurfaceKernel(std::shared_ptr<const KernelGeometry> geometry, Eigen::VectorXd levels);

    Index rows() const { return m_geometry->mesh().num_vertices(); }
    Index cols() const { return static_cast<Index>(m_geometry->ground_vertices().size()); }
    double operator()(Index i, Index j) const;

    const Eigen::VectorXd &levels() const { return m_levels; }

  private:
    std::shared_ptr<const KernelGeometry> m_geometry;
    Eigen::VectorXd m_levels;

    double triangle(const std::array<Vec3, 3> &corners, const Eigen::Vector3d &wj, const Vec3 &n, const Vec3 &xi,
                    int depth) const;
};

inline constexpr Index dense_assembly_limit = 5000;

/// Full matrix of kernel entries; refuses sizes above dense_assembly_limit.
template <class Kernel>
Eigen::MatrixXd assemble_dense(const Kernel &kernel) {
    if (kernel.rows() > dense_assembly_limit || kernel.cols() > dense_assembly_limit)
        throw Error("dense assembly refused: " + std::to_string(kernel.rows()) + " x " + std::to_string(kernel.cols()) +
                    " exceeds the limit of " + std::to_string(dense_assembly_limit));
    Eigen::MatrixXd a(kernel.rows(), kernel.cols());
    for (Index j = 0; j < kernel.cols(); ++j)
        for (Index i = 0; i < kernel.rows(); ++i)
            a(i, j) = kernel(i, j);
    return a;
}

} // namespace radiant
