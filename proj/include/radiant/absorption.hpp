#pragma once

#include "radiant/mesh.hpp"
#include "radiant/spectral.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace radiant {

/// Spatial factor rho_j(x) of one absorption term.
class Profile {
  public:
    enum class Kind { Constant, Affine, Sampled };

    static Profile constant(double value);
    /// value(p) = c0 + gradient . p
    static Profile affine(double c0, const Vec3 &gradient);
    /// Node samples on a regular grid over `box`, x fastest, trilinear in between.
    static Profile sampled(const Eigen::AlignedBox3d &box, const Eigen::Array3i &dims, std::vector<double> samples);

    Kind kind() const { return m_kind; }
    bool is_affine() const { return m_kind != Kind::Sampled; }
    /// Coefficients of an affine or constant profile.
    double c0() const { return m_c0; }
    const Vec3 &gradient() const { return m_gradient; }
    double operator()(const Vec3 &p) const;

  private:
    Kind m_kind = Kind::Constant;
    double m_c0 = 0.0;
    Vec3 m_gradient = Vec3::Zero();
    Eigen::AlignedBox3d m_box;
    Eigen::Array3i m_dims = Eigen::Array3i::Zero();
    std::vector<double> m_samples;
};

/// Vertical cylinder {(y - y0)^2 + (z - z0)^2 < r^2, lo < x < hi} where the
/// absorption is multiplied by `multiplier`.
struct CloudRegion {
    double y0 = 0.0, z0 = 0.0;
    double radius     = 0.0;
    double altitude_lo = 0.0, altitude_hi = 0.0;
    double multiplier = 1.0;

    bool contains(const Vec3 &p) const;
    void validate() const;
};

/// kappa_nu(x) = sum_j rho_j(x) kappa^j_nu, optionally scaled inside a cloud.
struct AbsorptionField {
    std::vector<Profile> profiles;
    std::vector<SpectralTable> tables; // one per profile
    std::optional<CloudRegion> cloud;

    Index num_terms() const { return static_cast<Index>(profiles.size()); }
    /// rho_j(p) including the cloud factor.
    double rho(Index j, const Vec3 &p) const;
};

/// Cartesian cache of the rho_j over the mesh bounding box. Cells whose
/// centre lies outside every tet carry infinite absorption, so any segment
/// sampled through them is fully attenuated.
class BackgroundGrid {
  public:
    BackgroundGrid(const Mesh &mesh, const AbsorptionField &field, const Eigen::Array3i &nodes_per_axis);

    Index num_terms() const { return static_cast<Index>(m_terms.size()); }
    const Eigen::AlignedBox3d &box() const { return m_box; }
    const Eigen::Array3i &dims() const { return m_dims; }
    Index outside_cells() const { return m_outside_count; }
    bool cell_outside(const Eigen::Array3i &cell) const;
    Eigen::Array3i cell_of(const Vec3 &p) const;

    /// Trilinear interpolation of rho_j.
    double rho(Index j, const Vec3 &p) const;
    /// Integral of rho_j over [a, b]; nullopt when the path leaves the domain.
    std::optional<double> line_integral(const Vec3 &a, const Vec3 &b, Index j) const;
    /// All terms at once; false when the path leaves the domain.
    bool line_integrals(const Vec3 &a, const Vec3 &b, Eigen::Ref<Eigen::VectorXd> out) const;
    /// exp(-sum_j levels_j * integral_j), exactly 0 outside.
    double attenuation(const Vec3 &a, const Vec3 &b, const Eigen::VectorXd &levels) const;

    /// Whether rho and segment integrals are evaluated in closed form
    /// (affine profiles, optionally inside a cloud) rather than from samples.
    bool closed_form() const { return m_closed_form; }
    /// Closed form and no occluding cells.
    bool exact() const { return m_exact; }

  private:
    struct Term {
        std::vector<double> samples;
        bool affine = false;
        double c0   = 0.0;
        Vec3 gradient = Vec3::Zero();
    };

    Eigen::AlignedBox3d m_box;
    Eigen::Array3i m_dims;   // nodes per axis
    Eigen::Array3d m_step;
    std::vector<Term> m_terms;
    std::vector<char> m_outside;             // per cell
    std::vector<std::uint8_t> m_clearance;   // Chebyshev cell distance to the nearest outside cell, capped
    Index m_outside_count = 0;
    std::optional<CloudRegion> m_cloud;
    bool m_closed_form = false;
    bool m_exact = false;

    std::size_t node_index(int i, int j, int k) const {
        return static_cast<std::size_t>((k * m_dims(1) + j) * m_dims(0) + i);
    }
    std::size_t cell_index(const Eigen::Array3i &c) const {
        return static_cast<std::size_t>((c(2) * (m_dims(1) - 1) + c(1)) * (m_dims(0) - 1) + c(0));
    }
    double interpolate(const Term &t, const Vec3 &p) const;
    /// Sample count of the walk from a to b along d = b - a.
    long sample_count(const Vec3 &d) const;
    /// Whether the walk from a to b crosses an outside cell away from its ends.
    bool occluded(const Vec3 &a, const Vec3 &b) const;
};

} // namespace radiant
