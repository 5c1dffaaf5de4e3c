#pragma once

#include "radiant/hmat/hmatrix.hpp"
#include "radiant/kernels.hpp"
#include "radiant/rtsolve.hpp"

#include <map>
#include <memory>
#include <optional>

namespace radiant {

/// Snow covers the ground above h_snow, where only a fraction beta of the
/// sunlight is absorbed.
struct SnowSpec {
    double beta   = 0.3;
    double h_snow = 0.25;
};

struct SourceSpec {
    double Q0    = 2e-5;
    double T_sun = 1.02;
    Vec3 sun_direction = -Vec3::UnitX(); // direction the light travels
    Eigen::Matrix3d normal_rotation = Eigen::Matrix3d::Identity();
    std::optional<SnowSpec> snow;

    void validate() const;
};

/// Q0(x^j) [omega . R n(x^j)]^+ per ground column, without the Planck factor.
Eigen::VectorXd ground_source_factor(const KernelGeometry &geometry, const SourceSpec &source);

struct HMatrixParams {
    double eta     = 0.5;
    double eps     = 1e-3;
    Index leaf_max = 64;
    int threads    = 0;

    void validate() const;
};

struct OperatorRecord {
    std::string kind; // "volume" or "surface"
    Eigen::VectorXd levels;
    hmat::CompressionStats stats;
    double seconds = 0.0;
};

/// H-matrices keyed by absorption level tuple. Runs that only change the
/// boundary source reuse every operator.
class OperatorCache {
  public:
    using Matrix = hmat::HMatrix<double>;

    OperatorCache(std::shared_ptr<const KernelGeometry> geometry, HMatrixParams params);

    std::shared_ptr<const Matrix> volume(const Eigen::VectorXd &levels);
    std::shared_ptr<const Matrix> surface(const Eigen::VectorXd &levels);

    const KernelGeometry &geometry() const { return *m_geometry; }
    std::shared_ptr<const KernelGeometry> geometry_ptr() const { return m_geometry; }
    const HMatrixParams &params() const { return m_params; }
    Index built() const { return m_built; }
    Index reused() const { return m_reused; }
    const std::vector<OperatorRecord> &records() const { return m_records; }

  private:
    using Key = std::vector<double>;
    std::shared_ptr<const KernelGeometry> m_geometry;
    HMatrixParams m_params;
    std::shared_ptr<const hmat::ClusterTree> m_vertex_tree, m_ground_tree;
    std::map<Key, std::shared_ptr<const Matrix>> m_volume, m_surface;
    Index m_built = 0, m_reused = 0;
    std::vector<OperatorRecord> m_records;
};

/// Assembles the per-bin operators, aggregated sources and vertex
/// absorption for the solver.
BinSystem build_bin_system(OperatorCache &cache, const FrequencyGrid &grid, const std::vector<SpectralBin> &bins,
                           const SourceSpec &source);

} // namespace radiant
