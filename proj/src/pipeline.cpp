#include "radiant/pipeline.hpp"
#include "radiant/log.hpp"

#include <chrono>
#include <sstream>

namespace radiant {

void SourceSpec::validate() const {
    if (!(Q0 >= 0.0))
        throw ConfigError("source Q0 must be non-negative");
    if (!(T_sun >= 0.0))
        throw ConfigError("sun temperature must be non-negative");
    if (!(sun_direction.norm() > 0.0))
        throw ConfigError("sun direction must be non-zero");
    if (snow) {
        if (!(snow->beta > 0.0 && snow->beta < 1.0))
            throw ConfigError("snow beta must lie in (0, 1)");
        if (!std::isfinite(snow->h_snow))
            throw ConfigError("snow altitude must be finite");
    }
}

void HMatrixParams::validate() const {
    if (!(eps > 0.0))
        throw ConfigError("hmatrix eps must be positive");
    if (!(eta > 0.0))
        throw ConfigError("hmatrix eta must be positive");
    if (leaf_max < 1)
        throw ConfigError("hmatrix leaf_max must be at least 1");
}

Eigen::VectorXd ground_source_factor(const KernelGeometry &geometry, const SourceSpec &source) {
    source.validate();
    const auto &mesh     = geometry.mesh();
    const auto &ground   = geometry.ground_vertices();
    const Vec3 omega     = source.sun_direction.normalized();
    Eigen::VectorXd q(static_cast<Index>(ground.size()));
    for (std::size_t c = 0; c < ground.size(); ++c) {
        const Vec3 x      = mesh.vertex(ground[c]);
        const Vec3 n      = source.normal_rotation * geometry.ground_normal(static_cast<Index>(c));
        double factor     = source.Q0 * std::max(0.0, omega.dot(n));
        if (source.snow)
            factor *= source.snow->beta + (1.0 - source.snow->beta) * (x.x() < source.snow->h_snow ? 1.0 : 0.0);
        q(static_cast<Index>(c)) = factor;
    }
    return q;
}

OperatorCache::OperatorCache(std::shared_ptr<const KernelGeometry> geometry, HMatrixParams params)
    : m_geometry(std::move(geometry)), m_params(params) {
    m_params.validate();
    const auto &mesh = m_geometry->mesh();
    m_vertex_tree    = std::make_shared<const hmat::ClusterTree>(mesh.vertices, m_params.leaf_max);
    const auto &ground = m_geometry->ground_vertices();
    if (ground.empty())
        throw MeshError("mesh has no ground triangles for the configured ground labels");
    Eigen::Matrix3Xd points(3, static_cast<Index>(ground.size()));
    for (std::size_t c = 0; c < ground.size(); ++c)
        points.col(static_cast<Index>(c)) = mesh.vertex(ground[c]);
    m_ground_tree = std::make_shared<const hmat::ClusterTree>(points, m_params.leaf_max);
}

namespace {

template <class Kernel>
std::shared_ptr<const hmat::HMatrix<double>> build(const std::shared_ptr<const hmat::ClusterTree> &rows,
                                                   const std::shared_ptr<const hmat::ClusterTree> &cols,
                                                   const Kernel &kernel, const HMatrixParams &p, OperatorRecord &rec) {
    const auto start = std::chrono::steady_clock::now();
    hmat::Options options;
    options.eta     = p.eta;
    options.eps     = p.eps;
    options.threads = p.threads;
    auto h          = std::make_shared<const hmat::HMatrix<double>>(rows, cols, kernel, options);
    rec.seconds     = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.stats       = h->stats();
    std::ostringstream msg;
    msg << "built " << rec.kind << " H-matrix " << rec.stats.rows << "x" << rec.stats.cols << " in " << rec.seconds
        << " s, compression " << rec.stats.ratio << ", max rank " << rec.stats.max_rank;
    log::info(msg.str());
    return h;
}

} // namespace

std::shared_ptr<const OperatorCache::Matrix> OperatorCache::volume(const Eigen::VectorXd &levels) {
    Key key(levels.data(), levels.data() + levels.size());
    if (auto it = m_volume.find(key); it != m_volume.end()) {
        ++m_reused;
        return it->second;
    }
    OperatorRecord rec{"volume", levels, {}, 0.0};
    auto h = build(m_vertex_tree, m_vertex_tree, VolumeKernel(m_geometry, levels), m_params, rec);
    m_records.push_back(rec);
    ++m_built;
    m_volume.emplace(std::move(key), h);
    return h;
}

std::shared_ptr<const OperatorCache::Matrix> OperatorCache::surface(const Eigen::VectorXd &levels) {
    Key key(levels.data(), levels.data() + levels.size());
    if (auto it = m_surface.find(key); it != m_surface.end()) {
        ++m_reused;
        return it->second;
    }
    OperatorRecord rec{"surface", levels, {}, 0.0};
    auto h = build(m_vertex_tree, m_ground_tree, SurfaceKernel(m_geometry, levels), m_params, rec);
    m_records.push_back(rec);
    ++m_built;
    m_surface.emplace(std::move(key), h);
    return h;
}

BinSystem build_bin_system(OperatorCache &cache, const FrequencyGrid &grid, const std::vector<SpectralBin> &bins,
                           const SourceSpec &source) {
    const auto &geo  = cache.geometry();
    const auto &mesh = geo.mesh();
    const Eigen::VectorXd q = ground_source_factor(geo, source);

    BinSystem sys;
    sys.grid = grid;
    sys.bins = bins;
    const int threads = cache.params().threads;
    for (const auto &bin : bins) {
        auto G = cache.volume(bin.kappa);
        auto S = cache.surface(bin.kappa);
        sys.volume.emplace_back([G, threads](const Eigen::VectorXd &x) { return G->matvec(x, threads); });
        const double sun = bin_planck(bin, grid, source.T_sun);
        sys.source.push_back(S->matvec(q * sun, threads));
        Eigen::VectorXd kappa(mesh.num_vertices());
        for (Index i = 0; i < mesh.num_vertices(); ++i) {
            double k = 0.0;
            for (Index j = 0; j < bin.kappa.size(); ++j)
                k += bin.kappa(j) * geo.grid().rho(j, mesh.vertex(i));
            kappa(i) = k;
        }
        sys.kappa.push_back(std::move(kappa));
    }
    return sys;
}

} // namespace radiant
