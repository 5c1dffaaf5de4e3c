#pragma once

#include "radiant/common.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace radiant::hmat {

struct Cluster {
    Index begin = 0, end = 0; // range in tree order
    Vec3 center  = Vec3::Zero();
    double radius = 0.0;
    int left = -1, right = -1;
    int depth = 0;

    Index size() const { return end - begin; }
    bool is_leaf() const { return left < 0; }
};

/// Binary geometric tree. Clusters are split at the median along the axis of
/// largest extent until they hold at most leaf_max points.
class ClusterTree {
  public:
    ClusterTree(const Eigen::Matrix3Xd &points, Index leaf_max) : m_points(points) {
        if (points.cols() < 1)
            throw Error("cluster tree needs at least one point");
        if (leaf_max < 1)
            throw Error("cluster tree leaf size must be positive");
        m_perm.resize(static_cast<std::size_t>(points.cols()));
        std::iota(m_perm.begin(), m_perm.end(), Index{0});
        m_clusters.push_back({});
        m_clusters[0].end = points.cols();
        split(0, leaf_max);
        m_inverse.resize(m_perm.size());
        for (std::size_t k = 0; k < m_perm.size(); ++k)
            m_inverse[static_cast<std::size_t>(m_perm[k])] = static_cast<Index>(k);
    }

    const Cluster &root() const { return m_clusters.front(); }
    const Cluster &cluster(int c) const { return m_clusters[static_cast<std::size_t>(c)]; }
    const std::vector<Cluster> &clusters() const { return m_clusters; }
    Index size() const { return static_cast<Index>(m_perm.size()); }

    /// Original index of the point at tree position k.
    Index original(Index k) const { return m_perm[static_cast<std::size_t>(k)]; }
    /// Tree position of original point i.
    Index position(Index i) const { return m_inverse[static_cast<std::size_t>(i)]; }
    const std::vector<Index> &permutation() const { return m_perm; }

    int depth() const {
        int d = 0;
        for (const auto &c : m_clusters)
            d = std::max(d, c.depth);
        return d + 1;
    }
    Index num_leaves() const {
        return std::count_if(m_clusters.begin(), m_clusters.end(), [](const Cluster &c) { return c.is_leaf(); });
    }

  private:
    Eigen::Matrix3Xd m_points;
    std::vector<Index> m_perm, m_inverse;
    std::vector<Cluster> m_clusters;

    void split(int id, Index leaf_max) {
        auto &c        = m_clusters[static_cast<std::size_t>(id)];
        const auto first = m_perm.begin() + c.begin, last = m_perm.begin() + c.end;

        Eigen::AlignedBox3d box;
        for (auto it = first; it != last; ++it)
            box.extend(Vec3(m_points.col(*it)));
        c.center = box.center();
        c.radius = 0.0;
        for (auto it = first; it != last; ++it)
            c.radius = std::max(c.radius, (m_points.col(*it) - c.center).norm());

        if (c.size() <= leaf_max || box.sizes().maxCoeff() == 0.0)
            return;
        int axis = 0;
        box.sizes().maxCoeff(&axis);
        const Index begin = c.begin, end = c.end, mid = begin + c.size() / 2;
        const int depth   = c.depth;
        std::nth_element(first, m_perm.begin() + mid, last, [&](Index a, Index b) {
            const double pa = m_points(axis, a), pb = m_points(axis, b);
            return pa < pb || (pa == pb && a < b);
        });

        const int left  = static_cast<int>(m_clusters.size());
        const int right = left + 1;
        m_clusters.push_back({begin, mid, Vec3::Zero(), 0.0, -1, -1, depth + 1});
        m_clusters.push_back({mid, end, Vec3::Zero(), 0.0, -1, -1, depth + 1});
        m_clusters[static_cast<std::size_t>(id)].left  = left;
        m_clusters[static_cast<std::size_t>(id)].right = right;
        split(left, leaf_max);
        split(right, leaf_max);
    }
};

} // namespace radiant::hmat
