#include "radiant/absorption.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace radiant {

namespace {

double trilinear(const std::vector<double> &samples, const Eigen::AlignedBox3d &box, const Eigen::Array3i &dims,
                 const Vec3 &p) {
    const Eigen::Array3d step = box.sizes().array() / (dims - 1).cast<double>();
    Eigen::Array3d rel        = (p - box.min()).array() / step;
    rel                       = rel.max(0.0).min((dims - 1).cast<double>());
    const Eigen::Array3i c    = rel.floor().cast<int>().min(dims - 2).max(0);
    const Eigen::Array3d t    = rel - c.cast<double>();
    auto at                   = [&](int i, int j, int k) {
        return samples[static_cast<std::size_t>(((c(2) + k) * dims(1) + c(1) + j) * dims(0) + c(0) + i)];
    };
    const double c00 = at(0, 0, 0) * (1 - t(0)) + at(1, 0, 0) * t(0);
    const double c10 = at(0, 1, 0) * (1 - t(0)) + at(1, 1, 0) * t(0);
    const double c01 = at(0, 0, 1) * (1 - t(0)) + at(1, 0, 1) * t(0);
    const double c11 = at(0, 1, 1) * (1 - t(0)) + at(1, 1, 1) * t(0);
    const double c0  = c00 * (1 - t(1)) + c10 * t(1);
    const double c1  = c01 * (1 - t(1)) + c11 * t(1);
    return c0 * (1 - t(2)) + c1 * t(2);
}

} // namespace

Profile Profile::constant(double value) {
    Profile p;
    p.m_kind = Kind::Constant;
    p.m_c0   = value;
    return p;
}

Profile Profile::affine(double c0, const Vec3 &gradient) {
    Profile p;
    p.m_kind     = Kind::Affine;
    p.m_c0       = c0;
    p.m_gradient = gradient;
    return p;
}

Profile Profile::sampled(const Eigen::AlignedBox3d &box, const Eigen::Array3i &dims, std::vector<double> samples) {
    if ((dims < 2).any())
        throw Error("sampled profile needs at least two nodes per axis");
    if (samples.size() != static_cast<std::size_t>(dims.prod()))
        throw Error("sampled profile: sample count does not match the grid");
    if ((box.sizes().array() <= 0.0).any())
        throw Error("sampled profile: degenerate box");
    Profile p;
    p.m_kind    = Kind::Sampled;
    p.m_box     = box;
    p.m_dims    = dims;
    p.m_samples = std::move(samples);
    return p;
}

double Profile::operator()(const Vec3 &p) const {
    switch (m_kind) {
    case Kind::Constant:
        return m_c0;
    case Kind::Affine:
        return m_c0 + m_gradient.dot(p);
    case Kind::Sampled:
        return trilinear(m_samples, m_box, m_dims, p);
    }
    return 0.0;
}

bool CloudRegion::contains(const Vec3 &p) const {
    const double dy = p.y() - y0, dz = p.z() - z0;
    return p.x() > altitude_lo && p.x() < altitude_hi && dy * dy + dz * dz < radius * radius;
}

void CloudRegion::validate() const {
    if (!(multiplier > 0.0))
        throw ConfigError("cloud multiplier must be positive");
    if (!(radius > 0.0) || !(altitude_hi > altitude_lo))
        throw ConfigError("cloud needs a positive radius and altitude_lo < altitude_hi");
}

double AbsorptionField::rho(Index j, const Vec3 &p) const {
    double value = profiles[static_cast<std::size_t>(j)](p);
    if (cloud && cloud->contains(p))
        value *= cloud->multiplier;
    return value;
}

BackgroundGrid::BackgroundGrid(const Mesh &mesh, const AbsorptionField &field, const Eigen::Array3i &nodes_per_axis)
    : m_box(mesh.bounding_box()), m_dims(nodes_per_axis) {
    if ((m_dims < 2).any())
        throw Error("background grid needs at least two nodes per axis");
    if ((m_box.sizes().array() <= 0.0).any())
        throw MeshError("degenerate mesh bounding box");
    if (field.profiles.empty())
        throw Error("absorption field has no terms");
    if (field.cloud)
        field.cloud->validate();
    m_step     = m_box.sizes().array() / (m_dims - 1).cast<double>();

    auto node = [&](int i, int j, int k) {
        return Vec3(m_box.min() + (Eigen::Array3d(i, j, k) * m_step).matrix());
    };
    for (const auto &profile : field.profiles) {
        Term term;
        term.samples.resize(static_cast<std::size_t>(m_dims.prod()));
        for (int k = 0; k < m_dims(2); ++k)
            for (int j = 0; j < m_dims(1); ++j)
                for (int i = 0; i < m_dims(0); ++i) {
                    const Vec3 p                  = node(i, j, k);
                    double value                  = profile(p);
                    if (field.cloud && field.cloud->contains(p))
                        value *= field.cloud->multiplier;
                    if (value < 0.0)
                        throw Error("absorption profile is negative inside the domain");
                    term.samples[node_index(i, j, k)] = value;
                }
        if (profile.is_affine()) {
            term.affine   = true;
            term.c0       = profile(Vec3::Zero());
            term.gradient = Vec3(profile(Vec3::UnitX()), profile(Vec3::UnitY()), profile(Vec3::UnitZ())) -
                            Vec3::Constant(term.c0);
        }
        m_terms.push_back(std::move(term));
    }

    const Eigen::Array3i cells = m_dims - 1;
    m_outside.assign(static_cast<std::size_t>(cells.prod()), 0);
    // A mesh that fills its bounding box has no outside cells.
    const double box_volume = m_box.volume();
    if (std::abs(mesh.tet_volumes.sum() - box_volume) > 1e-9 * box_volume) {
        const TetLocator locator(mesh);
        for (int k = 0; k < cells(2); ++k)
            for (int j = 0; j < cells(1); ++j)
                for (int i = 0; i < cells(0); ++i) {
                    const Vec3 centre = node(i, j, k) + (0.5 * m_step).matrix();
                    if (!locator.inside(centre)) {
                        m_outside[cell_index({i, j, k})] = 1;
                        ++m_outside_count;
                    }
                }
    }

    if (m_outside_count > 0) {
        // Two-pass chamfer transform, exact for the Chebyshev metric.
        m_clearance.assign(m_outside.size(), 255);
        for (std::size_t c = 0; c < m_outside.size(); ++c)
            if (m_outside[c])
                m_clearance[c] = 0;
        auto pass = [&](int dir) {
            const int i0 = dir > 0 ? 0 : cells(0) - 1, j0 = dir > 0 ? 0 : cells(1) - 1, k0 = dir > 0 ? 0 : cells(2) - 1;
            for (int k = k0; k >= 0 && k < cells(2); k += dir)
                for (int j = j0; j >= 0 && j < cells(1); j += dir)
                    for (int i = i0; i >= 0 && i < cells(0); i += dir) {
                        auto &here = m_clearance[cell_index({i, j, k})];
                        for (int dk = -1; dk <= 1; ++dk)
                            for (int dj = -1; dj <= 1; ++dj)
                                for (int di = -1; di <= 1; ++di) {
                                    // Neighbours already visited in this sweep order.
                                    const int order = (dk * 3 + dj) * 3 + di;
                                    if (order * dir >= 0)
                                        continue;
                                    const Eigen::Array3i nb(i + di, j + dj, k + dk);
                                    if ((nb < 0).any() || (nb >= cells).any())
                                        continue;
                                    const int via = m_clearance[cell_index(nb)] + 1;
                                    if (via < here)
                                        here = static_cast<std::uint8_t>(via);
                                }
                    }
        };
        pass(1);
        pass(-1);
    }

    m_cloud       = field.cloud;
    m_closed_form = true;
    for (const auto &t : m_terms)
        m_closed_form = m_closed_form && t.affine;
    m_exact = m_closed_form && m_outside_count == 0;
}

Eigen::Array3i BackgroundGrid::cell_of(const Vec3 &p) const {
    const Eigen::Array3d rel = (p - m_box.min()).array() / m_step;
    return rel.floor().cast<int>().max(0).min(m_dims - 2);
}

bool BackgroundGrid::cell_outside(const Eigen::Array3i &cell) const { return m_outside[cell_index(cell)] != 0; }

double BackgroundGrid::interpolate(const Term &t, const Vec3 &p) const {
    return trilinear(t.samples, m_box, m_dims, p);
}

double BackgroundGrid::rho(Index j, const Vec3 &p) const {
    const auto &t = m_terms[static_cast<std::size_t>(j)];
    if (!m_closed_form)
        return interpolate(t, p);
    const double value = t.c0 + t.gradient.dot(p);
    return m_cloud && m_cloud->contains(p) ? value * m_cloud->multiplier : value;
}

long BackgroundGrid::sample_count(const Vec3 &d) const {
    // Consecutive samples are at most half a cell apart along every axis.
    const double cells = (d.array().abs() / m_step).maxCoeff();
    return std::max<long>(1, static_cast<long>(std::ceil(2.0 * cells)));
}

bool BackgroundGrid::occluded(const Vec3 &a, const Vec3 &b) const {
    const Vec3 d          = b - a;
    const double len      = d.norm();
    const long count      = sample_count(d);
    const double diagonal = m_step.matrix().norm();
    long s = 0;
    while (s < count) {
        const double t             = (static_cast<double>(s) + 0.5) / static_cast<double>(count);
        const Eigen::Array3i cell  = cell_of(a + t * d);
        const std::uint8_t clear   = m_clearance[cell_index(cell)];
        if (clear == 0 && t * len > diagonal && (1.0 - t) * len > diagonal)
            return true;
        // k further samples move at most k/2 + 1 cells along any axis.
        s += std::max<long>(1, 2 * (static_cast<long>(clear) - 2));
    }
    return false;
}

namespace {

// Parameter interval of a + t d, t in [0, 1], inside the cloud cylinder.
std::pair<double, double> cloud_interval(const CloudRegion &c, const Vec3 &a, const Vec3 &d) {
    double lo = 0.0, hi = 1.0;
    if (d.x() == 0.0) {
        if (!(a.x() > c.altitude_lo && a.x() < c.altitude_hi))
            return {0.0, 0.0};
    } else {
        double t0 = (c.altitude_lo - a.x()) / d.x(), t1 = (c.altitude_hi - a.x()) / d.x();
        if (t0 > t1)
            std::swap(t0, t1);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
    }
    const double ey = a.y() - c.y0, ez = a.z() - c.z0;
    const double qa = d.y() * d.y() + d.z() * d.z();
    const double qb = 2.0 * (ey * d.y() + ez * d.z());
    const double qc = ey * ey + ez * ez - c.radius * c.radius;
    if (qa == 0.0) {
        if (!(qc < 0.0))
            return {0.0, 0.0};
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (!(disc > 0.0))
            return {0.0, 0.0};
        const double root = std::sqrt(disc);
        lo = std::max(lo, (-qb - root) / (2.0 * qa));
        hi = std::min(hi, (-qb + root) / (2.0 * qa));
    }
    return hi > lo ? std::pair{lo, hi} : std::pair{0.0, 0.0};
}

} // namespace

bool BackgroundGrid::line_integrals(const Vec3 &a, const Vec3 &b, Eigen::Ref<Eigen::VectorXd> out) const {
    const Vec3 d     = b - a;
    const double len = d.norm();
    if (m_closed_form) {
        if (m_outside_count > 0 && len > 0.0 && occluded(a, b))
            return false;
        const Vec3 mid = a + 0.5 * d;
        for (std::size_t j = 0; j < m_terms.size(); ++j)
            out(static_cast<Index>(j)) = (m_terms[j].c0 + m_terms[j].gradient.dot(mid)) * len;
        if (m_cloud && len > 0.0) {
            const auto [t0, t1] = cloud_interval(*m_cloud, a, d);
            if (t1 > t0) {
                const Vec3 inner = a + 0.5 * (t0 + t1) * d;
                const double w   = (m_cloud->multiplier - 1.0) * (t1 - t0) * len;
                for (std::size_t j = 0; j < m_terms.size(); ++j)
                    out(static_cast<Index>(j)) += (m_terms[j].c0 + m_terms[j].gradient.dot(inner)) * w;
            }
        }
        return true;
    }
    out.setZero();
    if (len == 0.0)
        return true;
    // Midpoint samples on a uniform split keep the rule symmetric in (a, b).
    const long count      = sample_count(d);
    const double h        = len / static_cast<double>(count);
    const double diagonal = m_step.matrix().norm();
    for (long s = 0; s < count; ++s) {
        const double t = (static_cast<double>(s) + 0.5) / static_cast<double>(count);
        const Vec3 p   = a + t * d;
        if (m_outside_count > 0) {
            const double from_a = t * len, from_b = (1.0 - t) * len;
            if (from_a > diagonal && from_b > diagonal && cell_outside(cell_of(p)))
                return false;
        }
        for (std::size_t j = 0; j < m_terms.size(); ++j)
            out(static_cast<Index>(j)) += interpolate(m_terms[j], p) * h;
    }
    return true;
}

std::optional<double> BackgroundGrid::line_integral(const Vec3 &a, const Vec3 &b, Index j) const {
    Eigen::VectorXd all(num_terms());
    if (!line_integrals(a, b, all))
        return std::nullopt;
    return all(j);
}

double BackgroundGrid::attenuation(const Vec3 &a, const Vec3 &b, const Eigen::VectorXd &levels) const {
    if (m_exact && !m_cloud && m_terms.size() == 1) {
        const auto &t = m_terms.front();
        return std::exp(-levels(0) * (t.c0 + t.gradient.dot(0.5 * (a + b))) * (b - a).norm());
    }
    Eigen::VectorXd integrals(num_terms());
    if (!line_integrals(a, b, integrals))
        return 0.0;
    return std::exp(-levels.dot(integrals));
}

} // namespace radiant
