#pragma once

#include "radiant/common.hpp"

#include <string_view>

namespace radiant {

/// Symmetric quadrature rule on a reference simplex, stored in barycentric
/// coordinates (one row per point). Weights are positive and sum to the
/// reference measure: 1/6 for the tetrahedron, 1/2 for the triangle.
struct QuadratureRule {
    Eigen::MatrixXd barycentric;
    Eigen::VectorXd weights;
    int degree = 0;

    Index size() const { return weights.size(); }
};

enum class TetRule {
    Degree2Points4,
    Degree2Points5,
    Degree5Points15,
    Degree6Points24,
};

enum class TriangleRule {
    Degree2Points3,
    Degree5Points7,
};

const QuadratureRule &tet_rule(TetRule rule);
const QuadratureRule &triangle_rule(TriangleRule rule);

/// Near/far rule pair used by the kernel quadrature.
struct QuadraturePreset {
    TetRule near = TetRule::Degree5Points15;
    TetRule far  = TetRule::Degree2Points4;

    static QuadraturePreset standard() { return {}; }
    // 24/5 points: the closest positive-weight rules to the 25/5 split.
    static QuadraturePreset paper() { return {TetRule::Degree6Points24, TetRule::Degree2Points5}; }
    static QuadraturePreset from_name(std::string_view name);
};

/// Gauss-Legendre nodes and weights on [a, b] (Golub-Welsch).
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n, double a = -1.0, double b = 1.0);

} // namespace radiant
