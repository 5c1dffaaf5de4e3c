#include "radiant/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <set>
#include <vector>

namespace radiant {

namespace {

using Bary4 = std::array<double, 4>;
using Bary3 = std::array<double, 3>;

template <std::size_t D>
void add_orbit(std::vector<std::array<double, D>> &points, std::vector<double> &weights,
               std::array<double, D> generator, double weight) {
    std::sort(generator.begin(), generator.end());
    std::set<std::array<double, D>> seen;
    do {
        if (seen.insert(generator).second) {
            points.push_back(generator);
            weights.push_back(weight);
        }
    } while (std::next_permutation(generator.begin(), generator.end()));
}

template <std::size_t D>
QuadratureRule make_rule(const std::vector<std::array<double, D>> &points, const std::vector<double> &weights,
                         int degree) {
    QuadratureRule rule;
    rule.degree = degree;
    rule.barycentric.resize(static_cast<Index>(points.size()), D);
    rule.weights.resize(static_cast<Index>(points.size()));
    for (std::size_t q = 0; q < points.size(); ++q) {
        for (std::size_t k = 0; k < D; ++k)
            rule.barycentric(static_cast<Index>(q), static_cast<Index>(k)) = points[q][k];
        rule.weights(static_cast<Index>(q)) = weights[q];
    }
    return rule;
}

QuadratureRule build_tet(TetRule which) {
    std::vector<Bary4> p;
    std::vector<double> w;
    switch (which) {
    case TetRule::Degree2Points4: {
        const double a = 0.58541019662496845446, b = 0.13819660112501051518;
        add_orbit<4>(p, w, {a, b, b, b}, 1.0 / 24.0);
        return make_rule(p, w, 2);
    }
    case TetRule::Degree2Points5:
        add_orbit<4>(p, w, {0.25, 0.25, 0.25, 0.25}, 1.0 / 30.0);
        add_orbit<4>(p, w, {0.625, 0.125, 0.125, 0.125}, 1.0 / 30.0);
        return make_rule(p, w, 2);
    case TetRule::Degree5Points15: {
        add_orbit<4>(p, w, {0.25, 0.25, 0.25, 0.25}, 0.019275379906146983);
        const double a1 = 0.31946357228186695;
        add_orbit<4>(p, w, {1.0 - 3.0 * a1, a1, a1, a1}, 0.011710144613306096);
        const double a2 = 0.091998413583002189;
        add_orbit<4>(p, w, {1.0 - 3.0 * a2, a2, a2, a2}, 0.011998619133290136);
        const double b = 0.056025729155396047;
        add_orbit<4>(p, w, {b, b, 0.5 - b, 0.5 - b}, 0.0087593719623557907);
        return make_rule(p, w, 5);
    }
    case TetRule::Degree6Points24: {
        const double a1 = 0.040673958534612101;
        add_orbit<4>(p, w, {1.0 - 3.0 * a1, a1, a1, a1}, 0.0016795351758868309);
        const double a2 = 0.32233789014228093;
        add_orbit<4>(p, w, {1.0 - 3.0 * a2, a2, a2, a2}, 0.0092261969239405672);
        const double a3 = 0.21460287125914743;
        add_orbit<4>(p, w, {1.0 - 3.0 * a3, a3, a3, a3}, 0.0066537917096965516);
        const double a = 0.063661001875017664, b = 0.26967233145831654;
        add_orbit<4>(p, w, {a, a, b, 1.0 - 2.0 * a - b}, 9.0 / 1120.0);
        return make_rule(p, w, 6);
    }
    }
    throw Error("unknown tetrahedron rule");
}

QuadratureRule build_triangle(TriangleRule which) {
    std::vector<Bary3> p;
    std::vector<double> w;
    switch (which) {
    case TriangleRule::Degree2Points3:
        add_orbit<3>(p, w, {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 6.0);
        return make_rule(p, w, 2);
    case TriangleRule::Degree5Points7: {
        const double s15 = std::sqrt(15.0);
        const double a = (6.0 - s15) / 21.0, b = (6.0 + s15) / 21.0;
        add_orbit<3>(p, w, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 80.0);
        add_orbit<3>(p, w, {1.0 - 2.0 * a, a, a}, (155.0 - s15) / 2400.0);
        add_orbit<3>(p, w, {1.0 - 2.0 * b, b, b}, (155.0 + s15) / 2400.0);
        return make_rule(p, w, 5);
    }
    }
    throw Error("unknown triangle rule");
}

} // namespace

const QuadratureRule &tet_rule(TetRule rule) {
    static const std::array<QuadratureRule, 4> rules = {
        build_tet(TetRule::Degree2Points4), build_tet(TetRule::Degree2Points5),
        build_tet(TetRule::Degree5Points15), build_tet(TetRule::Degree6Points24)};
    return rules[static_cast<std::size_t>(rule)];
}

const QuadratureRule &triangle_rule(TriangleRule rule) {
    static const std::array<QuadratureRule, 2> rules = {build_triangle(TriangleRule::Degree2Points3),
                                                        build_triangle(TriangleRule::Degree5Points7)};
    return rules[static_cast<std::size_t>(rule)];
}

QuadraturePreset QuadraturePreset::from_name(std::string_view name) {
    if (name == "standard" || name == "default")
        return standard();
    if (name == "paper")
        return paper();
    throw ConfigError("unknown quadrature preset '" + std::string(name) + "' (expected standard|paper)");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n, double a, double b) {
    if (n < 1)
        throw Error("gauss_legendre: need at least one node");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1)  = beta;
        jacobi(k - 1, k)  = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    Eigen::VectorXd nodes   = solver.eigenvalues();
    Eigen::VectorXd weights = 2.0 * solver.eigenvectors().row(0).transpose().array().square();

    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    return {(mid + half * nodes.array()).matrix(), half * weights};
}

} // namespace radiant
