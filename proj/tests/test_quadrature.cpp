#include "radiant/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <doctest.h>

#include <cmath>

using namespace radiant;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// Dirichlet integral of a barycentric monomial over the unit simplex of
// dimension `dim`, whose measure is 1/dim!.
double simplex_moment(const std::vector<int> &powers) {
    const int dim = static_cast<int>(powers.size()) - 1;
    double num    = factorial(dim);
    int total     = 0;
    for (int p : powers) {
        num *= factorial(p);
        total += p;
    }
    return num / factorial(total + dim) / factorial(dim);
}

double rule_moment(const QuadratureRule &rule, const std::vector<int> &powers) {
    double sum = 0.0;
    for (Index q = 0; q < rule.size(); ++q) {
        double v = 1.0;
        for (std::size_t c = 0; c < powers.size(); ++c)
            v *= std::pow(rule.barycentric(q, static_cast<Index>(c)), powers[c]);
        sum += rule.weights(q) * v;
    }
    return sum;
}

void check_exactness(const QuadratureRule &rule, int vertices) {
    std::vector<int> p(static_cast<std::size_t>(vertices), 0);
    // Every monomial with total degree <= rule.degree.
    std::function<void(std::size_t, int)> walk = [&](std::size_t c, int left) {
        if (c + 1 == p.size()) {
            for (int last = 0; last <= left; ++last) {
                p[c] = last;
                CHECK(rule_moment(rule, p) == doctest::Approx(simplex_moment(p)).epsilon(1e-12));
            }
            return;
        }
        for (int k = 0; k <= left; ++k) {
            p[c] = k;
            walk(c + 1, left - k);
        }
    };
    walk(0, rule.degree);
}

} // namespace

TEST_CASE("tetrahedron rules integrate polynomials up to their degree") {
    for (auto r : {TetRule::Degree2Points4, TetRule::Degree2Points5, TetRule::Degree5Points15, TetRule::Degree6Points24}) {
        const auto &rule = tet_rule(r);
        CHECK(rule.barycentric.cols() == 4);
        CHECK((rule.weights.array() > 0.0).all());
        CHECK(rule.weights.sum() == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
        CHECK((rule.barycentric.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
        check_exactness(rule, 4);
    }
}

TEST_CASE("triangle rules integrate polynomials up to their degree") {
    for (auto r : {TriangleRule::Degree2Points3, TriangleRule::Degree5Points7}) {
        const auto &rule = triangle_rule(r);
        CHECK(rule.barycentric.cols() == 3);
        CHECK((rule.weights.array() > 0.0).all());
        CHECK(rule.weights.sum() == doctest::Approx(0.5).epsilon(1e-14));
        check_exactness(rule, 3);
    }
}

TEST_CASE("rule point counts") {
    CHECK(tet_rule(TetRule::Degree2Points4).size() == 4);
    CHECK(tet_rule(TetRule::Degree2Points5).size() == 5);
    CHECK(tet_rule(TetRule::Degree5Points15).size() == 15);
    CHECK(tet_rule(TetRule::Degree6Points24).size() == 24);
    CHECK(triangle_rule(TriangleRule::Degree5Points7).size() == 7);
}

TEST_CASE("Gauss-Legendre matches the reference abscissae") {
    const auto [x, w] = gauss_legendre(5);
    // Positive half of the 5-point rule: abscissae 0, a1, a2.
    const auto &ref_x = boost::math::quadrature::gauss<double, 5>::abscissa();
    const auto &ref_w = boost::math::quadrature::gauss<double, 5>::weights();
    for (std::size_t k = 0; k < ref_x.size(); ++k) {
        bool found = false;
        for (Index q = 0; q < x.size(); ++q)
            if (std::abs(x(q) - ref_x[k]) < 1e-13) {
                found = true;
                CHECK(w(q) == doctest::Approx(ref_w[k]).epsilon(1e-13));
            }
        CHECK(found);
    }
}

TEST_CASE("Gauss-Legendre on an interval is exact to degree 2n-1") {
    const auto [x, w] = gauss_legendre(4, 1.0, 3.0);
    double sum        = 0.0;
    for (Index q = 0; q < x.size(); ++q)
        sum += w(q) * std::pow(x(q), 7);
    CHECK(sum == doctest::Approx((std::pow(3.0, 8) - 1.0) / 8.0).epsilon(1e-13));
    CHECK_THROWS(gauss_legendre(0));
}

TEST_CASE("presets by name") {
    CHECK(QuadraturePreset::from_name("standard").near == TetRule::Degree5Points15);
    CHECK(QuadraturePreset::from_name("paper").near == TetRule::Degree6Points24);
    CHECK_THROWS_AS(QuadraturePreset::from_name("bogus"), ConfigError);
}
