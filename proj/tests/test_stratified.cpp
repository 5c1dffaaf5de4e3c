#include "radiant/stratified.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include <cmath>

using namespace radiant;

namespace {

// E_n(x) from its defining integral, with t = e^u.
double expint_quadrature(int n, double x) {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double u) { return std::exp(-x * std::exp(u) + (1.0 - n) * u); };
    return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

} // namespace

TEST_CASE("exponential integrals match their defining integral") {
    for (int n : {1, 2, 3})
        for (double x : {1e-6, 1e-3, 0.1, 0.5, 0.999, 1.0, 1.001, 2.0, 5.0, 12.0, 20.0})
            CHECK(std::abs(expint(n, x) - expint_quadrature(n, x)) <= 1e-10 * expint_quadrature(n, x));
}

TEST_CASE("exponential integral recurrence and limits") {
    for (int n : {1, 2, 3, 4})
        for (double x : {1e-4, 0.3, 1.0, 3.0, 15.0}) {
            const double next = (std::exp(-x) - x * expint(n, x)) / n;
            CHECK(std::abs(expint(n + 1, x) - next) <= 1e-10 * std::abs(next));
        }
    CHECK(expint(2, 0.0) == 1.0);
    CHECK(expint(3, 0.0) == 0.5);
    CHECK(std::isinf(expint(1, 0.0)));
    CHECK_THROWS(expint(0, 1.0));
    CHECK_THROWS(expint(1, -1.0));
}

TEST_CASE("slab operator integrates piecewise linear emission exactly") {
    Eigen::VectorXd tau(5);
    tau << 0.0, 0.1, 0.35, 0.4, 1.0;
    const Eigen::MatrixXd K = slab_operator(tau, 0.5);
    Eigen::VectorXd s(5);
    s << 1.0, 2.0, 0.5, 0.7, 3.0;
    const Eigen::VectorXd Ks = K * s;
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (Index m = 0; m < tau.size(); ++m) {
        double ref = 0.0;
        for (Index l = 0; l + 1 < tau.size(); ++l) {
            auto f = [&](double t) {
                const double w = (t - tau(l)) / (tau(l + 1) - tau(l));
                return ((1 - w) * s(l) + w * s(l + 1)) * expint(1, std::abs(t - tau(m)));
            };
            ref += integrator.integrate(f, tau(l), tau(l + 1), 1e-12);
        }
        CHECK(Ks(m) == doctest::Approx(0.5 * ref).epsilon(1e-8));
    }
}

TEST_CASE("slab operator of a constant is the half-space closed form") {
    // c_E int_0^T E1(|t - tau|) dt = c_E (2 - E2(tau) - E2(T - tau)).
    const Eigen::VectorXd tau = Eigen::VectorXd::LinSpaced(41, 0.0, 2.0);
    const Eigen::VectorXd Ks  = slab_operator(tau, 0.5) * Eigen::VectorXd::Ones(41);
    for (Index m = 0; m < tau.size(); ++m)
        CHECK(Ks(m) == doctest::Approx(0.5 * (2.0 - expint(2, tau(m)) - expint(2, 2.0 - tau(m)))).epsilon(1e-12));
}

TEST_CASE("angular sweep confirms the kernel constant") {
    SlabProblem p;
    p.intervals = 400;
    const auto s = slab_solve(p);
    REQUIRE(s.converged);
    // sigma T^4 = J at the fixed point.
    const Eigen::VectorXd emission = s.T.array().pow(4) * constants::sigma;
    CHECK((emission - s.J).cwiseAbs().maxCoeff() <= 1e-10 * s.J.maxCoeff());
    const Eigen::VectorXd J = angular_oracle(p, s.tau, emission, 64);
    CHECK((J - s.J).cwiseAbs().maxCoeff() <= 1e-4 * s.J.maxCoeff());
}

TEST_CASE("angular sweep of a uniform emitter without ground source") {
    SlabProblem p;
    p.Q0                      = 0.0;
    const Eigen::VectorXd tau = Eigen::VectorXd::LinSpaced(201, 0.0, 1.0);
    const Eigen::VectorXd S   = Eigen::VectorXd::Ones(201);
    const Eigen::VectorXd J   = angular_oracle(p, tau, S, 64);
    const Eigen::VectorXd ref = slab_operator(tau, 0.5) * S;
    CHECK((J - ref).cwiseAbs().maxCoeff() < 1e-4);
    CHECK_THROWS(angular_oracle(p, tau, S, 3));
}

TEST_CASE("variable absorption maps to optical depth") {
    SlabProblem p;
    p.kappa0 = 0.5;
    p.kappa1 = -0.25;
    for (double x : {0.0, 0.3, 1.0})
        CHECK(p.altitude(p.tau(x)) == doctest::Approx(x).epsilon(1e-14));
    SlabProblem q = p;
    q.kappa1      = 0.0;
    q.kappa0      = p.tau(1.0);
    const auto sp = slab_solve(p), sq = slab_solve(q);
    // Same optical thickness: identical solutions in optical depth.
    for (double t : {0.0, 0.1, 0.3})
        CHECK(sp.T_at_tau(t) == doctest::Approx(sq.T_at_tau(t)).epsilon(1e-10));
}

TEST_CASE("slab solution converges under refinement") {
    SlabProblem coarse, fine;
    coarse.intervals = 200;
    fine.intervals   = 3200;
    const auto a = slab_solve(coarse), b = slab_solve(fine);
    CHECK(std::abs(a.T(0) - b.T(0)) / b.T(0) < 1e-4);
    CHECK(b.T(0) > b.T(b.T.size() - 1));
}

TEST_CASE("binned slab with one grey bin matches the grey slab") {
    const auto grid = FrequencyGrid::geometric();
    const auto bins = bin_decomposition({constant_table(grid, 1.0)}, grid);
    SlabProblem p;
    p.intervals = 400;
    const auto grey   = slab_solve(p);
    const auto binned = slab_solve_binned(p, grid, bins);
    REQUIRE(binned.converged);
    // The grid captures sigma T^4 to about 1e-4 at these temperatures.
    for (Index k = 0; k < grey.x.size(); k += 50)
        CHECK(binned.T(k) == doctest::Approx(grey.T(k)).epsilon(2e-4));
}

TEST_CASE("invalid slabs are rejected") {
    SlabProblem p;
    p.kappa0 = 0.5;
    p.kappa1 = -1.0; // kappa(1) < 0
    CHECK_THROWS(slab_solve(p));
    p        = {};
    p.height = 0.0;
    CHECK_THROWS(slab_solve(p));
}
