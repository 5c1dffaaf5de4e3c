#include "radiant/stratified.hpp"
#include "radiant/quadrature.hpp"
#include "radiant/rtsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radiant {

double expint(int n, double x) {
    if (n < 1)
        throw std::domain_error("expint: order must be at least 1");
    if (!(x >= 0.0))
        throw std::domain_error("expint: argument must be non-negative");
    if (x == 0.0)
        return n == 1 ? std::numeric_limits<double>::infinity() : 1.0 / (n - 1);
    constexpr double euler = 0.57721566490153286061;
    constexpr double eps   = 1e-16;
    constexpr int max_iter = 1000;
    const int nm1          = n - 1;
    if (x > 1.0) {
        // Continued fraction, modified Lentz.
        double b = x + n, c = 1.0 / std::numeric_limits<double>::min(), d = 1.0 / b, h = d;
        for (int i = 1; i <= max_iter; ++i) {
            const double an = -static_cast<double>(i) * (nm1 + i);
            b += 2.0;
            d              = 1.0 / (an * d + b);
            c              = b + an / c;
            const double f = c * d;
            h *= f;
            if (std::abs(f - 1.0) < eps)
                break;
        }
        return h * std::exp(-x);
    }
    // Power series.
    double sum  = nm1 != 0 ? 1.0 / nm1 : -std::log(x) - euler;
    double fact = 1.0;
    for (int i = 1; i <= max_iter; ++i) {
        fact *= -x / i;
        double term;
        if (i != nm1) {
            term = -fact / (i - nm1);
        } else {
            double psi = -euler;
            for (int k = 1; k <= nm1; ++k)
                psi += 1.0 / k;
            term = fact * (-std::log(x) + psi);
        }
        sum += term;
        if (std::abs(term) < std::abs(sum) * eps)
            break;
    }
    return sum;
}

double SlabProblem::altitude(double t) const {
    if (kappa1 == 0.0)
        return t / kappa0;
    return 2.0 * t / (kappa0 + std::sqrt(kappa0 * kappa0 + 2.0 * kappa1 * t));
}

void SlabProblem::validate() const {
    if (!(height > 0.0))
        throw Error("slab height must be positive");
    if (!(kappa0 > 0.0) || !(kappa(height) > 0.0))
        throw Error("slab absorption must be positive on [0, H]");
    if (intervals < 2)
        throw Error("slab needs at least two intervals");
    if (!(Q0 >= 0.0) || !(T_sun >= 0.0) || !(c_E > 0.0))
        throw Error("slab source parameters must be non-negative");
}

double SlabSolution::J_at(double t) const {
    if (t <= tau(0))
        return J(0);
    const Index n = tau.size();
    if (t >= tau(n - 1))
        return J(n - 1);
    const auto *it  = std::upper_bound(tau.data(), tau.data() + n, t);
    const Index k   = it - tau.data();
    const double s  = (t - tau(k - 1)) / (tau(k) - tau(k - 1));
    return (1.0 - s) * J(k - 1) + s * J(k);
}

Eigen::VectorXd slab_source(const SlabProblem &problem, const Eigen::VectorXd &tau) {
    const double power = problem.Q0 * constants::sigma * std::pow(problem.T_sun, 4);
    return tau.unaryExpr([&](double t) { return 0.5 * power * expint(3, t); });
}

Eigen::MatrixXd slab_operator(const Eigen::VectorXd &tau, double c_E) {
    const Index n = tau.size();
    if (n < 2)
        throw Error("slab operator needs at least two nodes");
    const double step = (tau(n - 1) - tau(0)) / static_cast<double>(n - 1);
    bool uniform      = true;
    for (Index k = 1; k < n && uniform; ++k)
        uniform = std::abs(tau(k) - tau(k - 1) - step) <= 1e-10 * step;

    // E2 and E3 at node distances; a table when the grid is uniform.
    Eigen::VectorXd e2_table, e3_table;
    if (uniform) {
        e2_table.resize(n);
        e3_table.resize(n);
        for (Index k = 0; k < n; ++k) {
            e2_table(k) = expint(2, k * step);
            e3_table(k) = expint(3, k * step);
        }
    }
    auto E = [&](int order, Index a, Index b) {
        if (uniform) {
            const Index k = std::abs(a - b);
            return order == 2 ? e2_table(k) : e3_table(k);
        }
        return expint(order, std::abs(tau(a) - tau(b)));
    };

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (Index m = 0; m < n; ++m) {
        for (Index l = 0; l + 1 < n; ++l) {
            const double delta = tau(l + 1) - tau(l);
            // u = |t - tau_m| runs over [d0, d1] on the element.
            const Index near = m <= l ? l : l + 1, far = m <= l ? l + 1 : l;
            const double d0 = std::abs(tau(near) - tau(m)), d1 = std::abs(tau(far) - tau(m));
            const double I0 = E(2, near, m) - E(2, far, m);
            const double I1 = (d0 * E(2, near, m) + E(3, near, m)) - (d1 * E(2, far, m) + E(3, far, m));
            // Hat function of the far endpoint is (u - d0) / delta.
            const double w_far = (I1 - d0 * I0) / delta;
            K(m, far) += c_E * w_far;
            K(m, near) += c_E * (I0 - w_far);
        }
    }
    return K;
}

SlabSolution slab_solve(const SlabProblem &problem, double tol, int max_iters) {
    problem.validate();
    SlabSolution s;
    const Index n   = problem.intervals + 1;
    const double tH = problem.tau(problem.height);
    s.tau           = Eigen::VectorXd::LinSpaced(n, 0.0, tH);
    s.x             = s.tau.unaryExpr([&](double t) { return problem.altitude(t); });
    s.x(n - 1)      = problem.height;
    s.source        = slab_source(problem, s.tau);
    const Eigen::MatrixXd K = slab_operator(s.tau, problem.c_E);

    s.J = s.source;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd next = s.source + K * s.J;
        s.residual           = (next - s.J).cwiseAbs().maxCoeff();
        s.J                  = std::move(next);
        s.iterations         = it + 1;
        if (s.residual <= tol * std::max(s.J.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min())) {
            s.converged = true;
            break;
        }
    }
    s.T = s.J.unaryExpr([](double j) { return std::pow(std::max(j, 0.0) / constants::sigma, 0.25); });
    return s;
}

Eigen::VectorXd angular_oracle(const SlabProblem &problem, const Eigen::VectorXd &tau, const Eigen::VectorXd &emission,
                               int n_mu) {
    if (n_mu < 2 || n_mu % 2 != 0)
        throw Error("angular oracle needs an even direction count");
    if (tau.size() != emission.size())
        throw Error("angular oracle: emission does not match the nodes");
    const Index n       = tau.size();
    const double ground = problem.Q0 * constants::sigma * std::pow(problem.T_sun, 4);
    const auto [mu, w]  = gauss_legendre(n_mu / 2, 0.0, 1.0);

    // Exact transport over one element for linear emission s0 -> s1.
    auto step = [](double I, double s0, double s1, double delta, double m) {
        const double one_minus_e = -std::expm1(-delta / m);
        return I * (1.0 - one_minus_e) + s0 * one_minus_e + (s1 - s0) * (1.0 - m / delta * one_minus_e);
    };

    Eigen::VectorXd J = Eigen::VectorXd::Zero(n);
    for (Index q = 0; q < mu.size(); ++q) {
        const double m = mu(q);
        // Upward directions start from the Lambertian ground, I = C mu.
        double I = ground * m;
        J(0) += 0.5 * w(q) * I;
        for (Index l = 0; l + 1 < n; ++l) {
            I = step(I, emission(l), emission(l + 1), tau(l + 1) - tau(l), m);
            J(l + 1) += 0.5 * w(q) * I;
        }
        // Downward directions enter dark at the top.
        I = 0.0;
        J(n - 1) += 0.5 * w(q) * I;
        for (Index l = n - 1; l > 0; --l) {
            I = step(I, emission(l), emission(l - 1), tau(l) - tau(l - 1), m);
            J(l - 1) += 0.5 * w(q) * I;
        }
    }
    return J;
}

double BinnedSlabSolution::T_at(double altitude) const {
    const Index n = x.size();
    if (altitude <= x(0))
        return T(0);
    if (altitude >= x(n - 1))
        return T(n - 1);
    const auto *it = std::upper_bound(x.data(), x.data() + n, altitude);
    const Index k  = it - x.data();
    const double s = (altitude - x(k - 1)) / (x(k) - x(k - 1));
    return (1.0 - s) * T(k - 1) + s * T(k);
}

BinnedSlabSolution slab_solve_binned(const SlabProblem &problem, const FrequencyGrid &grid,
                                     const std::vector<SpectralBin> &bins, double tol, int max_iters) {
    problem.validate();
    if (bins.empty())
        throw Error("binned slab needs at least one bin");
    BinnedSlabSolution s;
    const Index n   = problem.intervals + 1;
    const Index nb  = static_cast<Index>(bins.size());
    s.X             = Eigen::VectorXd::LinSpaced(n, 0.0, problem.tau(problem.height));
    s.x             = s.X.unaryExpr([&](double t) { return problem.altitude(t); });
    s.x(n - 1)      = problem.height;

    std::vector<Eigen::MatrixXd> K;
    std::vector<Eigen::VectorXd> SE;
    Eigen::VectorXd level(nb);
    for (Index k = 0; k < nb; ++k) {
        const auto &bin = bins[static_cast<std::size_t>(k)];
        if (bin.kappa.size() != 1)
            throw Error("binned slab supports a single absorption term");
        level(k)             = bin.kappa(0);
        const Eigen::VectorXd tk = level(k) * s.X;
        K.push_back(slab_operator(tk, problem.c_E));
        const double sun = problem.Q0 * bin_planck(bin, grid, problem.T_sun);
        SE.push_back(tk.unaryExpr([&](double t) { return 0.5 * sun * expint(3, t); }));
    }

    s.J = SE;
    s.T = Eigen::VectorXd::Zero(n);
    for (int it = 0; it < max_iters; ++it) {
        // rho(x) multiplies every level, so it cancels from the temperature equation.
        Eigen::VectorXd T(n);
        for (Index m = 0; m < n; ++m) {
            double rhs = 0.0;
            for (Index k = 0; k < nb; ++k)
                rhs += level(k) * s.J[static_cast<std::size_t>(k)](m);
            T(m) = newton_T(bins, grid, level, rhs, constants::T_max, s.T(m));
        }
        const double change = (T - s.T).cwiseAbs().maxCoeff();
        s.T                 = std::move(T);
        for (Index k = 0; k < nb; ++k) {
            Eigen::VectorXd B(n);
            for (Index m = 0; m < n; ++m)
                B(m) = bin_planck(bins[static_cast<std::size_t>(k)], grid, s.T(m));
            s.J[static_cast<std::size_t>(k)] = SE[static_cast<std::size_t>(k)] + K[static_cast<std::size_t>(k)] * B;
        }
        s.iterations = it + 1;
        if (change <= tol) {
            s.converged = true;
            break;
        }
    }
    return s;
}

} // namespace radiant
