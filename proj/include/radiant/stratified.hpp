#pragma once

#include "radiant/spectral.hpp"

#include <cmath>
#include <vector>

namespace radiant {

/// E_n(x) = int_1^inf exp(-x t) t^-n dt for n >= 1, x >= 0. E_1(0) is +inf.
double expint(int n, double x);

/// Horizontally uniform slab (0, H) with kappa(x) = kappa0 + kappa1 x and a
/// Lambertian ground source of total power Q0 sigma T_sun^4.
struct SlabProblem {
    double height  = 1.0;
    double kappa0  = 0.5;
    double kappa1  = 0.0;
    double Q0      = 2e-5;
    double T_sun   = 1.02;
    int intervals  = 2000; // uniform in optical depth
    double c_E     = 0.5;  // kernel constant of the E1 operator

    double kappa(double x) const { return kappa0 + kappa1 * x; }
    /// Optical depth int_0^x kappa.
    double tau(double x) const { return kappa0 * x + 0.5 * kappa1 * x * x; }
    /// Inverse of tau on [0, height].
    double altitude(double tau) const;
    void validate() const;
};

struct SlabSolution {
    Eigen::VectorXd x, tau, T, J, source;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;

    /// J interpolated linearly in optical depth, T = (J / sigma)^(1/4).
    double J_at(double tau) const;
    double T_at_tau(double tau) const { return std::pow(std::max(J_at(tau), 0.0) / constants::sigma, 0.25); }
};

/// (Q0 sigma T_sun^4 / 2) E_3(tau(x)) at the solution nodes.
Eigen::VectorXd slab_source(const SlabProblem &problem, const Eigen::VectorXd &tau);

/// Matrix K with (K s)_m = c_E int s(t) E_1(|t - tau_m|) dt for s piecewise
/// linear on the nodes; integrated exactly through E_2 and E_3.
Eigen::MatrixXd slab_operator(const Eigen::VectorXd &tau, double c_E);

/// Grey fixed point J = SE + K sigma T^4 with sigma T^4 = J.
SlabSolution slab_solve(const SlabProblem &problem, double tol = 1e-13, int max_iters = 10000);

/// J = SE + K S for a given emission S on the nodes, computed by transport
/// sweeps along n_mu Gauss directions (n_mu / 2 per hemisphere) with exact
/// integrating factors on each element.
Eigen::VectorXd angular_oracle(const SlabProblem &problem, const Eigen::VectorXd &tau, const Eigen::VectorXd &emission,
                               int n_mu);

/// Non-grey slab: kappa_nu(x) = rho(x) kappa_k on bin k with rho(x) =
/// kappa0 + kappa1 x of the problem (used as the spatial factor).
struct BinnedSlabSolution {
    Eigen::VectorXd x, X, T;
    std::vector<Eigen::VectorXd> J;
    int iterations = 0;
    bool converged = false;

    double T_at(double altitude) const;
};

BinnedSlabSolution slab_solve_binned(const SlabProblem &problem, const FrequencyGrid &grid,
                                     const std::vector<SpectralBin> &bins, double tol = 1e-12, int max_iters = 10000);

} // namespace radiant
