#pragma once

#include "radiant/spectral.hpp"

#include <functional>
#include <vector>

namespace radiant {

/// Linear map applying one bin's volume operator G_k.
using Operator = std::function<Eigen::VectorXd(const Eigen::VectorXd &)>;

/// Everything the fixed point needs, one entry per frequency bin. Because
/// kappa and the albedo are constant on a bin, the operator is shared by all
/// its frequencies and the iteration closes on the bin sums
/// Jbar_k = sum_{nu in s_k} J_nu w_nu.
struct BinSystem {
    FrequencyGrid grid;
    std::vector<SpectralBin> bins;
    std::vector<Operator> volume;              // G_k
    std::vector<Eigen::VectorXd> source;       // SEbar_k per vertex
    std::vector<Eigen::VectorXd> kappa;        // kappa_k(x^i) per vertex

    Index num_vertices() const { return source.empty() ? 0 : source.front().size(); }
    Index num_bins() const { return static_cast<Index>(bins.size()); }
    void validate() const;
};

struct SolverConfig {
    double T_init     = 0.01;
    double tol        = 1e-11;
    int max_iters     = 100;
    double T_max      = constants::T_max;
    bool bracketing   = false;
    double T_upper    = 0.12;  // start of the upper run when bracketing
    double monotone_slack = 1e-14; // relative slack of the monotonicity flag
};

struct SolverState {
    Eigen::VectorXd T;
    std::vector<Eigen::VectorXd> J; // Jbar_k per vertex
    int iteration = 0;
    std::vector<double> residuals;  // max |T^{n+1} - T^n| per sweep
    bool non_decreasing = true;     // every sweep so far
    bool non_increasing = true;
};

SolverState init(const BinSystem &system, const SolverConfig &config);
/// One sweep: Jbar_k <- SEbar_k + G_k (a_k Jbar_k + (1 - a_k) Bbar_k(T)), then T from newton_T.
void iterate(const BinSystem &system, const SolverConfig &config, SolverState &state);

/// Solves sum_k c_k Bbar_k(T) = rhs for T in [0, T_max], with
/// c_k = kappa_k (1 - a_k) at one vertex. Newton with bisection safeguard.
double newton_T(const std::vector<SpectralBin> &bins, const FrequencyGrid &grid, const Eigen::VectorXd &weights,
                double rhs, double T_max = constants::T_max, double guess = -1.0);

struct SolveResult {
    SolverState state;
    bool converged = false;
    int iterations = 0;
    // Filled when bracketing.
    bool bracketed = false;
    SolverState upper;
    bool upper_converged = false;
    double bracket_gap   = 0.0;
};

SolveResult solve(const BinSystem &system, const SolverConfig &config);

} // namespace radiant
