#include "radiant/rtsolve.hpp"
#include "radiant/log.hpp"
#include "radiant/parallel.hpp"

#include <cmath>
#include <sstream>

namespace radiant {

void BinSystem::validate() const {
    const std::size_t nb = bins.size();
    if (nb == 0)
        throw SolverError("no frequency bins");
    if (volume.size() != nb || source.size() != nb || kappa.size() != nb)
        throw SolverError("bin system is missing an operator, source or absorption vector for some bin");
    const Index n = num_vertices();
    for (std::size_t k = 0; k < nb; ++k) {
        if (!volume[k])
            throw SolverError("missing volume operator for bin " + std::to_string(k));
        if (source[k].size() != n || kappa[k].size() != n)
            throw SolverError("bin " + std::to_string(k) + " vectors do not match the vertex count");
        if (bins[k].albedo < 0.0 || bins[k].albedo >= 1.0)
            throw SolverError("bin albedo must lie in [0, 1)");
    }
}

double newton_T(const std::vector<SpectralBin> &bins, const FrequencyGrid &grid, const Eigen::VectorXd &weights,
                double rhs, double T_max, double guess) {
    if (!std::isfinite(rhs))
        throw SolverError("temperature equation has a non-finite right-hand side");
    if (rhs <= 0.0)
        return 0.0;
    auto residual = [&](double T, double *slope) {
        double f = -rhs, df = 0.0;
        for (std::size_t k = 0; k < bins.size(); ++k) {
            const double c = weights(static_cast<Index>(k));
            if (c == 0.0)
                continue;
            if (slope) {
                const auto [b, db] = bin_planck_with_derivative(bins[k], grid, T);
                f += c * b;
                df += c * db;
            } else {
                f += c * bin_planck(bins[k], grid, T);
            }
        }
        if (slope)
            *slope = df;
        return f;
    };

    double lo = 0.0, hi = T_max;
    double T = guess;
    if (!(T > 0.0 && T < T_max)) {
        // Grey estimate from the Stefan-Boltzmann law.
        double c_total = 0.0;
        for (std::size_t k = 0; k < bins.size(); ++k)
            c_total += weights(static_cast<Index>(k)) * bins[k].measure;
        const double measure = grid.total_measure();
        T = c_total > 0.0 ? std::pow(rhs * measure / (c_total * constants::sigma), 0.25) : 0.5 * T_max;
        T = std::clamp(T, 1e-6 * T_max, 0.999 * T_max);
    }
    for (int it = 0; it < 200; ++it) {
        double slope = 0.0;
        const double f = residual(T, &slope);
        if (f == 0.0)
            return T;
        if (f > 0.0)
            hi = T;
        else
            lo = T;
        double next = slope > 0.0 ? T - f / slope : 0.5 * (lo + hi);
        const bool newton_step = next > lo && next < hi;
        if (!newton_step)
            next = 0.5 * (lo + hi);
        // The error after a Newton step is quadratic in the step.
        if ((newton_step && std::abs(next - T) <= 1e-8 * next) || hi - lo <= 1e-15 * hi)
            return next;
        T = next;
    }
    return T;
}

SolverState init(const BinSystem &system, const SolverConfig &config) {
    system.validate();
    if (!(config.tol > 0.0))
        throw SolverError("solver tolerance must be positive");
    if (config.T_init < 0.0 || config.T_init > config.T_max)
        throw SolverError("initial temperature must lie in [0, T_max]");
    SolverState state;
    state.T = Eigen::VectorXd::Constant(system.num_vertices(), config.T_init);
    state.J = system.source;
    return state;
}

void iterate(const BinSystem &system, const SolverConfig &config, SolverState &state) {
    const Index n  = system.num_vertices();
    const Index nb = system.num_bins();

    std::vector<Eigen::VectorXd> next(static_cast<std::size_t>(nb));
    for (Index k = 0; k < nb; ++k) {
        const auto &bin = system.bins[static_cast<std::size_t>(k)];
        Eigen::VectorXd emission(n);
        for (Index i = 0; i < n; ++i)
            emission(i) = bin.albedo * state.J[static_cast<std::size_t>(k)](i) +
                          (1.0 - bin.albedo) * bin_planck(bin, system.grid, state.T(i));
        Eigen::VectorXd J = system.source[static_cast<std::size_t>(k)] + system.volume[static_cast<std::size_t>(k)](emission);
        // Compression error can leave tiny negative values.
        next[static_cast<std::size_t>(k)] = J.cwiseMax(0.0);
    }

    Eigen::VectorXd T(n);
    parallel_for(n, [&](std::ptrdiff_t i, int) {
        Eigen::VectorXd weights(nb);
        double rhs = 0.0;
        for (Index k = 0; k < nb; ++k) {
            const double c = system.kappa[static_cast<std::size_t>(k)](i) * (1.0 - system.bins[static_cast<std::size_t>(k)].albedo);
            weights(k)     = c;
            rhs += c * next[static_cast<std::size_t>(k)](i);
        }
        T(i) = newton_T(system.bins, system.grid, weights, rhs, config.T_max, state.T(i));
    });

    const double slack = config.monotone_slack;
    for (Index i = 0; i < n; ++i) {
        const double scale = slack * std::max(std::abs(T(i)), std::abs(state.T(i)));
        if (T(i) < state.T(i) - scale)
            state.non_decreasing = false;
        if (T(i) > state.T(i) + scale)
            state.non_increasing = false;
    }
    state.residuals.push_back((T - state.T).cwiseAbs().maxCoeff());
    state.T = std::move(T);
    state.J = std::move(next);
    ++state.iteration;
}

namespace {

bool run(const BinSystem &system, const SolverConfig &config, SolverState &state) {
    for (int it = 0; it < config.max_iters; ++it) {
        iterate(system, config, state);
        std::ostringstream msg;
        msg << "sweep " << state.iteration << ": max |dT| = " << state.residuals.back();
        log::info(msg.str());
        if (state.residuals.back() < config.tol)
            return true;
    }
    return false;
}

} // namespace

SolveResult solve(const BinSystem &system, const SolverConfig &config) {
    SolveResult result;
    result.state     = init(system, config);
    result.converged = run(system, config, result.state);
    result.iterations = result.state.iteration;
    if (!result.converged)
        log::warn("fixed point did not converge within " + std::to_string(config.max_iters) + " sweeps");
    if (config.bracketing) {
        SolverConfig upper = config;
        upper.T_init       = config.T_upper;
        result.upper       = init(system, upper);
        result.upper_converged = run(system, upper, result.upper);
        result.bracketed       = true;
        result.bracket_gap     = (result.upper.T - result.state.T).cwiseAbs().maxCoeff();
        if (!result.upper_converged)
            log::warn("upper bracketing run did not converge");
    }
    return result;
}

} // namespace radiant
