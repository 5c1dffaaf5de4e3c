#pragma once

#include "radiant/common.hpp"

#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

namespace radiant {

/// Reduced units: frequencies in multiples of nu0, temperatures in multiples
/// of T0, intensities in multiples of B0.
namespace constants {
inline constexpr double sigma      = pi * pi * pi * pi / 15.0;
inline constexpr double T0         = 4789.0;    // K
inline constexpr double B0         = 1.47;      // J m^-2
inline constexpr double A_over_rho = 2.70e11;   // m s^-1
inline constexpr double nu0        = 1e14;      // s^-1
inline constexpr double c_light    = 2.99e8;    // m s^-1
inline constexpr double T_max      = 2.0;       // cap on the reduced temperature
} // namespace constants

/// B_nu(T) = nu^3 / (exp(nu/T) - 1); zero for T <= 0.
double planck(double nu, double T);
/// dB_nu/dT.
double planck_derivative(double nu, double T);

double wavelength_to_nu(double wavelength_um);
double nu_to_wavelength(double nu);
double to_celsius(double T_reduced);

/// Quadrature grid in reduced frequency. Node k carries weight
/// weights(k); the cell [edges(k), edges(k+1)] has width weights(k).
struct FrequencyGrid {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
    Eigen::VectorXd edges;

    Index size() const { return nodes.size(); }
    double total_measure() const { return weights.sum(); }

    /// Geometric cells over [lo, hi] with nodes at the cell midpoints.
    static FrequencyGrid geometric(double lo = 0.01, double hi = 20.0, Index cells = 683);
    /// Arbitrary increasing nodes with left-anchored weights nu_k - nu_{k-1};
    /// the first node gets the width of the first gap.
    static FrequencyGrid from_nodes(const Eigen::VectorXd &nodes);
};

/// sum_k B_{nu_k}(T) w_k.
double planck_integral(const FrequencyGrid &grid, double T);

/// Measured absorption spectrum, sorted by increasing reduced frequency.
struct RawSpectrum {
    Eigen::VectorXd nu;
    Eigen::VectorXd kappa;
};

/// Two columns `wavelength_um kappa`, comma or whitespace separated, `#`
/// comments. Throws ParseError on malformed rows or an empty table.
RawSpectrum load_spectrum(const std::filesystem::path &path);
RawSpectrum read_spectrum(std::istream &in);

/// Per-node absorption on a frequency grid.
struct SpectralTable {
    Eigen::VectorXd nu;
    Eigen::VectorXd raw;         // kappa tilde
    Eigen::VectorXd albedo;      // a_nu, defaults to 0
    Eigen::VectorXd quantized;   // empty until quantize()
    std::vector<Index> level;    // per-node index into levels
    Eigen::VectorXd levels;      // distinct values, increasing
    double resolution = 0.0;     // rounding used by quantize(), 0 for exact levels

    Index size() const { return nu.size(); }
    bool is_quantized() const { return quantized.size() == nu.size(); }
    /// Quantized values when available, raw otherwise.
    const Eigen::VectorXd &values() const { return is_quantized() ? quantized : raw; }
};

/// Linear interpolation of the raw spectrum onto the grid; values are held
/// constant beyond either end of the data.
SpectralTable tabulate(const RawSpectrum &spectrum, const FrequencyGrid &grid);
SpectralTable constant_table(const FrequencyGrid &grid, double kappa);

/// kappa -> 0.01 + round(resolution * kappa) / resolution.
double quantize_value(double kappa, double resolution = 10.0);
SpectralTable quantize(SpectralTable table, double resolution = 10.0);
/// Level table without rounding: each distinct raw value is its own level.
SpectralTable exact_levels(SpectralTable table);

/// Replaces raw kappa at nodes whose wavelength lies in [lo_um, hi_um] and
/// rebuilds the levels the same way they were built. Warns when no node is hit.
SpectralTable band_edit(SpectralTable table, double lo_um, double hi_um, double value);

/// Group of frequency nodes sharing one absorption level per term.
struct SpectralBin {
    Eigen::VectorXd kappa;       // one level per absorption term
    double albedo = 0.0;         // measure-weighted mean over the bin
    std::vector<Index> nodes;
    double measure = 0.0;
    // Frequencies and weights of `nodes`, cached by bin_decomposition.
    Eigen::ArrayXd nu, weight;
};

/// Bins of equal level tuples across the terms. All tables must share the
/// grid; the albedo comes from the first table.
std::vector<SpectralBin> bin_decomposition(const std::vector<SpectralTable> &terms, const FrequencyGrid &grid);

/// sum over the bin of B_nu(T) w_nu and of its T derivative.
double bin_planck(const SpectralBin &bin, const FrequencyGrid &grid, double T);
double bin_planck_derivative(const SpectralBin &bin, const FrequencyGrid &grid, double T);
/// Both sums in one pass.
std::pair<double, double> bin_planck_with_derivative(const SpectralBin &bin, const FrequencyGrid &grid, double T);

} // namespace radiant
