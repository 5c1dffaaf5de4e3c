#pragma once

#include "radiant/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace radiant {

using NamedField = std::pair<std::string, Eigen::VectorXd>;

/// Legacy ASCII VTK unstructured grid with one POINT_DATA scalar per field.
void write_vtk(std::ostream &out, const Mesh &mesh, const std::vector<NamedField> &fields);
void save_vtk(const std::filesystem::path &path, const Mesh &mesh, const std::vector<NamedField> &fields);

/// Altitude profile: T sampled along a vertical column.
struct Profile1D {
    Eigen::VectorXd x, T;
};

/// Samples a vertex field along the line (x, y, z) for `points` altitudes
/// spanning the mesh; points outside the mesh are dropped.
Profile1D sample_column(const Mesh &mesh, const TetLocator &locator, const Eigen::VectorXd &field, double y, double z,
                        int points);

/// CSV with columns x, T, T_celsius.
void write_profile(std::ostream &out, const Profile1D &profile);
void save_profile(const std::filesystem::path &path, const Profile1D &profile);
/// Reads the x and T columns of a profile CSV by header name.
Profile1D read_profile(std::istream &in);
Profile1D load_profile(const std::filesystem::path &path);

/// Linear interpolation with constant extension.
double interpolate(const Eigen::VectorXd &x, const Eigen::VectorXd &y, double at);

struct ProfileGap {
    double max_rel = 0.0; // max |a - b| / |b|
    double l2_rel  = 0.0; // ||a - b|| / ||b||
    Index samples  = 0;
};

/// Gaps of `a` against `reference` at the abscissae of `a` inside the common
/// altitude range, optionally restricted to [lo, hi]. Throws on disjoint ranges.
ProfileGap compare_profiles(const Profile1D &a, const Profile1D &reference, double lo = -1e300, double hi = 1e300);

/// Least-squares slope of log(error) against log(n).
double log_log_slope(const std::vector<double> &n, const std::vector<double> &error);

/// One-parameter fit t = C f(N) with its relative residual.
struct ScalingFit {
    double coefficient = 0.0;
    double residual    = 0.0; // ||t - C f|| / ||t||
};
ScalingFit fit_n_log_n(const std::vector<double> &N, const std::vector<double> &t);
ScalingFit fit_n_squared(const std::vector<double> &N, const std::vector<double> &t);

} // namespace radiant
