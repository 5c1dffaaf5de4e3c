#pragma once

#include "radiant/absorption.hpp"
#include "radiant/kernels.hpp"
#include "radiant/pipeline.hpp"
#include "radiant/rtsolve.hpp"
#include "radiant/stratified.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace radiant {

inline constexpr int config_schema_version = 1;

struct BoxSpec {
    double half_width = 1.0;
    double height     = 1.0;
    int n             = 5;
    double lateral_growth = 1.0;
};

struct MeshSpec {
    std::optional<std::filesystem::path> path;
    std::optional<BoxSpec> box;
    bool reorient = false;
    std::vector<int> ground_labels{labels::ground};
};

struct BandEdit {
    double lo_um = 0.0, hi_um = 0.0;
    double kappa = 1.0;
};

struct SpectrumSpec {
    enum class Kind { Grey, Csv } kind = Kind::Grey;
    double kappa = 0.5;                          // grey level
    std::filesystem::path path;                  // csv
    double quantize = 10.0;                      // 0 keeps raw values as levels
    std::vector<BandEdit> edits;
    double albedo = 0.0;
};

struct TermSpec {
    Profile profile = Profile::constant(1.0);
    SpectrumSpec spectrum;
};

struct FrequencySpec {
    double lo = 0.01, hi = 20.0;
    Index cells = 683;
};

struct OutputSpec {
    std::string vtk     = "field.vtk";
    std::string profile = "profile.csv";
    std::string report  = "report.json";
    double column_y = 0.0, column_z = 0.0;
    int profile_points = 101;
    bool bin_fields    = false;
};

struct Scenario {
    std::string name;
    SourceSpec source;
};

struct BenchSpec {
    std::vector<int> n{5, 10, 19};
    double half_width = 1.0;
    double height     = 1.0;
    double kappa      = 0.5;
};

struct RunConfig {
    MeshSpec mesh;
    std::vector<TermSpec> terms;
    std::optional<CloudRegion> cloud;
    Eigen::Array3i grid_resolution{128, 128, 128};
    FrequencySpec frequency;
    SourceSpec source;
    HMatrixParams hmatrix;
    std::string quadrature = "standard";
    SolverConfig solver;
    OutputSpec output;
    std::vector<Scenario> scenarios; // empty: single run with `source`
    BenchSpec bench;
    int stratified_intervals = 2000;
    std::uint64_t seed       = 0;

    nlohmann::json raw; // merged document after overrides
};

/// Replaces values of existing keys from RADIANT_<UPPER_KEY_PATH> variables
/// found in `env` (NAME=value strings). Values are parsed as JSON when
/// possible, as strings otherwise. Returns the applied key paths.
std::vector<std::string> apply_env_overrides(nlohmann::json &doc, const std::vector<std::string> &env);
std::vector<std::string> process_environment();

/// Parses and validates; relative paths resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json &doc, const std::filesystem::path &base_dir = {});
RunConfig load_config(const std::filesystem::path &path, const std::vector<std::string> &env = process_environment());

/// Spectral tables of every term on the frequency grid.
std::vector<SpectralTable> build_tables(const RunConfig &config, const FrequencyGrid &grid);

} // namespace radiant
