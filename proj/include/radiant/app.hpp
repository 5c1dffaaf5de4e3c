#pragma once

#include "radiant/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace radiant::app {

/// Exit codes of the command line tool.
namespace exit_code {
inline constexpr int ok       = 0;
inline constexpr int other    = 1;
inline constexpr int config   = 2;
inline constexpr int mesh     = 3;
inline constexpr int input    = 4;
inline constexpr int solver   = 5;
} // namespace exit_code

struct Context {
    std::filesystem::path output_dir = ".";
    int threads                      = 0;
};

/// Mesh, spectra and geometric caches of one configuration.
struct Problem {
    Mesh mesh;
    FrequencyGrid grid;
    std::vector<SpectralTable> tables;
    std::vector<SpectralBin> bins;
    AbsorptionField field;
    std::unique_ptr<BackgroundGrid> background;
    std::shared_ptr<const KernelGeometry> geometry;
    nlohmann::json timings = nlohmann::json::object();
};

Mesh build_mesh(const MeshSpec &spec);
std::unique_ptr<Problem> build_problem(const RunConfig &config);

/// Each command writes its artifacts into context.output_dir and returns
/// the report it also saved there.
nlohmann::json run(const RunConfig &config, const Context &context);
nlohmann::json bench(const RunConfig &config, const Context &context);
nlohmann::json stratified(const RunConfig &config, const Context &context);
nlohmann::json inspect_hmat(const RunConfig &config, const Context &context);

struct CompareRequest {
    std::vector<std::filesystem::path> profiles;
    std::optional<std::filesystem::path> reference; // else profiles[1] is the reference of profiles[0]
    std::vector<double> n;                          // refinement parameters, one per profile
    double lo = -1e300, hi = 1e300;
};
nlohmann::json compare(const CompareRequest &request, const Context &context);

int exit_code_of(const std::exception &error);

/// Full command line entry point; never throws.
int main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace radiant::app
