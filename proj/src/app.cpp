#include "radiant/app.hpp"
#include "radiant/log.hpp"
#include "radiant/output.hpp"
#include "radiant/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <random>

namespace radiant::app {

using nlohmann::json;

namespace {

class Timer {
  public:
    double seconds() const { return std::chrono::duration<double>(clock::now() - m_start).count(); }

  private:
    using clock = std::chrono::steady_clock;
    clock::time_point m_start = clock::now();
};

std::vector<double> to_std(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

void save_json(const std::filesystem::path &path, const json &doc) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

json stats_json(const hmat::CompressionStats &s) {
    return {{"rows", s.rows},
            {"cols", s.cols},
            {"stored_entries", s.stored_entries},
            {"dense_equivalent", s.dense_equivalent},
            {"ratio", s.ratio},
            {"dense_leaves", s.dense_leaves},
            {"low_rank_leaves", s.low_rank_leaves},
            {"rejected_low_rank", s.rejected_low_rank},
            {"max_rank", s.max_rank}};
}

json record_json(const OperatorRecord &r) {
    return {{"kind", r.kind}, {"levels", to_std(r.levels)}, {"seconds", r.seconds}, {"stats", stats_json(r.stats)}};
}

HMatrixParams hmatrix_params(const RunConfig &config, const Context &context) {
    HMatrixParams p = config.hmatrix;
    p.threads       = context.threads;
    return p;
}

json scenario_source_json(const SourceSpec &s) {
    json j = {{"Q0", s.Q0}, {"T_sun", s.T_sun}, {"sun_direction", {s.sun_direction.x(), s.sun_direction.y(), s.sun_direction.z()}}};
    if (s.snow)
        j["snow"] = {{"beta", s.snow->beta}, {"h_snow", s.snow->h_snow}};
    return j;
}

/// Slab equivalent of a configuration: first term, affine in altitude only.
SlabProblem slab_problem(const RunConfig &config, double height) {
    if (config.terms.size() != 1)
        throw ConfigError("the stratified model needs exactly one absorption term");
    const auto &term = config.terms.front();
    if (!term.profile.is_affine() || term.profile.gradient().tail<2>().norm() != 0.0)
        throw ConfigError("the stratified model needs a profile depending on altitude only");
    if (config.cloud)
        log::warn("the stratified model ignores the cloud");
    const SourceSpec &src = config.source;
    const Vec3 ground_normal = src.normal_rotation * -Vec3::UnitX();
    double factor            = std::max(0.0, src.sun_direction.normalized().dot(ground_normal));
    if (src.snow)
        factor *= src.snow->beta + (1.0 - src.snow->beta) * (0.0 < src.snow->h_snow ? 1.0 : 0.0);
    SlabProblem p;
    p.height    = height;
    p.kappa0    = term.profile.c0();
    p.kappa1    = term.profile.gradient().x();
    p.Q0        = src.Q0 * factor;
    p.T_sun     = src.T_sun;
    p.intervals = config.stratified_intervals;
    if (term.spectrum.kind == SpectrumSpec::Kind::Grey) {
        p.kappa0 *= term.spectrum.kappa;
        p.kappa1 *= term.spectrum.kappa;
    }
    return p;
}

} // namespace

Mesh build_mesh(const MeshSpec &spec) {
    if (spec.path) {
        MeshLoadOptions options;
        options.reorient = spec.reorient;
        return load_mesh(*spec.path, options);
    }
    if (!spec.box)
        throw ConfigError("mesh needs a path or a box");
    return box_mesh(spec.box->half_width, spec.box->height, spec.box->n, spec.box->lateral_growth);
}

std::unique_ptr<Problem> build_problem(const RunConfig &config) {
    auto p = std::make_unique<Problem>();
    Timer timer;
    p->mesh                 = build_mesh(config.mesh);
    p->timings["mesh"]      = timer.seconds();
    timer                   = {};
    p->grid                 = FrequencyGrid::geometric(config.frequency.lo, config.frequency.hi, config.frequency.cells);
    p->tables               = build_tables(config, p->grid);
    p->bins                 = bin_decomposition(p->tables, p->grid);
    p->timings["spectral"]  = timer.seconds();
    timer                   = {};
    for (const auto &term : config.terms)
        p->field.profiles.push_back(term.profile);
    p->field.tables         = p->tables;
    p->field.cloud          = config.cloud;
    p->background           = std::make_unique<BackgroundGrid>(p->mesh, p->field, config.grid_resolution);
    p->timings["background_grid"] = timer.seconds();
    timer                   = {};
    KernelOptions options;
    options.preset          = QuadraturePreset::from_name(config.quadrature);
    options.ground_labels   = config.mesh.ground_labels;
    p->geometry             = std::make_shared<const KernelGeometry>(p->mesh, *p->background, options);
    p->timings["geometry"]  = timer.seconds();
    return p;
}

json run(const RunConfig &config, const Context &context) {
    Timer total;
    auto problem = build_problem(config);
    OperatorCache cache(problem->geometry, hmatrix_params(config, context));
    const TetLocator locator(problem->mesh);

    json report;
    report["command"] = "run";
    report["mesh"]    = {{"vertices", problem->mesh.num_vertices()},
                         {"tets", problem->mesh.num_tets()},
                         {"ground_vertices", problem->geometry->ground_vertices().size()}};
    json bins         = json::array();
    for (const auto &b : problem->bins)
        bins.push_back({{"kappa", to_std(b.kappa)}, {"measure", b.measure}, {"albedo", b.albedo}, {"frequencies", b.nodes.size()}});
    report["spectral"] = {{"frequencies", problem->grid.size()}, {"bins", bins}};
    report["timings"]  = problem->timings;
    report["outside_cells"] = problem->background->outside_cells();

    std::vector<Scenario> scenarios = config.scenarios;
    if (scenarios.empty())
        scenarios.push_back({"", config.source});

    bool converged = true;
    json runs      = json::array();
    for (const auto &sc : scenarios) {
        const auto dir       = sc.name.empty() ? context.output_dir : context.output_dir / sc.name;
        const Index built0   = cache.built();
        const Index reused0  = cache.reused();
        Timer phase;
        const BinSystem system = build_bin_system(cache, problem->grid, problem->bins, sc.source);
        const double t_ops     = phase.seconds();
        phase                  = {};
        const SolveResult result = solve(system, config.solver);
        const double t_solve     = phase.seconds();
        phase                    = {};

        const Eigen::VectorXd &T = result.state.T;
        std::vector<NamedField> fields{{"T", T}, {"T_celsius", T.unaryExpr([](double t) { return to_celsius(t); })}};
        if (config.output.bin_fields)
            for (std::size_t k = 0; k < result.state.J.size(); ++k)
                fields.emplace_back("J_bin" + std::to_string(k), result.state.J[k]);
        save_vtk(dir / config.output.vtk, problem->mesh, fields);
        const Profile1D profile =
            sample_column(problem->mesh, locator, T, config.output.column_y, config.output.column_z, config.output.profile_points);
        save_profile(dir / config.output.profile, profile);

        json r;
        r["name"]       = sc.name;
        r["source"]     = scenario_source_json(sc.source);
        r["converged"]  = result.converged;
        r["iterations"] = result.iterations;
        r["residuals"]  = result.state.residuals;
        r["non_decreasing"] = result.state.non_decreasing;
        r["non_increasing"] = result.state.non_increasing;
        if (result.bracketed) {
            r["bracketing"] = {{"upper_converged", result.upper_converged},
                               {"upper_iterations", result.upper.iteration},
                               {"upper_non_increasing", result.upper.non_increasing},
                               {"upper_non_decreasing", result.upper.non_decreasing},
                               {"gap", result.bracket_gap}};
        }
        r["T_min"]             = T.minCoeff();
        r["T_max"]             = T.maxCoeff();
        r["T_celsius_min"]     = to_celsius(T.minCoeff());
        r["T_celsius_max"]     = to_celsius(T.maxCoeff());
        r["operators_built"]   = cache.built() - built0;
        r["operators_reused"]  = cache.reused() - reused0;
        r["profile_points"]    = profile.x.size();
        r["timings"]           = {{"operators_and_source", t_ops}, {"solve", t_solve}, {"output", phase.seconds()}};
        r["outputs"]           = {(dir / config.output.vtk).string(), (dir / config.output.profile).string()};
        runs.push_back(r);
        converged = converged && result.converged && (!result.bracketed || result.upper_converged);
    }
    report["scenarios"] = runs;
    json records        = json::array();
    for (const auto &rec : cache.records())
        records.push_back(record_json(rec));
    report["operators"] = records;
    report["cache"]     = {{"built", cache.built()}, {"reused", cache.reused()}};
    report["converged"] = converged;
    report["timings"]["total"] = total.seconds();
    save_json(context.output_dir / config.output.report, report);
    return report;
}

json bench(const RunConfig &config, const Context &context) {
    std::vector<double> N, times;
    json rows = json::array();
    std::filesystem::create_directories(context.output_dir);
    std::ofstream csv(context.output_dir / "bench.csv");
    if (!csv)
        throw Error("cannot write bench.csv");
    csv << "n,N,build_s,solve_s,total_s,iterations\n";
    for (int n : config.bench.n) {
        RunConfig c        = config;
        c.mesh.path.reset();
        c.mesh.box         = BoxSpec{config.bench.half_width, config.bench.height, n, 1.0};
        c.terms            = {TermSpec{}};
        c.terms[0].spectrum.kappa = config.bench.kappa;
        c.cloud.reset();
        Timer build;
        auto problem = build_problem(c);
        OperatorCache cache(problem->geometry, hmatrix_params(c, context));
        const BinSystem system = build_bin_system(cache, problem->grid, problem->bins, c.source);
        const double t_build   = build.seconds();
        Timer solve_timer;
        const SolveResult result = solve(system, c.solver);
        const double t_solve     = solve_timer.seconds();
        const double Nv          = static_cast<double>(problem->mesh.num_vertices());
        N.push_back(Nv);
        times.push_back(t_build + t_solve);
        csv << n << ',' << problem->mesh.num_vertices() << ',' << t_build << ',' << t_solve << ','
            << t_build + t_solve << ',' << result.iterations << '\n';
        log::info("bench n=" + std::to_string(n) + " N=" + std::to_string(problem->mesh.num_vertices()) + " total " +
                  std::to_string(t_build + t_solve) + " s");
        rows.push_back({{"n", n},
                        {"N", problem->mesh.num_vertices()},
                        {"build_s", t_build},
                        {"solve_s", t_solve},
                        {"total_s", t_build + t_solve},
                        {"iterations", result.iterations},
                        {"converged", result.converged}});
    }
    json report;
    report["command"] = "bench";
    report["series"]  = rows;
    if (N.size() >= 2) {
        const auto nlogn = fit_n_log_n(N, times);
        const auto n2    = fit_n_squared(N, times);
        report["fit"]    = {{"n_log_n", {{"C", nlogn.coefficient}, {"residual", nlogn.residual}}},
                            {"n_squared", {{"C", n2.coefficient}, {"residual", n2.residual}}},
                            {"n_log_n_better", nlogn.residual < n2.residual}};
        bool sub_quadratic = true;
        for (std::size_t k = 1; k < N.size(); ++k)
            sub_quadratic = sub_quadratic && times[k] / times[k - 1] < std::pow(N[k] / N[k - 1], 2);
        report["sub_quadratic"] = sub_quadratic;
    }
    save_json(context.output_dir / "bench.json", report);
    return report;
}

json stratified(const RunConfig &config, const Context &context) {
    double height = 0.0;
    if (config.mesh.box) {
        height = config.mesh.box->height;
    } else {
        const auto box = build_mesh(config.mesh).bounding_box();
        height         = box.max().x() - box.min().x();
    }
    const SlabProblem slab = slab_problem(config, height);
    json report;
    report["command"] = "stratified";
    report["slab"]    = {{"height", slab.height}, {"kappa0", slab.kappa0}, {"kappa1", slab.kappa1}, {"Q0", slab.Q0},
                         {"T_sun", slab.T_sun}, {"intervals", slab.intervals}};
    std::filesystem::create_directories(context.output_dir);
    std::ofstream csv(context.output_dir / "stratified.csv");
    if (!csv)
        throw Error("cannot write stratified.csv");
    csv << std::setprecision(17) << "x,T,T_celsius,J\n";
    bool converged = false;
    if (config.terms.front().spectrum.kind == SpectrumSpec::Kind::Grey) {
        const SlabSolution s = slab_solve(slab);
        for (Index k = 0; k < s.x.size(); ++k)
            csv << s.x(k) << ',' << s.T(k) << ',' << to_celsius(s.T(k)) << ',' << s.J(k) << '\n';
        converged            = s.converged;
        report["iterations"] = s.iterations;
        report["T_ground"]   = s.T(0);
    } else {
        const auto grid   = FrequencyGrid::geometric(config.frequency.lo, config.frequency.hi, config.frequency.cells);
        const auto tables = build_tables(config, grid);
        const auto bins   = bin_decomposition(tables, grid);
        const auto s      = slab_solve_binned(slab, grid, bins);
        for (Index k = 0; k < s.x.size(); ++k) {
            double J = 0.0;
            for (const auto &Jk : s.J)
                J += Jk(k);
            csv << s.x(k) << ',' << s.T(k) << ',' << to_celsius(s.T(k)) << ',' << J << '\n';
        }
        converged            = s.converged;
        report["iterations"] = s.iterations;
        report["bins"]       = bins.size();
        report["T_ground"]   = s.T(0);
    }
    report["converged"] = converged;
    report["outputs"]   = {(context.output_dir / "stratified.csv").string()};
    save_json(context.output_dir / "stratified.json", report);
    return report;
}

json inspect_hmat(const RunConfig &config, const Context &context) {
    auto problem = build_problem(config);
    OperatorCache cache(problem->geometry, hmatrix_params(config, context));
    const auto &bin = *std::max_element(problem->bins.begin(), problem->bins.end(),
                                        [](const auto &a, const auto &b) { return a.measure < b.measure; });
    const auto G    = cache.volume(bin.kappa);
    const auto S    = cache.surface(bin.kappa);
    std::filesystem::create_directories(context.output_dir);
    {
        std::ofstream out(context.output_dir / "hmat_volume_blocks.csv");
        G->write_blocks_csv(out);
    }
    {
        std::ofstream out(context.output_dir / "hmat_surface_blocks.csv");
        S->write_blocks_csv(out);
    }
    json report;
    report["command"]   = "inspect-hmat";
    report["levels"]    = to_std(bin.kappa);
    json records        = json::array();
    for (const auto &rec : cache.records())
        records.push_back(record_json(rec));
    report["operators"] = records;

    const Index n = problem->mesh.num_vertices();
    if (n <= dense_assembly_limit) {
        std::mt19937_64 rng(config.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        auto check = [&](const auto &H, const auto &kernel) {
            Eigen::VectorXd v(kernel.cols());
            for (Index k = 0; k < v.size(); ++k)
                v(k) = u(rng);
            const Eigen::VectorXd exact = assemble_dense(kernel) * v;
            return (H->matvec(v, context.threads) - exact).norm() / exact.norm();
        };
        report["relative_error"] = {{"volume", check(G, VolumeKernel(problem->geometry, bin.kappa))},
                                    {"surface", check(S, SurfaceKernel(problem->geometry, bin.kappa))}};
    }
    save_json(context.output_dir / "hmat.json", report);
    return report;
}

json compare(const CompareRequest &request, const Context &context) {
    if (request.profiles.empty())
        throw ConfigError("compare needs at least one profile");
    json report;
    report["command"] = "compare";
    if (!request.reference) {
        if (request.profiles.size() != 2)
            throw ConfigError("compare needs two profiles or a --reference");
        const auto gap = compare_profiles(load_profile(request.profiles[0]), load_profile(request.profiles[1]),
                                          request.lo, request.hi);
        report["max_rel_gap"] = gap.max_rel;
        report["l2_rel_gap"]  = gap.l2_rel;
        report["samples"]     = gap.samples;
    } else {
        const auto reference = load_profile(*request.reference);
        json gaps            = json::array();
        std::vector<double> errors, l2_errors;
        for (const auto &path : request.profiles) {
            const auto gap = compare_profiles(load_profile(path), reference, request.lo, request.hi);
            gaps.push_back({{"profile", path.string()}, {"max_rel_gap", gap.max_rel}, {"l2_rel_gap", gap.l2_rel},
                            {"samples", gap.samples}});
            errors.push_back(gap.max_rel);
            l2_errors.push_back(gap.l2_rel);
        }
        report["gaps"] = gaps;
        if (!request.n.empty()) {
            if (request.n.size() != request.profiles.size())
                throw ConfigError("--n needs one value per profile");
            const double slope         = log_log_slope(request.n, errors);
            report["log_log_slope"]     = slope;
            report["convergence_order"] = -slope;
            const double l2_slope       = log_log_slope(request.n, l2_errors);
            report["l2_log_log_slope"]     = l2_slope;
            report["l2_convergence_order"] = -l2_slope;
        }
    }
    save_json(context.output_dir / "compare.json", report);
    return report;
}

int exit_code_of(const std::exception &error) {
    if (dynamic_cast<const ConfigError *>(&error))
        return exit_code::config;
    if (dynamic_cast<const MeshError *>(&error))
        return exit_code::mesh;
    if (dynamic_cast<const ParseError *>(&error))
        return exit_code::input;
    if (dynamic_cast<const SolverError *>(&error))
        return exit_code::solver;
    return exit_code::other;
}

namespace {

const char *kind_of(int code) {
    switch (code) {
    case exit_code::config:
        return "config";
    case exit_code::mesh:
        return "mesh";
    case exit_code::input:
        return "input";
    case exit_code::solver:
        return "solver";
    default:
        return "internal";
    }
}

} // namespace

int main(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App cli{"Radiative transfer in a 3D atmosphere with compressed integral operators", "radiant"};
    cli.fallthrough();
    cli.require_subcommand(1);
    std::string config_path, output_dir = ".";
    int threads  = 0;
    bool verbose = false;
    cli.add_option("--config", config_path, "JSON configuration file");
    cli.add_option("--threads", threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
    cli.add_option("--output-dir", output_dir, "directory for all artifacts");
    cli.add_flag("--verbose", verbose, "log progress");

    auto *run_cmd     = cli.add_subcommand("run", "solve every scenario and write fields, profiles and a report");
    auto *bench_cmd   = cli.add_subcommand("bench", "time a series of box meshes");
    auto *strat_cmd   = cli.add_subcommand("stratified", "solve the horizontally uniform slab model");
    auto *inspect_cmd = cli.add_subcommand("inspect-hmat", "dump the H-matrix block structure");
    auto *compare_cmd = cli.add_subcommand("compare", "gap metrics between altitude profiles");
    CompareRequest request;
    std::vector<std::string> profiles;
    std::string reference;
    compare_cmd->add_option("profiles", profiles, "profile CSV files")->required();
    compare_cmd->add_option("--reference", reference, "reference profile CSV");
    compare_cmd->add_option("--n", request.n, "refinement parameter of each profile");
    compare_cmd->add_option("--min-x", request.lo, "lower altitude bound");
    compare_cmd->add_option("--max-x", request.hi, "upper altitude bound");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = cli.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::config;
    }

    log::set_verbose(verbose);
    auto previous = log::set_sink([&err](std::string_view level, std::string_view message) {
        if (level == "info" && !log::verbose())
            return;
        err << "[" << level << "] " << message << '\n';
    });
    set_threads(threads);
    int code = exit_code::ok;
    try {
        Context context{output_dir, threads};
        json report;
        if (compare_cmd->parsed()) {
            for (const auto &p : profiles)
                request.profiles.emplace_back(p);
            if (!reference.empty())
                request.reference = reference;
            report = compare(request, context);
        } else {
            if (config_path.empty())
                throw ConfigError("--config is required for this command");
            const RunConfig config = load_config(config_path);
            if (run_cmd->parsed()) {
                report = run(config, context);
                if (!report.value("converged", false))
                    code = exit_code::solver;
            } else if (bench_cmd->parsed()) {
                report = bench(config, context);
            } else if (strat_cmd->parsed()) {
                report = stratified(config, context);
                if (!report.value("converged", false))
                    code = exit_code::solver;
            } else if (inspect_cmd->parsed()) {
                report = inspect_hmat(config, context);
            }
        }
        out << report.dump(2) << '\n';
        if (code == exit_code::solver)
            err << json{{"error", {{"kind", "solver"}, {"message", "iteration did not converge"}, {"exit_code", code}}}}.dump()
                << '\n';
    } catch (const std::exception &e) {
        code = exit_code_of(e);
        err << json{{"error", {{"kind", kind_of(code)}, {"message", e.what()}, {"exit_code", code}}}}.dump() << '\n';
    }
    log::set_sink(std::move(previous));
    return code;
}

} // namespace radiant::app
