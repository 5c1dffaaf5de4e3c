#include "radiant/config.hpp"
#include "radiant/log.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

extern char **environ;

namespace radiant {

using nlohmann::json;

namespace {

void check_keys(const json &obj, std::initializer_list<const char *> allowed, const std::string &where) {
    if (!obj.is_object())
        throw ConfigError(where + " must be an object");
    for (const auto &[key, value] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char *a) { return key == a; }))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get(const json &obj, const char *key, const T &fallback, const std::string &where) {
    if (!obj.contains(key))
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

Vec3 get_vec3(const json &obj, const char *key, const Vec3 &fallback, const std::string &where) {
    if (!obj.contains(key))
        return fallback;
    const auto v = get<std::vector<double>>(obj, key, {}, where);
    if (v.size() != 3)
        throw ConfigError(where + "." + key + " must have three components");
    return {v[0], v[1], v[2]};
}

std::filesystem::path resolve(const std::filesystem::path &p, const std::filesystem::path &base) {
    return p.is_absolute() || base.empty() ? p : base / p;
}

std::string upper_path(const std::string &prefix, const std::string &key) {
    std::string s = prefix.empty() ? key : prefix + "_" + key;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

void collect_paths(json &node, const std::string &prefix, std::vector<std::pair<std::string, json *>> &out) {
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string path = upper_path(prefix, it.key());
        if (it->is_object())
            collect_paths(*it, path, out);
        else
            out.emplace_back(path, &*it);
    }
}

Profile parse_profile(const json &p, const std::string &where) {
    if (p.is_number())
        return Profile::constant(p.get<double>());
    check_keys(p, {"type", "value", "c0", "gradient"}, where);
    const auto type = get<std::string>(p, "type", "constant", where);
    if (type == "constant")
        return Profile::constant(get<double>(p, "value", 1.0, where));
    if (type == "affine")
        return Profile::affine(get<double>(p, "c0", 1.0, where), get_vec3(p, "gradient", Vec3::Zero(), where));
    throw ConfigError(where + ".type must be constant or affine, got '" + type + "'");
}

SpectrumSpec parse_spectrum(const json &s, const std::filesystem::path &base, const std::string &where) {
    check_keys(s, {"type", "kappa", "path", "quantize", "edits", "albedo"}, where);
    SpectrumSpec spec;
    const auto type = get<std::string>(s, "type", "grey", where);
    if (type == "grey") {
        spec.kind  = SpectrumSpec::Kind::Grey;
        spec.kappa = get<double>(s, "kappa", 0.5, where);
        if (!(spec.kappa >= 0.0))
            throw ConfigError(where + ".kappa must be non-negative");
    } else if (type == "csv") {
        spec.kind = SpectrumSpec::Kind::Csv;
        if (!s.contains("path"))
            throw ConfigError(where + ".path is required for a csv spectrum");
        spec.path = resolve(get<std::string>(s, "path", "", where), base);
        if (!std::filesystem::exists(spec.path))
            throw ConfigError(where + ".path: file not found: " + spec.path.string());
    } else {
        throw ConfigError(where + ".type must be grey or csv, got '" + type + "'");
    }
    spec.quantize = get<double>(s, "quantize", 10.0, where);
    if (spec.quantize < 0.0)
        throw ConfigError(where + ".quantize must be non-negative");
    spec.albedo = get<double>(s, "albedo", 0.0, where);
    if (!(spec.albedo >= 0.0 && spec.albedo < 1.0))
        throw ConfigError(where + ".albedo must lie in [0, 1)");
    if (s.contains("edits")) {
        for (std::size_t k = 0; k < s["edits"].size(); ++k) {
            const auto &e       = s["edits"][k];
            const std::string w = where + ".edits[" + std::to_string(k) + "]";
            check_keys(e, {"lambda_um", "kappa"}, w);
            const auto range = get<std::vector<double>>(e, "lambda_um", {}, w);
            if (range.size() != 2 || !(range[0] > 0.0) || range[1] < range[0])
                throw ConfigError(w + ".lambda_um must be [lo, hi] with 0 < lo <= hi");
            spec.edits.push_back({range[0], range[1], get<double>(e, "kappa", 1.0, w)});
        }
    }
    return spec;
}

SourceSpec parse_source(const json &s, const std::string &where) {
    check_keys(s, {"Q0", "T_sun", "sun_direction", "normal_rotation_deg", "snow"}, where);
    SourceSpec src;
    src.Q0            = get<double>(s, "Q0", src.Q0, where);
    src.T_sun         = get<double>(s, "T_sun", src.T_sun, where);
    src.sun_direction = get_vec3(s, "sun_direction", src.sun_direction, where);
    if (s.contains("normal_rotation_deg")) {
        const auto &r = s["normal_rotation_deg"];
        check_keys(r, {"xy", "xz"}, where + ".normal_rotation_deg");
        src.normal_rotation = sun_rotation(get<double>(r, "xy", 0.0, where), get<double>(r, "xz", 0.0, where));
    }
    if (s.contains("snow") && !s["snow"].is_null()) {
        const auto &sn = s["snow"];
        check_keys(sn, {"beta", "h_snow", "enabled"}, where + ".snow");
        if (get<bool>(sn, "enabled", true, where + ".snow"))
            src.snow = SnowSpec{get<double>(sn, "beta", 0.3, where + ".snow"),
                                get<double>(sn, "h_snow", 0.25, where + ".snow")};
    }
    try {
        src.validate();
    } catch (const ConfigError &e) {
        throw ConfigError(where + ": " + e.what());
    }
    return src;
}

} // namespace

std::vector<std::string> apply_env_overrides(json &doc, const std::vector<std::string> &env) {
    std::vector<std::pair<std::string, json *>> paths;
    collect_paths(doc, "", paths);
    std::vector<std::string> applied;
    for (const auto &entry : env) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos || entry.rfind("RADIANT_", 0) != 0)
            continue;
        const std::string key   = entry.substr(8, eq - 8);
        const std::string value = entry.substr(eq + 1);
        for (auto &[path, node] : paths) {
            if (path != key)
                continue;
            json parsed = json::parse(value, nullptr, false);
            *node       = parsed.is_discarded() ? json(value) : parsed;
            applied.push_back(path);
        }
    }
    return applied;
}

std::vector<std::string> process_environment() {
    std::vector<std::string> env;
    for (char **e = environ; e && *e; ++e)
        if (std::string_view(*e).rfind("RADIANT_", 0) == 0)
            env.emplace_back(*e);
    return env;
}

RunConfig parse_config(const json &doc, const std::filesystem::path &base) {
    check_keys(doc, {"schema_version", "mesh", "absorption", "source", "hmatrix", "solver", "output", "scenarios",
                     "bench", "stratified", "seed", "description"},
               "config");
    if (!doc.contains("schema_version"))
        throw ConfigError("config.schema_version is required");
    if (get<int>(doc, "schema_version", 0, "config") != config_schema_version)
        throw ConfigError("unsupported schema_version (expected " + std::to_string(config_schema_version) + ")");

    RunConfig cfg;
    cfg.raw  = doc;
    cfg.seed = get<std::uint64_t>(doc, "seed", 0, "config");

    // Mesh.
    const json mesh = doc.value("mesh", json::object());
    check_keys(mesh, {"path", "box", "reorient", "ground_labels"}, "mesh");
    if (mesh.contains("path") == mesh.contains("box"))
        throw ConfigError("mesh needs exactly one of path or box");
    if (mesh.contains("path")) {
        cfg.mesh.path = resolve(get<std::string>(mesh, "path", "", "mesh"), base);
        if (!std::filesystem::exists(*cfg.mesh.path))
            throw ConfigError("mesh.path: file not found: " + cfg.mesh.path->string());
    } else {
        const auto &b = mesh["box"];
        check_keys(b, {"half_width", "height", "n", "lateral_growth"}, "mesh.box");
        BoxSpec box;
        box.half_width     = get<double>(b, "half_width", box.half_width, "mesh.box");
        box.height         = get<double>(b, "height", box.height, "mesh.box");
        box.n              = get<int>(b, "n", box.n, "mesh.box");
        box.lateral_growth = get<double>(b, "lateral_growth", box.lateral_growth, "mesh.box");
        if (!(box.half_width > 0.0) || !(box.height > 0.0) || box.n < 1 || !(box.lateral_growth >= 1.0))
            throw ConfigError("mesh.box needs half_width > 0, height > 0, n >= 1, lateral_growth >= 1");
        cfg.mesh.box = box;
    }
    cfg.mesh.reorient      = get<bool>(mesh, "reorient", false, "mesh");
    cfg.mesh.ground_labels = get<std::vector<int>>(mesh, "ground_labels", cfg.mesh.ground_labels, "mesh");
    if (cfg.mesh.ground_labels.empty())
        throw ConfigError("mesh.ground_labels must not be empty");

    // Absorption.
    const json abs = doc.value("absorption", json::object());
    check_keys(abs, {"terms", "cloud", "grid_resolution", "frequency_grid"}, "absorption");
    if (!abs.contains("terms") || !abs["terms"].is_array() || abs["terms"].empty())
        throw ConfigError("absorption.terms must be a non-empty array");
    for (std::size_t k = 0; k < abs["terms"].size(); ++k) {
        const auto &t       = abs["terms"][k];
        const std::string w = "absorption.terms[" + std::to_string(k) + "]";
        check_keys(t, {"profile", "spectrum"}, w);
        TermSpec term;
        if (t.contains("profile"))
            term.profile = parse_profile(t["profile"], w + ".profile");
        term.spectrum = parse_spectrum(t.value("spectrum", json::object()), base, w + ".spectrum");
        cfg.terms.push_back(std::move(term));
    }
    if (abs.contains("cloud") && !abs["cloud"].is_null()) {
        const auto &c = abs["cloud"];
        check_keys(c, {"center_yz", "radius", "altitude", "multiplier"}, "absorption.cloud");
        CloudRegion cloud;
        const auto yz  = get<std::vector<double>>(c, "center_yz", {0.0, 0.0}, "absorption.cloud");
        const auto alt = get<std::vector<double>>(c, "altitude", {0.2, 0.8}, "absorption.cloud");
        if (yz.size() != 2 || alt.size() != 2)
            throw ConfigError("absorption.cloud.center_yz and altitude need two values");
        cloud.y0          = yz[0];
        cloud.z0          = yz[1];
        cloud.altitude_lo = alt[0];
        cloud.altitude_hi = alt[1];
        cloud.radius      = get<double>(c, "radius", std::sqrt(0.5), "absorption.cloud");
        cloud.multiplier  = get<double>(c, "multiplier", 1.5, "absorption.cloud");
        cloud.validate();
        cfg.cloud = cloud;
    }
    if (abs.contains("grid_resolution")) {
        const auto &r = abs["grid_resolution"];
        if (r.is_number_integer()) {
            cfg.grid_resolution.setConstant(r.get<int>());
        } else {
            const auto v = get<std::vector<int>>(abs, "grid_resolution", {}, "absorption");
            if (v.size() != 3)
                throw ConfigError("absorption.grid_resolution must be an integer or three integers");
            cfg.grid_resolution = Eigen::Array3i(v[0], v[1], v[2]);
        }
        if ((cfg.grid_resolution < 2).any())
            throw ConfigError("absorption.grid_resolution must be at least 2 per axis");
    }
    if (abs.contains("frequency_grid")) {
        const auto &f = abs["frequency_grid"];
        check_keys(f, {"lo", "hi", "cells"}, "absorption.frequency_grid");
        cfg.frequency.lo    = get<double>(f, "lo", cfg.frequency.lo, "absorption.frequency_grid");
        cfg.frequency.hi    = get<double>(f, "hi", cfg.frequency.hi, "absorption.frequency_grid");
        cfg.frequency.cells = get<Index>(f, "cells", cfg.frequency.cells, "absorption.frequency_grid");
        if (!(cfg.frequency.lo > 0.0) || !(cfg.frequency.hi > cfg.frequency.lo) || cfg.frequency.cells < 1)
            throw ConfigError("absorption.frequency_grid needs 0 < lo < hi and cells >= 1");
    }

    // Source and scenarios.
    const json source = doc.value("source", json::object());
    cfg.source        = parse_source(source, "source");
    if (doc.contains("scenarios")) {
        if (!doc["scenarios"].is_array())
            throw ConfigError("scenarios must be an array");
        std::set<std::string> names;
        for (std::size_t k = 0; k < doc["scenarios"].size(); ++k) {
            const auto &s       = doc["scenarios"][k];
            const std::string w = "scenarios[" + std::to_string(k) + "]";
            check_keys(s, {"name", "source"}, w);
            Scenario sc;
            sc.name = get<std::string>(s, "name", "", w);
            if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos || !names.insert(sc.name).second)
                throw ConfigError(w + ".name must be a unique non-empty file-name-safe string");
            json merged = source;
            merged.merge_patch(s.value("source", json::object()));
            sc.source = parse_source(merged, w + ".source");
            cfg.scenarios.push_back(std::move(sc));
        }
    }

    // H-matrix.
    const json hm = doc.value("hmatrix", json::object());
    check_keys(hm, {"eps", "eta", "leaf_max", "quadrature"}, "hmatrix");
    cfg.hmatrix.eps      = get<double>(hm, "eps", cfg.hmatrix.eps, "hmatrix");
    cfg.hmatrix.eta      = get<double>(hm, "eta", cfg.hmatrix.eta, "hmatrix");
    cfg.hmatrix.leaf_max = get<Index>(hm, "leaf_max", cfg.hmatrix.leaf_max, "hmatrix");
    cfg.hmatrix.validate();
    cfg.quadrature = get<std::string>(hm, "quadrature", cfg.quadrature, "hmatrix");
    QuadraturePreset::from_name(cfg.quadrature);

    // Solver.
    const json sv = doc.value("solver", json::object());
    check_keys(sv, {"tol", "max_iters", "T_init", "bracketing", "T_upper", "T_max"}, "solver");
    cfg.solver.tol        = get<double>(sv, "tol", cfg.solver.tol, "solver");
    cfg.solver.max_iters  = get<int>(sv, "max_iters", cfg.solver.max_iters, "solver");
    cfg.solver.T_init     = get<double>(sv, "T_init", cfg.solver.T_init, "solver");
    cfg.solver.bracketing = get<bool>(sv, "bracketing", cfg.solver.bracketing, "solver");
    cfg.solver.T_upper    = get<double>(sv, "T_upper", cfg.solver.T_upper, "solver");
    cfg.solver.T_max      = get<double>(sv, "T_max", cfg.solver.T_max, "solver");
    if (!(cfg.solver.tol > 0.0) || cfg.solver.max_iters < 1)
        throw ConfigError("solver needs tol > 0 and max_iters >= 1");
    if (!(cfg.solver.T_max > 0.0) || cfg.solver.T_init < 0.0 || cfg.solver.T_init > cfg.solver.T_max ||
        cfg.solver.T_upper < 0.0 || cfg.solver.T_upper > cfg.solver.T_max)
        throw ConfigError("solver temperatures must satisfy 0 <= T_init, T_upper <= T_max");

    // Output.
    const json out = doc.value("output", json::object());
    check_keys(out, {"vtk", "profile", "report", "column", "profile_points", "bin_fields"}, "output");
    cfg.output.vtk     = get<std::string>(out, "vtk", cfg.output.vtk, "output");
    cfg.output.profile = get<std::string>(out, "profile", cfg.output.profile, "output");
    cfg.output.report  = get<std::string>(out, "report", cfg.output.report, "output");
    if (out.contains("column")) {
        const auto c = get<std::vector<double>>(out, "column", {}, "output");
        if (c.size() != 2)
            throw ConfigError("output.column must be [y, z]");
        cfg.output.column_y = c[0];
        cfg.output.column_z = c[1];
    }
    cfg.output.profile_points = get<int>(out, "profile_points", cfg.output.profile_points, "output");
    cfg.output.bin_fields     = get<bool>(out, "bin_fields", cfg.output.bin_fields, "output");
    if (cfg.output.profile_points < 2)
        throw ConfigError("output.profile_points must be at least 2");

    // Bench and stratified.
    const json bench = doc.value("bench", json::object());
    check_keys(bench, {"n", "half_width", "height", "kappa"}, "bench");
    cfg.bench.n          = get<std::vector<int>>(bench, "n", cfg.bench.n, "bench");
    cfg.bench.half_width = get<double>(bench, "half_width", cfg.bench.half_width, "bench");
    cfg.bench.height     = get<double>(bench, "height", cfg.bench.height, "bench");
    cfg.bench.kappa      = get<double>(bench, "kappa", cfg.bench.kappa, "bench");
    if (cfg.bench.n.empty() || std::any_of(cfg.bench.n.begin(), cfg.bench.n.end(), [](int n) { return n < 1; }))
        throw ConfigError("bench.n must list positive subdivisions");
    const json strat = doc.value("stratified", json::object());
    check_keys(strat, {"intervals"}, "stratified");
    cfg.stratified_intervals = get<int>(strat, "intervals", cfg.stratified_intervals, "stratified");
    if (cfg.stratified_intervals < 2)
        throw ConfigError("stratified.intervals must be at least 2");
    return cfg;
}

RunConfig load_config(const std::filesystem::path &path, const std::vector<std::string> &env) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    json doc = json::parse(in, nullptr, false, true);
    if (doc.is_discarded())
        throw ConfigError("config file " + path.string() + " is not valid JSON");
    for (const auto &key : apply_env_overrides(doc, env))
        log::info("config override from environment: " + key);
    return parse_config(doc, path.parent_path());
}

std::vector<SpectralTable> build_tables(const RunConfig &config, const FrequencyGrid &grid) {
    std::vector<SpectralTable> tables;
    for (const auto &term : config.terms) {
        const auto &s = term.spectrum;
        SpectralTable t;
        if (s.kind == SpectrumSpec::Kind::Grey) {
            t = constant_table(grid, s.kappa);
        } else {
            t = tabulate(load_spectrum(s.path), grid);
            t = s.quantize > 0.0 ? quantize(std::move(t), s.quantize) : exact_levels(std::move(t));
        }
        for (const auto &e : s.edits)
            t = band_edit(std::move(t), e.lo_um, e.hi_um, e.kappa);
        t.albedo.setConstant(s.albedo);
        tables.push_back(std::move(t));
    }
    return tables;
}

} // namespace radiant
