#include "radiant/output.hpp"
#include "radiant/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace radiant {

namespace {

std::ofstream open_output(const std::filesystem::path &path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

ScalingFit fit(const std::vector<double> &N, const std::vector<double> &t, double (*f)(double)) {
    if (N.size() != t.size() || N.empty())
        throw Error("scaling fit needs matching non-empty series");
    double ff = 0.0, ft = 0.0, tt = 0.0;
    for (std::size_t k = 0; k < N.size(); ++k) {
        const double v = f(N[k]);
        ff += v * v;
        ft += v * t[k];
        tt += t[k] * t[k];
    }
    ScalingFit r;
    r.coefficient = ft / ff;
    double res    = 0.0;
    for (std::size_t k = 0; k < N.size(); ++k)
        res += std::pow(t[k] - r.coefficient * f(N[k]), 2);
    r.residual = tt > 0.0 ? std::sqrt(res / tt) : 0.0;
    return r;
}

} // namespace

void write_vtk(std::ostream &out, const Mesh &mesh, const std::vector<NamedField> &fields) {
    out << std::setprecision(17);
    out << "# vtk DataFile Version 3.0\nradiant field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_vertices() << " double\n";
    for (Index v = 0; v < mesh.num_vertices(); ++v)
        out << mesh.vertices(0, v) << ' ' << mesh.vertices(1, v) << ' ' << mesh.vertices(2, v) << '\n';
    out << "CELLS " << mesh.num_tets() << ' ' << 5 * mesh.num_tets() << '\n';
    for (const auto &t : mesh.tets)
        out << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
    out << "CELL_TYPES " << mesh.num_tets() << '\n';
    for (Index t = 0; t < mesh.num_tets(); ++t)
        out << "10\n";
    if (fields.empty())
        return;
    out << "POINT_DATA " << mesh.num_vertices() << '\n';
    for (const auto &[name, values] : fields) {
        if (values.size() != mesh.num_vertices())
            throw Error("field " + name + " does not match the vertex count");
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (Index v = 0; v < values.size(); ++v)
            out << values(v) << '\n';
    }
}

void save_vtk(const std::filesystem::path &path, const Mesh &mesh, const std::vector<NamedField> &fields) {
    auto out = open_output(path);
    write_vtk(out, mesh, fields);
}

Profile1D sample_column(const Mesh &mesh, const TetLocator &locator, const Eigen::VectorXd &field, double y, double z,
                        int points) {
    if (points < 2)
        throw Error("profile needs at least two points");
    if (field.size() != mesh.num_vertices())
        throw Error("profile field does not match the vertex count");
    const auto box = mesh.bounding_box();
    std::vector<double> xs, Ts;
    for (int k = 0; k < points; ++k) {
        const double x = box.min().x() + (box.max().x() - box.min().x()) * k / (points - 1);
        const auto hit = locator.locate(Vec3(x, y, z), 1e-9);
        if (!hit)
            continue;
        const auto &t = mesh.tets[static_cast<std::size_t>(hit->tet)];
        double value  = 0.0;
        for (int c = 0; c < 4; ++c)
            value += hit->barycentric(c) * field(t[static_cast<std::size_t>(c)]);
        xs.push_back(x);
        Ts.push_back(value);
    }
    Profile1D p;
    p.x = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Index>(xs.size()));
    p.T = Eigen::Map<const Eigen::VectorXd>(Ts.data(), static_cast<Index>(Ts.size()));
    return p;
}

void write_profile(std::ostream &out, const Profile1D &profile) {
    out << std::setprecision(17) << "x,T,T_celsius\n";
    for (Index k = 0; k < profile.x.size(); ++k)
        out << profile.x(k) << ',' << profile.T(k) << ',' << to_celsius(profile.T(k)) << '\n';
}

void save_profile(const std::filesystem::path &path, const Profile1D &profile) {
    auto out = open_output(path);
    write_profile(out, profile);
}

Profile1D read_profile(std::istream &in) {
    std::string line;
    int line_no = 0;
    auto split  = [](const std::string &s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        return cells;
    };
    int col_x = -1, col_T = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        const auto header = split(line);
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == "x")
                col_x = static_cast<int>(c);
            if (header[c] == "T")
                col_T = static_cast<int>(c);
        }
        break;
    }
    if (col_x < 0 || col_T < 0)
        throw ParseError("profile needs x and T columns", line_no);
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        const auto cells = split(line);
        if (static_cast<int>(cells.size()) <= std::max(col_x, col_T))
            throw ParseError("profile row has too few columns", line_no);
        try {
            rows.emplace_back(std::stod(cells[static_cast<std::size_t>(col_x)]),
                              std::stod(cells[static_cast<std::size_t>(col_T)]));
        } catch (const std::exception &) {
            throw ParseError("profile row is not numeric", line_no);
        }
    }
    if (rows.empty())
        throw ParseError("profile has no rows", line_no);
    std::sort(rows.begin(), rows.end());
    Profile1D p;
    p.x.resize(static_cast<Index>(rows.size()));
    p.T.resize(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        p.x(static_cast<Index>(k)) = rows[k].first;
        p.T(static_cast<Index>(k)) = rows[k].second;
    }
    return p;
}

Profile1D load_profile(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open profile " + path.string());
    try {
        return read_profile(in);
    } catch (const ParseError &e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

double interpolate(const Eigen::VectorXd &x, const Eigen::VectorXd &y, double at) {
    const Index n = x.size();
    if (n == 0)
        throw Error("interpolation on an empty table");
    if (at <= x(0))
        return y(0);
    if (at >= x(n - 1))
        return y(n - 1);
    const Index k  = std::upper_bound(x.data(), x.data() + n, at) - x.data();
    const double s = (at - x(k - 1)) / (x(k) - x(k - 1));
    return (1.0 - s) * y(k - 1) + s * y(k);
}

ProfileGap compare_profiles(const Profile1D &a, const Profile1D &reference, double lo, double hi) {
    if (a.x.size() == 0 || reference.x.size() == 0)
        throw Error("cannot compare empty profiles");
    const double from = std::max({a.x.minCoeff(), reference.x.minCoeff(), lo});
    const double to   = std::min({a.x.maxCoeff(), reference.x.maxCoeff(), hi});
    if (from > to)
        throw Error("profiles have disjoint altitude ranges");
    ProfileGap gap;
    double diff2 = 0.0, ref2 = 0.0;
    for (Index k = 0; k < a.x.size(); ++k) {
        if (a.x(k) < from || a.x(k) > to)
            continue;
        const double r = interpolate(reference.x, reference.T, a.x(k));
        const double d = a.T(k) - r;
        gap.max_rel    = std::max(gap.max_rel, std::abs(d) / std::abs(r));
        diff2 += d * d;
        ref2 += r * r;
        ++gap.samples;
    }
    if (gap.samples == 0)
        throw Error("profiles share no sample inside the common altitude range");
    gap.l2_rel = ref2 > 0.0 ? std::sqrt(diff2 / ref2) : std::sqrt(diff2);
    return gap;
}

double log_log_slope(const std::vector<double> &n, const std::vector<double> &error) {
    if (n.size() != error.size() || n.size() < 2)
        throw Error("slope needs at least two matching samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(n.size());
    for (std::size_t k = 0; k < n.size(); ++k) {
        if (!(n[k] > 0.0) || !(error[k] > 0.0))
            throw Error("slope needs positive samples");
        const double x = std::log(n[k]), y = std::log(error[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ScalingFit fit_n_log_n(const std::vector<double> &N, const std::vector<double> &t) {
    return fit(N, t, [](double n) { return n * std::log(n); });
}

ScalingFit fit_n_squared(const std::vector<double> &N, const std::vector<double> &t) {
    return fit(N, t, [](double n) { return n * n; });
}

} // namespace radiant
