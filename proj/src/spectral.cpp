#include "radiant/spectral.hpp"
#include "radiant/log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace radiant {

double planck(double nu, double T) {
    if (!(T > 0.0) || !(nu > 0.0))
        return 0.0;
    const double x = nu / T;
    // nu^3 e^{-x} / (1 - e^{-x}) stays finite for large x.
    return nu * nu * nu * std::exp(-x) / -std::expm1(-x);
}

double planck_derivative(double nu, double T) {
    if (!(T > 0.0) || !(nu > 0.0))
        return 0.0;
    const double x = nu / T;
    const double e = std::exp(-x);
    const double d = -std::expm1(-x);
    return nu * nu * nu * (x / T) * e / (d * d);
}

double wavelength_to_nu(double wavelength_um) {
    return constants::c_light / (wavelength_um * 1e-6) / constants::nu0;
}

double nu_to_wavelength(double nu) { return constants::c_light / (nu * constants::nu0) * 1e6; }

double to_celsius(double T_reduced) { return T_reduced * constants::T0 - 273.15; }

FrequencyGrid FrequencyGrid::geometric(double lo, double hi, Index cells) {
    if (!(lo > 0.0) || !(hi > lo) || cells < 1)
        throw Error("FrequencyGrid::geometric: need 0 < lo < hi and at least one cell");
    FrequencyGrid g;
    g.edges.resize(cells + 1);
    const double ratio = std::log(hi / lo) / static_cast<double>(cells);
    for (Index k = 0; k <= cells; ++k)
        g.edges(k) = lo * std::exp(ratio * static_cast<double>(k));
    g.edges(cells) = hi;
    g.nodes        = 0.5 * (g.edges.head(cells) + g.edges.tail(cells));
    g.weights      = g.edges.tail(cells) - g.edges.head(cells);
    return g;
}

FrequencyGrid FrequencyGrid::from_nodes(const Eigen::VectorXd &nodes) {
    if (nodes.size() < 2)
        throw Error("FrequencyGrid::from_nodes: need at least two nodes");
    for (Index k = 0; k < nodes.size(); ++k)
        if (!(nodes(k) > 0.0) || (k > 0 && !(nodes(k) > nodes(k - 1))))
            throw Error("FrequencyGrid::from_nodes: nodes must be positive and strictly increasing");
    FrequencyGrid g;
    const Index n = nodes.size();
    g.nodes       = nodes;
    g.weights.resize(n);
    g.weights(0) = nodes(1) - nodes(0);
    for (Index k = 1; k < n; ++k)
        g.weights(k) = nodes(k) - nodes(k - 1);
    g.edges.resize(n + 1);
    g.edges(0) = nodes(0) - g.weights(0);
    for (Index k = 0; k < n; ++k)
        g.edges(k + 1) = nodes(k);
    return g;
}

double planck_integral(const FrequencyGrid &grid, double T) {
    double sum = 0.0;
    for (Index k = 0; k < grid.size(); ++k)
        sum += planck(grid.nodes(k), T) * grid.weights(k);
    return sum;
}

RawSpectrum read_spectrum(std::istream &in) {
    std::vector<std::pair<double, double>> rows;
    std::string line;
    int number       = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::vector<std::string> words;
        for (std::string w; fields >> w;)
            words.push_back(w);
        if (words.empty())
            continue;
        if (words.size() != 2)
            throw ParseError("expected two columns (wavelength_um kappa), got " + std::to_string(words.size()), number);
        double values[2];
        bool header = false;
        for (int c = 0; c < 2 && !header; ++c) {
            const auto &w        = words[static_cast<std::size_t>(c)];
            const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), values[c]);
            if (ec != std::errc() || ptr != w.data() + w.size() || !std::isfinite(values[c])) {
                // A single leading header row is tolerated.
                if (rows.empty() && c == 0 && !seen_header) {
                    header = seen_header = true;
                    continue;
                }
                throw ParseError("non-numeric value '" + w + "'", number);
            }
        }
        if (header)
            continue;
        if (!(values[0] > 0.0))
            throw ParseError("wavelength must be positive", number);
        if (values[1] < 0.0)
            throw ParseError("absorption must be non-negative", number);
        rows.emplace_back(wavelength_to_nu(values[0]), values[1]);
    }
    if (rows.empty())
        throw ParseError("spectrum table is empty", 0);
    std::stable_sort(rows.begin(), rows.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    RawSpectrum s;
    s.nu.resize(static_cast<Index>(rows.size()));
    s.kappa.resize(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        s.nu(static_cast<Index>(k))    = rows[k].first;
        s.kappa(static_cast<Index>(k)) = rows[k].second;
    }
    return s;
}

RawSpectrum load_spectrum(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open spectrum file " + path.string());
    try {
        return read_spectrum(in);
    } catch (const ParseError &e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

SpectralTable tabulate(const RawSpectrum &spectrum, const FrequencyGrid &grid) {
    SpectralTable t;
    t.nu = grid.nodes;
    t.raw.resize(grid.size());
    t.albedo = Eigen::VectorXd::Zero(grid.size());
    const auto *begin = spectrum.nu.data();
    const auto *end   = begin + spectrum.nu.size();
    for (Index k = 0; k < grid.size(); ++k) {
        const double nu = grid.nodes(k);
        const auto *hi  = std::upper_bound(begin, end, nu);
        if (hi == begin) {
            t.raw(k) = spectrum.kappa(0);
        } else if (hi == end) {
            t.raw(k) = spectrum.kappa(spectrum.kappa.size() - 1);
        } else {
            const Index j  = hi - begin;
            const double s = (nu - spectrum.nu(j - 1)) / (spectrum.nu(j) - spectrum.nu(j - 1));
            t.raw(k)       = (1.0 - s) * spectrum.kappa(j - 1) + s * spectrum.kappa(j);
        }
    }
    return t;
}

SpectralTable constant_table(const FrequencyGrid &grid, double kappa) {
    SpectralTable t;
    t.nu     = grid.nodes;
    t.raw    = Eigen::VectorXd::Constant(grid.size(), kappa);
    t.albedo = Eigen::VectorXd::Zero(grid.size());
    return exact_levels(std::move(t));
}

double quantize_value(double kappa, double resolution) { return 0.01 + std::round(resolution * kappa) / resolution; }

namespace {

void assign_levels(SpectralTable &t) {
    std::vector<double> distinct(t.quantized.data(), t.quantized.data() + t.quantized.size());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    t.levels = Eigen::Map<Eigen::VectorXd>(distinct.data(), static_cast<Index>(distinct.size()));
    t.level.resize(static_cast<std::size_t>(t.size()));
    for (Index k = 0; k < t.size(); ++k)
        t.level[static_cast<std::size_t>(k)] =
            std::lower_bound(distinct.begin(), distinct.end(), t.quantized(k)) - distinct.begin();
}

} // namespace

SpectralTable quantize(SpectralTable table, double resolution) {
    if (!(resolution > 0.0))
        throw Error("quantize: resolution must be positive");
    table.quantized  = table.raw.unaryExpr([&](double k) { return quantize_value(k, resolution); });
    table.resolution = resolution;
    assign_levels(table);
    return table;
}

SpectralTable exact_levels(SpectralTable table) {
    table.quantized  = table.raw;
    table.resolution = 0.0;
    assign_levels(table);
    return table;
}

SpectralTable band_edit(SpectralTable table, double lo_um, double hi_um, double value) {
    if (!(lo_um > 0.0) || hi_um < lo_um)
        throw Error("band_edit: need 0 < lo <= hi");
    if (hi_um == lo_um)
        return table;
    const bool was_quantized = table.is_quantized();
    Index hits               = 0;
    for (Index k = 0; k < table.size(); ++k) {
        const double lambda = nu_to_wavelength(table.nu(k));
        if (lambda >= lo_um && lambda <= hi_um) {
            table.raw(k) = value;
            ++hits;
        }
    }
    if (hits == 0) {
        std::ostringstream msg;
        msg << "band edit [" << lo_um << ", " << hi_um << "] um does not contain any frequency node";
        log::warn(msg.str());
    }
    if (!was_quantized)
        return table;
    return table.resolution > 0.0 ? quantize(std::move(table), table.resolution) : exact_levels(std::move(table));
}

std::vector<SpectralBin> bin_decomposition(const std::vector<SpectralTable> &terms, const FrequencyGrid &grid) {
    if (terms.empty())
        throw Error("bin_decomposition: no absorption terms");
    for (const auto &t : terms)
        if (t.size() != grid.size())
            throw Error("bin_decomposition: table size does not match the frequency grid");

    std::map<std::vector<double>, std::size_t> index;
    std::vector<SpectralBin> bins;
    const auto &albedo = terms.front().albedo;
    std::vector<double> key(terms.size());
    for (Index k = 0; k < grid.size(); ++k) {
        for (std::size_t j = 0; j < terms.size(); ++j)
            key[j] = terms[j].values()(k);
        auto [it, inserted] = index.try_emplace(key, bins.size());
        if (inserted) {
            SpectralBin b;
            b.kappa = Eigen::Map<Eigen::VectorXd>(key.data(), static_cast<Index>(key.size()));
            bins.push_back(std::move(b));
        }
        auto &bin = bins[it->second];
        bin.nodes.push_back(k);
        bin.measure += grid.weights(k);
        if (albedo.size() == grid.size())
            bin.albedo += albedo(k) * grid.weights(k);
    }
    // Order bins by level tuple so runs are reproducible regardless of grid order.
    std::vector<SpectralBin> ordered;
    ordered.reserve(bins.size());
    for (const auto &[levels, b] : index) {
        ordered.push_back(std::move(bins[b]));
        auto &bin  = ordered.back();
        bin.albedo = bin.measure > 0.0 ? bin.albedo / bin.measure : 0.0;
        const auto n = static_cast<Index>(bin.nodes.size());
        bin.nu.resize(n);
        bin.weight.resize(n);
        for (Index k = 0; k < n; ++k) {
            bin.nu(k)     = grid.nodes(bin.nodes[static_cast<std::size_t>(k)]);
            bin.weight(k) = grid.weights(bin.nodes[static_cast<std::size_t>(k)]);
        }
    }
    return ordered;
}

namespace {

struct BinNodes {
    const Eigen::ArrayXd *nu, *weight;
    Eigen::ArrayXd nu_local, weight_local;
};

void gather(const SpectralBin &bin, const FrequencyGrid &grid, BinNodes &out) {
    const auto n = static_cast<Index>(bin.nodes.size());
    if (bin.nu.size() == n && bin.weight.size() == n) {
        out.nu     = &bin.nu;
        out.weight = &bin.weight;
        return;
    }
    out.nu_local.resize(n);
    out.weight_local.resize(n);
    for (Index k = 0; k < n; ++k) {
        out.nu_local(k)     = grid.nodes(bin.nodes[static_cast<std::size_t>(k)]);
        out.weight_local(k) = grid.weights(bin.nodes[static_cast<std::size_t>(k)]);
    }
    out.nu     = &out.nu_local;
    out.weight = &out.weight_local;
}

} // namespace

std::pair<double, double> bin_planck_with_derivative(const SpectralBin &bin, const FrequencyGrid &grid, double T) {
    if (!(T > 0.0))
        return {0.0, 0.0};
    BinNodes b;
    gather(bin, grid, b);
    const Eigen::ArrayXd x  = *b.nu / T;
    const Eigen::ArrayXd e  = (-x).exp();
    const Eigen::ArrayXd d  = 1.0 - e;
    const Eigen::ArrayXd B  = b.nu->cube() * e / d * *b.weight;
    const double value      = B.sum();
    const double derivative = (B * x / (T * d)).sum();
    return {value, derivative};
}

double bin_planck(const SpectralBin &bin, const FrequencyGrid &grid, double T) {
    if (!(T > 0.0))
        return 0.0;
    BinNodes b;
    gather(bin, grid, b);
    const Eigen::ArrayXd e = (-*b.nu / T).exp();
    return (b.nu->cube() * e / (1.0 - e) * *b.weight).sum();
}

double bin_planck_derivative(const SpectralBin &bin, const FrequencyGrid &grid, double T) {
    return bin_planck_with_derivative(bin, grid, T).second;
}

} // namespace radiant
