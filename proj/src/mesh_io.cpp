#include "radiant/log.hpp"
#include "radiant/mesh.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace radiant {

namespace {

struct Token {
    std::string text;
    long line;
};

class TokenStream {
  public:
    explicit TokenStream(std::istream &in) {
        std::string line;
        long number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line.resize(hash);
            std::istringstream words(line);
            std::string word;
            while (words >> word)
                m_tokens.push_back({word, number});
        }
        m_last_line = number;
    }

    bool done() const { return m_pos >= m_tokens.size(); }
    long line() const { return done() ? m_last_line : m_tokens[m_pos].line; }

    const Token &next(const char *expected) {
        if (done())
            throw ParseError(std::string("unexpected end of file, expected ") + expected, m_last_line);
        return m_tokens[m_pos++];
    }

    template <class T> T number(const char *what) {
        const Token &tok = next(what);
        T value{};
        const char *first = tok.text.data(), *last = first + tok.text.size();
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last)
            throw ParseError("expected " + std::string(what) + ", got '" + tok.text + "'", tok.line);
        return value;
    }

    // Index from the file (1-based) converted to 0-based, range-checked.
    Index index(Index count, const char *what) {
        const long line = this->line();
        const auto raw  = number<long long>(what);
        if (raw < 1 || raw > count)
            throw ParseError(std::string(what) + " " + std::to_string(raw) + " out of range 1.." + std::to_string(count),
                             line);
        return static_cast<Index>(raw - 1);
    }

    // Rest of the physical line the next token sits on.
    void skip_line_items(long count_per_item, long items) {
        for (long k = 0; k < count_per_item * items; ++k)
            next("section data");
    }

  private:
    std::vector<Token> m_tokens;
    std::size_t m_pos = 0;
    long m_last_line  = 0;
};

long section_count(TokenStream &ts, const std::string &name) {
    const long line  = ts.line();
    const auto count = ts.number<long long>("entry count");
    if (count < 0)
        throw ParseError("negative entry count for " + name, line);
    return static_cast<long>(count);
}

// Entries per item of the MEDIT sections we read past without using.
long ignored_section_width(const std::string &name) {
    if (name == "Edges")
        return 3;
    if (name == "Corners" || name == "RequiredVertices" || name == "Ridges" || name == "RequiredEdges")
        return 1;
    if (name == "Quadrilaterals")
        return 5;
    if (name == "Hexahedra")
        return 9;
    if (name == "Normals" || name == "Tangents")
        return 3;
    if (name == "NormalAtVertices" || name == "TangentAtEdges")
        return 2;
    return -1;
}

} // namespace

Mesh read_mesh(std::istream &in, const MeshLoadOptions &options) {
    TokenStream ts(in);
    Mesh mesh;
    bool have_vertices = false, have_end = false;
    std::vector<long> tet_lines, tri_lines;

    while (!ts.done()) {
        const Token head = ts.next("keyword");
        const std::string &kw = head.text;
        if (kw == "MeshVersionFormatted") {
            ts.number<int>("format version");
        } else if (kw == "Dimension") {
            const long line = ts.line();
            if (ts.number<int>("dimension") != 3)
                throw ParseError("only 3D meshes are supported", line);
        } else if (kw == "Vertices") {
            const long n  = section_count(ts, kw);
            mesh.vertices.resize(3, n);
            mesh.vertex_labels.resize(static_cast<std::size_t>(n));
            for (long v = 0; v < n; ++v) {
                for (int c = 0; c < 3; ++c)
                    mesh.vertices(c, v) = ts.number<double>("vertex coordinate");
                mesh.vertex_labels[static_cast<std::size_t>(v)] = ts.number<int>("vertex label");
            }
            have_vertices = true;
        } else if (kw == "Tetrahedra" || kw == "Triangles") {
            if (!have_vertices)
                throw ParseError(kw + " section before Vertices", head.line);
            const bool tet = kw == "Tetrahedra";
            const long n   = section_count(ts, kw);
            for (long e = 0; e < n; ++e) {
                const long line = ts.line();
                if (tet) {
                    std::array<Index, 4> t{};
                    for (auto &v : t)
                        v = ts.index(mesh.num_vertices(), "vertex index");
                    mesh.tets.push_back(t);
                    mesh.tet_labels.push_back(ts.number<int>("tetrahedron label"));
                    tet_lines.push_back(line);
                } else {
                    std::array<Index, 3> t{};
                    for (auto &v : t)
                        v = ts.index(mesh.num_vertices(), "vertex index");
                    mesh.triangles.push_back(t);
                    mesh.triangle_labels.push_back(ts.number<int>("triangle label"));
                    tri_lines.push_back(line);
                }
            }
        } else if (kw == "End") {
            have_end = true;
            break;
        } else if (const long width = ignored_section_width(kw); width > 0) {
            ts.skip_line_items(width, section_count(ts, kw));
        } else {
            throw ParseError("unknown keyword '" + kw + "'", head.line);
        }
    }
    if (!have_end)
        throw ParseError("missing End terminator", ts.line());
    if (!have_vertices || mesh.tets.empty())
        throw ParseError("mesh has no vertices or no tetrahedra", ts.line());

    std::vector<std::size_t> inverted;
    for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
        auto &k = mesh.tets[t];
        if (signed_tet_volume(mesh.vertex(k[0]), mesh.vertex(k[1]), mesh.vertex(k[2]), mesh.vertex(k[3])) < 0.0) {
            if (options.reorient)
                std::swap(k[2], k[3]);
            else
                inverted.push_back(t);
        }
    }
    if (!inverted.empty()) {
        std::ostringstream msg;
        msg << "inverted tetrahedra (index@line):";
        for (std::size_t k = 0; k < std::min<std::size_t>(inverted.size(), 20); ++k)
            msg << ' ' << inverted[k] + 1 << '@' << tet_lines[inverted[k]];
        if (inverted.size() > 20)
            msg << " ... (" << inverted.size() << " total)";
        throw MeshError(msg.str());
    }

    const auto unused = mesh.unused_vertices();
    if (!unused.empty()) {
        std::ostringstream msg;
        msg << unused.size() << " vertices are not referenced by any tetrahedron (first: " << unused.front() + 1
            << "); they are kept";
        log::warn(msg.str());
    }
    mesh.finalize();
    return mesh;
}

Mesh load_mesh(const std::filesystem::path &path, const MeshLoadOptions &options) {
    std::ifstream in(path);
    if (!in)
        throw MeshError("cannot open mesh file " + path.string());
    try {
        return read_mesh(in, options);
    } catch (const ParseError &e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

void write_mesh(const Mesh &mesh, std::ostream &out) {
    out << "MeshVersionFormatted 2\nDimension 3\n\nVertices\n" << mesh.num_vertices() << '\n';
    out << std::setprecision(17);
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
        const int label = v < static_cast<Index>(mesh.vertex_labels.size()) ? mesh.vertex_labels[static_cast<std::size_t>(v)] : 0;
        out << mesh.vertices(0, v) << ' ' << mesh.vertices(1, v) << ' ' << mesh.vertices(2, v) << ' ' << label << '\n';
    }
    out << "\nTetrahedra\n" << mesh.num_tets() << '\n';
    for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
        for (Index v : mesh.tets[t])
            out << v + 1 << ' ';
        out << (t < mesh.tet_labels.size() ? mesh.tet_labels[t] : 0) << '\n';
    }
    out << "\nTriangles\n" << mesh.num_triangles() << '\n';
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (Index v : mesh.triangles[t])
            out << v + 1 << ' ';
        out << (t < mesh.triangle_labels.size() ? mesh.triangle_labels[t] : 0) << '\n';
    }
    out << "\nEnd\n";
}

void save_mesh(const Mesh &mesh, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out)
        throw MeshError("cannot write mesh file " + path.string());
    write_mesh(mesh, out);
}

} // namespace radiant
