#include <cfm/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace cfm {

namespace {

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint32_t>(std::min(a, b));
    const auto hi = static_cast<std::uint32_t>(std::max(a, b));
    return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

std::uint64_t directed_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

std::string to_string(const EdgeTag& tag) {
    std::ostringstream os;
    if (tag.is_cut())
        os << "cut " << tag.id << (tag.part == 0 ? " +" : " -");
    else
        os << "loop E" << tag.id << " arc " << tag.part;
    return os.str();
}

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles[t];
    return 0.5 * orient(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
}

BBox Mesh::bbox() const {
    BBox b;
    for (const Vec2& p : nodes) b.add(p);
    return b;
}

// ---------------------------------------------------------------------------
// topology
// ---------------------------------------------------------------------------

std::vector<std::vector<int>> boundary_cycles(const Mesh& mesh) {
    std::unordered_map<int, int> outgoing;
    outgoing.reserve(mesh.boundary_edges.size() * 2);
    for (int e = 0; e < static_cast<int>(mesh.boundary_edges.size()); ++e) {
        const auto [it, fresh] = outgoing.emplace(mesh.boundary_edges[e].a, e);
        if (!fresh)
            throw MeshError("boundary node " + std::to_string(mesh.boundary_edges[e].a) +
                            " has two outgoing boundary edges");
    }
    std::vector<char> used(mesh.boundary_edges.size(), 0);
    std::vector<std::vector<int>> cycles;
    for (int e0 = 0; e0 < static_cast<int>(mesh.boundary_edges.size()); ++e0) {
        if (used[e0]) continue;
        std::vector<int> cycle;
        int e = e0;
        while (!used[e]) {
            used[e] = 1;
            cycle.push_back(e);
            const auto it = outgoing.find(mesh.boundary_edges[e].b);
            if (it == outgoing.end())
                throw MeshError("boundary is not closed at node " + std::to_string(mesh.boundary_edges[e].b));
            e = it->second;
        }
        if (e != e0) throw MeshError("boundary edges do not form disjoint cycles");
        cycles.push_back(std::move(cycle));
    }
    return cycles;
}

MeshStats mesh_statistics(const Mesh& mesh) {
    MeshStats s;
    s.nodes = mesh.node_count();
    s.triangles = mesh.triangle_count();
    s.boundary_edges = static_cast<int>(mesh.boundary_edges.size());
    std::unordered_map<std::uint64_t, int> edges;
    edges.reserve(mesh.triangles.size() * 2);
    s.min_angle_deg = 180.0;
    s.min_edge = std::numeric_limits<double>::infinity();
    s.max_edge = 0.0;
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3], c = t[(k + 2) % 3];
            edges.emplace(edge_key(a, b), 0);
            const double l = distance(mesh.nodes[a], mesh.nodes[b]);
            s.min_edge = std::min(s.min_edge, l);
            s.max_edge = std::max(s.max_edge, l);
            const Vec2 u = mesh.nodes[b] - mesh.nodes[a], v = mesh.nodes[c] - mesh.nodes[a];
            const double ang = std::atan2(std::fabs(cross(u, v)), dot(u, v)) * 180.0 / std::numbers::pi;
            s.min_angle_deg = std::min(s.min_angle_deg, ang);
        }
    }
    s.edges = static_cast<int>(edges.size());
    s.boundary_cycles = mesh.boundary_edges.empty() ? 0 : static_cast<int>(boundary_cycles(mesh).size());
    s.euler_characteristic = s.nodes - s.edges + s.triangles;
    return s;
}

void check_mesh(const Mesh& mesh) {
    const int n = mesh.node_count();
    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(mesh.triangles.size() * 4);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int v : tri)
            if (v < 0 || v >= n) throw MeshError("triangle " + std::to_string(t) + " has an invalid node index");
        if (!(mesh.triangle_area(t) > 0.0))
            throw MeshError("triangle " + std::to_string(t) + " is not positively oriented");
        for (int k = 0; k < 3; ++k) {
            const auto [it, fresh] = directed.emplace(directed_key(tri[k], tri[(k + 1) % 3]), t);
            if (!fresh) throw MeshError("edge used twice with the same orientation (triangle " + std::to_string(t) + ")");
        }
    }
    std::unordered_map<std::uint64_t, int> boundary;
    for (const auto& e : mesh.boundary_edges) {
        if (!directed.count(directed_key(e.a, e.b)))
            throw MeshError("boundary edge " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                            " is not a counterclockwise triangle edge");
        if (directed.count(directed_key(e.b, e.a)))
            throw MeshError("boundary edge " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                            " has triangles on both sides");
        boundary.emplace(directed_key(e.a, e.b), 0);
    }
    for (const auto& [key, t] : directed) {
        const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
        if (!directed.count(directed_key(b, a)) && !boundary.count(key))
            throw MeshError("edge " + std::to_string(a) + "-" + std::to_string(b) + " of triangle " +
                            std::to_string(t) + " is unmatched (hanging node or missing boundary tag)");
    }
    const MeshStats s = mesh_statistics(mesh);
    if (s.euler_characteristic != 2 - s.boundary_cycles)
        throw MeshError("Euler characteristic " + std::to_string(s.euler_characteristic) +
                        " does not match " + std::to_string(s.boundary_cycles) + " boundary cycles");
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

void write_mesh(std::ostream& os, const Mesh& mesh) {
    const auto old_prec = os.precision(std::numeric_limits<double>::max_digits10);
    os << "cfm-mesh 1\n";
    os << "nodes " << mesh.nodes.size() << '\n';
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        os << i << ' ' << mesh.nodes[i].x << ' ' << mesh.nodes[i].y << '\n';
    os << "triangles " << mesh.triangles.size() << '\n';
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto& t = mesh.triangles[i];
        os << i << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    os << "boundary_edges " << mesh.boundary_edges.size() << '\n';
    for (const auto& e : mesh.boundary_edges)
        os << e.a << ' ' << e.b << ' ' << (e.tag.is_cut() ? "cut" : "loop") << ' ' << e.tag.id << ' '
           << e.tag.part << '\n';
    os << "polylines " << mesh.polylines.size() << '\n';
    for (const auto& p : mesh.polylines) {
        os << p.id << ' ' << p.nodes.size();
        for (int v : p.nodes) os << ' ' << v;
        os << '\n';
    }
    os << "parents " << mesh.parent.size() << '\n';
    for (std::size_t i = 0; i < mesh.parent.size(); ++i) os << i << ' ' << mesh.parent[i] << '\n';
    os.precision(old_prec);
}

Mesh read_mesh(std::istream& is) {
    auto expect = [&](const char* word) {
        std::string w;
        if (!(is >> w) || w != word) throw MeshError(std::string("mesh file: expected '") + word + "'");
    };
    auto count = [&](const char* word) {
        expect(word);
        long long c = -1;
        if (!(is >> c) || c < 0) throw MeshError(std::string("mesh file: bad count after '") + word + "'");
        return static_cast<std::size_t>(c);
    };
    auto fail = [](const char* what) { throw MeshError(std::string("mesh file: malformed ") + what); };

    expect("cfm-mesh");
    int version = 0;
    if (!(is >> version) || version != 1) throw MeshError("mesh file: unsupported version");
    Mesh m;
    m.nodes.resize(count("nodes"));
    for (auto& p : m.nodes) {
        long long idx;
        if (!(is >> idx >> p.x >> p.y)) fail("node");
    }
    m.triangles.resize(count("triangles"));
    for (auto& t : m.triangles) {
        long long idx;
        if (!(is >> idx >> t[0] >> t[1] >> t[2])) fail("triangle");
    }
    m.boundary_edges.resize(count("boundary_edges"));
    for (auto& e : m.boundary_edges) {
        std::string kind;
        if (!(is >> e.a >> e.b >> kind >> e.tag.id >> e.tag.part)) fail("boundary edge");
        if (kind == "cut")
            e.tag.kind = BoundaryKind::cut;
        else if (kind == "loop")
            e.tag.kind = BoundaryKind::loop;
        else
            fail("boundary edge kind");
    }
    m.polylines.resize(count("polylines"));
    for (auto& p : m.polylines) {
        std::size_t k = 0;
        if (!(is >> p.id >> k)) fail("polyline");
        p.nodes.resize(k);
        for (int& v : p.nodes)
            if (!(is >> v)) fail("polyline node");
    }
    std::string word;
    if (is >> word) {
        if (word != "parents") fail("trailer");
        std::size_t k = 0;
        if (!(is >> k)) fail("parents");
        m.parent.resize(k);
        for (int& v : m.parent) {
            long long idx;
            if (!(is >> idx >> v)) fail("parent");
        }
    }
    for (const auto& t : m.triangles)
        for (int v : t)
            if (v < 0 || v >= m.node_count()) fail("triangle index");
    return m;
}

}  // namespace cfm
