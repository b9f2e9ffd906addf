#include <cfm/mesher.hpp>

#include "triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace cfm {

namespace {

constexpr double grading_slope = 0.5;

struct LoopPolygon {
    int tag{};
    std::vector<Vec2> pts;
    std::vector<int> part;  // per edge k = (pts[k], pts[k+1])
};

/// Puts q on the polygon (existing vertex or split edge); returns its index.
/// A vertex closer than `snap` or than `rel_snap` times the edge length is reused.
int insert_on_polygon(LoopPolygon& poly, Vec2 q, double snap, double reach, double rel_snap = 0.0) {
    const int n = static_cast<int>(poly.pts.size());
    int best = -1;
    double best_d = 1e300, best_t = 0.0;
    for (int k = 0; k < n; ++k) {
        double t = 0.0;
        const double d = point_segment_distance(q, poly.pts[k], poly.pts[(k + 1) % n], &t);
        if (d < best_d) {
            best_d = d;
            best = k;
            best_t = t;
        }
    }
    if (best < 0 || best_d > reach) return -1;
    const Vec2 a = poly.pts[best], b = poly.pts[(best + 1) % n];
    const double s = std::max(snap, rel_snap * distance(a, b));
    if (distance(q, a) <= s && distance(q, a) <= distance(q, b)) return best;
    if (distance(q, b) <= s) return (best + 1) % n;
    const Vec2 p = a + (b - a) * best_t;
    poly.pts.insert(poly.pts.begin() + best + 1, p);
    poly.part.insert(poly.part.begin() + best + 1, poly.part[best]);
    return best + 1;
}

int nearest_vertex(const LoopPolygon& poly, Vec2 q) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(poly.pts.size()); ++k)
        if (distance(poly.pts[k], q) < distance(poly.pts[best], q)) best = k;
    return best;
}

/// Resamples a traced polyline: drops crowded vertices, splits long spans.
std::vector<Vec2> resample(const std::vector<Vec2>& in, const SizeFunction& size) {
    std::vector<Vec2> out;
    if (in.size() < 2) return in;
    out.push_back(in.front());
    for (std::size_t k = 1; k + 1 < in.size(); ++k) {
        if (distance(in[k], out.back()) >= 0.05 * size(in[k]) &&
            distance(in[k], in.back()) >= 0.05 * size(in.back()))
            out.push_back(in[k]);
    }
    out.push_back(in.back());
    std::vector<Vec2> dense{out.front()};
    for (std::size_t k = 1; k < out.size(); ++k) {
        const Vec2 a = out[k - 1], b = out[k];
        const double target = 0.5 * std::min(size(a), size(b));
        const int pieces = std::max(1, static_cast<int>(std::ceil(distance(a, b) / target)));
        for (int j = 1; j <= pieces; ++j) dense.push_back(a + (b - a) * (static_cast<double>(j) / pieces));
    }
    return dense;
}

// ---------------------------------------------------------------------------
// extraction
// ---------------------------------------------------------------------------

Mesh extract(const detail::Triangulation& tr, const std::vector<EdgeTag>& tags,
             const std::vector<std::pair<int, int>>& cut_ends) {
    Mesh mesh;
    std::vector<int> remap(tr.pts.size(), -1);
    for (const auto& t : tr.tris)
        if (t.alive && t.inside)
            for (int v : t.v) remap[v] = 0;
    for (std::size_t v = 0; v < tr.pts.size(); ++v) {
        if (remap[v] < 0) continue;
        remap[v] = mesh.node_count();
        mesh.nodes.push_back(tr.pts[v]);
    }
    std::map<int, std::vector<std::pair<int, int>>> cut_edges;
    for (const auto& t : tr.tris) {
        if (!t.alive || !t.inside) continue;
        mesh.triangles.push_back({remap[t.v[0]], remap[t.v[1]], remap[t.v[2]]});
        for (int i = 0; i < 3; ++i) {
            if (t.c[i] == detail::no_constraint) continue;
            const int a = remap[t.v[(i + 1) % 3]], b = remap[t.v[(i + 2) % 3]];
            const EdgeTag& tag = tags[t.c[i]];
            if (tag.is_cut()) {
                if (a < b) cut_edges[tag.id].emplace_back(a, b);
            } else {
                mesh.boundary_edges.push_back({a, b, tag});
            }
        }
    }
    for (const auto& [id, start] : cut_ends) {
        auto& edges = cut_edges[id];
        std::unordered_multimap<int, int> adj;
        for (const auto& [a, b] : edges) {
            adj.emplace(a, b);
            adj.emplace(b, a);
        }
        EmbeddedPolyline pl;
        pl.id = id;
        int cur = remap[start];
        int prev = -1;
        pl.nodes.push_back(cur);
        for (std::size_t guard = 0; guard <= edges.size(); ++guard) {
            int next = -1;
            const auto range = adj.equal_range(cur);
            for (auto it = range.first; it != range.second; ++it)
                if (it->second != prev) next = it->second;
            if (next < 0) break;
            prev = cur;
            cur = next;
            pl.nodes.push_back(cur);
        }
        if (pl.nodes.size() != edges.size() + 1)
            throw MeshError("cut " + std::to_string(id) + " is not a simple chain of mesh edges");
        mesh.polylines.push_back(std::move(pl));
    }
    return mesh;
}

}  // namespace

void validate_rule(const RefinementRule& rule) {
    if (!(rule.ratio > 0.0 && rule.ratio < 1.0))
        throw std::invalid_argument("refinement ratio must lie strictly between 0 and 1");
    if (rule.levels < 0 || rule.levels > 40)
        throw std::invalid_argument("refinement levels must lie in [0, 40]");
}

SizeFunction size_function(const MeshOptions& options) {
    if (!(options.h > 0.0)) throw std::invalid_argument("mesh size h must be positive");
    for (const auto& r : options.rules) validate_rule(r);
    const double h = options.h;
    auto rules = options.rules;
    return [h, rules](Vec2 x) {
        double s = h;
        for (const auto& r : rules) {
            const double floor = h * std::pow(r.ratio, r.levels);
            s = std::min(s, std::max(floor, grading_slope * distance(x, r.center)));
        }
        return s;
    };
}

double effective_boundary_tol(const DomainSpec& spec, const MeshOptions& options) {
    if (options.boundary_tol > 0.0) return options.boundary_tol;
    return 1e-5 * spec.bbox().diameter();
}

Mesh triangulate(const DomainSpec& spec, const MeshOptions& options) {
    return triangulate(spec, options, {});
}

Mesh triangulate(const DomainSpec& spec_in, const MeshOptions& options, std::span<const CutPolyline> cuts) {
    const DomainSpec spec = validate_domain(spec_in);
    const SizeFunction size = size_function(options);
    const double tol = effective_boundary_tol(spec, options);
    const double diam = spec.bbox().diameter();
    const double snap = 1e-9 * diam;
    const double reach = std::max(1e-6 * diam, 20.0 * tol);

    std::vector<LoopPolygon> loops;
    auto add_loop = [&](const BoundaryLoop& loop) {
        LoopPolygon lp;
        lp.tag = loop.tag;
        lp.pts = discretize_loop(loop, tol, size).points;
        lp.part.assign(lp.pts.size(), 0);
        loops.push_back(std::move(lp));
    };
    add_loop(spec.outer);
    for (const auto& hole : spec.holes) add_loop(hole);

    if (!options.marked_points.empty()) {
        if (options.marked_points.size() != 4) throw GeometryError("exactly four marked points are required");
        LoopPolygon& outer = loops[0];
        for (const Vec2& q : options.marked_points)
            if (insert_on_polygon(outer, q, snap, reach) < 0)
                throw GeometryError("marked point is not on the outer boundary");
        std::array<int, 4> idx{};
        for (int k = 0; k < 4; ++k) idx[k] = nearest_vertex(outer, options.marked_points[k]);
        const int n = static_cast<int>(outer.pts.size());
        int turns = 0;
        for (int k = 0; k < 4; ++k) {
            const int gap = (idx[(k + 1) % 4] - idx[k] + n) % n;
            if (gap == 0) throw GeometryError("marked points coincide after discretization");
            turns += gap;
        }
        if (turns != n) throw GeometryError("marked points must follow the counterclockwise boundary order");
        for (int k = 0; k < 4; ++k)
            for (int e = idx[k]; e != idx[(k + 1) % 4]; e = (e + 1) % n) outer.part[e] = k;
    }

    // cut endpoints join the boundary polygons
    std::vector<std::vector<Vec2>> cut_points;
    for (const auto& cut : cuts) {
        if (cut.points.size() < 2) throw GeometryError("cut " + std::to_string(cut.id) + " has fewer than 2 points");
        std::vector<Vec2> pts = resample(cut.points, size);
        for (int end = 0; end < 2; ++end) {
            Vec2& q = end == 0 ? pts.front() : pts.back();
            int best_loop = -1;
            double best_d = 1e300;
            for (int l = 0; l < static_cast<int>(loops.size()); ++l) {
                const auto& lp = loops[l];
                for (std::size_t k = 0; k < lp.pts.size(); ++k) {
                    const double d = point_segment_distance(q, lp.pts[k], lp.pts[(k + 1) % lp.pts.size()]);
                    if (d < best_d) {
                        best_d = d;
                        best_loop = l;
                    }
                }
            }
            if (best_loop < 0 || best_d > reach) continue;  // interior endpoint (saddle)
            const int k = insert_on_polygon(loops[best_loop], q, snap, reach, 0.2);
            q = loops[best_loop].pts[k];
        }
        cut_points.push_back(std::move(pts));
    }

    detail::Triangulation tr(spec.bbox());
    std::vector<EdgeTag> tags;
    std::map<EdgeTag, int> tag_index;
    auto tag_of = [&](EdgeTag t) {
        const auto [it, fresh] = tag_index.emplace(t, static_cast<int>(tags.size()));
        if (fresh) tags.push_back(t);
        return it->second;
    };

    std::vector<std::vector<int>> loop_ids;
    int hint = -1;
    for (const auto& lp : loops) {
        std::vector<int> ids;
        for (const Vec2& p : lp.pts) {
            ids.push_back(tr.add_point(p, hint));
            hint = tr.vtri[ids.back()];
        }
        loop_ids.push_back(std::move(ids));
    }
    std::vector<std::vector<int>> cut_ids;
    for (const auto& pts : cut_points) {
        std::vector<int> ids;
        for (const Vec2& p : pts) {
            const int id = tr.add_point(p, hint);
            hint = tr.vtri[id];
            if (ids.empty() || ids.back() != id) ids.push_back(id);
        }
        cut_ids.push_back(std::move(ids));
    }

    {
        // cuts may share endpoints (saddles) but nothing else
        std::unordered_map<int, std::size_t> owner;
        for (std::size_t c = 0; c < cut_ids.size(); ++c) {
            const auto& ids = cut_ids[c];
            for (std::size_t k = 0; k < ids.size(); ++k) {
                const bool end = k == 0 || k + 1 == ids.size();
                const auto [it, fresh] = owner.emplace(ids[k], end ? cut_ids.size() + c : c);
                if (fresh) continue;
                const bool other_end = it->second >= cut_ids.size();
                const std::size_t other = other_end ? it->second - cut_ids.size() : it->second;
                if (other == c || !end || !other_end)
                    throw MeshError("cuts " + std::to_string(cuts[other].id) + " and " + std::to_string(cuts[c].id) +
                                    " intersect");
            }
        }
    }
    for (std::size_t l = 0; l < loops.size(); ++l) {
        const auto& ids = loop_ids[l];
        for (std::size_t k = 0; k < ids.size(); ++k)
            tr.add_constraint(ids[k], ids[(k + 1) % ids.size()], tag_of(EdgeTag::loop(loops[l].tag, loops[l].part[k])));
    }
    for (std::size_t c = 0; c < cut_ids.size(); ++c) {
        const auto& ids = cut_ids[c];
        const int tag = tag_of(EdgeTag::cut_side(cuts[c].id, 0));
        for (std::size_t k = 0; k + 1 < ids.size(); ++k) {
            try {
                tr.add_constraint(ids[k], ids[k + 1], tag);
            } catch (const MeshError& e) {
                throw MeshError("cut " + std::to_string(cuts[c].id) + " near (" + std::to_string(tr.pts[ids[k]].x) +
                                ", " + std::to_string(tr.pts[ids[k]].y) + "): " + e.what());
            }
        }
    }

    tr.classify([&](int tag) { return !tags[tag].is_cut(); });
    for (std::size_t c = 0; c < cut_ids.size(); ++c) {
        const auto& ids = cut_ids[c];
        for (std::size_t k = 0; k + 1 < ids.size(); ++k) {
            const auto [t, i] = tr.find_edge(ids[k], ids[k + 1]);
            (void)i;
            if (t < 0 || !tr.tris[t].inside)
                throw GeometryError("cut " + std::to_string(cuts[c].id) + " leaves the domain");
        }
    }

    double min_edge = 1e-3 * options.h;
    for (const auto& r : options.rules) min_edge = std::min(min_edge, 0.25 * options.h * std::pow(r.ratio, r.levels));
    detail::Triangulation::RefineParams params;
    params.size = size;
    params.min_angle_deg = options.min_angle_deg;
    params.min_edge = min_edge;
    params.max_points = options.max_nodes;
    tr.refine(params);

    std::vector<std::pair<int, int>> ends;
    for (std::size_t c = 0; c < cut_ids.size(); ++c) ends.emplace_back(cuts[c].id, cut_ids[c].front());
    return extract(tr, tags, ends);
}

// ---------------------------------------------------------------------------
// opening along cuts
// ---------------------------------------------------------------------------

Mesh open_along_cuts(const Mesh& joined) {
    struct CutEdge {
        int arc;
        int a, b;  // along the arc direction
    };
    std::unordered_map<std::uint64_t, CutEdge> cut_edges;
    auto key = [](int a, int b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(std::min(a, b))) << 32) |
               static_cast<std::uint32_t>(std::max(a, b));
    };
    std::vector<char> on_cut(joined.nodes.size(), 0);
    for (const auto& pl : joined.polylines) {
        for (std::size_t k = 0; k + 1 < pl.nodes.size(); ++k) {
            cut_edges[key(pl.nodes[k], pl.nodes[k + 1])] = {pl.id, pl.nodes[k], pl.nodes[k + 1]};
            on_cut[pl.nodes[k]] = on_cut[pl.nodes[k + 1]] = 1;
        }
    }

    // wedges: triangles around a cut node linked across non-cut edges
    std::vector<std::vector<int>> incident(joined.nodes.size());
    for (int t = 0; t < joined.triangle_count(); ++t)
        for (int v : joined.triangles[t])
            if (on_cut[v]) incident[v].push_back(t);

    Mesh out;
    out.nodes = joined.nodes;
    out.parent.resize(joined.nodes.size());
    std::iota(out.parent.begin(), out.parent.end(), 0);
    out.triangles = joined.triangles;
    // copy[t][k] = node id used by triangle t at corner k
    for (int v = 0; v < joined.node_count(); ++v) {
        if (!on_cut[v]) continue;
        const auto& tris = incident[v];
        std::vector<int> root(tris.size());
        std::iota(root.begin(), root.end(), 0);
        auto find = [&](int x) {
            while (root[x] != x) x = root[x] = root[root[x]];
            return x;
        };
        std::unordered_map<int, int> by_other;  // other endpoint of edge (v, w) -> first triangle slot
        for (std::size_t s = 0; s < tris.size(); ++s) {
            for (int w : joined.triangles[tris[s]]) {
                if (w == v) continue;
                if (cut_edges.count(key(v, w))) continue;
                const auto [it, fresh] = by_other.emplace(w, static_cast<int>(s));
                if (!fresh) root[find(static_cast<int>(s))] = find(it->second);
            }
        }
        std::map<int, int> class_node;
        for (std::size_t s = 0; s < tris.size(); ++s) {
            const int r = find(static_cast<int>(s));
            auto it = class_node.find(r);
            if (it == class_node.end()) {
                const int id = class_node.empty() ? v : out.node_count();
                if (id != v) {
                    out.nodes.push_back(joined.nodes[v]);
                    out.parent.push_back(v);
                }
                it = class_node.emplace(r, id).first;
            }
            for (int& corner : out.triangles[tris[s]])
                if (corner == v) corner = it->second;
        }
    }

    // directed edge -> triangle, on the opened triangles
    std::unordered_map<std::uint64_t, int> owner;
    auto dkey = [](int a, int b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
    };
    for (int t = 0; t < joined.triangle_count(); ++t) {
        const auto& tri = joined.triangles[t];
        for (int k = 0; k < 3; ++k) owner[dkey(tri[k], tri[(k + 1) % 3])] = t;
    }
    auto mapped = [&](int t, int v) {
        const auto& orig = joined.triangles[t];
        for (int k = 0; k < 3; ++k)
            if (orig[k] == v) return out.triangles[t][k];
        throw MeshError("open_along_cuts: inconsistent corner lookup");
    };

    for (const auto& e : joined.boundary_edges) {
        const int t = owner.at(dkey(e.a, e.b));
        out.boundary_edges.push_back({mapped(t, e.a), mapped(t, e.b), e.tag});
    }
    for (const auto& pl : joined.polylines) {
        for (std::size_t k = 0; k + 1 < pl.nodes.size(); ++k) {
            const int a = pl.nodes[k], b = pl.nodes[k + 1];
            const auto left = owner.find(dkey(a, b));
            const auto right = owner.find(dkey(b, a));
            if (left == owner.end() || right == owner.end())
                throw MeshError("cut " + std::to_string(pl.id) + " runs along the domain boundary");
            out.boundary_edges.push_back(
                {mapped(left->second, a), mapped(left->second, b), EdgeTag::cut_side(pl.id, 0)});
            out.boundary_edges.push_back(
                {mapped(right->second, b), mapped(right->second, a), EdgeTag::cut_side(pl.id, 1)});
        }
    }
    return out;
}

Mesh embed_polyline(const DomainSpec& spec, std::span<const CutPolyline> cuts, const MeshOptions& options) {
    return open_along_cuts(triangulate(spec, options, cuts));
}

}  // namespace cfm
