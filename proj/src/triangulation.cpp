#include "triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

namespace cfm::detail {

namespace {

inline int nx(int i) { return i == 2 ? 0 : i + 1; }
inline int pv(int i) { return i == 0 ? 2 : i - 1; }

long double orient_ld(Vec2 a, Vec2 b, Vec2 c) {
    return (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
           (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
}

// > 0 when d lies strictly inside the circumcircle of counterclockwise (a, b, c),
// with a relative dead band around zero.
long double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const long double adx = static_cast<long double>(a.x) - d.x, ady = static_cast<long double>(a.y) - d.y;
    const long double bdx = static_cast<long double>(b.x) - d.x, bdy = static_cast<long double>(b.y) - d.y;
    const long double cdx = static_cast<long double>(c.x) - d.x, cdy = static_cast<long double>(c.y) - d.y;
    const long double al = adx * adx + ady * ady;
    const long double bl = bdx * bdx + bdy * bdy;
    const long double cl = cdx * cdx + cdy * cdy;
    const long double t1 = al * (bdx * cdy - cdx * bdy);
    const long double t2 = bl * (cdx * ady - adx * cdy);
    const long double t3 = cl * (adx * bdy - bdx * ady);
    const long double det = t1 + t2 + t3;
    const long double perm = al * (std::fabs(bdx * cdy) + std::fabs(cdx * bdy)) +
                             bl * (std::fabs(cdx * ady) + std::fabs(adx * cdy)) +
                             cl * (std::fabs(adx * bdy) + std::fabs(bdx * ady));
    if (std::fabs(det) <= 1e-13L * perm) return 0.0L;
    return det;
}

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 ab = b - a, ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double l1 = norm2(ab), l2 = norm2(ac);
    return a + Vec2{(ac.y * l1 - ab.y * l2) / d, (ab.x * l2 - ac.x * l1) / d};
}

}  // namespace

Triangulation::Triangulation(const BBox& box) {
    const double diam = std::max(box.diameter(), 1e-300);
    const Vec2 c = box.center();
    const double r = 64.0 * diam;
    snap_ = 1e-13 * diam;
    for (int k = 0; k < 3; ++k) {
        const double a = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * k / 3.0;
        push_point(c + Vec2{std::cos(a), std::sin(a)} * r);
    }
    const int t = new_tri();
    set_tri(t, {0, 1, 2}, {-1, -1, -1}, {no_constraint, no_constraint, no_constraint});
}

int Triangulation::push_point(Vec2 p) {
    pts.push_back(p);
    vtri.push_back(-1);
    return static_cast<int>(pts.size()) - 1;
}

int Triangulation::new_tri() {
    tris.emplace_back();
    return static_cast<int>(tris.size()) - 1;
}

void Triangulation::set_tri(int t, std::array<int, 3> v, std::array<int, 3> n, std::array<int, 3> c) {
    auto& T = tris[t];
    T.v = v;
    T.n = n;
    T.c = c;
    T.alive = true;
    for (int k = 0; k < 3; ++k) vtri[v[k]] = t;
    if (touched_) touched_->push_back(t);
}

void Triangulation::relink(int nb, int old_t, int new_t) {
    if (nb < 0) return;
    for (int k = 0; k < 3; ++k) {
        if (tris[nb].n[k] == old_t) {
            tris[nb].n[k] = new_t;
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// point location
// ---------------------------------------------------------------------------

int Triangulation::brute_locate(Vec2 p) const {
    int best = -1;
    long double best_score = -1e300L;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        const auto& T = tris[t];
        if (!T.alive) continue;
        long double worst = 1e300L;
        for (int i = 0; i < 3; ++i) {
            const Vec2 a = pts[T.v[nx(i)]], b = pts[T.v[pv(i)]];
            const long double len = std::max<long double>(distance(a, b), 1e-300L);
            worst = std::min(worst, orient_ld(a, b, p) / len);
        }
        if (worst > best_score) {
            best_score = worst;
            best = t;
        }
    }
    return best;
}

Triangulation::Location Triangulation::locate(Vec2 p, int hint) const {
    int t = (hint >= 0 && hint < static_cast<int>(tris.size()) && tris[hint].alive) ? hint : last_;
    const std::size_t cap = 4 * tris.size() + 64;
    bool found = false;
    for (std::size_t step = 0; step < cap; ++step) {
        const auto& T = tris[t];
        rng_ = rng_ * 1664525u + 1013904223u;
        const int r = static_cast<int>((rng_ >> 16) % 3u);
        bool moved = false;
        for (int kk = 0; kk < 3; ++kk) {
            const int i = (r + kk) % 3;
            const Vec2 a = pts[T.v[nx(i)]], b = pts[T.v[pv(i)]];
            if (orient_ld(a, b, p) < 0.0L && T.n[i] >= 0) {
                t = T.n[i];
                moved = true;
                break;
            }
        }
        if (!moved) {
            found = true;
            break;
        }
    }
    if (!found) t = brute_locate(p);
    last_ = t;

    Location loc;
    loc.tri = t;
    const auto& T = tris[t];
    for (int k = 0; k < 3; ++k) {
        if (distance(pts[T.v[k]], p) <= snap_) {
            loc.kind = Location::Kind::vertex;
            loc.index = k;
            return loc;
        }
    }
    const long double area = orient_ld(pts[T.v[0]], pts[T.v[1]], pts[T.v[2]]);
    for (int i = 0; i < 3; ++i) {
        const Vec2 a = pts[T.v[nx(i)]], b = pts[T.v[pv(i)]];
        if (orient_ld(a, b, p) <= 1e-13L * area) {
            loc.kind = Location::Kind::edge;
            loc.index = i;
            return loc;
        }
    }
    loc.kind = Location::Kind::inside;
    return loc;
}

// ---------------------------------------------------------------------------
// insertion
// ---------------------------------------------------------------------------

void Triangulation::insert_in_triangle(int t, int p, EdgeStack& stack) {
    const auto T = tris[t];
    const auto [v0, v1, v2] = T.v;
    const int t1 = new_tri();
    const int t2 = new_tri();
    set_tri(t, {p, v1, v2}, {T.n[0], t1, t2}, {T.c[0], no_constraint, no_constraint});
    set_tri(t1, {v0, p, v2}, {t, T.n[1], t2}, {no_constraint, T.c[1], no_constraint});
    set_tri(t2, {v0, v1, p}, {t, t1, T.n[2]}, {no_constraint, no_constraint, T.c[2]});
    relink(T.n[1], t, t1);
    relink(T.n[2], t, t2);
    stack.emplace_back(t, 0);
    stack.emplace_back(t1, 1);
    stack.emplace_back(t2, 2);
}

void Triangulation::insert_on_edge(int t, int i, int p, EdgeStack& stack) {
    const auto T = tris[t];
    const int c = T.v[i], a = T.v[nx(i)], b = T.v[pv(i)];
    const int u = T.n[i];
    const int c_ab = T.c[i];
    const int n_bc = T.n[nx(i)], c_bc = T.c[nx(i)];
    const int n_ca = T.n[pv(i)], c_ca = T.c[pv(i)];

    const int tb = new_tri();
    if (u < 0) {
        set_tri(t, {c, a, p}, {-1, tb, n_ca}, {c_ab, no_constraint, c_ca});
        set_tri(tb, {c, p, b}, {-1, n_bc, t}, {c_ab, c_bc, no_constraint});
        relink(n_bc, t, tb);
        stack.emplace_back(t, 2);
        stack.emplace_back(tb, 1);
        return;
    }
    const auto U = tris[u];
    int j = 0;
    while (U.n[j] != t) ++j;
    const int d = U.v[j];
    const int n_ad = U.n[nx(j)], c_ad = U.c[nx(j)];
    const int n_db = U.n[pv(j)], c_db = U.c[pv(j)];
    const int ub = new_tri();

    set_tri(t, {c, a, p}, {ub, tb, n_ca}, {c_ab, no_constraint, c_ca});
    set_tri(tb, {c, p, b}, {u, n_bc, t}, {c_ab, c_bc, no_constraint});
    set_tri(u, {d, b, p}, {tb, ub, n_db}, {c_ab, no_constraint, c_db});
    set_tri(ub, {d, p, a}, {t, n_ad, u}, {c_ab, c_ad, no_constraint});
    relink(n_bc, t, tb);
    relink(n_ad, u, ub);
    stack.emplace_back(t, 2);
    stack.emplace_back(tb, 1);
    stack.emplace_back(u, 2);
    stack.emplace_back(ub, 1);
}

int Triangulation::add_point(Vec2 p, int hint) {
    const Location loc = locate(p, hint);
    if (loc.kind == Location::Kind::vertex) return tris[loc.tri].v[loc.index];
    const int id = push_point(p);
    EdgeStack stack;
    if (loc.kind == Location::Kind::inside)
        insert_in_triangle(loc.tri, id, stack);
    else
        insert_on_edge(loc.tri, loc.index, id, stack);
    legalize(stack);
    last_ = vtri[id];
    return id;
}

int Triangulation::split_edge(int a, int b) {
    const auto [t, i] = find_edge(a, b);
    if (t < 0) throw MeshError("split_edge: edge not present");
    const int id = push_point((pts[a] + pts[b]) * 0.5);
    EdgeStack stack;
    insert_on_edge(t, i, id, stack);
    legalize(stack);
    return id;
}

// ---------------------------------------------------------------------------
// flips
// ---------------------------------------------------------------------------

bool Triangulation::should_flip(int t, int i) const {
    const auto& T = tris[t];
    if (T.c[i] != no_constraint || T.n[i] < 0) return false;
    const auto& U = tris[T.n[i]];
    int j = 0;
    while (U.n[j] != t) ++j;
    return incircle(pts[T.v[0]], pts[T.v[1]], pts[T.v[2]], pts[U.v[j]]) > 0.0L;
}

void Triangulation::flip(int t, int i) {
    const auto T = tris[t];
    const int u = T.n[i];
    const auto U = tris[u];
    int j = 0;
    while (U.n[j] != t) ++j;
    const int a = T.v[i], b = T.v[nx(i)], c = T.v[pv(i)];
    const int d = U.v[j];
    const int n_ca = T.n[nx(i)], c_ca = T.c[nx(i)];
    const int n_ab = T.n[pv(i)], c_ab = T.c[pv(i)];
    const int n_bd = U.n[nx(j)], c_bd = U.c[nx(j)];
    const int n_dc = U.n[pv(j)], c_dc = U.c[pv(j)];

    set_tri(t, {a, b, d}, {n_bd, u, n_ab}, {c_bd, no_constraint, c_ab});
    set_tri(u, {a, d, c}, {n_dc, n_ca, t}, {c_dc, c_ca, no_constraint});
    relink(n_bd, u, t);
    relink(n_ca, t, u);
}

void Triangulation::legalize(EdgeStack& stack) {
    std::size_t guard = 0;
    const std::size_t cap = 64 * tris.size() + 1024;
    while (!stack.empty()) {
        const auto [t, i] = stack.back();
        stack.pop_back();
        if (!should_flip(t, i)) continue;
        if (++guard > cap) throw MeshError("edge flipping did not terminate");
        const int u = tris[t].n[i];
        flip(t, i);
        stack.emplace_back(t, 0);
        stack.emplace_back(t, 2);
        stack.emplace_back(u, 0);
        stack.emplace_back(u, 1);
    }
}

// ---------------------------------------------------------------------------
// adjacency queries
// ---------------------------------------------------------------------------

std::vector<int> Triangulation::triangles_around(int v) const {
    std::vector<int> out;
    const int start = vtri[v];
    if (start < 0) return out;
    auto index_of = [&](int t) {
        const auto& T = tris[t];
        for (int k = 0; k < 3; ++k)
            if (T.v[k] == v) return k;
        throw MeshError("vertex-triangle map is stale");
    };
    int t = start;
    do {
        out.push_back(t);
        t = tris[t].n[nx(index_of(t))];
    } while (t >= 0 && t != start && out.size() <= tris.size());
    if (t < 0) {
        t = tris[start].n[pv(index_of(start))];
        while (t >= 0 && out.size() <= tris.size()) {
            out.push_back(t);
            t = tris[t].n[pv(index_of(t))];
        }
    }
    return out;
}

std::pair<int, int> Triangulation::find_edge(int a, int b) const {
    for (int t : triangles_around(a)) {
        const auto& T = tris[t];
        for (int k = 0; k < 3; ++k) {
            if (T.v[k] != a) continue;
            if (T.v[nx(k)] == b) return {t, pv(k)};
            if (T.v[pv(k)] == b) return {t, nx(k)};
        }
    }
    return {-1, -1};
}

void Triangulation::set_constraint(int a, int b, int tag) {
    const auto [t, i] = find_edge(a, b);
    if (t < 0) throw MeshError("set_constraint: edge not present");
    tris[t].c[i] = tag;
    const int u = tris[t].n[i];
    if (u >= 0) {
        for (int k = 0; k < 3; ++k)
            if (tris[u].n[k] == t) tris[u].c[k] = tag;
    }
}

// ---------------------------------------------------------------------------
// constraint recovery by flips
// ---------------------------------------------------------------------------

void Triangulation::add_constraint(int a, int b, int tag) { insert_segment(a, b, tag, 0); }

void Triangulation::insert_segment(int a, int b, int tag, int depth) {
    if (a == b) return;
    if (depth > 10000) throw MeshError("constraint recovery recursion too deep");
    if (find_edge(a, b).first >= 0) {
        set_constraint(a, b, tag);
        return;
    }
    const Vec2 A = pts[a], B = pts[b];
    const double lab = distance(A, B);

    auto on_segment = [&](int w) {
        const Vec2 W = pts[w];
        const double lw = distance(A, W);
        if (std::fabs(static_cast<double>(orient_ld(A, B, W))) > 1e-12 * lab * std::max(lw, 1e-300))
            return false;
        const double s = dot(W - A, B - A);
        return s > 0.0 && s < lab * lab;
    };

    // first crossed edge, seen from a
    int start = -1, e1 = -1, e2 = -1;
    for (int t : triangles_around(a)) {
        const auto& T = tris[t];
        int k = 0;
        while (T.v[k] != a) ++k;
        const int v1 = T.v[nx(k)], v2 = T.v[pv(k)];
        for (int w : {v1, v2}) {
            if (!is_super(w) && on_segment(w)) {
                insert_segment(a, w, tag, depth + 1);
                insert_segment(w, b, tag, depth + 1);
                return;
            }
        }
        if (orient_ld(A, B, pts[v1]) < 0.0L && orient_ld(A, B, pts[v2]) > 0.0L) {
            start = t;
            e1 = v1;
            e2 = v2;
            break;
        }
    }
    if (start < 0) throw MeshError("constraint recovery: no triangle crossed by segment");

    std::deque<std::pair<int, int>> crossing;
    int t = start;
    for (std::size_t guard = 0;; ++guard) {
        if (guard > tris.size()) throw MeshError("constraint recovery: walk did not reach endpoint");
        int ti = 0;
        const auto& T = tris[t];
        for (int k = 0; k < 3; ++k)
            if (T.v[k] != e1 && T.v[k] != e2) ti = k;
        if (T.c[ti] != no_constraint)
            throw MeshError("cut or boundary segments intersect (constraint crossing)");
        crossing.emplace_back(e1, e2);
        const int u = T.n[ti];
        if (u < 0) throw MeshError("constraint recovery left the triangulation");
        const auto& U = tris[u];
        int w = -1;
        for (int k = 0; k < 3; ++k)
            if (U.v[k] != e1 && U.v[k] != e2) w = U.v[k];
        if (w == b) break;
        if (!is_super(w) && on_segment(w)) {
            insert_segment(a, w, tag, depth + 1);
            insert_segment(w, b, tag, depth + 1);
            return;
        }
        if (orient_ld(A, B, pts[w]) < 0.0L)
            e1 = w;
        else
            e2 = w;
        t = u;
    }

    std::vector<std::pair<int, int>> fresh;
    std::size_t guard = 0;
    const std::size_t cap = 1000 * (crossing.size() + 10) * (crossing.size() + 10);
    while (!crossing.empty()) {
        if (++guard > cap) throw MeshError("constraint recovery did not converge");
        const auto [p1, p2] = crossing.front();
        crossing.pop_front();
        const auto [ft, fi] = find_edge(p1, p2);
        if (ft < 0) throw MeshError("constraint recovery lost an edge");
        const auto& T = tris[ft];
        const int p = T.v[fi];
        const int u = T.n[fi];
        const auto& U = tris[u];
        int q = -1;
        for (int k = 0; k < 3; ++k)
            if (U.n[k] == ft) q = U.v[k];
        const long double s1 = orient_ld(pts[p], pts[q], pts[p1]);
        const long double s2 = orient_ld(pts[p], pts[q], pts[p2]);
        if ((s1 > 0.0L && s2 < 0.0L) || (s1 < 0.0L && s2 > 0.0L)) {
            flip(ft, fi);
            const bool shares = p == a || p == b || q == a || q == b;
            const long double o1 = orient_ld(A, B, pts[p]);
            const long double o2 = orient_ld(A, B, pts[q]);
            if (!shares && ((o1 > 0.0L && o2 < 0.0L) || (o1 < 0.0L && o2 > 0.0L)))
                crossing.emplace_back(p, q);
            else
                fresh.emplace_back(p, q);
        } else {
            crossing.emplace_back(p1, p2);
        }
    }
    set_constraint(a, b, tag);

    EdgeStack stack;
    for (const auto& [p, q] : fresh) {
        if ((p == a && q == b) || (p == b && q == a)) continue;
        const auto [ft, fi] = find_edge(p, q);
        if (ft >= 0) stack.emplace_back(ft, fi);
    }
    legalize(stack);
}

// ---------------------------------------------------------------------------
// refinement
// ---------------------------------------------------------------------------

Triangulation::WalkResult Triangulation::walk_to(int start, Vec2 target) const {
    const auto& S = tris[start];
    const Vec2 g = (pts[S.v[0]] + pts[S.v[1]] + pts[S.v[2]]) / 3.0;
    int t = start, prev = -1;
    for (std::size_t step = 0; step <= tris.size(); ++step) {
        const auto& T = tris[t];
        int exit = -1;
        for (int i = 0; i < 3; ++i) {
            if (T.n[i] == prev && prev >= 0) continue;
            const Vec2 A = pts[T.v[nx(i)]], B = pts[T.v[pv(i)]];
            if (orient_ld(A, B, target) >= 0.0L) continue;
            const long double sa = orient_ld(g, target, A), sb = orient_ld(g, target, B);
            if ((sa <= 0.0L && sb >= 0.0L) || (sa >= 0.0L && sb <= 0.0L)) {
                exit = i;
                break;
            }
        }
        if (exit < 0) return {t, -1, -1};
        if (T.c[exit] != no_constraint || T.n[exit] < 0) return {-1, t, exit};
        prev = t;
        t = T.n[exit];
    }
    return {-1, -1, -1};
}

std::vector<std::pair<int, int>> Triangulation::encroached_by(Vec2 p, int tri) const {
    std::vector<std::pair<int, int>> out;
    std::vector<int> stack{tri};
    std::vector<int> seen{tri};
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        const auto& T = tris[t];
        for (int i = 0; i < 3; ++i) {
            const int a = T.v[nx(i)], b = T.v[pv(i)];
            if (T.c[i] != no_constraint) {
                if (dot(pts[a] - p, pts[b] - p) < 0.0) out.emplace_back(a, b);
                continue;
            }
            const int u = T.n[i];
            if (u < 0 || std::find(seen.begin(), seen.end(), u) != seen.end()) continue;
            const auto& U = tris[u];
            if (incircle(pts[U.v[0]], pts[U.v[1]], pts[U.v[2]], p) > 0.0L) {
                seen.push_back(u);
                stack.push_back(u);
            }
        }
    }
    return out;
}

void Triangulation::refine(const RefineParams& params) {
    const double sin_min = std::sin(params.min_angle_deg * std::numbers::pi / 180.0);
    std::vector<int> touched;
    touched_ = &touched;

    auto bad = [&](int t) {
        const auto& T = tris[t];
        if (!T.alive || !T.inside) return false;
        const Vec2 a = pts[T.v[0]], b = pts[T.v[1]], c = pts[T.v[2]];
        const double la = distance(b, c), lb = distance(c, a), lc = distance(a, b);
        const double lmax = std::max({la, lb, lc});
        const double lmin = std::min({la, lb, lc});
        const double target = params.size((a + b + c) / 3.0);
        if (lmax > target) return true;
        if (lmin <= params.min_edge) return false;
        const double area2 = std::fabs(orient(a, b, c));
        // sine of the smallest angle: opposite the shortest edge
        double s;
        if (lmin == la)
            s = area2 / (lb * lc);
        else if (lmin == lb)
            s = area2 / (la * lc);
        else
            s = area2 / (la * lb);
        return s < sin_min;
    };

    std::deque<int> queue;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
        if (tris[t].inside) queue.push_back(t);

    auto requeue = [&] {
        for (int t : touched) queue.push_back(t);
        touched.clear();
    };

    auto split_constraint = [&](int a, int b) -> bool {
        if (distance(pts[a], pts[b]) <= 2.0 * params.min_edge) return false;
        if (pts.size() >= params.max_points) throw MeshError("mesh size cap reached during refinement");
        const auto [t, i] = find_edge(a, b);
        const bool in_t = tris[t].inside;
        const int u = tris[t].n[i];
        const bool in_u = u >= 0 && tris[u].inside;
        const std::size_t before = tris.size();
        touched.clear();
        split_edge(a, b);
        // new triangles are appended t-side first; they keep their parent's side
        if (tris.size() > before) tris[before].inside = in_t;
        if (tris.size() > before + 1) tris[before + 1].inside = in_u;
        requeue();
        return true;
    };

    while (!queue.empty()) {
        const int t = queue.front();
        queue.pop_front();
        if (!bad(t)) continue;
        const auto& T = tris[t];
        const Vec2 cc = circumcenter(pts[T.v[0]], pts[T.v[1]], pts[T.v[2]]);
        if (!std::isfinite(cc.x) || !std::isfinite(cc.y)) continue;
        const WalkResult w = walk_to(t, cc);
        if (w.tri < 0) {
            if (w.blocked_tri < 0) continue;
            const auto& B = tris[w.blocked_tri];
            const int a = B.v[nx(w.blocked_edge)], b = B.v[pv(w.blocked_edge)];
            if (split_constraint(a, b)) queue.push_back(t);
            continue;
        }
        const auto enc = encroached_by(cc, w.tri);
        if (!enc.empty()) {
            bool any = false;
            for (const auto& [a, b] : enc)
                if (find_edge(a, b).first >= 0) any = split_constraint(a, b) || any;
            if (any) queue.push_back(t);
            continue;
        }
        if (pts.size() >= params.max_points) throw MeshError("mesh size cap reached during refinement");
        const Location loc = locate(cc, w.tri);
        if (loc.kind == Location::Kind::vertex) continue;
        if (loc.kind == Location::Kind::edge && tris[loc.tri].c[loc.index] != no_constraint) {
            const auto& L = tris[loc.tri];
            split_constraint(L.v[nx(loc.index)], L.v[pv(loc.index)]);
            queue.push_back(t);
            continue;
        }
        // all triangles around the new vertex lie in the same region
        const bool side = tris[loc.tri].inside;
        const std::size_t before = tris.size();
        touched.clear();
        const int id = push_point(cc);
        EdgeStack stack;
        if (loc.kind == Location::Kind::inside)
            insert_in_triangle(loc.tri, id, stack);
        else
            insert_on_edge(loc.tri, loc.index, id, stack);
        for (std::size_t k = before; k < tris.size(); ++k) tris[k].inside = side;
        legalize(stack);
        requeue();
    }
    touched_ = nullptr;
}

}  // namespace cfm::detail
