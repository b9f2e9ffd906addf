#pragma once

// Incremental constrained Delaunay triangulation inside a super triangle.
// Internal to the mesher.

#include <cfm/geometry.hpp>
#include <cfm/mesh.hpp>

#include <array>
#include <cstdint>
#include <vector>

namespace cfm::detail {

inline constexpr int no_constraint = -1;

class Triangulation {
public:
    struct Tri {
        std::array<int, 3> v{};                 // counterclockwise
        std::array<int, 3> n{-1, -1, -1};       // neighbour across the edge opposite v[i]
        std::array<int, 3> c{no_constraint, no_constraint, no_constraint};
        bool alive{true};
        bool inside{false};
    };

    struct Location {
        enum class Kind { inside, edge, vertex } kind{Kind::inside};
        int tri{-1};
        int index{-1};  // edge or vertex index within tri
    };

    explicit Triangulation(const BBox& box);

    /// Inserts p (or returns the existing vertex within snap distance).
    int add_point(Vec2 p, int hint = -1);
    /// Inserts the midpoint of the existing edge (a, b), keeping its constraint.
    int split_edge(int a, int b);
    /// Forces the segment a-b into the triangulation and tags it. Vertices lying
    /// on the segment split it; crossing a different constraint throws MeshError.
    void add_constraint(int a, int b, int tag);

    [[nodiscard]] Location locate(Vec2 p, int hint = -1) const;
    /// Triangle and local index of the edge a-b (edge opposite v[index]), or {-1,-1}.
    [[nodiscard]] std::pair<int, int> find_edge(int a, int b) const;
    [[nodiscard]] bool is_super(int v) const noexcept { return v < 3; }

    /// Marks triangles inside the domain: parity of crossed constraints whose
    /// tag satisfies `toggles`.
    template <class Pred>
    void classify(Pred toggles);

    /// Delaunay refinement of inside triangles; constraints are split at
    /// midpoints when encroached or when they block a circumcenter.
    struct RefineParams {
        SizeFunction size;
        double min_angle_deg{20.0};
        double min_edge{0.0};
        std::size_t max_points{3'000'000};
    };
    void refine(const RefineParams& params);

    std::vector<Vec2> pts;
    std::vector<Tri> tris;
    std::vector<int> vtri;  // some triangle containing each vertex

private:
    using EdgeStack = std::vector<std::pair<int, int>>;

    int push_point(Vec2 p);
    int new_tri();
    void set_tri(int t, std::array<int, 3> v, std::array<int, 3> n, std::array<int, 3> c);
    void relink(int nb, int old_t, int new_t);
    void insert_in_triangle(int t, int p, EdgeStack& stack);
    void insert_on_edge(int t, int i, int p, EdgeStack& stack);
    void flip(int t, int i);
    void legalize(EdgeStack& stack);
    [[nodiscard]] bool should_flip(int t, int i) const;
    void set_constraint(int a, int b, int tag);
    void insert_segment(int a, int b, int tag, int depth);
    [[nodiscard]] std::vector<int> triangles_around(int v) const;
    [[nodiscard]] int brute_locate(Vec2 p) const;

    struct WalkResult {
        int tri{-1};
        int blocked_tri{-1};
        int blocked_edge{-1};
    };
    [[nodiscard]] WalkResult walk_to(int start, Vec2 target) const;
    [[nodiscard]] std::vector<std::pair<int, int>> encroached_by(Vec2 p, int tri) const;

    double snap_{0.0};
    mutable int last_{0};
    mutable std::uint32_t rng_{12345u};
    std::vector<int>* touched_{nullptr};  // triangles rewritten during refinement
};

template <class Pred>
void Triangulation::classify(Pred toggles) {
    for (auto& t : tris) t.inside = false;
    std::vector<int> parity(tris.size(), -1);
    std::vector<int> queue;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        if (!tris[t].alive) continue;
        const auto& v = tris[t].v;
        if (is_super(v[0]) || is_super(v[1]) || is_super(v[2])) {
            parity[t] = 0;
            queue.push_back(t);
            break;
        }
    }
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const int t = queue[q];
        for (int i = 0; i < 3; ++i) {
            const int nb = tris[t].n[i];
            if (nb < 0 || parity[nb] >= 0) continue;
            const int c = tris[t].c[i];
            parity[nb] = (c != no_constraint && toggles(c)) ? 1 - parity[t] : parity[t];
            queue.push_back(nb);
        }
    }
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
        if (tris[t].alive) tris[t].inside = parity[t] == 1;
}

}  // namespace cfm::detail
