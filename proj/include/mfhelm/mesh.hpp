#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "mfhelm/common.hpp"

namespace mfhelm {

struct Point {
    double x = 0.0, y = 0.0;
};

inline Point operator-(const Point& a, const Point& b) { return {a.x - b.x, a.y - b.y}; }
inline double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Triangle {
    std::array<int, 3> v{};
    int region = 0;
};

struct BoundaryEdge {
    std::array<int, 2> v{};
    int marker = 0;
};

/// Conforming triangulation with boundary markers. Immutable after
/// construction; safe to share across threads.
class Mesh2D {
public:
    std::vector<Point> vertices;
    std::vector<Triangle> triangles;
    std::vector<BoundaryEdge> boundary_edges;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }

    double signed_area(int t) const
    {
        const auto& tr = triangles[t];
        const Point &a = vertices[tr.v[0]], &b = vertices[tr.v[1]], &c = vertices[tr.v[2]];
        return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    }

    double area(int t) const { return std::abs(signed_area(t)); }

    double total_area() const
    {
        double s = 0.0;
        for (int t = 0; t < triangle_count(); ++t) s += area(t);
        return s;
    }

    Point barycenter(int t) const
    {
        const auto& tr = triangles[t];
        const Point &a = vertices[tr.v[0]], &b = vertices[tr.v[1]], &c = vertices[tr.v[2]];
        return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    }

    double max_edge_length() const
    {
        double m = 0.0;
        for (const auto& tr : triangles)
            for (int e = 0; e < 3; ++e)
                m = std::max(m, dist(vertices[tr.v[e]], vertices[tr.v[(e + 1) % 3]]));
        return m;
    }

    std::vector<bool> boundary_vertex_mask() const
    {
        std::vector<bool> mask(vertices.size(), false);
        for (const auto& e : boundary_edges) {
            mask[e.v[0]] = true;
            mask[e.v[1]] = true;
        }
        return mask;
    }

    std::vector<int> boundary_vertices() const
    {
        auto mask = boundary_vertex_mask();
        std::vector<int> out;
        for (int i = 0; i < vertex_count(); ++i)
            if (mask[i]) out.push_back(i);
        return out;
    }

    /// Incident triangles per vertex.
    std::vector<std::vector<int>> vertex_cells() const
    {
        std::vector<std::vector<int>> inc(vertices.size());
        for (int t = 0; t < triangle_count(); ++t)
            for (int vi : triangles[t].v) inc[vi].push_back(t);
        return inc;
    }

    /// Edge-adjacent triangles per triangle (up to 3 each).
    std::vector<std::vector<int>> cell_neighbors() const
    {
        std::map<std::pair<int, int>, std::vector<int>> edge_cells;
        for (int t = 0; t < triangle_count(); ++t) {
            const auto& tr = triangles[t];
            for (int e = 0; e < 3; ++e) {
                int a = tr.v[e], b = tr.v[(e + 1) % 3];
                edge_cells[{std::min(a, b), std::max(a, b)}].push_back(t);
            }
        }
        std::vector<std::vector<int>> nbr(triangle_count());
        for (const auto& [edge, cells] : edge_cells)
            if (cells.size() == 2) {
                nbr[cells[0]].push_back(cells[1]);
                nbr[cells[1]].push_back(cells[0]);
            }
        return nbr;
    }

    /// Boundary edges chained into closed loops of vertex indices.
    /// Each loop lists its vertices in traversal order (no repeat of the start).
    std::vector<std::vector<int>> boundary_loops() const
    {
        std::map<int, std::vector<int>> next;  // vertex -> adjacent boundary vertices
        for (const auto& e : boundary_edges) {
            next[e.v[0]].push_back(e.v[1]);
            next[e.v[1]].push_back(e.v[0]);
        }
        for (const auto& [v, adj] : next)
            if (adj.size() != 2)
                throw validation_error(format_msg(
                    "boundary vertex ", v, " has ", adj.size(), " incident boundary edges (expected 2)"));

        std::vector<std::vector<int>> loops;
        std::map<int, bool> used;
        for (const auto& e : boundary_edges) {
            int start = e.v[0];
            if (used[start]) continue;
            std::vector<int> loop;
            int prev = -1, cur = start;
            do {
                loop.push_back(cur);
                used[cur] = true;
                const auto& adj = next[cur];
                int nxt = (adj[0] != prev) ? adj[0] : adj[1];
                prev = cur;
                cur = nxt;
            } while (cur != start);
            loops.push_back(std::move(loop));
        }
        return loops;
    }

    /// Checks all structural invariants; throws validation_error on the first
    /// violation. Duplicate-vertex tolerance is 1e-12.
    void validate() const
    {
        const int nv = vertex_count();
        for (int t = 0; t < triangle_count(); ++t) {
            for (int vi : triangles[t].v)
                if (vi < 0 || vi >= nv)
                    throw validation_error(format_msg("triangle ", t, " references vertex ", vi,
                                                      " out of range [0,", nv, ")"));
            if (signed_area(t) <= 0.0)
                throw validation_error(format_msg("triangle ", t, " has non-positive signed area ",
                                                  signed_area(t)));
        }
        for (std::size_t i = 0; i < boundary_edges.size(); ++i)
            for (int vi : boundary_edges[i].v)
                if (vi < 0 || vi >= nv)
                    throw validation_error(format_msg("boundary edge ", i, " references vertex ", vi,
                                                      " out of range [0,", nv, ")"));

        // Duplicate detection via lexicographic sort + window scan.
        std::vector<int> order(nv);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (vertices[a].x != vertices[b].x) return vertices[a].x < vertices[b].x;
            return vertices[a].y < vertices[b].y;
        });
        const double tol = 1e-12;
        for (int i = 0; i + 1 < nv; ++i) {
            for (int j = i + 1; j < nv && vertices[order[j]].x - vertices[order[i]].x <= tol; ++j) {
                if (std::abs(vertices[order[j]].y - vertices[order[i]].y) <= tol)
                    throw validation_error(format_msg("duplicate vertices ", order[i], " and ", order[j]));
            }
        }

        // Each boundary edge must belong to exactly one triangle; interior
        // edges to exactly two.
        std::map<std::pair<int, int>, int> edge_count;
        for (const auto& tr : triangles)
            for (int e = 0; e < 3; ++e) {
                int a = tr.v[e], b = tr.v[(e + 1) % 3];
                edge_count[{std::min(a, b), std::max(a, b)}]++;
            }
        for (std::size_t i = 0; i < boundary_edges.size(); ++i) {
            const auto& e = boundary_edges[i];
            auto it = edge_count.find({std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1])});
            if (it == edge_count.end())
                throw validation_error(format_msg("boundary edge ", i, " is not a triangle edge"));
            if (it->second != 1)
                throw validation_error(format_msg("boundary edge ", i, " belongs to ", it->second,
                                                  " triangles (expected 1)"));
        }
        for (const auto& [edge, cnt] : edge_count)
            if (cnt > 2)
                throw validation_error(format_msg("edge (", edge.first, ",", edge.second,
                                                  ") shared by ", cnt, " triangles"));
        boundary_loops();  // throws if loops are not closed
    }
};

namespace detail {

inline void orient_ccw(Mesh2D& mesh, Triangle& tr)
{
    const Point &a = mesh.vertices[tr.v[0]], &b = mesh.vertices[tr.v[1]], &c = mesh.vertices[tr.v[2]];
    double s = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if (s < 0.0) std::swap(tr.v[1], tr.v[2]);
}

/// Triangulates the annulus between two concentric vertex rings ordered by
/// angle, advancing whichever ring has the smaller next angle.
inline void zip_rings(Mesh2D& mesh, const std::vector<int>& inner, const std::vector<int>& outer)
{
    auto angle = [&](int v) { return std::atan2(mesh.vertices[v].y, mesh.vertices[v].x); };
    std::size_t ni = inner.size(), no = outer.size();
    std::size_t i = 0, o = 0;
    // Angles are generated in [0, 2pi); walk both rings once.
    auto ang_at = [&](const std::vector<int>& ring, std::size_t idx) {
        double a = angle(ring[idx % ring.size()]);
        if (a < -1e-12) a += 2.0 * M_PI;
        return a + 2.0 * M_PI * static_cast<double>(idx / ring.size());
    };
    while (i < ni || o < no) {
        int vi = inner[i % ni], vo = outer[o % no];
        bool advance_outer;
        if (i >= ni)
            advance_outer = true;
        else if (o >= no)
            advance_outer = false;
        else {
            // pick the advance that creates the shorter new diagonal
            double span_outer = std::abs(ang_at(outer, o + 1) - ang_at(inner, i));
            double span_inner = std::abs(ang_at(inner, i + 1) - ang_at(outer, o));
            advance_outer = span_outer <= span_inner;
        }
        Triangle tr;
        if (advance_outer) {
            tr.v = {vi, vo, outer[(o + 1) % no]};
            ++o;
        } else {
            tr.v = {vi, vo, inner[(i + 1) % ni]};
            ++i;
        }
        orient_ccw(mesh, tr);
        mesh.triangles.push_back(tr);
    }
}

}  // namespace detail

/// Structured triangulation of the disk B(0, radius): concentric rings with
/// spacing ~0.866*target_h and 6m vertices on ring m, giving near-equilateral
/// cells. Boundary vertices lie exactly on the circle.
inline Mesh2D gen_disk_mesh(double radius, double target_h)
{
    if (radius <= 0.0) throw validation_error("gen_disk_mesh: radius must be positive");
    if (target_h <= 0.0 || target_h >= radius)
        throw validation_error("gen_disk_mesh: target_h must satisfy 0 < target_h < radius");

    const int rings = std::max(1, static_cast<int>(std::lround(radius / (0.866 * target_h))));
    // Projected count 6*M^2; refuse absurd requests before allocating.
    if (6.0 * static_cast<double>(rings) * rings > 1e6)
        throw resource_error(format_msg("gen_disk_mesh: projected ", 6.0 * rings * rings,
                                        " triangles exceeds the 1e6 limit"));

    Mesh2D mesh;
    mesh.vertices.push_back({0.0, 0.0});
    std::vector<std::vector<int>> ring_verts(rings + 1);
    ring_verts[0] = {0};
    for (int m = 1; m <= rings; ++m) {
        double r = radius * m / rings;
        int n = 6 * m;
        // odd rings carry a half-step offset so inter-ring diagonals stay short
        double offset = (m % 2 == 1) ? 0.5 : 0.0;
        for (int j = 0; j < n; ++j) {
            double th = 2.0 * M_PI * (j + offset) / n;
            ring_verts[m].push_back(mesh.vertex_count());
            mesh.vertices.push_back({r * std::cos(th), r * std::sin(th)});
        }
    }

    // Center fan.
    const auto& r1 = ring_verts[1];
    for (std::size_t j = 0; j < r1.size(); ++j) {
        Triangle tr;
        tr.v = {0, r1[j], r1[(j + 1) % r1.size()]};
        detail::orient_ccw(mesh, tr);
        mesh.triangles.push_back(tr);
    }
    for (int m = 1; m < rings; ++m) detail::zip_rings(mesh, ring_verts[m], ring_verts[m + 1]);

    const auto& outer = ring_verts[rings];
    for (std::size_t j = 0; j < outer.size(); ++j)
        mesh.boundary_edges.push_back({{outer[j], outer[(j + 1) % outer.size()]}, 1});

    mesh.validate();
    if (mesh.max_edge_length() > 1.5 * target_h)
        throw numerical_error(format_msg("gen_disk_mesh: max edge ", mesh.max_edge_length(),
                                         " exceeds 1.5 * target_h = ", 1.5 * target_h));
    return mesh;
}

/// Parent-index bookkeeping for a submesh extraction.
struct SubmeshMaps {
    std::vector<int> vertex_to_parent;
    std::vector<int> cell_to_parent;
};

/// Sub-triangulation of cells whose barycenter lies in B(center, radius),
/// with vertices re-indexed (ascending original order) and the boundary of
/// the selection re-derived (marker 2). Triangle geometry is preserved
/// exactly.
inline Mesh2D submesh(const Mesh2D& mesh, Point center, double radius, SubmeshMaps* maps = nullptr)
{
    if (radius <= 0.0) throw validation_error("submesh: radius must be positive");

    std::vector<int> selected;
    for (int t = 0; t < mesh.triangle_count(); ++t)
        if (dist(mesh.barycenter(t), center) <= radius) selected.push_back(t);
    if (selected.empty())
        throw validation_error(format_msg("submesh: no triangle barycenter inside B((", center.x,
                                          ",", center.y, "), ", radius, ")"));

    std::vector<int> old_to_new(mesh.vertices.size(), -1);
    Mesh2D out;
    for (int t : selected)
        for (int vi : mesh.triangles[t].v) old_to_new[vi] = 0;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (old_to_new[v] == 0) {
            old_to_new[v] = out.vertex_count();
            out.vertices.push_back(mesh.vertices[v]);
        }
    for (int t : selected) {
        Triangle tr = mesh.triangles[t];
        for (auto& vi : tr.v) vi = old_to_new[vi];
        out.triangles.push_back(tr);
    }
    if (maps) {
        maps->vertex_to_parent.assign(out.vertex_count(), -1);
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            if (old_to_new[v] >= 0) maps->vertex_to_parent[old_to_new[v]] = static_cast<int>(v);
        maps->cell_to_parent = selected;
    }

    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tr : out.triangles)
        for (int e = 0; e < 3; ++e) {
            int a = tr.v[e], b = tr.v[(e + 1) % 3];
            edge_count[{std::min(a, b), std::max(a, b)}]++;
        }
    for (const auto& [edge, cnt] : edge_count)
        if (cnt == 1) out.boundary_edges.push_back({{edge.first, edge.second}, 2});

    out.validate();
    return out;
}

/// Nested refinement: every triangle splits into four via edge midpoints.
/// When boundary_snap_radius > 0, new boundary vertices are pushed out to
/// that radius from the origin (disk meshes keep their boundary on the
/// circle).
inline Mesh2D refine_uniform(const Mesh2D& mesh, double boundary_snap_radius = 0.0)
{
    Mesh2D out;
    out.vertices = mesh.vertices;
    std::map<std::pair<int, int>, int> midpoint_of;
    auto midpoint = [&](int a, int b) {
        auto key = std::make_pair(std::min(a, b), std::max(a, b));
        auto it = midpoint_of.find(key);
        if (it != midpoint_of.end()) return it->second;
        Point p{0.5 * (mesh.vertices[a].x + mesh.vertices[b].x),
                0.5 * (mesh.vertices[a].y + mesh.vertices[b].y)};
        int id = out.vertex_count();
        out.vertices.push_back(p);
        midpoint_of[key] = id;
        return id;
    };
    for (const auto& tr : mesh.triangles) {
        int a = tr.v[0], b = tr.v[1], c = tr.v[2];
        int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
        out.triangles.push_back({{a, ab, ca}, tr.region});
        out.triangles.push_back({{ab, b, bc}, tr.region});
        out.triangles.push_back({{ca, bc, c}, tr.region});
        out.triangles.push_back({{ab, bc, ca}, tr.region});
    }
    for (const auto& e : mesh.boundary_edges) {
        int mp = midpoint(e.v[0], e.v[1]);
        if (boundary_snap_radius > 0.0) {
            double r = std::hypot(out.vertices[mp].x, out.vertices[mp].y);
            if (r > 0.0) {
                out.vertices[mp].x *= boundary_snap_radius / r;
                out.vertices[mp].y *= boundary_snap_radius / r;
            }
        }
        out.boundary_edges.push_back({{e.v[0], mp}, e.marker});
        out.boundary_edges.push_back({{mp, e.v[1]}, e.marker});
    }
    out.validate();
    return out;
}

inline void save_mesh(const Mesh2D& mesh, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw validation_error("save_mesh: cannot open " + path);
    char buf[64];
    os << "$Vertices " << mesh.vertex_count() << "\n";
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        std::snprintf(buf, sizeof buf, "%d %.17g %.17g\n", i, mesh.vertices[i].x, mesh.vertices[i].y);
        os << buf;
    }
    os << "$Triangles " << mesh.triangle_count() << "\n";
    for (int i = 0; i < mesh.triangle_count(); ++i) {
        const auto& t = mesh.triangles[i];
        os << i << " " << t.v[0] << " " << t.v[1] << " " << t.v[2] << " " << t.region << "\n";
    }
    os << "$BoundaryEdges " << mesh.boundary_edges.size() << "\n";
    for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
        const auto& e = mesh.boundary_edges[i];
        os << i << " " << e.v[0] << " " << e.v[1] << " " << e.marker << "\n";
    }
    if (!os) throw validation_error("save_mesh: write failed for " + path);
}

inline Mesh2D load_mesh(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw validation_error("load_mesh: cannot open " + path);

    Mesh2D mesh;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw validation_error(format_msg("load_mesh: ", path, ":", line_no, ": ", what));
    };
    auto read_header = [&](const std::string& tag) -> long {
        if (!std::getline(is, line)) {
            ++line_no;
            fail("missing " + tag + " header");
        }
        ++line_no;
        std::istringstream ls(line);
        std::string got;
        long n = -1;
        ls >> got >> n;
        if (got != tag || n < 0) fail("expected \"" + tag + " <count>\", got \"" + line + "\"");
        return n;
    };

    long nv = read_header("$Vertices");
    mesh.vertices.reserve(nv);
    for (long i = 0; i < nv; ++i) {
        if (!std::getline(is, line)) {
            ++line_no;
            fail("unexpected end of file in vertex list");
        }
        ++line_no;
        std::istringstream ls(line);
        long id;
        Point p;
        if (!(ls >> id >> p.x >> p.y)) fail("malformed vertex line");
        if (id != i) fail(format_msg("vertex id ", id, " out of order (expected ", i, ")"));
        mesh.vertices.push_back(p);
    }

    long nt = read_header("$Triangles");
    mesh.triangles.reserve(nt);
    for (long i = 0; i < nt; ++i) {
        if (!std::getline(is, line)) {
            ++line_no;
            fail("unexpected end of file in triangle list");
        }
        ++line_no;
        std::istringstream ls(line);
        long id;
        Triangle t;
        if (!(ls >> id >> t.v[0] >> t.v[1] >> t.v[2] >> t.region)) fail("malformed triangle line");
        if (id != i) fail(format_msg("triangle id ", id, " out of order (expected ", i, ")"));
        for (int vi : t.v)
            if (vi < 0 || vi >= nv) fail(format_msg("triangle references vertex ", vi, " out of range"));
        mesh.triangles.push_back(t);
    }

    long nb = read_header("$BoundaryEdges");
    mesh.boundary_edges.reserve(nb);
    for (long i = 0; i < nb; ++i) {
        if (!std::getline(is, line)) {
            ++line_no;
            fail("unexpected end of file in boundary edge list");
        }
        ++line_no;
        std::istringstream ls(line);
        long id;
        BoundaryEdge e;
        if (!(ls >> id >> e.v[0] >> e.v[1] >> e.marker)) fail("malformed boundary edge line");
        if (id != i) fail(format_msg("boundary edge id ", id, " out of order (expected ", i, ")"));
        for (int vi : e.v)
            if (vi < 0 || vi >= nv) fail(format_msg("edge references vertex ", vi, " out of range"));
        mesh.boundary_edges.push_back(e);
    }
    mesh.validate();
    return mesh;
}

}  // namespace mfhelm
