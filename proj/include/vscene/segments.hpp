#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "vscene/geometry.hpp"
#include "vscene/ply.hpp"

namespace vscene {

using SceneMesh = PlyMesh;

struct Segment {
    int id = 0;
    std::vector<int> vertices;  // indices into the mesh, sorted ascending
    std::optional<double> height;
    std::optional<double> area;
    std::optional<Rect> mer;
};

/// Oversegmentation result: segments partition the mesh vertices; edges are
/// unordered pairs of adjacent segment ids.
struct SegmentGraph {
    std::vector<Segment> segments;
    std::vector<std::pair<int, int>> edges;
};

/// Area-weighted vertex normals (unnormalized face normals accumulated at the
/// corners, then normalized). Isolated vertices get a zero normal.
inline std::vector<Point3> vertex_normals(const SceneMesh& mesh) {
    std::vector<Point3> normals(mesh.vertices.size());
    for (const auto& f : mesh.faces) {
        const Point3& a = mesh.vertices[f[0]];
        const Point3& b = mesh.vertices[f[1]];
        const Point3& c = mesh.vertices[f[2]];
        const Point3 e1 = b - a, e2 = c - a;
        const Point3 n{e1.y * e2.z - e1.z * e2.y, e1.z * e2.x - e1.x * e2.z,
                       e1.x * e2.y - e1.y * e2.x};
        for (const int v : f) normals[v] = normals[v] + n;
    }
    for (Point3& n : normals) {
        const double len = norm(n);
        if (len > 0.0) n = (1.0 / len) * n;
    }
    return normals;
}

namespace detail {

struct DisjointSet {
    std::vector<int> parent;
    std::vector<int> size;

    explicit DisjointSet(std::size_t n) : parent(n), size(n, 1) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }

    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    // Attaches b's root under a's root (keeps a as the representative).
    void union_into(int a, int b) {
        const int ra = find(a), rb = find(b);
        if (ra == rb) return;
        parent[rb] = ra;
        size[ra] += size[rb];
    }
};

}  // namespace detail

/// Felzenszwalb-Huttenlocher segmentation over the mesh-edge vertex graph
/// with edge weight 1 - dot(normal_u, normal_v). `fh_scale` is the adaptive
/// threshold constant. Segment adjacency combines shared mesh edges with
/// vertex proximity below `adjacency_tol` (oversegmented patches often abut
/// without sharing vertices). Disconnected meshes are handled per component.
inline SegmentGraph oversegment(const SceneMesh& mesh, double fh_scale = 0.05,
                                double adjacency_tol = 0.01) {
    if (mesh.vertices.empty()) throw std::invalid_argument("oversegment: empty mesh");
    if (mesh.faces.empty()) throw std::invalid_argument("oversegment: mesh has no faces");
    for (const auto& f : mesh.faces) {
        for (const int v : f) {
            if (v < 0 || v >= static_cast<int>(mesh.vertices.size())) {
                throw std::invalid_argument("oversegment: face index out of range");
            }
        }
    }

    const std::vector<Point3> normals = vertex_normals(mesh);

    std::vector<std::pair<int, int>> mesh_edges;
    mesh_edges.reserve(mesh.faces.size() * 3);
    for (const auto& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            const int u = f[k], v = f[(k + 1) % 3];
            if (u != v) mesh_edges.emplace_back(std::min(u, v), std::max(u, v));
        }
    }
    std::sort(mesh_edges.begin(), mesh_edges.end());
    mesh_edges.erase(std::unique(mesh_edges.begin(), mesh_edges.end()), mesh_edges.end());

    struct WeightedEdge {
        double w;
        int a, b;
        bool operator<(const WeightedEdge& o) const {
            return w < o.w || (w == o.w && (a < o.a || (a == o.a && b < o.b)));
        }
    };
    std::vector<WeightedEdge> weighted;
    weighted.reserve(mesh_edges.size());
    for (const auto& [u, v] : mesh_edges) {
        weighted.push_back({1.0 - dot(normals[u], normals[v]), u, v});
    }
    std::sort(weighted.begin(), weighted.end());

    detail::DisjointSet dsu(mesh.vertices.size());
    std::vector<double> threshold(mesh.vertices.size(), fh_scale);
    for (const auto& e : weighted) {
        const int ra = dsu.find(e.a), rb = dsu.find(e.b);
        if (ra == rb) continue;
        if (e.w <= threshold[ra] && e.w <= threshold[rb]) {
            dsu.union_into(ra, rb);
            const int r = dsu.find(ra);
            threshold[r] = e.w + fh_scale / dsu.size[r];
        }
    }

    // components -> segments, ordered by smallest member vertex
    std::unordered_map<int, int> root_to_id;
    SegmentGraph graph;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const int r = dsu.find(static_cast<int>(v));
        auto [it, inserted] = root_to_id.try_emplace(r, static_cast<int>(graph.segments.size()));
        if (inserted) graph.segments.push_back(Segment{it->second, {}, {}, {}, {}});
        graph.segments[it->second].vertices.push_back(static_cast<int>(v));
    }

    std::set<std::pair<int, int>> adjacency;
    const auto segment_of = [&](int v) { return root_to_id.at(dsu.find(v)); };
    for (const auto& [u, v] : mesh_edges) {
        const int su = segment_of(u), sv = segment_of(v);
        if (su != sv) adjacency.emplace(std::min(su, sv), std::max(su, sv));
    }

    // proximity pass over a uniform hash grid
    if (adjacency_tol > 0.0) {
        const double cell = adjacency_tol;
        const auto key = [&](const Point3& p) {
            const auto q = [&](double c) { return static_cast<long long>(std::floor(c / cell)); };
            return std::array<long long, 3>{q(p.x), q(p.y), q(p.z)};
        };
        std::map<std::array<long long, 3>, std::vector<int>> grid;
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            grid[key(mesh.vertices[v])].push_back(static_cast<int>(v));
        }
        const double tol2 = adjacency_tol * adjacency_tol;
        for (const auto& [k, cell_verts] : grid) {
            for (long long dx = -1; dx <= 1; ++dx) {
                for (long long dy = -1; dy <= 1; ++dy) {
                    for (long long dz = -1; dz <= 1; ++dz) {
                        const std::array<long long, 3> nk{k[0] + dx, k[1] + dy, k[2] + dz};
                        const auto it = grid.find(nk);
                        if (it == grid.end()) continue;
                        for (const int u : cell_verts) {
                            for (const int v : it->second) {
                                if (u >= v) continue;
                                const Point3 d = mesh.vertices[u] - mesh.vertices[v];
                                if (dot(d, d) > tol2) continue;
                                const int su = segment_of(u), sv = segment_of(v);
                                if (su != sv) adjacency.emplace(std::min(su, sv), std::max(su, sv));
                            }
                        }
                    }
                }
            }
        }
    }

    graph.edges.assign(adjacency.begin(), adjacency.end());
    return graph;
}

/// A segment is horizontal when its max-or-min z is within 0.2 m of its
/// median z (median of an even-length list is the lower middle element).
inline bool is_horizontal(const Segment& seg, const SceneMesh& mesh) {
    if (seg.vertices.empty()) throw std::invalid_argument("is_horizontal: empty segment");
    std::vector<double> z;
    z.reserve(seg.vertices.size());
    for (const int v : seg.vertices) z.push_back(mesh.vertices[v].z);
    std::sort(z.begin(), z.end());
    const double median = z[(z.size() - 1) / 2];
    return std::abs(z.back() - median) < 0.2 || std::abs(z.front() - median) < 0.2;
}

/// Convex-hull area of the segment's XY projection.
inline double segment_area(const Segment& seg, const SceneMesh& mesh) {
    std::vector<Vec2> xy;
    xy.reserve(seg.vertices.size());
    for (const int v : seg.vertices) xy.push_back(mesh.vertices[v].xy());
    return polygon_area(convex_hull_2d(xy));
}

/// Mean z over the segment's vertices with near-vertical normals
/// (|nz| > 0.88). Unlike the template surface height, no percentile slice is
/// taken. Throws when no vertex qualifies.
inline double segment_height(const Segment& seg, const SceneMesh& mesh,
                             const std::vector<Point3>& normals) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const int v : seg.vertices) {
        if (std::abs(normals[v].z) > 0.88) {
            sum += mesh.vertices[v].z;
            ++count;
        }
    }
    if (count == 0) throw std::runtime_error("not a surface segment");
    return sum / static_cast<double>(count);
}

inline double segment_height(const Segment& seg, const SceneMesh& mesh) {
    return segment_height(seg, mesh, vertex_normals(mesh));
}

/// Grows every horizontal seed segment (area > a_min, height > h_min) by
/// absorbing neighbors whose height differs from the seed height by less than
/// dh, iterating to a fixpoint. Absorbed segments disappear; the merged
/// segment keeps the seed's height and gets its MER computed. Seeds are
/// processed in descending initial area (ties by id) so the output is
/// deterministic.
inline SegmentGraph merge_horizontal(const SegmentGraph& graph, const SceneMesh& mesh,
                                     double a_min = 0.1, double h_min = 0.1, double dh = 0.02) {
    const std::vector<Point3> normals = vertex_normals(mesh);
    const std::size_t n = graph.segments.size();

    std::vector<std::optional<double>> height(n);
    std::vector<double> area(n, 0.0);
    std::vector<bool> seed(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const Segment& s = graph.segments[i];
        area[i] = segment_area(s, mesh);
        try {
            height[i] = segment_height(s, mesh, normals);
        } catch (const std::runtime_error&) {
            height[i] = std::nullopt;
        }
        seed[i] = is_horizontal(s, mesh) && area[i] > a_min && height[i] && *height[i] > h_min;
    }

    std::vector<int> seed_order;
    for (std::size_t i = 0; i < n; ++i) {
        if (seed[i]) seed_order.push_back(static_cast<int>(i));
    }
    std::sort(seed_order.begin(), seed_order.end(),
              [&](int a, int b) { return area[a] > area[b] || (area[a] == area[b] && a < b); });

    detail::DisjointSet dsu(n);
    const auto neighbors_of = [&](int root) {
        std::set<int> out;
        for (const auto& [a, b] : graph.edges) {
            const int ra = dsu.find(a), rb = dsu.find(b);
            if (ra == root && rb != root) out.insert(rb);
            if (rb == root && ra != root) out.insert(ra);
        }
        return out;
    };

    bool merged_any = true;
    while (merged_any) {
        merged_any = false;
        for (const int s : seed_order) {
            if (dsu.find(s) != s) continue;  // absorbed into an earlier seed
            bool grew = true;
            while (grew) {
                grew = false;
                for (const int nb : neighbors_of(s)) {
                    if (height[nb] && std::abs(*height[nb] - *height[s]) < dh) {
                        dsu.union_into(s, nb);
                        grew = true;
                        merged_any = true;
                    }
                }
            }
        }
    }

    // assemble the merged graph; merged entities keep the seed height
    SegmentGraph out;
    std::unordered_map<int, int> root_to_new;
    for (std::size_t i = 0; i < n; ++i) {
        const int r = dsu.find(static_cast<int>(i));
        if (static_cast<int>(i) != r) continue;
        const int new_id = static_cast<int>(out.segments.size());
        root_to_new[r] = new_id;
        Segment seg;
        seg.id = new_id;
        seg.height = height[i];
        seg.area = area[i];
        out.segments.push_back(std::move(seg));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int target = root_to_new.at(dsu.find(static_cast<int>(i)));
        const auto& src = graph.segments[i].vertices;
        auto& dst = out.segments[target].vertices;
        dst.insert(dst.end(), src.begin(), src.end());
    }
    for (Segment& seg : out.segments) std::sort(seg.vertices.begin(), seg.vertices.end());
    for (std::size_t i = 0; i < n; ++i) {
        const int r = dsu.find(static_cast<int>(i));
        if (!seed[r]) continue;
        Segment& seg = out.segments[root_to_new.at(r)];
        if (!seg.mer) {
            std::vector<Vec2> xy;
            xy.reserve(seg.vertices.size());
            for (const int v : seg.vertices) xy.push_back(mesh.vertices[v].xy());
            seg.mer = min_area_rect(xy);
            seg.area = polygon_area(convex_hull_2d(xy));
        }
    }

    std::set<std::pair<int, int>> edges;
    for (const auto& [a, b] : graph.edges) {
        const int na = root_to_new.at(dsu.find(a));
        const int nb = root_to_new.at(dsu.find(b));
        if (na != nb) edges.emplace(std::min(na, nb), std::max(na, nb));
    }
    out.edges.assign(edges.begin(), edges.end());
    return out;
}

/// Assigns a seed MER to each 2D center that falls inside it. A center inside
/// one seed MER gets that MER; when several centers share a MER, the
/// segment's XY vertices are k-means-clustered with those centers as the
/// initial centroids and each center gets its cluster's MER. Centers inside
/// no MER stay unassigned. Keys of the returned map are indices into
/// `centers`.
inline std::map<std::size_t, Rect> assign_segments(const std::vector<Segment>& seeds,
                                                   const SceneMesh& mesh,
                                                   const std::vector<Vec2>& centers) {
    std::map<std::size_t, Rect> out;
    std::vector<bool> taken(centers.size(), false);
    for (const Segment& seed : seeds) {
        if (!seed.mer) continue;
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < centers.size(); ++i) {
            if (!taken[i] && seed.mer->contains(centers[i])) members.push_back(i);
        }
        if (members.empty()) continue;
        if (members.size() == 1) {
            out[members[0]] = *seed.mer;
            taken[members[0]] = true;
            continue;
        }
        std::vector<Vec2> xy;
        xy.reserve(seed.vertices.size());
        for (const int v : seed.vertices) xy.push_back(mesh.vertices[v].xy());
        if (members.size() > xy.size()) {  // degenerate: fewer vertices than labels
            out[members[0]] = *seed.mer;
            taken[members[0]] = true;
            continue;
        }
        std::vector<Vec2> init;
        for (const std::size_t i : members) init.push_back(centers[i]);
        const KMeansResult res = kmeans_2d(xy, members.size(), &init);
        for (std::size_t j = 0; j < members.size(); ++j) {
            std::vector<Vec2> cluster;
            for (std::size_t p = 0; p < xy.size(); ++p) {
                if (res.assignment[p] == static_cast<int>(j)) cluster.push_back(xy[p]);
            }
            if (cluster.empty()) continue;
            out[members[j]] = min_area_rect(cluster);
            taken[members[j]] = true;
        }
    }
    return out;
}

}  // namespace vscene
