#pragma once

// Hand-built fixtures shared by the unit suites and the acceptance runner.
// The table / two-pillar clouds follow the slice and area arithmetic worked
// out by hand before the implementation existed; keep the layouts stable.

#include <filesystem>
#include <string>
#include <vector>

#include "vscene/geometry.hpp"
#include "vscene/ply.hpp"
#include "vscene/shapes.hpp"

namespace fixtures {

using namespace vscene;

inline void add_grid(PointCloud& cloud, Vec2 center, double span_x, double span_y, int nx, int ny,
                     double z) {
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            const double fx = nx > 1 ? static_cast<double>(ix) / (nx - 1) - 0.5 : 0.0;
            const double fy = ny > 1 ? static_cast<double>(iy) / (ny - 1) - 0.5 : 0.0;
            cloud.points.push_back({center.x + fx * span_x, center.y + fy * span_y, z});
        }
    }
}

/// Table: 0.8 x 0.8 top at z = 0.7 sampled as a 30x20 grid (600 points) plus
/// four 0.1 x 0.1 foot pads at z = 0 (50 points each). All 800 points carry
/// vertical normals, so the sorted qualifying-z list is 200 zeros followed by
/// 600 entries at 0.7 and the [640, 720) slice averages to exactly 0.7.
inline PointCloud table_cloud() {
    PointCloud c;
    add_grid(c, {0, 0}, 0.8, 0.8, 30, 20, 0.7);
    for (const Vec2 corner : {Vec2{-0.3, -0.3}, Vec2{0.3, -0.3}, Vec2{-0.3, 0.3}, Vec2{0.3, 0.3}}) {
        add_grid(c, corner, 0.1, 0.1, 5, 10, 0.0);
    }
    return c;
}

/// Two 0.2 x 0.2 pillar tops at z = 0.7 on opposite corners of a 1 x 1
/// footprint, plus two ground pads pinning the MER to 1 x 1. The supporting
/// band holds only the pillar tops, whose hulls sum to 0.08 m^2, far below
/// the 0.9 * 1 * 1 compactness threshold.
inline PointCloud two_pillar_cloud() {
    PointCloud c;
    add_grid(c, {-0.4, -0.4}, 0.2, 0.2, 10, 10, 0.7);
    add_grid(c, {0.4, 0.4}, 0.2, 0.2, 10, 10, 0.7);
    add_grid(c, {-0.4, 0.4}, 0.2, 0.2, 5, 10, 0.0);
    add_grid(c, {0.4, -0.4}, 0.2, 0.2, 5, 10, 0.0);
    return c;
}

/// Axis-aligned box surface with equal sampling on all six faces; z in [0, h],
/// centered on the origin in XY.
inline PointCloud box_cloud(double l, double w, double h, int side = 10) {
    PointCloud c;
    add_grid(c, {0, 0}, l, w, side, side, h);   // top
    add_grid(c, {0, 0}, l, w, side, side, 0.0); // bottom
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            const double f = static_cast<double>(i) / (side - 1) - 0.5;
            const double g = static_cast<double>(j) / (side - 1) * h;
            c.points.push_back({-0.5 * l, f * w, g});
            c.points.push_back({0.5 * l, f * w, g});
            c.points.push_back({f * l, -0.5 * w, g});
            c.points.push_back({f * l, 0.5 * w, g});
        }
    }
    return c;
}

/// Flat disk of radius r at z = 0.
inline PointCloud disk_cloud(double r, int rings = 12, int per_ring = 48) {
    PointCloud c;
    c.points.push_back({0, 0, 0});
    for (int k = 1; k <= rings; ++k) {
        const double rr = r * k / rings;
        for (int i = 0; i < per_ring; ++i) {
            const double a = 2.0 * std::numbers::pi * i / per_ring;
            c.points.push_back({rr * std::cos(a), rr * std::sin(a), 0.0});
        }
    }
    return c;
}

// --- meshes ---------------------------------------------------------------

/// Rectangular grid patch in the XY plane at height z, triangulated.
inline PlyMesh grid_patch(Vec2 lo, Vec2 hi, int nx, int ny, double z) {
    PlyMesh m;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const double x = lo.x + (hi.x - lo.x) * ix / (nx - 1);
            const double y = lo.y + (hi.y - lo.y) * iy / (ny - 1);
            m.vertices.push_back({x, y, z});
        }
    }
    for (int iy = 0; iy + 1 < ny; ++iy) {
        for (int ix = 0; ix + 1 < nx; ++ix) {
            const int a = iy * nx + ix, b = a + 1, c = a + nx, d = c + 1;
            m.faces.push_back({a, b, d});
            m.faces.push_back({a, d, c});
        }
    }
    return m;
}

inline void append_mesh(PlyMesh& into, const PlyMesh& other) {
    const int base = static_cast<int>(into.vertices.size());
    into.vertices.insert(into.vertices.end(), other.vertices.begin(), other.vertices.end());
    for (const auto& f : other.faces) into.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
}

/// Two coplanar quads sharing an edge: 6 vertices, one flat strip.
inline PlyMesh two_coplanar_quads() {
    PlyMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 0}, {1, 1, 0}, {2, 1, 0}};
    m.faces = {{0, 1, 4}, {0, 4, 3}, {1, 2, 5}, {1, 5, 4}};
    return m;
}

/// Floor quad plus wall quad standing on its y = 0 edge. The quads do not
/// share vertex indices (8 vertices total); the wall base coincides with the
/// floor edge positionally, which is what segment adjacency keys on.
inline PlyMesh perpendicular_quads(double floor_z = 0.0) {
    PlyMesh m;
    m.vertices = {{0, 0, floor_z}, {1, 0, floor_z}, {1, 1, floor_z}, {0, 1, floor_z},
                  {0, 0, floor_z}, {1, 0, floor_z}, {1, 0, floor_z + 1}, {0, 0, floor_z + 1}};
    m.faces = {{0, 1, 2}, {0, 2, 3}, {4, 5, 6}, {4, 6, 7}};
    return m;
}

inline PlyMesh single_triangle() {
    PlyMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}};
    return m;
}

/// Tabletop oversegmented into two abutting halves: the left patch sits at
/// z_left over x in [0, 1], the right at z_right over x in [1, 2]. The seam
/// columns share XY positions, so the patches are adjacent without any
/// connecting faces.
inline PlyMesh step_tabletop_mesh(double z_left = 0.70, double z_right = 0.695) {
    PlyMesh m = grid_patch({0, 0}, {1, 1}, 6, 6, z_left);
    append_mesh(m, grid_patch({1, 0}, {2, 1}, 6, 6, z_right));
    return m;
}

/// Raised 2 x 2 platform at z = 0.5 plus a 2 x 2 vertical wall along y = 0.
inline PlyMesh floor_wall_mesh() {
    PlyMesh m = grid_patch({0, 0}, {2, 2}, 6, 6, 0.5);
    PlyMesh wall;
    for (int iz = 0; iz < 6; ++iz) {
        for (int ix = 0; ix < 6; ++ix) {
            wall.vertices.push_back({2.0 * ix / 5, 0.0, 0.5 + 2.0 * iz / 5});
        }
    }
    for (int iz = 0; iz + 1 < 6; ++iz) {
        for (int ix = 0; ix + 1 < 6; ++ix) {
            const int a = iz * 6 + ix, b = a + 1, c = a + 6, d = c + 1;
            wall.faces.push_back({a, b, d});
            wall.faces.push_back({a, d, c});
        }
    }
    append_mesh(m, wall);
    return m;
}

// --- on-disk fixtures -----------------------------------------------------

inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("vscene_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Writes a small template library covering all three shape classes. Binary
/// and ASCII files are mixed on purpose.
inline void write_template_dir(const std::filesystem::path& dir) {
    const auto put = [&](const std::string& category, const std::string& id, const PointCloud& c,
                         bool binary) {
        std::filesystem::create_directories(dir / category);
        write_point_cloud_ply(dir / category / (id + ".ply"), c, binary);
    };
    put("table", "t0", table_cloud(), true);
    put("table", "t1", two_pillar_cloud(), false);
    put("desk", "d0", table_cloud(), true);
    put("bench", "bn0", box_cloud(1.4, 0.45, 0.45), true);
    put("chair", "c0", box_cloud(0.5, 0.5, 0.9), false);
    put("bathtub", "bt0", box_cloud(1.6, 0.75, 0.55), true);
    put("lamp", "l0", box_cloud(0.2, 0.2, 0.5), true);
    put("bottle", "b0", box_cloud(0.06, 0.06, 0.22, 6), true);
    put("keyboard", "k0", box_cloud(0.4, 0.14, 0.03, 8), true);
    put("laptop", "lp0", box_cloud(0.33, 0.23, 0.2, 8), true);
}

}  // namespace fixtures
