#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "vscene/segments.hpp"

using namespace vscene;

namespace {

double d2(Vec2 a, Vec2 b) { return dot(a - b, a - b); }

bool is_partition(const SegmentGraph& g, const SceneMesh& mesh) {
    std::vector<int> seen(mesh.vertices.size(), 0);
    for (const Segment& s : g.segments) {
        for (const int v : s.vertices) ++seen[v];
    }
    return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

SceneMesh translated_rotated(const SceneMesh& in, double dx, double dy, double theta_deg) {
    SceneMesh out = in;
    const double c = std::cos(deg_to_rad(theta_deg)), s = std::sin(deg_to_rad(theta_deg));
    for (Point3& p : out.vertices) {
        p = {c * p.x - s * p.y + dx, s * p.x + c * p.y + dy, p.z};
    }
    return out;
}

}  // namespace

TEST_CASE("oversegment merges coplanar quads into one segment") {
    const auto g = oversegment(fixtures::two_coplanar_quads(), 0.5);
    REQUIRE(g.segments.size() == 1);
    REQUIRE(g.edges.empty());
    REQUIRE(is_partition(g, fixtures::two_coplanar_quads()));
}

TEST_CASE("oversegment splits floor and wall and records their adjacency") {
    const auto mesh = fixtures::perpendicular_quads();
    const auto g = oversegment(mesh, 0.5);
    REQUIRE(g.segments.size() == 2);
    REQUIRE(g.edges.size() == 1);
    REQUIRE(is_partition(g, mesh));
}

TEST_CASE("oversegment of a single triangle") {
    const auto g = oversegment(fixtures::single_triangle(), 0.5);
    REQUIRE(g.segments.size() == 1);
    REQUIRE(g.edges.empty());
}

TEST_CASE("oversegment rejects invalid meshes") {
    REQUIRE_THROWS_AS(oversegment(SceneMesh{}, 0.5), std::invalid_argument);
    SceneMesh bad = fixtures::single_triangle();
    bad.faces.push_back({0, 1, 99});
    REQUIRE_THROWS_AS(oversegment(bad, 0.5), std::invalid_argument);
}

TEST_CASE("oversegment output partitions fixture meshes") {
    for (const SceneMesh& mesh : {fixtures::step_tabletop_mesh(), fixtures::floor_wall_mesh()}) {
        const auto g = oversegment(mesh);
        REQUIRE(is_partition(g, mesh));
    }
}

TEST_CASE("is_horizontal median rule") {
    SECTION("flat patch is horizontal") {
        SceneMesh mesh = fixtures::grid_patch({0, 0}, {1, 1}, 3, 3, 0.7);
        Segment seg;
        seg.vertices.resize(mesh.vertices.size());
        std::iota(seg.vertices.begin(), seg.vertices.end(), 0);
        REQUIRE(is_horizontal(seg, mesh));
    }
    SECTION("uniform wall spanning 2.5 m is not") {
        SceneMesh mesh;
        for (int i = 0; i <= 10; ++i) mesh.vertices.push_back({0.0, double(i), 0.25 * i});
        mesh.faces.push_back({0, 1, 2});
        Segment seg;
        seg.vertices.resize(mesh.vertices.size());
        std::iota(seg.vertices.begin(), seg.vertices.end(), 0);
        // median 1.25; both max and min differ by exactly 1.25
        REQUIRE_FALSE(is_horizontal(seg, mesh));
    }
    SECTION("L-shaped segment with 60 percent at one height is horizontal") {
        SceneMesh mesh;
        for (int i = 0; i < 60; ++i) mesh.vertices.push_back({0.01 * i, 0, 0.7});
        for (int i = 0; i < 40; ++i) mesh.vertices.push_back({0, 0.01 * i, 0.7 + 0.02 * (i + 1)});
        mesh.faces.push_back({0, 1, 2});
        Segment seg;
        seg.vertices.resize(mesh.vertices.size());
        std::iota(seg.vertices.begin(), seg.vertices.end(), 0);
        REQUIRE(is_horizontal(seg, mesh));  // median sits at 0.7, min difference 0
    }
}

TEST_CASE("is_horizontal is invariant under XY motion and Z rotation") {
    const auto base = fixtures::step_tabletop_mesh();
    const auto g = oversegment(base);
    const auto moved = translated_rotated(base, 3.7, -1.2, 33.0);
    for (const Segment& s : g.segments) {
        REQUIRE(is_horizontal(s, base) == is_horizontal(s, moved));
    }
}

TEST_CASE("segment_area on canonical patches") {
    SceneMesh unit = fixtures::grid_patch({0, 0}, {1, 1}, 4, 4, 0.3);
    Segment seg;
    seg.vertices.resize(unit.vertices.size());
    std::iota(seg.vertices.begin(), seg.vertices.end(), 0);
    REQUIRE(segment_area(seg, unit) == Catch::Approx(1.0));

    SceneMesh degenerate;
    degenerate.vertices = {{0, 0, 0}, {2, 0, 0}};
    degenerate.faces.push_back({0, 1, 0});
    Segment two{0, {0, 1}, {}, {}, {}};
    REQUIRE(segment_area(two, degenerate) == 0.0);

    SceneMesh hex;
    for (int i = 0; i < 6; ++i) {
        const double a = deg_to_rad(60.0 * i);
        hex.vertices.push_back({std::cos(a), std::sin(a), 0.9});
    }
    hex.faces.push_back({0, 1, 2});
    Segment hseg{0, {0, 1, 2, 3, 4, 5}, {}, {}, {}};
    REQUIRE(segment_area(hseg, hex) == Catch::Approx(2.598).margin(1e-3));
}

TEST_CASE("segment_height rules") {
    SECTION("flat patch height") {
        SceneMesh mesh = fixtures::grid_patch({0, 0}, {1, 1}, 4, 4, 0.7);
        Segment seg;
        seg.vertices.resize(mesh.vertices.size());
        std::iota(seg.vertices.begin(), seg.vertices.end(), 0);
        REQUIRE(segment_height(seg, mesh) == Catch::Approx(0.7));
    }
    SECTION("mean over two flat sub-patches") {
        SceneMesh mesh = fixtures::grid_patch({0, 0}, {1, 1}, 4, 4, 0.6);
        fixtures::append_mesh(mesh, fixtures::grid_patch({5, 0}, {6, 1}, 4, 4, 0.8));
        Segment seg;
        seg.vertices.resize(mesh.vertices.size());
        std::iota(seg.vertices.begin(), seg.vertices.end(), 0);
        REQUIRE(segment_height(seg, mesh) == Catch::Approx(0.7));
    }
    SECTION("wall has no qualifying vertices") {
        const auto mesh = fixtures::perpendicular_quads();
        Segment wall{0, {4, 5, 6, 7}, {}, {}, {}};
        REQUIRE_THROWS_WITH(segment_height(wall, mesh), "not a surface segment");
    }
}

TEST_CASE("merge_horizontal joins the split tabletop and keeps the seed height") {
    const auto mesh = fixtures::step_tabletop_mesh();
    const auto g = oversegment(mesh);
    REQUIRE(g.segments.size() == 2);
    REQUIRE(g.edges.size() == 1);

    const auto merged = merge_horizontal(g, mesh);
    REQUIRE(merged.segments.size() == 1);
    const Segment& seed = merged.segments[0];
    REQUIRE(seed.height.has_value());
    REQUIRE(*seed.height == Catch::Approx(0.70));
    REQUIRE(seed.mer.has_value());
    REQUIRE(seed.mer->length == Catch::Approx(2.0).margin(1e-6));
    REQUIRE(seed.mer->width == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(seed.mer->contains({0.5, 0.5}, 1e-9));
    REQUIRE(seed.mer->contains({1.5, 0.5}, 1e-9));
}

TEST_CASE("merge_horizontal respects the height tolerance") {
    const auto mesh = fixtures::step_tabletop_mesh(0.70, 0.75);
    const auto g = oversegment(mesh);
    const auto merged = merge_horizontal(g, mesh);
    REQUIRE(merged.segments.size() == g.segments.size());  // 0.05 >= dh, no merge
}

TEST_CASE("merge_horizontal ignores small seeds") {
    // 0.2 x 0.2 patch: area 0.04 < a_min
    const auto mesh = fixtures::grid_patch({0, 0}, {0.2, 0.2}, 4, 4, 0.7);
    const auto g = oversegment(mesh);
    const auto merged = merge_horizontal(g, mesh);
    REQUIRE(merged.segments.size() == 1);
    REQUIRE_FALSE(merged.segments[0].mer.has_value());
}

TEST_CASE("merge_horizontal is monotone") {
    for (const SceneMesh& mesh : {fixtures::step_tabletop_mesh(), fixtures::floor_wall_mesh()}) {
        const auto g = oversegment(mesh);
        const auto merged = merge_horizontal(g, mesh);
        REQUIRE(merged.segments.size() <= g.segments.size());
        REQUIRE(is_partition(merged, mesh));
    }
}

TEST_CASE("floor-plus-wall yields exactly the floor as horizontal seed") {
    const auto mesh = fixtures::floor_wall_mesh();
    const auto merged = merge_horizontal(oversegment(mesh), mesh);
    int seeds = 0;
    for (const Segment& s : merged.segments) {
        if (s.mer.has_value()) {
            ++seeds;
            REQUIRE(*s.height == Catch::Approx(0.5));
            REQUIRE(*s.area == Catch::Approx(4.0).margin(1e-6));
        }
    }
    REQUIRE(seeds == 1);
}

TEST_CASE("assign_segments single label") {
    const auto mesh = fixtures::step_tabletop_mesh();
    const auto merged = merge_horizontal(oversegment(mesh), mesh);
    const auto assigned = assign_segments(merged.segments, mesh, {{0.8, 0.4}});
    REQUIRE(assigned.size() == 1);
    REQUIRE(assigned.at(0).contains({0.8, 0.4}, 1e-9));
    REQUIRE(assigned.at(0).length == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("assign_segments splits a shared segment between two labels") {
    const auto mesh = fixtures::step_tabletop_mesh(0.7, 0.7);
    const auto merged = merge_horizontal(oversegment(mesh), mesh);
    REQUIRE(merged.segments.size() == 1);

    const std::vector<Vec2> labels{{0.4, 0.5}, {1.6, 0.5}};
    const auto assigned = assign_segments(merged.segments, mesh, labels);
    REQUIRE(assigned.size() == 2);
    REQUIRE(assigned.at(0).contains(labels[0], 1e-9));
    REQUIRE(assigned.at(1).contains(labels[1], 1e-9));
    const auto overlap = rects_overlap(assigned.at(0), assigned.at(1));
    REQUIRE(overlap.area < 0.05);  // near-disjoint halves

    // every vertex belongs to the cluster of the nearer label (the converged
    // split coincides with the label midline for this fixture)
    for (const int v : merged.segments[0].vertices) {
        const Vec2 p = mesh.vertices[v].xy();
        const std::size_t nearer = d2(p, labels[0]) <= d2(p, labels[1]) ? 0 : 1;
        REQUIRE(assigned.at(nearer).contains(p, 1e-6));
    }
}

TEST_CASE("assign_segments leaves outside labels unassigned") {
    const auto mesh = fixtures::step_tabletop_mesh();
    const auto merged = merge_horizontal(oversegment(mesh), mesh);
    const auto assigned = assign_segments(merged.segments, mesh, {{10.0, 10.0}});
    REQUIRE(assigned.empty());
}
