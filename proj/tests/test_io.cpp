#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "vscene/json_io.hpp"
#include "vscene/ply.hpp"
#include "vscene/rng.hpp"

using namespace vscene;

TEST_CASE("point cloud PLY round trip in both formats") {
    const auto dir = fixtures::fresh_dir("io_ply");
    Rng rng(1);
    PointCloud cloud;
    for (int i = 0; i < 200; ++i) {
        cloud.points.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    }
    for (const bool binary : {true, false}) {
        const auto path = dir / (binary ? std::string("b.ply") : std::string("a.ply"));
        write_point_cloud_ply(path, cloud, binary);
        const PointCloud back = read_point_cloud_ply(path);
        REQUIRE(back.size() == cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            // float32 storage: compare at single precision
            REQUIRE(back.points[i].x == Catch::Approx(cloud.points[i].x).margin(1e-6));
            REQUIRE(back.points[i].y == Catch::Approx(cloud.points[i].y).margin(1e-6));
            REQUIRE(back.points[i].z == Catch::Approx(cloud.points[i].z).margin(1e-6));
        }
    }
}

TEST_CASE("mesh PLY round trip preserves faces") {
    const auto dir = fixtures::fresh_dir("io_mesh");
    const PlyMesh mesh = fixtures::step_tabletop_mesh();
    for (const bool binary : {true, false}) {
        const auto path = dir / (binary ? std::string("b.ply") : std::string("a.ply"));
        write_mesh_ply(path, mesh, binary);
        const PlyMesh back = read_mesh_ply(path);
        REQUIRE(back.vertices.size() == mesh.vertices.size());
        REQUIRE(back.faces == mesh.faces);
    }
}

TEST_CASE("labeled scene PLY carries instance and class ids") {
    const auto dir = fixtures::fresh_dir("io_labeled");
    LabeledPoints scene;
    Rng rng(2);
    for (int i = 0; i < 500; ++i) {
        scene.cloud.points.push_back({rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0, 2)});
        scene.instance_ids.push_back(1 + static_cast<int>(rng.uniform_index(5)));
        scene.class_ids.push_back(static_cast<int>(rng.uniform_index(22)));
    }
    write_labeled_ply(dir / "scene.ply", scene);
    const LabeledPoints back = read_labeled_ply(dir / "scene.ply");
    REQUIRE(back.instance_ids == scene.instance_ids);
    REQUIRE(back.class_ids == scene.class_ids);
}

TEST_CASE("PLY reader skips unknown properties and handles quad faces") {
    const auto dir = fixtures::fresh_dir("io_foreign");
    std::ofstream out(dir / "foreign.ply");
    out << "ply\nformat ascii 1.0\ncomment exported elsewhere\n"
        << "element vertex 4\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        << "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
        << "0 0 0 255 0 0\n1 0 0 0 255 0\n1 1 0 0 0 255\n0 1 0 10 10 10\n"
        << "4 0 1 2 3\n";
    out.close();
    const PlyMesh mesh = read_mesh_ply(dir / "foreign.ply");
    REQUIRE(mesh.vertices.size() == 4);
    REQUIRE(mesh.faces.size() == 2);  // fan-triangulated quad
    REQUIRE(mesh.vertices[2].y == Catch::Approx(1.0));
}

TEST_CASE("PLY reader rejects malformed input") {
    const auto dir = fixtures::fresh_dir("io_bad");
    std::ofstream(dir / "bad.ply") << "not a ply\n";
    REQUIRE_THROWS_AS(read_point_cloud_ply(dir / "bad.ply"), std::runtime_error);

    std::ofstream(dir / "trunc.ply") << "ply\nformat ascii 1.0\nelement vertex 5\n"
                                     << "property float x\nproperty float y\nproperty float z\n"
                                     << "end_header\n0 0 0\n";
    REQUIRE_THROWS_AS(read_point_cloud_ply(dir / "trunc.ply"), std::runtime_error);
}

TEST_CASE("weak label JSON round trip") {
    const auto dir = fixtures::fresh_dir("io_labels");
    LabeledScene scene;
    scene.scene_id = "scene42";
    scene.labels = {{{0.5, -1.5, 0.3}, "table"}, {{2.0, 0.0, 0.1}, "chair"}};
    write_labels_json(dir / "scene42.json", scene);
    const LabeledScene back = read_labels_json(dir / "scene42.json");
    REQUIRE(back.scene_id == "scene42");
    REQUIRE(back.labels.size() == 2);
    REQUIRE(back.labels[0].category == "table");
    REQUIRE(back.labels[0].center.y == -1.5);
}

TEST_CASE("box JSON parsing") {
    const auto dir = fixtures::fresh_dir("io_boxes");
    std::ofstream(dir / "boxes.json")
        << R"([{"center": [1, 2, 3], "extents": [0.5, 0.6, 0.7], "category": "desk"}])";
    const auto boxes = read_boxes_json(dir / "boxes.json");
    REQUIRE(boxes.size() == 1);
    REQUIRE(boxes[0].extents[2] == 0.7);
    REQUIRE(boxes[0].category == "desk");
}

TEST_CASE("category config JSON round trip") {
    const auto dir = fixtures::fresh_dir("io_config");
    const CategoryConfig cfg = default_category_config();
    save_json(dir / "config.json", to_json(cfg));
    const CategoryConfig back = read_category_config(dir / "config.json");
    REQUIRE(back.categories.size() == cfg.categories.size());
    REQUIRE(back.at("table").shape_class == ShapeClass::Supporter);
    REQUIRE(back.at("bottle").small);
    REQUIRE(back.at("laptop").scarce);
    REQUIRE(back.at("chair").mean_size == cfg.at("chair").mean_size);
}

TEST_CASE("scene write/read round trip preserves placements") {
    const auto dir = fixtures::fresh_dir("io_scene");
    fixtures::write_template_dir(dir / "templates");
    const CategoryConfig config = default_category_config();
    const TemplateBank bank = build_template_bank(dir / "templates", config);

    GenConfig gen;
    gen.seed = 3;
    const std::vector<WeakLabel> labels{{{0, 0, 0.4}, "table"}, {{0.1, 0.1, 1.0}, "lamp"}};
    const VirtualScene scene = generate(labels, nullptr, bank, config, gen, "roundtrip");
    write_scene(dir, scene, 99);

    const VirtualScene back = read_scene(dir / "roundtrip.ply", dir / "roundtrip.json");
    REQUIRE(back.scene_id == "roundtrip");
    REQUIRE(back.points.size() == scene.points.size());
    REQUIRE(back.instance_ids == scene.instance_ids);
    REQUIRE(back.class_ids == scene.class_ids);
    REQUIRE(back.placements.size() == scene.placements.size());
    for (std::size_t i = 0; i < scene.placements.size(); ++i) {
        const PlacementRecord& a = scene.placements[i];
        const PlacementRecord& b = back.placements[i];
        REQUIRE(a.instance_id == b.instance_id);
        REQUIRE(a.category == b.category);
        REQUIRE(a.template_id == b.template_id);
        REQUIRE(a.theta == b.theta);
        REQUIRE(a.is_supporter == b.is_supporter);
        REQUIRE(a.supported_by == b.supported_by);
        REQUIRE(a.center.z == b.center.z);
        REQUIRE(a.mer.has_value() == b.mer.has_value());
        if (a.mer) {
            REQUIRE(a.mer->length == b.mer->length);
            REQUIRE(a.mer->theta == b.mer->theta);
        }
        REQUIRE(a.ssh.has_value() == b.ssh.has_value());
    }
    const json sidecar = load_json(dir / "roundtrip.json");
    REQUIRE(sidecar.at("seed").get<std::uint64_t>() == 99);
}

TEST_CASE("segment graph export schema") {
    const auto mesh = fixtures::step_tabletop_mesh();
    const auto merged = merge_horizontal(oversegment(mesh), mesh);
    const json j = to_json(merged);
    REQUIRE(j.contains("segments"));
    REQUIRE(j.contains("edges"));
    REQUIRE(j.at("segments").size() == merged.segments.size());
    const json& seg = j.at("segments").at(0);
    REQUIRE(seg.contains("id"));
    REQUIRE(seg.contains("vertices"));
    REQUIRE(seg.contains("height"));
    REQUIRE(seg.contains("mer"));
    REQUIRE(rect_from_json(seg.at("mer")).length == Catch::Approx(2.0).margin(1e-6));
}
