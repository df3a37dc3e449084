#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "vscene/augment.hpp"
#include "vscene/labels.hpp"
#include "vscene/ply.hpp"
#include "vscene/scene.hpp"
#include "vscene/segments.hpp"
#include "vscene/shapes.hpp"

namespace vscene {

using nlohmann::json;

inline json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    json j;
    in >> j;
    return j;
}

inline void save_json(const std::filesystem::path& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

// --- basic values -----------------------------------------------------------

inline json to_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

inline Point3 point3_from_json(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline json to_json(const Rect& r) {
    return json{{"cx", r.cx}, {"cy", r.cy}, {"length", r.length}, {"width", r.width},
                {"theta", r.theta}};
}

inline Rect rect_from_json(const json& j) {
    return Rect{j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("length").get<double>(),
                j.at("width").get<double>(), j.at("theta").get<double>()};
}

// --- weak labels ------------------------------------------------------------

struct LabeledScene {
    std::string scene_id;
    std::vector<WeakLabel> labels;
};

inline LabeledScene read_labels_json(const std::filesystem::path& path) {
    const json j = load_json(path);
    LabeledScene out;
    out.scene_id = j.value("scene_id", path.stem().string());
    for (const json& lj : j.at("labels")) {
        out.labels.push_back({point3_from_json(lj.at("center")), lj.at("category").get<std::string>()});
    }
    return out;
}

inline void write_labels_json(const std::filesystem::path& path, const LabeledScene& scene) {
    json labels = json::array();
    for (const WeakLabel& l : scene.labels) {
        labels.push_back(json{{"center", to_json(l.center)}, {"category", l.category}});
    }
    save_json(path, json{{"scene_id", scene.scene_id}, {"labels", labels}});
}

// --- ground-truth boxes -----------------------------------------------------

inline std::vector<GroundTruthBox> read_boxes_json(const std::filesystem::path& path) {
    const json j = load_json(path);
    std::vector<GroundTruthBox> out;
    for (const json& bj : j) {
        GroundTruthBox box;
        box.center = point3_from_json(bj.at("center"));
        const json& e = bj.at("extents");
        box.extents = {e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()};
        box.category = bj.at("category").get<std::string>();
        out.push_back(std::move(box));
    }
    return out;
}

// --- category config --------------------------------------------------------

inline CategoryConfig category_config_from_json(const json& j) {
    CategoryConfig cfg;
    for (const auto& [name, cj] : j.items()) {
        CategoryInfo info;
        info.shape_class = shape_class_from_string(cj.at("class").get<std::string>());
        const json& m = cj.at("mean_size");
        info.mean_size = {m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>()};
        info.small = cj.value("small", false);
        info.scarce = cj.value("scarce", false);
        cfg.categories[name] = info;
    }
    return cfg;
}

inline CategoryConfig read_category_config(const std::filesystem::path& path) {
    return category_config_from_json(load_json(path));
}

inline json to_json(const CategoryConfig& cfg) {
    json j = json::object();
    for (const auto& [name, info] : cfg.categories) {
        j[name] = json{{"class", to_string(info.shape_class)},
                       {"mean_size", json::array({info.mean_size[0], info.mean_size[1],
                                                  info.mean_size[2]})},
                       {"small", info.small},
                       {"scarce", info.scarce}};
    }
    return j;
}

// --- segment graph ----------------------------------------------------------

inline json to_json(const SegmentGraph& graph) {
    json segments = json::array();
    for (const Segment& s : graph.segments) {
        json sj{{"id", s.id}, {"vertices", s.vertices}};
        if (s.height) sj["height"] = *s.height;
        if (s.area) sj["area"] = *s.area;
        if (s.mer) sj["mer"] = to_json(*s.mer);
        segments.push_back(std::move(sj));
    }
    json edges = json::array();
    for (const auto& [a, b] : graph.edges) edges.push_back(json::array({a, b}));
    return json{{"segments", segments}, {"edges", edges}};
}

// --- scene sidecar ----------------------------------------------------------

inline json placement_to_json(const PlacementRecord& rec) {
    json j{{"instance_id", rec.instance_id},
           {"category", rec.category},
           {"template_id", rec.template_id},
           {"center", to_json(rec.center)},
           {"scale", json::array({rec.scale[0], rec.scale[1], rec.scale[2]})},
           {"theta", rec.theta},
           {"is_supporter", rec.is_supporter},
           {"supported_by", rec.supported_by}};
    j["mer"] = rec.mer ? to_json(*rec.mer) : json(nullptr);
    j["ssh"] = rec.ssh ? json(*rec.ssh) : json(nullptr);
    return j;
}

inline PlacementRecord placement_from_json(const json& j) {
    PlacementRecord rec;
    rec.instance_id = j.at("instance_id").get<int>();
    rec.category = j.at("category").get<std::string>();
    rec.template_id = j.at("template_id").get<std::string>();
    rec.center = point3_from_json(j.at("center"));
    const json& s = j.at("scale");
    rec.scale = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
    rec.theta = j.at("theta").get<double>();
    rec.is_supporter = j.at("is_supporter").get<bool>();
    rec.supported_by = j.at("supported_by").get<int>();
    if (!j.at("mer").is_null()) rec.mer = rect_from_json(j.at("mer"));
    if (!j.at("ssh").is_null()) rec.ssh = j.at("ssh").get<double>();
    return rec;
}

inline json scene_sidecar_json(const VirtualScene& scene, std::uint64_t seed) {
    json boxes = json::array();
    for (const auto& b : scene.boxes) {
        boxes.push_back(json{{"instance_id", b.instance_id},
                             {"category", b.category},
                             {"center", to_json(b.center)},
                             {"extents", json::array({b.extents[0], b.extents[1], b.extents[2]})}});
    }
    json placements = json::array();
    for (const PlacementRecord& rec : scene.placements) placements.push_back(placement_to_json(rec));
    return json{{"scene_id", scene.scene_id},
                {"seed", seed},
                {"boxes", boxes},
                {"placements", placements}};
}

/// Writes the PLY + JSON pair for one virtual scene.
inline void write_scene(const std::filesystem::path& out_dir, const VirtualScene& scene,
                        std::uint64_t seed) {
    LabeledPoints pts;
    pts.cloud = scene.points;
    pts.instance_ids = scene.instance_ids;
    pts.class_ids = scene.class_ids;
    write_labeled_ply(out_dir / (scene.scene_id + ".ply"), pts);
    save_json(out_dir / (scene.scene_id + ".json"), scene_sidecar_json(scene, seed));
}

/// Reads a written scene back (the inverse of write_scene).
inline VirtualScene read_scene(const std::filesystem::path& ply_path,
                               const std::filesystem::path& json_path) {
    const LabeledPoints pts = read_labeled_ply(ply_path);
    const json j = load_json(json_path);
    VirtualScene scene;
    scene.scene_id = j.at("scene_id").get<std::string>();
    scene.points = pts.cloud;
    scene.instance_ids = pts.instance_ids;
    scene.class_ids = pts.class_ids;
    for (const json& bj : j.at("boxes")) {
        VirtualScene::Box box;
        box.instance_id = bj.at("instance_id").get<int>();
        box.category = bj.at("category").get<std::string>();
        box.center = point3_from_json(bj.at("center"));
        const json& e = bj.at("extents");
        box.extents = {e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()};
        scene.boxes.push_back(std::move(box));
    }
    for (const json& pj : j.at("placements")) scene.placements.push_back(placement_from_json(pj));
    return scene;
}

// --- augmentation plan ------------------------------------------------------

inline json to_json(const AugmentationPlan& plan) {
    json scenes = json::array();
    for (const ScenePlan& sp : plan.scenes) {
        json copies = json::array();
        for (const auto& copy : sp.copies) {
            json list = json::array();
            for (const PlannedInsertion& ins : copy) {
                list.push_back(json{{"category", ins.category},
                                    {"position", json::array({ins.position.x, ins.position.y})}});
            }
            copies.push_back(std::move(list));
        }
        json insertions = json::array();
        for (const PlannedInsertion& ins : sp.insertions) {
            insertions.push_back(json{{"category", ins.category},
                                      {"position", json::array({ins.position.x, ins.position.y})}});
        }
        scenes.push_back(json{{"scene_id", sp.scene_id},
                              {"oversample", sp.oversample},
                              {"copies", copies},
                              {"insertions", insertions}});
    }
    return json{{"scenes", scenes}};
}

}  // namespace vscene
