#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vscene/geometry.hpp"
#include "vscene/labels.hpp"
#include "vscene/rng.hpp"
#include "vscene/segments.hpp"
#include "vscene/shapes.hpp"

namespace vscene {

/// Virtual scene generation parameters. Defaults: N = 10000 points on the
/// largest object, seed segments need area > 0.1 m^2 and height > 0.1 m,
/// neighbors merge within 0.02 m of the seed height.
struct GenConfig {
    int max_points = 10000;          // N: points on the largest object
    double min_seed_area = 0.1;      // A_min
    double min_seed_height = 0.1;    // H_min
    double merge_height_tol = 0.02;  // dh
    double fh_scale = 0.05;          // graph-cut granularity
    double adjacency_tol = 0.01;     // segment adjacency distance
    bool scale_jitter = false;       // +-10% uniform scale jitter for random-init objects
    std::uint64_t seed = 0;

    void validate() const {
        if (max_points <= 0 || min_seed_area <= 0 || min_seed_height <= 0 ||
            merge_height_tol <= 0 || fh_scale <= 0) {
            throw std::invalid_argument("GenConfig fields must be positive");
        }
    }
};

constexpr int kGroundId = 0;

/// Per-instance placement state. `center` holds the object's horizontal
/// center and the midpoint of its vertical extent; `scale` multiplies the
/// class-size template. `mer` and `ssh` are world-frame values kept only for
/// supporters.
struct PlacementRecord {
    int instance_id = 0;
    std::string category;
    std::string template_id;
    std::size_t template_index = 0;  // position within the category's bank list
    Point3 center;
    std::array<double, 3> scale{1.0, 1.0, 1.0};
    double theta = 0.0;  // degrees
    bool is_supporter = false;
    std::optional<Rect> mer;
    std::optional<double> ssh;
    int supported_by = kGroundId;
};

struct VirtualScene {
    struct Box {
        int instance_id = 0;
        std::string category;
        Point3 center;
        std::array<double, 3> extents{};
    };

    std::string scene_id;
    PointCloud points;
    std::vector<int> instance_ids;
    std::vector<int> class_ids;
    std::vector<Box> boxes;
    std::vector<PlacementRecord> placements;
};

inline const ObjectTemplate& find_template(const TemplateBank& bank, const PlacementRecord& rec) {
    const auto it = bank.find(rec.category);
    if (it == bank.end() || it->second.empty()) {
        throw std::runtime_error("category missing from template bank: " + rec.category);
    }
    if (rec.template_index < it->second.size() &&
        it->second[rec.template_index].id == rec.template_id) {
        return it->second[rec.template_index];
    }
    for (const ObjectTemplate& t : it->second) {
        if (t.id == rec.template_id) return t;
    }
    throw std::runtime_error("template not found: " + rec.category + "/" + rec.template_id);
}

namespace placement {

inline double bottom_z(const PlacementRecord& rec, const ObjectTemplate& tmpl) {
    return rec.center.z - rec.scale[2] * tmpl.h * 0.5;
}

inline double world_ssh(const PlacementRecord& rec, const ObjectTemplate& tmpl) {
    return bottom_z(rec, tmpl) + rec.scale[2] * tmpl.ssh.value_or(0.0);
}

/// Footprint rectangle used by the collision stage: supporters use their
/// world MER, everything else a class-size rectangle at the object's theta.
inline Rect footprint(const PlacementRecord& rec, const ObjectTemplate& tmpl) {
    if (rec.is_supporter && rec.mer) return *rec.mer;
    return make_rect(rec.center.x, rec.center.y, tmpl.l * rec.scale[0], tmpl.w * rec.scale[1],
                     rec.theta);
}

inline void move_xy(PlacementRecord& rec, double dx, double dy) {
    rec.center.x += dx;
    rec.center.y += dy;
    if (rec.mer) {
        rec.mer->cx += dx;
        rec.mer->cy += dy;
    }
}

}  // namespace placement

/// Stage 1: one placement record per weak label, centered on the label. A
/// supporter label with an assigned segment MER picks a CSS-true template
/// (any template, with a warning, when the category has none), aligns theta
/// with the segment and stretches its footprint onto the segment MER.
/// Everything else gets a random template at a random rotation and class-mean
/// scale.
inline std::vector<PlacementRecord> initial_positions(
    const std::vector<WeakLabel>& labels, const TemplateBank& bank, const GenConfig& config,
    const std::map<std::size_t, Rect>& seg_assignment, Rng rng,
    std::vector<std::string>* warnings = nullptr) {
    std::vector<PlacementRecord> records;
    records.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const WeakLabel& label = labels[i];
        const auto bank_it = bank.find(label.category);
        if (bank_it == bank.end() || bank_it->second.empty()) {
            throw std::runtime_error("category missing from template bank: " + label.category);
        }
        const std::vector<ObjectTemplate>& templates = bank_it->second;

        PlacementRecord rec;
        rec.instance_id = static_cast<int>(i) + 1;
        rec.category = label.category;
        rec.center = label.center;
        rec.is_supporter = templates.front().shape_class == ShapeClass::Supporter;
        rec.supported_by = kGroundId;

        Rng instance_rng = rng.derive(i);
        const auto seg_it = seg_assignment.find(i);
        if (rec.is_supporter && seg_it != seg_assignment.end()) {
            std::vector<std::size_t> css_true;
            for (std::size_t t = 0; t < templates.size(); ++t) {
                if (templates[t].css.value_or(false)) css_true.push_back(t);
            }
            if (css_true.empty()) {
                if (warnings) {
                    warnings->push_back("no CSS-true template for category '" + label.category +
                                        "', falling back to any template");
                }
                for (std::size_t t = 0; t < templates.size(); ++t) css_true.push_back(t);
            }
            rec.template_index = css_true[instance_rng.uniform_index(css_true.size())];
            const ObjectTemplate& tmpl = templates[rec.template_index];
            rec.template_id = tmpl.id;

            const Rect& seg = seg_it->second;
            rec.theta = seg.theta;
            rec.scale[0] = tmpl.mer->length > 1e-12 ? seg.length / tmpl.mer->length : 1.0;
            rec.scale[1] = tmpl.mer->width > 1e-12 ? seg.width / tmpl.mer->width : 1.0;
            rec.scale[2] = 1.0;
            rec.center.x = seg.cx;
            rec.center.y = seg.cy;
        } else {
            rec.template_index = instance_rng.uniform_index(templates.size());
            rec.template_id = templates[rec.template_index].id;
            rec.theta = instance_rng.uniform(0.0, 360.0);
            if (config.scale_jitter) {
                for (double& s : rec.scale) s = instance_rng.uniform(0.9, 1.1);
            }
        }

        const ObjectTemplate& tmpl = templates[rec.template_index];
        if (rec.is_supporter) {
            rec.mer = make_rect(rec.center.x, rec.center.y, tmpl.mer->length * rec.scale[0],
                                tmpl.mer->width * rec.scale[1], rec.theta);
            rec.ssh = placement::world_ssh(rec, tmpl);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

/// Stage 2: supporters and standers drop to the ground; a supportee whose
/// (x, y) falls inside at least one supporter MER rests on the nearest such
/// supporter's surface, everything else on the ground. Only z (and the
/// supporter SSH values derived from it) changes.
inline void gravity_stage(std::vector<PlacementRecord>& records, const TemplateBank& bank) {
    for (PlacementRecord& rec : records) {
        const ObjectTemplate& tmpl = find_template(bank, rec);
        if (tmpl.shape_class != ShapeClass::Supportee) {
            rec.center.z = rec.scale[2] * tmpl.h * 0.5;  // bottom on the ground
            if (rec.is_supporter) rec.ssh = placement::world_ssh(rec, tmpl);
        }
    }
    for (PlacementRecord& rec : records) {
        const ObjectTemplate& tmpl = find_template(bank, rec);
        if (tmpl.shape_class != ShapeClass::Supportee) continue;
        const PlacementRecord* host = nullptr;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (const PlacementRecord& sup : records) {
            if (!sup.is_supporter || !sup.mer) continue;
            if (!sup.mer->contains({rec.center.x, rec.center.y})) continue;
            const double dx = sup.center.x - rec.center.x;
            const double dy = sup.center.y - rec.center.y;
            const double d = dx * dx + dy * dy;
            if (d < best_d2) {
                best_d2 = d;
                host = &sup;
            }
        }
        if (host) {
            rec.supported_by = host->instance_id;
            rec.center.z = *host->ssh + rec.scale[2] * tmpl.h * 0.5;
        } else {
            rec.supported_by = kGroundId;
            rec.center.z = rec.scale[2] * tmpl.h * 0.5;
        }
    }
}

/// Separates overlapping ground objects by moving each pair apart along the
/// line of centers, 0.01 m per object per iteration, dragging supported
/// objects rigidly. Returns true when a full sweep finds no overlap within
/// `max_iterations`.
inline bool collision_pass_ground(std::vector<PlacementRecord>& records, const TemplateBank& bank,
                                  Rng rng, int max_iterations = 500, double step = 0.02) {
    std::vector<std::size_t> ground;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].supported_by == kGroundId) ground.push_back(i);
    }
    // processed in descending footprint area, ties by instance id
    std::vector<double> area(records.size(), 0.0);
    for (const std::size_t i : ground) {
        area[i] = placement::footprint(records[i], find_template(bank, records[i])).area();
    }
    std::sort(ground.begin(), ground.end(), [&](std::size_t a, std::size_t b) {
        return area[a] > area[b] || (area[a] == area[b] && a < b);
    });
    std::map<int, std::vector<std::size_t>> riders;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].supported_by != kGroundId) riders[records[i].supported_by].push_back(i);
    }
    const auto shift = [&](std::size_t idx, double dx, double dy) {
        placement::move_xy(records[idx], dx, dy);
        const auto it = riders.find(records[idx].instance_id);
        if (it != riders.end()) {
            for (const std::size_t r : it->second) placement::move_xy(records[r], dx, dy);
        }
    };

    for (int iter = 0; iter < max_iterations; ++iter) {
        bool any = false;
        for (std::size_t a = 0; a < ground.size(); ++a) {
            for (std::size_t b = a + 1; b < ground.size(); ++b) {
                PlacementRecord& ra = records[ground[a]];
                PlacementRecord& rb = records[ground[b]];
                const Rect fa = placement::footprint(ra, find_template(bank, ra));
                const Rect fb = placement::footprint(rb, find_template(bank, rb));
                if (!rects_overlap(fa, fb).overlapping) continue;
                any = true;
                double dx = ra.center.x - rb.center.x;
                double dy = ra.center.y - rb.center.y;
                const double len = std::sqrt(dx * dx + dy * dy);
                if (len < 1e-12) {
                    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
                    dx = std::cos(angle);
                    dy = std::sin(angle);
                } else {
                    dx /= len;
                    dy /= len;
                }
                shift(ground[a], 0.5 * step * dx, 0.5 * step * dy);
                shift(ground[b], -0.5 * step * dx, -0.5 * step * dy);
            }
        }
        if (!any) return true;
    }
    return false;
}

/// Separates each supporter's supportees the same way, keeping every
/// supportee center inside the supporter MER. Supportees that cannot be
/// separated within the iteration budget are left at their minimal-overlap
/// positions. Returns the instance ids of supporters left unresolved.
inline std::vector<int> collision_pass_supportees(std::vector<PlacementRecord>& records,
                                                  const TemplateBank& bank, Rng rng,
                                                  int max_iterations = 500, double step = 0.02,
                                                  std::vector<std::string>* warnings = nullptr) {
    std::vector<int> unresolved;
    for (const PlacementRecord& sup : records) {
        if (!sup.is_supporter || !sup.mer) continue;
        std::vector<std::size_t> kids;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].supported_by == sup.instance_id) kids.push_back(i);
        }
        if (kids.size() < 2) continue;

        Rng pair_rng = rng.derive(static_cast<std::uint64_t>(sup.instance_id));
        const auto total_overlap = [&]() {
            double sum = 0.0;
            for (std::size_t a = 0; a < kids.size(); ++a) {
                for (std::size_t b = a + 1; b < kids.size(); ++b) {
                    const PlacementRecord& ra = records[kids[a]];
                    const PlacementRecord& rb = records[kids[b]];
                    sum += rects_overlap(placement::footprint(ra, find_template(bank, ra)),
                                         placement::footprint(rb, find_template(bank, rb)))
                               .area;
                }
            }
            return sum;
        };

        std::vector<Vec2> best_positions;
        double best_overlap = std::numeric_limits<double>::infinity();
        const auto snapshot = [&]() {
            const double cur = total_overlap();
            if (cur < best_overlap) {
                best_overlap = cur;
                best_positions.clear();
                for (const std::size_t k : kids) {
                    best_positions.push_back({records[k].center.x, records[k].center.y});
                }
            }
            return cur;
        };

        bool resolved = false;
        snapshot();
        for (int iter = 0; iter < max_iterations && !resolved; ++iter) {
            bool any = false;
            for (std::size_t a = 0; a < kids.size(); ++a) {
                for (std::size_t b = a + 1; b < kids.size(); ++b) {
                    PlacementRecord& ra = records[kids[a]];
                    PlacementRecord& rb = records[kids[b]];
                    const Rect fa = placement::footprint(ra, find_template(bank, ra));
                    const Rect fb = placement::footprint(rb, find_template(bank, rb));
                    if (!rects_overlap(fa, fb).overlapping) continue;
                    any = true;
                    double dx = ra.center.x - rb.center.x;
                    double dy = ra.center.y - rb.center.y;
                    const double len = std::sqrt(dx * dx + dy * dy);
                    if (len < 1e-12) {
                        const double angle = pair_rng.uniform(0.0, 2.0 * std::numbers::pi);
                        dx = std::cos(angle);
                        dy = std::sin(angle);
                    } else {
                        dx /= len;
                        dy /= len;
                    }
                    const auto confine = [&](PlacementRecord& rec, double mx, double my) {
                        placement::move_xy(rec, mx, my);
                        const Vec2 inside = sup.mer->clamp({rec.center.x, rec.center.y});
                        placement::move_xy(rec, inside.x - rec.center.x, inside.y - rec.center.y);
                    };
                    confine(ra, 0.5 * step * dx, 0.5 * step * dy);
                    confine(rb, -0.5 * step * dx, -0.5 * step * dy);
                }
            }
            if (!any) {
                resolved = true;
            } else {
                snapshot();
            }
        }
        if (!resolved) {
            for (std::size_t k = 0; k < kids.size(); ++k) {
                PlacementRecord& rec = records[kids[k]];
                placement::move_xy(rec, best_positions[k].x - rec.center.x,
                                   best_positions[k].y - rec.center.y);
            }
            unresolved.push_back(sup.instance_id);
            if (warnings) {
                warnings->push_back("supportees of instance " + std::to_string(sup.instance_id) +
                                    " left at minimal-overlap positions");
            }
        }
    }
    return unresolved;
}

struct CollisionReport {
    bool ground_resolved = true;
    std::vector<int> unresolved_supporters;
};

/// Stage 3: ground objects first (supportees riding along), then each
/// supporter's supportees confined to its MER. Only x and y change.
inline CollisionReport collision_stage(std::vector<PlacementRecord>& records,
                                       const TemplateBank& bank, Rng rng,
                                       std::vector<std::string>* warnings = nullptr) {
    CollisionReport report;
    report.ground_resolved = collision_pass_ground(records, bank, rng.derive("ground"));
    if (!report.ground_resolved && warnings) {
        warnings->push_back("ground objects still overlap after the iteration budget");
    }
    report.unresolved_supporters =
        collision_pass_supportees(records, bank, rng.derive("supportees"), 500, 0.02, warnings);
    return report;
}

/// Stage 4: converts placements to a labeled point cloud. Surface areas are
/// approximated by the largest of the three scaled face-area products; point
/// counts are proportional to them with the largest object receiving exactly
/// N points (minimum 1 per object). Sampling is uniform without replacement,
/// falling back to replacement when the template has fewer points than the
/// budget.
inline VirtualScene sample_scene(const std::vector<PlacementRecord>& records,
                                 const TemplateBank& bank, const CategoryConfig& categories,
                                 const GenConfig& config, Rng rng) {
    VirtualScene scene;
    scene.placements = records;
    if (records.empty()) return scene;

    std::vector<double> areas;
    areas.reserve(records.size());
    double max_area = 0.0;
    for (const PlacementRecord& rec : records) {
        const ObjectTemplate& tmpl = find_template(bank, rec);
        const double lx = tmpl.l * rec.scale[0];
        const double wy = tmpl.w * rec.scale[1];
        const double hz = tmpl.h * rec.scale[2];
        const double area = std::max({lx * wy, wy * hz, lx * hz});
        areas.push_back(area);
        max_area = std::max(max_area, area);
    }
    if (max_area <= 0.0) max_area = 1.0;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const PlacementRecord& rec = records[i];
        const ObjectTemplate& tmpl = find_template(bank, rec);
        const long long count = std::max(
            1ll, std::llround(static_cast<double>(config.max_points) * areas[i] / max_area));

        Rng sampler = rng.derive(static_cast<std::uint64_t>(rec.instance_id));
        const std::size_t m = tmpl.cloud.size();
        std::vector<std::size_t> chosen;
        chosen.reserve(static_cast<std::size_t>(count));
        if (static_cast<std::size_t>(count) <= m) {
            std::vector<std::size_t> pool(m);
            for (std::size_t p = 0; p < m; ++p) pool[p] = p;
            for (long long t = 0; t < count; ++t) {
                const std::size_t j = t + sampler.uniform_index(m - t);
                std::swap(pool[t], pool[j]);
                chosen.push_back(pool[t]);
            }
        } else {
            for (long long t = 0; t < count; ++t) chosen.push_back(sampler.uniform_index(m));
        }

        const Bounds3 b = tmpl.bounds();
        const Point3 ref = b.center();
        const double c = std::cos(deg_to_rad(rec.theta));
        const double s = std::sin(deg_to_rad(rec.theta));
        const int class_id = categories.class_id(rec.category);

        Point3 mn{1e300, 1e300, 1e300}, mx{-1e300, -1e300, -1e300};
        for (const std::size_t j : chosen) {
            const Point3 q = tmpl.cloud.points[j] - ref;
            const double sx = q.x * rec.scale[0];
            const double sy = q.y * rec.scale[1];
            const double sz = q.z * rec.scale[2];
            const Point3 world{rec.center.x + c * sx - s * sy, rec.center.y + s * sx + c * sy,
                               rec.center.z + sz};
            scene.points.points.push_back(world);
            scene.instance_ids.push_back(rec.instance_id);
            scene.class_ids.push_back(class_id);
            mn = {std::min(mn.x, world.x), std::min(mn.y, world.y), std::min(mn.z, world.z)};
            mx = {std::max(mx.x, world.x), std::max(mx.y, world.y), std::max(mx.z, world.z)};
        }
        VirtualScene::Box box;
        box.instance_id = rec.instance_id;
        box.category = rec.category;
        box.center = 0.5 * (mn + mx);
        box.extents = {mx.x - mn.x, mx.y - mn.y, mx.z - mn.z};
        scene.boxes.push_back(box);
    }
    return scene;
}

struct StageTimings {
    double segment_ms = 0.0;
    double place_ms = 0.0;  // initial + gravity + collision
    double sample_ms = 0.0;
};

/// Full label-enhancement pipeline for one scene. With a mesh, horizontal
/// segments refine supporter layout first; without one, every object is
/// randomly initialized and the remaining stages are identical.
inline VirtualScene generate(const std::vector<WeakLabel>& labels, const SceneMesh* mesh,
                             const TemplateBank& bank, const CategoryConfig& categories,
                             const GenConfig& config, const std::string& scene_id = {},
                             std::vector<std::string>* warnings = nullptr,
                             CollisionReport* collision_report = nullptr,
                             StageTimings* timings = nullptr) {
    config.validate();
    Rng rng(config.seed);
    using clock = std::chrono::steady_clock;
    const auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    auto t0 = clock::now();
    std::map<std::size_t, Rect> seg_assignment;
    if (mesh != nullptr && !labels.empty()) {
        const SegmentGraph merged = merge_horizontal(
            oversegment(*mesh, config.fh_scale, config.adjacency_tol), *mesh,
            config.min_seed_area, config.min_seed_height, config.merge_height_tol);
        std::vector<std::size_t> supporter_indices;
        std::vector<Vec2> supporter_centers;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (categories.contains(labels[i].category) &&
                categories.at(labels[i].category).shape_class == ShapeClass::Supporter) {
                supporter_indices.push_back(i);
                supporter_centers.push_back(labels[i].center.xy());
            }
        }
        for (const auto& [local, rect] : assign_segments(merged.segments, *mesh, supporter_centers)) {
            seg_assignment[supporter_indices[local]] = rect;
        }
    }
    if (timings) timings->segment_ms = ms_since(t0);

    t0 = clock::now();
    std::vector<PlacementRecord> records =
        initial_positions(labels, bank, config, seg_assignment, rng.derive("init"), warnings);
    gravity_stage(records, bank);
    const CollisionReport report = collision_stage(records, bank, rng.derive("collision"), warnings);
    if (collision_report) *collision_report = report;
    if (timings) timings->place_ms = ms_since(t0);

    t0 = clock::now();
    VirtualScene scene = sample_scene(records, bank, categories, config, rng.derive("sample"));
    scene.scene_id = scene_id;
    if (timings) timings->sample_ms = ms_since(t0);
    return scene;
}

}  // namespace vscene
