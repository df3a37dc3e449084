#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vscene/geometry.hpp"
#include "vscene/ply.hpp"

namespace vscene {

/// Taxonomy of shape categories: supporters are ground objects that can hold
/// others, standers are ground objects that do not, supportees may rest on
/// supporters.
enum class ShapeClass { Supporter, Stander, Supportee };

inline const char* to_string(ShapeClass c) {
    switch (c) {
        case ShapeClass::Supporter: return "supporter";
        case ShapeClass::Stander: return "stander";
        case ShapeClass::Supportee: return "supportee";
    }
    return "stander";
}

inline ShapeClass shape_class_from_string(const std::string& s) {
    if (s == "supporter") return ShapeClass::Supporter;
    if (s == "stander") return ShapeClass::Stander;
    if (s == "supportee") return ShapeClass::Supportee;
    throw std::invalid_argument("unknown shape class: " + s);
}

struct CategoryInfo {
    ShapeClass shape_class = ShapeClass::Stander;
    std::array<double, 3> mean_size{1.0, 1.0, 1.0};  // l, w, h in meters
    bool small = false;
    bool scarce = false;
};

/// Per-category configuration. Categories are kept sorted by name; the sorted
/// position doubles as the class id used in exported scenes and presence
/// vectors.
struct CategoryConfig {
    std::map<std::string, CategoryInfo> categories;

    bool contains(const std::string& name) const { return categories.count(name) > 0; }

    const CategoryInfo& at(const std::string& name) const {
        const auto it = categories.find(name);
        if (it == categories.end()) throw std::invalid_argument("category absent from config: " + name);
        return it->second;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(categories.size());
        for (const auto& [name, info] : categories) out.push_back(name);
        return out;
    }

    int class_id(const std::string& name) const {
        int id = 0;
        for (const auto& [n, info] : categories) {
            if (n == name) return id;
            ++id;
        }
        return -1;
    }
};

/// Default 22-category configuration. Mean sizes are plausible metric values
/// shipped as a starting point; real deployments should override them from a
/// JSON config.
inline CategoryConfig default_category_config() {
    CategoryConfig cfg;
    const auto add = [&](const std::string& name, ShapeClass cls, double l, double w, double h,
                         bool small = false, bool scarce = false) {
        cfg.categories[name] = CategoryInfo{cls, {l, w, h}, small, scarce};
    };
    add("bathtub", ShapeClass::Stander, 1.6, 0.75, 0.55, false, true);
    add("bed", ShapeClass::Supporter, 2.0, 1.6, 0.55);
    add("bench", ShapeClass::Supporter, 1.4, 0.45, 0.45, false, true);
    add("bookshelf", ShapeClass::Supporter, 0.9, 0.3, 1.8);
    add("bottle", ShapeClass::Supportee, 0.08, 0.08, 0.25, true);
    add("chair", ShapeClass::Stander, 0.5, 0.5, 0.9);
    add("cup", ShapeClass::Supportee, 0.09, 0.09, 0.1, true);
    add("curtain", ShapeClass::Stander, 1.5, 0.1, 2.2);
    add("desk", ShapeClass::Supporter, 1.3, 0.65, 0.75);
    add("door", ShapeClass::Stander, 0.9, 0.05, 2.0);
    add("dresser", ShapeClass::Supporter, 1.0, 0.5, 0.8, false, true);
    add("keyboard", ShapeClass::Supportee, 0.45, 0.15, 0.03, true);
    add("lamp", ShapeClass::Supportee, 0.25, 0.25, 0.5);
    add("laptop", ShapeClass::Supportee, 0.35, 0.25, 0.25, false, true);
    add("monitor", ShapeClass::Supportee, 0.55, 0.2, 0.4);
    add("nightstand", ShapeClass::Supporter, 0.5, 0.4, 0.55);
    add("plant", ShapeClass::Supportee, 0.35, 0.35, 0.8);
    add("sofa", ShapeClass::Supporter, 1.9, 0.9, 0.8);
    add("stool", ShapeClass::Supporter, 0.4, 0.4, 0.45);
    add("table", ShapeClass::Supporter, 1.5, 0.8, 0.72);
    add("toilet", ShapeClass::Stander, 0.6, 0.4, 0.75);
    add("wardrobe", ShapeClass::Stander, 1.2, 0.6, 2.0, false, true);
    return cfg;
}

struct Bounds3 {
    Point3 min{};
    Point3 max{};

    Point3 center() const { return 0.5 * (min + max); }
    Point3 extents() const { return max - min; }
};

inline Bounds3 bounds_of(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("empty cloud");
    Bounds3 b{cloud.points[0], cloud.points[0]};
    for (const Point3& p : cloud.points) {
        b.min = {std::min(b.min.x, p.x), std::min(b.min.y, p.y), std::min(b.min.z, p.z)};
        b.max = {std::max(b.max.x, p.x), std::max(b.max.y, p.y), std::max(b.max.z, p.z)};
    }
    return b;
}

/// Synthetic shape template, normalized and scaled to its category mean size.
/// `ssh` is measured from the template's lowest point, so it lies in [0, h].
struct ObjectTemplate {
    std::string id;
    std::string category;
    PointCloud cloud;
    double l = 0.0, w = 0.0, h = 0.0;
    ShapeClass shape_class = ShapeClass::Stander;
    std::optional<Rect> mer;
    std::optional<double> ssh;
    std::optional<bool> css;

    Bounds3 bounds() const { return bounds_of(cloud); }
};

/// Centers the cloud on its centroid and scales it into the unit sphere
/// (max point norm 1). Degenerate single-point clouds stay at the origin.
inline PointCloud normalize_template(const PointCloud& raw) {
    if (raw.empty()) throw std::invalid_argument("empty cloud");
    Point3 centroid{};
    for (const Point3& p : raw.points) centroid = centroid + p;
    centroid = (1.0 / static_cast<double>(raw.size())) * centroid;
    double max_norm = 0.0;
    for (const Point3& p : raw.points) max_norm = std::max(max_norm, norm(p - centroid));
    const double scale = max_norm > 0.0 ? 1.0 / max_norm : 1.0;
    PointCloud out;
    out.points.reserve(raw.size());
    for (const Point3& p : raw.points) out.points.push_back(scale * (p - centroid));
    return out;
}

/// Minimum-area enclosing rectangle of the XY projection.
inline Rect compute_mer(const PointCloud& cloud) {
    std::vector<Vec2> xy;
    xy.reserve(cloud.size());
    for (const Point3& p : cloud.points) xy.push_back(p.xy());
    return min_area_rect(xy);
}

/// Supporting-surface height in the cloud's own z coordinates: the average of
/// the [floor(0.8 n), floor(0.9 n)) slice of the ascending z list over points
/// with near-vertical normals (|nz| > 0.88). The slice placement tolerates up
/// to 10% of surface points lying above the main surface. When the slice is
/// empty (fewer than 10 qualifying points) the single element at floor(0.8 n)
/// is used.
inline double compute_ssh(const PointCloud& cloud, std::size_t k = 16) {
    const PointCloud with_normals =
        cloud.has_normals() && cloud.normals.size() == cloud.size() ? cloud
                                                                    : estimate_normals(cloud, k);
    std::vector<double> lz;
    for (std::size_t i = 0; i < with_normals.size(); ++i) {
        if (std::abs(with_normals.normals[i].z) > 0.88) lz.push_back(with_normals.points[i].z);
    }
    if (lz.empty()) throw std::runtime_error("no supporting surface found");
    std::sort(lz.begin(), lz.end());
    const std::size_t n = lz.size();
    const std::size_t lo = (4 * n) / 5;
    const std::size_t hi = (9 * n) / 10;
    if (lo >= hi) return lz[lo];
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += lz[i];
    return sum / static_cast<double>(hi - lo);
}

/// Compactness of the supporter surface: points in the band
/// (ssh - h/10, ssh + h/10) are projected to XY, split into two k-means
/// clusters, and the sum of the clusters' convex-hull areas must exceed 90%
/// of the MER area. `ssh_raw` must be in the same z coordinates as `cloud`.
inline bool compute_css(const PointCloud& cloud, const Rect& mer, double ssh_raw) {
    const Bounds3 b = bounds_of(cloud);
    const double h = b.max.z - b.min.z;
    std::vector<Vec2> band;
    for (const Point3& p : cloud.points) {
        if (p.z > ssh_raw - h / 10.0 && p.z < ssh_raw + h / 10.0) band.push_back(p.xy());
    }
    if (band.size() < 2) return false;
    const KMeansResult split = kmeans_2d(band, 2);
    std::vector<Vec2> c1, c2;
    for (std::size_t i = 0; i < band.size(); ++i) {
        (split.assignment[i] == 0 ? c1 : c2).push_back(band[i]);
    }
    const double a1 = c1.empty() ? 0.0 : polygon_area(convex_hull_2d(c1));
    const double a2 = c2.empty() ? 0.0 : polygon_area(convex_hull_2d(c2));
    return a1 + a2 > 0.9 * mer.length * mer.width;
}

using TemplateBank = std::map<std::string, std::vector<ObjectTemplate>>;

/// Builds a template from a raw cloud: normalize into the unit sphere, scale
/// each axis so the extents match the category mean size, then derive the
/// supporter properties when applicable.
inline ObjectTemplate make_template(std::string id, std::string category, const PointCloud& raw,
                                    const CategoryInfo& info) {
    ObjectTemplate t;
    t.id = std::move(id);
    t.category = std::move(category);
    t.shape_class = info.shape_class;
    t.cloud = normalize_template(raw);

    const Bounds3 nb = bounds_of(t.cloud);
    const Point3 ext = nb.extents();
    const double sx = ext.x > 1e-12 ? info.mean_size[0] / ext.x : 1.0;
    const double sy = ext.y > 1e-12 ? info.mean_size[1] / ext.y : 1.0;
    const double sz = ext.z > 1e-12 ? info.mean_size[2] / ext.z : 1.0;
    for (Point3& p : t.cloud.points) p = {p.x * sx, p.y * sy, p.z * sz};

    const Bounds3 sb = bounds_of(t.cloud);
    t.l = sb.extents().x;
    t.w = sb.extents().y;
    t.h = sb.extents().z;

    if (t.shape_class == ShapeClass::Supporter) {
        t.mer = compute_mer(t.cloud);
        const double ssh_raw = compute_ssh(t.cloud);
        t.css = compute_css(t.cloud, *t.mer, ssh_raw);
        t.ssh = ssh_raw - sb.min.z;
    }
    return t;
}

/// Loads every template under `dir` (one subdirectory per category, PLY files
/// inside; the filename stem is the template id). Throws on unreadable files
/// or categories absent from the config.
inline TemplateBank build_template_bank(const std::filesystem::path& dir,
                                        const CategoryConfig& config) {
    TemplateBank bank;
    if (!std::filesystem::exists(dir)) {
        throw std::runtime_error("template directory does not exist: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ply") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        const std::string category = file.parent_path().filename().string();
        if (!config.contains(category)) {
            throw std::runtime_error("category absent from config: " + category +
                                     " (from " + file.string() + ")");
        }
        PointCloud raw;
        try {
            raw = read_point_cloud_ply(file);
            if (raw.empty()) throw std::runtime_error("no points");
            bank[category].push_back(
                make_template(file.stem().string(), category, raw, config.at(category)));
        } catch (const std::exception& e) {
            throw std::runtime_error("failed to load template " + file.string() + ": " + e.what());
        }
    }
    return bank;
}

}  // namespace vscene
