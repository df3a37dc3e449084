#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vscene/labels.hpp"
#include "vscene/rng.hpp"
#include "vscene/scene.hpp"
#include "vscene/shapes.hpp"

namespace vscene {

/// One scene as the augmentation planner sees it: identity, category-presence
/// vector over the config's category order, its labels, and an axis-aligned
/// XY bound that pasted objects must stay inside.
struct SceneEntry {
    std::string scene_id;
    std::vector<bool> presence;
    std::vector<WeakLabel> labels;
    Vec2 bound_min{};
    Vec2 bound_max{};
};

struct SceneCatalog {
    std::vector<std::string> category_names;  // defines the presence order
    std::vector<bool> category_small;
    std::vector<SceneEntry> scenes;

    int index_of(const std::string& category) const {
        const auto it = std::find(category_names.begin(), category_names.end(), category);
        return it == category_names.end()
                   ? -1
                   : static_cast<int>(it - category_names.begin());
    }
};

/// Builds a catalog from per-scene label lists. The scene bound defaults to
/// the AABB of the label centers; callers with richer geometry can widen it.
inline SceneCatalog build_catalog(
    const std::vector<std::pair<std::string, std::vector<WeakLabel>>>& scenes,
    const CategoryConfig& config) {
    SceneCatalog catalog;
    catalog.category_names = config.names();
    catalog.category_small.reserve(catalog.category_names.size());
    for (const auto& name : catalog.category_names) {
        catalog.category_small.push_back(config.at(name).small);
    }
    for (const auto& [id, labels] : scenes) {
        SceneEntry entry;
        entry.scene_id = id;
        entry.labels = labels;
        entry.presence.assign(catalog.category_names.size(), false);
        bool first = true;
        for (const WeakLabel& label : labels) {
            const int idx = catalog.index_of(label.category);
            if (idx >= 0) entry.presence[idx] = true;
            const Vec2 p = label.center.xy();
            if (first) {
                entry.bound_min = entry.bound_max = p;
                first = false;
            } else {
                entry.bound_min = {std::min(entry.bound_min.x, p.x), std::min(entry.bound_min.y, p.y)};
                entry.bound_max = {std::max(entry.bound_max.x, p.x), std::max(entry.bound_max.y, p.y)};
            }
        }
        catalog.scenes.push_back(std::move(entry));
    }
    return catalog;
}

/// Num(I): the number of scenes containing objects of every category in I.
/// Num of the empty set is the total scene count.
class CategoryCooccurrence {
public:
    explicit CategoryCooccurrence(const SceneCatalog& catalog) : catalog_(&catalog) {}

    int count(const std::vector<int>& indices) const {
        int n = 0;
        for (const SceneEntry& s : catalog_->scenes) {
            bool all = true;
            for (const int i : indices) {
                if (i < 0 || i >= static_cast<int>(s.presence.size()) || !s.presence[i]) {
                    all = false;
                    break;
                }
            }
            n += all;
        }
        return n;
    }

private:
    const SceneCatalog* catalog_;
};

inline CategoryCooccurrence category_cooccurrence(const SceneCatalog& catalog) {
    return CategoryCooccurrence(catalog);
}

/// v_c[i] = Num({i, c}) / Num({c}) for i != c, and 0 at c itself. Throws when
/// the category never occurs.
inline std::vector<double> correlation_vector(const SceneCatalog& catalog,
                                              const std::string& category) {
    const int c = catalog.index_of(category);
    if (c < 0) throw std::invalid_argument("category absent: " + category);
    const CategoryCooccurrence num(catalog);
    const int base = num.count({c});
    if (base == 0) throw std::runtime_error("category absent: " + category);
    std::vector<double> v(catalog.category_names.size(), 0.0);
    for (int i = 0; i < static_cast<int>(v.size()); ++i) {
        if (i == c) continue;
        v[i] = static_cast<double>(num.count({i, c})) / static_cast<double>(base);
    }
    return v;
}

/// Corr(s, c) = sum_i l_s[i] * (v_c[i] - r). The penalty r discounts scenes
/// full of weakly correlated categories.
inline double scene_correlation(const std::vector<bool>& presence, const std::vector<double>& v,
                                double r) {
    if (presence.size() != v.size()) {
        throw std::invalid_argument("scene_correlation: vector lengths differ");
    }
    double corr = 0.0;
    for (std::size_t i = 0; i < presence.size(); ++i) {
        if (presence[i]) corr += v[i] - r;
    }
    return corr;
}

struct AugmentConfig {
    double copy_prob = 0.75;
    int oversample_factor = 2;
    double corr_penalty = 0.25;  // r
    std::map<std::string, int> scarce_counts{
        {"bathtub", 40}, {"bench", 70}, {"dresser", 15}, {"laptop", 55}, {"wardrobe", 50}};

    void validate() const {
        if (copy_prob < 0.0 || copy_prob > 1.0 || corr_penalty < 0.0 || oversample_factor < 1) {
            throw std::invalid_argument("bad augment config");
        }
    }
};

/// A new object of `category` pasted at `position` (z is resolved by the
/// gravity stage).
struct PlannedInsertion {
    std::string category;
    Vec2 position;
};

struct ScenePlan {
    std::string scene_id;
    int oversample = 1;
    std::vector<std::vector<PlannedInsertion>> copies;  // per materialized copy
    std::vector<PlannedInsertion> insertions;           // scarce objects, applied to every copy
};

struct AugmentationPlan {
    std::vector<ScenePlan> scenes;

    const ScenePlan* find(const std::string& scene_id) const {
        for (const ScenePlan& s : scenes) {
            if (s.scene_id == scene_id) return &s;
        }
        return nullptr;
    }
};

/// Scenes containing small objects are oversampled `oversample_factor` times;
/// within each materialized copy every small object is independently
/// copy-pasted with `copy_prob` at a uniform XY inside the scene bound. Each
/// scarce category's configured insertion count goes to the scenes with the
/// highest Corr(s, c), one per scene, ties broken by scene id.
inline AugmentationPlan plan_augmentation(const SceneCatalog& catalog, const AugmentConfig& config,
                                          Rng rng, std::vector<std::string>* warnings = nullptr) {
    config.validate();
    AugmentationPlan plan;
    std::map<std::string, std::size_t> plan_index;

    const auto plan_for = [&](const SceneEntry& entry) -> ScenePlan& {
        const auto it = plan_index.find(entry.scene_id);
        if (it != plan_index.end()) return plan.scenes[it->second];
        plan_index[entry.scene_id] = plan.scenes.size();
        ScenePlan sp;
        sp.scene_id = entry.scene_id;
        sp.copies.assign(1, {});
        plan.scenes.push_back(std::move(sp));
        return plan.scenes.back();
    };

    for (const SceneEntry& entry : catalog.scenes) {
        std::vector<std::size_t> small_labels;
        for (std::size_t i = 0; i < entry.labels.size(); ++i) {
            const int idx = catalog.index_of(entry.labels[i].category);
            if (idx >= 0 && catalog.category_small[idx]) small_labels.push_back(i);
        }
        if (small_labels.empty()) continue;

        ScenePlan& sp = plan_for(entry);
        sp.oversample = config.oversample_factor;
        sp.copies.assign(sp.oversample, {});
        for (int copy = 0; copy < sp.oversample; ++copy) {
            for (const std::size_t li : small_labels) {
                Rng draw = rng.derive(entry.scene_id).derive("copy").derive(copy).derive(li);
                if (draw.uniform() < config.copy_prob) {
                    const Vec2 pos{draw.uniform(entry.bound_min.x, entry.bound_max.x),
                                   draw.uniform(entry.bound_min.y, entry.bound_max.y)};
                    sp.copies[copy].push_back({entry.labels[li].category, pos});
                }
            }
        }
    }

    for (const auto& [category, count] : config.scarce_counts) {
        if (count <= 0) continue;
        const int c = catalog.index_of(category);
        if (c < 0) continue;
        if (CategoryCooccurrence(catalog).count({c}) == 0) continue;  // never observed
        const std::vector<double> v = correlation_vector(catalog, category);

        std::vector<std::pair<double, const SceneEntry*>> ranked;
        for (const SceneEntry& entry : catalog.scenes) {
            ranked.emplace_back(scene_correlation(entry.presence, v, config.corr_penalty), &entry);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return a.first > b.first || (a.first == b.first && a.second->scene_id < b.second->scene_id);
        });

        std::size_t take = static_cast<std::size_t>(count);
        if (take > ranked.size()) {
            if (warnings) {
                warnings->push_back("scarce count for '" + category +
                                    "' exceeds the scene count; inserting into every scene");
            }
            take = ranked.size();
        }
        for (std::size_t i = 0; i < take; ++i) {
            const SceneEntry& entry = *ranked[i].second;
            Rng draw = rng.derive(entry.scene_id).derive("scarce").derive(category);
            const Vec2 pos{draw.uniform(entry.bound_min.x, entry.bound_max.x),
                           draw.uniform(entry.bound_min.y, entry.bound_max.y)};
            plan_for(entry).insertions.push_back({category, pos});
        }
    }

    // drop no-op entries so an all-quiet catalog produces the empty plan
    std::vector<ScenePlan> kept;
    for (ScenePlan& sp : plan.scenes) {
        bool any_copy = false;
        for (const auto& c : sp.copies) any_copy = any_copy || !c.empty();
        if (sp.oversample > 1 || any_copy || !sp.insertions.empty()) kept.push_back(std::move(sp));
    }
    plan.scenes = std::move(kept);
    return plan;
}

/// Materializes a plan: planned scenes are re-emitted `oversample` times with
/// the planned labels added, then gravity, collision and density control are
/// re-run. Unplanned scenes pass through untouched. Output scene ids carry an
/// `_aug<k>` suffix when a scene is materialized more than once.
inline std::vector<VirtualScene> apply_augmentation(
    const AugmentationPlan& plan, const std::vector<VirtualScene>& scenes, const TemplateBank& bank,
    const CategoryConfig& categories, const GenConfig& gen_config, Rng rng,
    std::vector<std::string>* warnings = nullptr) {
    std::vector<VirtualScene> out;
    for (const VirtualScene& scene : scenes) {
        const ScenePlan* sp = plan.find(scene.scene_id);
        if (sp == nullptr) {
            out.push_back(scene);
            continue;
        }
        for (int copy = 0; copy < sp->oversample; ++copy) {
            std::vector<WeakLabel> added;
            if (copy < static_cast<int>(sp->copies.size())) {
                for (const PlannedInsertion& ins : sp->copies[copy]) {
                    added.push_back({{ins.position.x, ins.position.y, 0.0}, ins.category});
                }
            }
            for (const PlannedInsertion& ins : sp->insertions) {
                added.push_back({{ins.position.x, ins.position.y, 0.0}, ins.category});
            }

            Rng copy_rng = rng.derive(scene.scene_id).derive("apply").derive(copy);
            std::vector<PlacementRecord> records = scene.placements;
            std::vector<PlacementRecord> fresh = initial_positions(
                added, bank, gen_config, {}, copy_rng.derive("init"), warnings);
            for (PlacementRecord& rec : fresh) {
                rec.instance_id += static_cast<int>(records.size());
                records.push_back(std::move(rec));
            }

            gravity_stage(records, bank);
            collision_stage(records, bank, copy_rng.derive("collision"), warnings);
            VirtualScene result =
                sample_scene(records, bank, categories, gen_config, copy_rng.derive("sample"));
            result.scene_id = sp->oversample > 1
                                  ? scene.scene_id + "_aug" + std::to_string(copy)
                                  : scene.scene_id;
            out.push_back(std::move(result));
        }
    }
    return out;
}

}  // namespace vscene
