// vscene: enhance position-level labels (object center + class) into fully
// annotated synthetic 3D scenes, with subcommands exposing each pipeline
// stage (template properties, mesh segmentation, generation, label jitter,
// augmentation, dataset statistics).

#include <atomic>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "vscene/augment.hpp"
#include "vscene/json_io.hpp"
#include "vscene/labels.hpp"
#include "vscene/scene.hpp"
#include "vscene/segments.hpp"
#include "vscene/shapes.hpp"

namespace fs = std::filesystem;
using namespace vscene;

namespace {

struct PipelineConfig {
    GenConfig gen;
    AugmentConfig aug;
    double error_rate = 0.1;
    double focal_gamma = 3.0;   // loss-kernel defaults, exposed for consumers
    double hinge_lambda = 0.05;
    std::uint64_t seed = 0;
    int jobs = 1;
};

void apply_overrides(PipelineConfig& cfg, const json& j) {
    if (j.contains("N")) cfg.gen.max_points = j.at("N").get<int>();
    if (j.contains("A_min")) cfg.gen.min_seed_area = j.at("A_min").get<double>();
    if (j.contains("H_min")) cfg.gen.min_seed_height = j.at("H_min").get<double>();
    if (j.contains("delta_h")) cfg.gen.merge_height_tol = j.at("delta_h").get<double>();
    if (j.contains("k_seg")) cfg.gen.fh_scale = j.at("k_seg").get<double>();
    if (j.contains("adjacency_tol")) cfg.gen.adjacency_tol = j.at("adjacency_tol").get<double>();
    if (j.contains("scale_jitter")) cfg.gen.scale_jitter = j.at("scale_jitter").get<bool>();
    if (j.contains("gamma")) cfg.focal_gamma = j.at("gamma").get<double>();
    if (j.contains("lambda")) cfg.hinge_lambda = j.at("lambda").get<double>();
    if (j.contains("r")) cfg.aug.corr_penalty = j.at("r").get<double>();
    if (j.contains("copy_prob")) cfg.aug.copy_prob = j.at("copy_prob").get<double>();
    if (j.contains("oversample_factor")) {
        cfg.aug.oversample_factor = j.at("oversample_factor").get<int>();
    }
    if (j.contains("scarce_counts")) {
        cfg.aug.scarce_counts.clear();
        for (const auto& [name, count] : j.at("scarce_counts").items()) {
            cfg.aug.scarce_counts[name] = count.get<int>();
        }
    }
    if (j.contains("error_rate")) cfg.error_rate = j.at("error_rate").get<double>();
}

std::uint64_t scene_seed(std::uint64_t base, const std::string& scene_id) {
    return mix64(base ^ hash_bytes(scene_id));
}

CategoryConfig load_categories(const std::string& path) {
    return path.empty() ? default_category_config() : read_category_config(path);
}

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
    std::vector<fs::path> out;
    if (fs::is_regular_file(dir)) {
        if (dir.extension() == ext) out.push_back(dir);
        return out;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::mutex log_mutex;

void log_line(const std::string& line) {
    std::scoped_lock lock(log_mutex);
    std::cerr << line << "\n";
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Returns one error
/// string per failed index.
std::vector<std::pair<std::size_t, std::string>> parallel_for(
    std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    std::vector<std::pair<std::size_t, std::string>> failures;
    std::mutex failures_mutex;
    const auto run = [&](std::size_t i) {
        try {
            fn(i);
        } catch (const std::exception& e) {
            std::scoped_lock lock(failures_mutex);
            failures.emplace_back(i, e.what());
        }
    };
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int n_threads = std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1));
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run(i);
            });
        }
        for (std::thread& t : pool) t.join();
    }
    std::sort(failures.begin(), failures.end());
    return failures;
}

// --- props ------------------------------------------------------------------

int cmd_props(const std::string& templates, const std::string& category_config,
              const std::string& out) {
    const CategoryConfig config = load_categories(category_config);
    json report = json::object();
    std::vector<std::string> failures;

    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(templates)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ply") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
        const std::string category = file.parent_path().filename().string();
        try {
            if (!config.contains(category)) {
                throw std::runtime_error("category absent from config: " + category);
            }
            const PointCloud raw = read_point_cloud_ply(file);
            if (raw.empty()) throw std::runtime_error("no points");
            const ObjectTemplate t =
                make_template(file.stem().string(), category, raw, config.at(category));
            json tj{{"category", t.category},
                    {"l", t.l},
                    {"w", t.w},
                    {"h", t.h},
                    {"class", to_string(t.shape_class)}};
            if (t.mer) tj["mer"] = to_json(*t.mer);
            if (t.ssh) tj["ssh"] = *t.ssh;
            if (t.css) tj["css"] = *t.css;
            report[t.category + "/" + t.id] = std::move(tj);
        } catch (const std::exception& e) {
            failures.push_back(file.string() + ": " + e.what());
        }
    }

    if (out.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        save_json(out, report);
    }
    for (const std::string& f : failures) std::cerr << "failed: " << f << "\n";
    return failures.empty() ? 0 : 1;
}

// --- segment ----------------------------------------------------------------

int cmd_segment(const std::string& meshes, const std::string& out, const PipelineConfig& cfg) {
    const auto files = files_with_extension(meshes, ".ply");
    fs::create_directories(out);
    int failed = 0;
    for (const fs::path& file : files) {
        try {
            const SceneMesh mesh = read_mesh_ply(file);
            const SegmentGraph merged =
                merge_horizontal(oversegment(mesh, cfg.gen.fh_scale, cfg.gen.adjacency_tol), mesh,
                                 cfg.gen.min_seed_area, cfg.gen.min_seed_height,
                                 cfg.gen.merge_height_tol);
            save_json(fs::path(out) / (file.stem().string() + ".segments.json"), to_json(merged));
            int seeds = 0;
            for (const Segment& s : merged.segments) seeds += s.mer.has_value();
            std::cout << file.stem().string() << ": " << merged.segments.size() << " segments, "
                      << seeds << " horizontal seeds\n";
        } catch (const std::exception& e) {
            std::cerr << "failed: " << file.string() << ": " << e.what() << "\n";
            ++failed;
        }
    }
    return failed == 0 ? 0 : 1;
}

// --- generate ----------------------------------------------------------------

int cmd_generate(const std::string& labels_dir, const std::string& meshes_dir,
                 const std::string& templates, const std::string& category_config,
                 const std::string& out, const PipelineConfig& cfg) {
    const CategoryConfig categories = load_categories(category_config);
    TemplateBank bank;
    try {
        bank = build_template_bank(templates, categories);
    } catch (const std::exception& e) {
        std::cerr << "failed to build template bank: " << e.what() << "\n";
        return 1;
    }
    const auto files = files_with_extension(labels_dir, ".json");
    fs::create_directories(out);

    const auto failures = parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const LabeledScene input = read_labels_json(files[i]);

        std::optional<SceneMesh> mesh;
        if (!meshes_dir.empty()) {
            const fs::path mesh_path = fs::path(meshes_dir) / (input.scene_id + ".ply");
            if (fs::exists(mesh_path)) mesh = read_mesh_ply(mesh_path);
        }

        GenConfig gen = cfg.gen;
        gen.seed = scene_seed(cfg.seed, input.scene_id);
        std::vector<std::string> warnings;
        StageTimings timings;
        const VirtualScene scene =
            generate(input.labels, mesh ? &*mesh : nullptr, bank, categories, gen, input.scene_id,
                     &warnings, nullptr, &timings);
        write_scene(out, scene, cfg.seed);

        const double total_ms = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
        std::ostringstream line;
        line << "scene " << input.scene_id << ": " << scene.placements.size() << " objects, "
             << scene.points.size() << " points | segment " << std::fixed << std::setprecision(1)
             << timings.segment_ms << " ms, place " << timings.place_ms << " ms, sample "
             << timings.sample_ms << " ms, total " << total_ms << " ms";
        for (const std::string& w : warnings) line << "\n  warning: " << w;
        log_line(line.str());
    });

    for (const auto& [i, what] : failures) {
        std::cerr << "failed: " << files[i].string() << ": " << what << "\n";
    }
    return failures.empty() ? 0 : 1;
}

// --- jitter -------------------------------------------------------------------

int cmd_jitter(const std::string& boxes_file, const std::string& out, const PipelineConfig& cfg,
               const std::string& law) {
    const auto boxes = read_boxes_json(boxes_file);
    Rng rng(cfg.seed);
    const JitterLaw jitter_law =
        law == "ball" ? JitterLaw::UniformBall : JitterLaw::PerAxisUniform;
    LabeledScene scene;
    scene.scene_id = fs::path(out).stem().string();
    scene.labels = boxes_to_labels(boxes, cfg.error_rate, rng, jitter_law);
    write_labels_json(out, scene);
    return 0;
}

// --- augment ------------------------------------------------------------------

int cmd_augment(const std::string& scenes_dir, const std::string& templates,
                const std::string& category_config, const std::string& out,
                const PipelineConfig& cfg) {
    const CategoryConfig categories = load_categories(category_config);
    TemplateBank bank;
    try {
        bank = build_template_bank(templates, categories);
    } catch (const std::exception& e) {
        std::cerr << "failed to build template bank: " << e.what() << "\n";
        return 1;
    }

    std::vector<VirtualScene> scenes;
    for (const fs::path& ply : files_with_extension(scenes_dir, ".ply")) {
        const fs::path sidecar = fs::path(ply).replace_extension(".json");
        if (!fs::exists(sidecar)) {
            std::cerr << "warning: no sidecar for " << ply.string() << ", skipped\n";
            continue;
        }
        try {
            scenes.push_back(read_scene(ply, sidecar));
        } catch (const std::exception& e) {
            std::cerr << "warning: unreadable scene " << ply.string() << ": " << e.what()
                      << ", skipped\n";
        }
    }

    // catalog from the scenes' annotated boxes; the bound covers the box corners
    std::vector<std::pair<std::string, std::vector<WeakLabel>>> catalog_input;
    for (const VirtualScene& s : scenes) {
        std::vector<WeakLabel> labels;
        for (const auto& b : s.boxes) labels.push_back({b.center, b.category});
        catalog_input.emplace_back(s.scene_id, labels);
    }
    SceneCatalog catalog = build_catalog(catalog_input, categories);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        for (const auto& b : scenes[i].boxes) {
            catalog.scenes[i].bound_min.x =
                std::min(catalog.scenes[i].bound_min.x, b.center.x - 0.5 * b.extents[0]);
            catalog.scenes[i].bound_min.y =
                std::min(catalog.scenes[i].bound_min.y, b.center.y - 0.5 * b.extents[1]);
            catalog.scenes[i].bound_max.x =
                std::max(catalog.scenes[i].bound_max.x, b.center.x + 0.5 * b.extents[0]);
            catalog.scenes[i].bound_max.y =
                std::max(catalog.scenes[i].bound_max.y, b.center.y + 0.5 * b.extents[1]);
        }
    }

    std::vector<std::string> warnings;
    const AugmentationPlan plan =
        plan_augmentation(catalog, cfg.aug, Rng(cfg.seed).derive("plan"), &warnings);
    fs::create_directories(out);
    save_json(fs::path(out) / "plan.json", to_json(plan));

    const Rng apply_rng = Rng(cfg.seed).derive("apply");
    const auto failures = parallel_for(scenes.size(), cfg.jobs, [&](std::size_t i) {
        GenConfig gen = cfg.gen;
        gen.seed = scene_seed(cfg.seed, scenes[i].scene_id);
        std::vector<std::string> scene_warnings;
        const std::vector<VirtualScene> result = apply_augmentation(
            plan, {scenes[i]}, bank, categories, gen, apply_rng, &scene_warnings);
        for (const VirtualScene& s : result) write_scene(out, s, cfg.seed);
        std::ostringstream line;
        line << "scene " << scenes[i].scene_id << ": " << result.size() << " output scene(s)";
        for (const std::string& w : scene_warnings) line << "\n  warning: " << w;
        log_line(line.str());
    });

    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& [i, what] : failures) {
        std::cerr << "failed: " << scenes[i].scene_id << ": " << what << "\n";
    }
    return failures.empty() ? 0 : 1;
}

// --- stats --------------------------------------------------------------------

int cmd_stats(const std::string& scenes_dir, const std::string& out) {
    struct Tally {
        long long objects = 0;
        long long points = 0;
    };
    std::map<std::string, Tally> per_category;

    for (const fs::path& ply : files_with_extension(scenes_dir, ".ply")) {
        const fs::path sidecar = fs::path(ply).replace_extension(".json");
        if (!fs::exists(sidecar)) continue;
        try {
            const VirtualScene scene = read_scene(ply, sidecar);
            std::map<int, long long> points_per_instance;
            for (const int id : scene.instance_ids) ++points_per_instance[id];
            for (const auto& b : scene.boxes) {
                Tally& t = per_category[b.category];
                ++t.objects;
                const auto it = points_per_instance.find(b.instance_id);
                if (it != points_per_instance.end()) t.points += it->second;
            }
        } catch (const std::exception& e) {
            std::cerr << "warning: skipped " << ply.string() << ": " << e.what() << "\n";
        }
    }

    std::size_t name_width = 8;
    for (const auto& [name, t] : per_category) name_width = std::max(name_width, name.size());
    std::cout << std::left << std::setw(static_cast<int>(name_width) + 2) << "category"
              << std::right << std::setw(9) << "objects" << std::setw(14) << "mean points"
              << "\n";
    json report = json::object();
    for (const auto& [name, t] : per_category) {
        const double mean = t.objects > 0 ? static_cast<double>(t.points) / t.objects : 0.0;
        std::cout << std::left << std::setw(static_cast<int>(name_width) + 2) << name << std::right
                  << std::setw(9) << t.objects << std::setw(14) << std::fixed
                  << std::setprecision(1) << mean << "\n";
        report[name] = json{{"objects", t.objects}, {"mean_points", mean}};
    }
    if (!out.empty()) save_json(out, report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic 3D scene construction from position-level labels"};
    app.require_subcommand(1);

    PipelineConfig cfg;
    std::string templates, category_config, labels_dir, meshes_dir, scenes_dir, boxes_file;
    std::string out, config_file, law = "per_axis";

    const auto add_common = [&](CLI::App* cmd, bool with_jobs) {
        cmd->add_option("--seed", cfg.seed, "base random seed");
        cmd->add_option("--config", config_file, "JSON overriding pipeline defaults")
            ->check(CLI::ExistingFile);
        if (with_jobs) cmd->add_option("--jobs", cfg.jobs, "parallel scene workers");
    };

    CLI::App* props = app.add_subcommand("props", "compute per-template shape properties");
    props->add_option("--templates", templates, "template directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    props->add_option("--category-config", category_config, "category config JSON")
        ->check(CLI::ExistingFile);
    props->add_option("--out", out, "report file (stdout if omitted)");

    CLI::App* segment = app.add_subcommand("segment", "segment scene meshes and export the graphs");
    segment->add_option("--meshes", meshes_dir, "mesh file or directory")
        ->required()
        ->check(CLI::ExistingPath);
    segment->add_option("--out", out, "output directory")->required();
    add_common(segment, false);

    CLI::App* generate_cmd = app.add_subcommand("generate", "build virtual scenes from weak labels");
    generate_cmd->add_option("--labels", labels_dir, "weak-label JSON directory")
        ->required()
        ->check(CLI::ExistingPath);
    generate_cmd->add_option("--meshes", meshes_dir, "scene mesh directory (optional)")
        ->check(CLI::ExistingDirectory);
    generate_cmd->add_option("--templates", templates, "template directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    generate_cmd->add_option("--category-config", category_config, "category config JSON")
        ->check(CLI::ExistingFile);
    generate_cmd->add_option("--out", out, "output directory")->required();
    add_common(generate_cmd, true);

    CLI::App* jitter = app.add_subcommand("jitter", "degrade boxes into jittered weak labels");
    jitter->add_option("--boxes", boxes_file, "ground-truth box JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    jitter->add_option("--error-rate", cfg.error_rate, "center error rate in [0, 1]");
    jitter->add_option("--law", law, "jitter law: per_axis or ball")
        ->check(CLI::IsMember({"per_axis", "ball"}));
    jitter->add_option("--out", out, "output weak-label JSON file")->required();
    add_common(jitter, false);

    CLI::App* augment = app.add_subcommand("augment", "oversample and copy-paste rare objects");
    augment->add_option("--scenes", scenes_dir, "generated scene directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    augment->add_option("--templates", templates, "template directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    augment->add_option("--category-config", category_config, "category config JSON")
        ->check(CLI::ExistingFile);
    augment->add_option("--out", out, "output directory")->required();
    add_common(augment, true);

    CLI::App* stats = app.add_subcommand("stats", "per-category object and point statistics");
    stats->add_option("--scenes", scenes_dir, "scene directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    stats->add_option("--out", out, "JSON report file (optional)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!config_file.empty()) apply_overrides(cfg, load_json(config_file));
        cfg.gen.validate();
        cfg.aug.validate();

        if (props->parsed()) return cmd_props(templates, category_config, out);
        if (segment->parsed()) return cmd_segment(meshes_dir, out, cfg);
        if (generate_cmd->parsed()) {
            return cmd_generate(labels_dir, meshes_dir, templates, category_config, out, cfg);
        }
        if (jitter->parsed()) return cmd_jitter(boxes_file, out, cfg, law);
        if (augment->parsed()) return cmd_augment(scenes_dir, templates, category_config, out, cfg);
        if (stats->parsed()) return cmd_stats(scenes_dir, out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
