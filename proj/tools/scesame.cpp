#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scesame/error.hpp"
#include "scesame/evaluation.hpp"
#include "scesame/fixtures.hpp"
#include "scesame/io.hpp"
#include "scesame/parallel.hpp"
#include "scesame/pipeline.hpp"

using namespace scesame;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parameter:
            return kUsage;
        case ErrorKind::Numeric:
        case ErrorKind::InvalidAffinity:
        case ErrorKind::Assignment:
            return kNumeric;
        default:
            return kData;
    }
}

std::uint64_t env_seed() {
    const char* s = std::getenv("SCESAME_SEED");
    if (!s || !*s) return 0;
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw Error(ErrorKind::Parameter, std::string("SCESAME_SEED is not an integer: ") + s);
    }
}

// Pipeline flags shared by detect. Optional fields stay unset unless the
// flag was given, so config-file values survive.
struct PipelineFlags {
    std::optional<std::string> preset;
    std::optional<std::string> config_file;
    std::optional<int> tms_t;
    std::optional<int> sc_c;
    std::optional<double> tau;
    std::optional<int> scale_neighbor;
    std::optional<int> bzp_p;
    std::optional<double> nms_iou;
    std::optional<int> blur_kernel;
    std::optional<double> low_suppress;
    std::optional<std::string> laplacian;
    std::optional<std::uint64_t> seed;
    bool no_blur = false;
    bool no_nms = false;
    bool no_box_nms = false;
    bool njw = false;

    void attach(CLI::App* app) {
        app->add_option("--preset", preset, "Ablation row: sam, sam-p5, tms-t3, tms-t3p5, sc-c2, sc-c2p5, "
                                            "scesame-t3c2, scesame-t3c2p5");
        app->add_option("--config", config_file, "Flat JSON config; flags override its keys")->check(CLI::ExistingFile);
        app->add_option("--tms-t", tms_t, "Top mask selection keeps ceil(n/t) masks; 0 disables");
        app->add_option("--sc-c,--clusters-c", sc_c, "Spectral clustering into max(floor(n/c), 2) masks; 0 disables");
        app->add_option("--tau", tau, "Overlap temperature of the mask affinity (default 0.5)");
        app->add_option("--scale-neighbor", scale_neighbor, "Neighbor rank for local scaling (default 7)");
        app->add_option("--bzp-p", bzp_p, "Boundary zero padding width in pixels (default 5)");
        app->add_option("--nms-iou", nms_iou, "Box IoU threshold of mask NMS (default 0.7)");
        app->add_option("--blur-kernel", blur_kernel, "Odd Gaussian kernel size (default 3)");
        app->add_option("--low-suppress", low_suppress, "Factor applied to edge-NMS non-maxima (default 0)");
        app->add_option("--laplacian", laplacian, "normalized or unnormalized")
            ->check(CLI::IsMember({"normalized", "unnormalized"}));
        app->add_option("--seed", seed, "k-means seed (default: SCESAME_SEED or 0)");
        app->add_flag("--no-blur", no_blur, "Skip the Gaussian blur");
        app->add_flag("--no-nms", no_nms, "Skip edge NMS");
        app->add_flag("--no-box-nms", no_box_nms, "Masks are already NMS-filtered");
        app->add_flag("--njw", njw, "Row-normalize the spectral embedding");
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg;
        cfg.tms_t.reset();
        cfg.sc_c.reset();
        if (preset) cfg = preset_config(*preset);
        bool seed_set = false;
        if (config_file) {
            json doc;
            try {
                doc = json::parse(read_text_file(*config_file));
            } catch (const json::exception& e) {
                throw Error(ErrorKind::MalformedInput, *config_file + ": " + e.what());
            }
            apply_config_json(doc, cfg);
            seed_set = doc.contains("seed");
        }
        auto opt_stage = [](std::optional<int> v, std::optional<int>& dst) {
            if (!v) return;
            if (*v == 0) {
                dst.reset();
            } else {
                dst = *v;
            }
        };
        opt_stage(tms_t, cfg.tms_t);
        opt_stage(sc_c, cfg.sc_c);
        if (tau) cfg.tau = *tau;
        if (scale_neighbor) cfg.scale_neighbor = *scale_neighbor;
        if (bzp_p) cfg.bzp_p = *bzp_p;
        if (nms_iou) cfg.nms_iou = *nms_iou;
        if (blur_kernel) cfg.blur_kernel = *blur_kernel;
        if (low_suppress) cfg.nms_low_suppress = *low_suppress;
        if (laplacian) cfg.laplacian = parse_laplacian_variant(*laplacian);
        if (no_blur) cfg.blur = false;
        if (no_nms) cfg.edge_nms = false;
        if (no_box_nms) cfg.box_nms = false;
        if (njw) cfg.row_normalize = true;
        if (seed) {
            cfg.seed = *seed;
        } else if (!seed_set) {
            cfg.seed = env_seed();
        }
        return cfg;
    }
};

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string image_name(const MaskSet& masks, const fs::path& source) {
    const auto stem = fs::path(masks.file_name).stem().string();
    return stem.empty() ? source.stem().string() : stem;
}

int run_detect(const PipelineFlags& flags, const fs::path& masks_path, const fs::path& out, int jobs,
               bool emit_masks, std::optional<fs::path> manifest_path) {
    const auto cfg = flags.resolve();
    const bool single = !fs::is_directory(masks_path);
    std::vector<fs::path> inputs = single ? std::vector<fs::path>{masks_path} : files_with_extension(masks_path, ".json");
    if (inputs.empty()) throw Error(ErrorKind::MalformedInput, "no mask files in " + masks_path.string());
    // A single input written to "<name>.pfm" keeps that name; otherwise
    // --out is a directory receiving "<image>.pfm".
    const bool explicit_file = single && out.extension() == ".pfm";
    const fs::path out_dir = explicit_file ? (out.has_parent_path() ? out.parent_path() : fs::path(".")) : out;
    fs::create_directories(out_dir);

    std::vector<json> entries(inputs.size());
    std::mutex log_mutex;
    int worst = kOk;
    parallel_for(inputs.size(), jobs, [&](std::size_t i) {
        json entry{{"masks_file", inputs[i].string()}};
        int code = kOk;
        try {
            const auto loaded = load_mask_json(inputs[i]);
            const auto name = image_name(loaded.masks, inputs[i]);
            const auto result = detect_edges(loaded.masks, cfg);
            const fs::path pfm = explicit_file ? out : out_dir / (name + ".pfm");
            write_pfm(pfm, result.edges);
            auto pgm = pfm;
            write_pgm(pgm.replace_extension(".pgm"), result.edges);
            entry["image"] = name;
            entry["output"] = pfm.string();
            entry["counts"] = {{"input", result.counts.input},
                               {"after_nms", result.counts.after_nms},
                               {"after_tms", result.counts.after_tms},
                               {"after_sc", result.counts.after_sc}};
            auto warnings = loaded.warnings;
            warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
            entry["warnings"] = warnings;
            if (emit_masks) {
                auto masks_out = pfm;
                masks_out.replace_extension(".masks.json");
                write_mask_json(masks_out, result.final_masks, &result.final_members);
                entry["final_masks"] = masks_out.string();
            }
            entry["error"] = nullptr;
        } catch (const Error& e) {
            entry["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
            code = exit_code(e.kind());
        } catch (const std::exception& e) {
            entry["error"] = {{"kind", "io"}, {"message", e.what()}};
            code = kData;
        }
        std::lock_guard<std::mutex> lock(log_mutex);
        if (code != kOk) {
            std::cerr << "scesame: " << inputs[i].string() << ": " << entry["error"]["message"].get<std::string>()
                      << "\n";
            worst = std::max(worst, code);
        }
        entries[i] = std::move(entry);
    });

    std::size_t failures = 0;
    for (const auto& e : entries) failures += !e["error"].is_null();
    const json manifest{{"variant", variant_name(cfg)},
                        {"config", config_to_json(cfg)},
                        {"config_hash", config_hash(cfg)},
                        {"images", entries},
                        {"failures", failures}};
    write_text_file(manifest_path ? *manifest_path : out_dir / "manifest.json", manifest.dump(2) + "\n");
    return worst;
}

struct Dataset {
    std::vector<std::string> names;
    std::vector<EdgeMap> preds;
    std::vector<GroundTruth> gts;
};

Dataset load_dataset(const fs::path& pred_dir, const fs::path& gt_dir) {
    Dataset ds;
    for (const auto& f : files_with_extension(pred_dir, ".pfm")) {
        const auto name = f.stem().string();
        if (!fs::is_directory(gt_dir / name)) {
            throw Error(ErrorKind::MalformedInput, "no ground truth directory for " + name + " in " + gt_dir.string());
        }
        ds.names.push_back(name);
        ds.preds.push_back(read_pfm(f));
        ds.gts.push_back(load_ground_truth_dir(gt_dir / name));
    }
    if (ds.preds.empty()) throw Error(ErrorKind::EmptyDataset, "no .pfm predictions in " + pred_dir.string());
    return ds;
}

void write_output(const std::string& out, const std::string& text) {
    if (out == "-") {
        std::cout << text;
    } else {
        write_text_file(out, text);
    }
}

void write_circles_csv(const fs::path& path, const CirclesDataset& ds, const ClusterDemo* demo) {
    std::string text = demo ? "x,y,label,spectral,kmeans\n" : "x,y,label\n";
    char line[160];
    for (std::size_t i = 0; i < ds.points.size(); ++i) {
        if (demo) {
            std::snprintf(line, sizeof line, "%.17g,%.17g,%d,%d,%d\n", ds.points[i].x, ds.points[i].y, ds.labels[i],
                          demo->spectral_labels[i], demo->kmeans_labels[i]);
        } else {
            std::snprintf(line, sizeof line, "%.17g,%.17g,%d\n", ds.points[i].x, ds.points[i].y, ds.labels[i]);
        }
        text += line;
    }
    write_output(path.string(), text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-shot edge detection from segmentation masks"};
    app.require_subcommand(1);

    // detect
    auto* detect = app.add_subcommand("detect", "Turn mask JSON files into edge maps");
    PipelineFlags pflags;
    pflags.attach(detect);
    std::string masks_in, detect_out;
    std::optional<std::string> manifest;
    int detect_jobs = 1;
    bool emit_masks = false;
    detect->add_option("--masks", masks_in, "Mask JSON file or directory of them")->required();
    detect->add_option("--out", detect_out, "Output .pfm (single input) or directory")->required();
    detect->add_option("--manifest", manifest, "Manifest path (default <out dir>/manifest.json)");
    detect->add_option("--jobs", detect_jobs, "Images processed in parallel")->check(CLI::PositiveNumber);
    detect->add_flag("--emit-masks", emit_masks, "Also write the final mask set of each image");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score edge maps against ground truth");
    std::string pred_dir, gt_dir, report_out = "report.json";
    double tolerance = kBsdsTolerance;
    bool thin = false;
    int eval_jobs = 1;
    evaluate->add_option("--pred-dir", pred_dir, "Directory of <image>.pfm predictions")->required();
    evaluate->add_option("--gt-dir", gt_dir, "Directory of <image>/ annotation folders")->required();
    evaluate->add_option("--tolerance", tolerance, "Match distance as a fraction of the image diagonal");
    evaluate->add_option("--out", report_out, "Report JSON path, '-' for stdout");
    evaluate->add_flag("--thin", thin, "Thin binarized predictions before matching");
    evaluate->add_option("--jobs", eval_jobs, "Images evaluated in parallel")->check(CLI::PositiveNumber);

    // pr-curve
    auto* curve = app.add_subcommand("pr-curve", "Export the dataset PR curve as CSV");
    std::optional<std::string> curve_report, curve_pred, curve_gt;
    std::string curve_out = "-";
    double curve_tolerance = kBsdsTolerance;
    bool curve_thin = false;
    int curve_jobs = 1;
    auto* from_report = curve->add_option("--report", curve_report, "Report JSON written by evaluate");
    auto* from_pred = curve->add_option("--pred-dir", curve_pred, "Directory of <image>.pfm predictions");
    curve->add_option("--gt-dir", curve_gt, "Directory of <image>/ annotation folders")->needs(from_pred);
    from_pred->excludes(from_report);
    curve->add_option("--tolerance", curve_tolerance, "Match distance as a fraction of the image diagonal");
    curve->add_flag("--thin", curve_thin, "Thin binarized predictions before matching");
    curve->add_option("--jobs", curve_jobs, "Images evaluated in parallel")->check(CLI::PositiveNumber);
    curve->add_option("--out", curve_out, "CSV path, '-' for stdout");

    // cluster-demo
    auto* demo = app.add_subcommand("cluster-demo", "Spectral clustering vs k-means on three noisy circles");
    std::optional<std::uint64_t> demo_seed;
    double demo_noise = kDefaultCircleNoise;
    int demo_neighbors = 10;
    std::optional<std::string> demo_out;
    demo->add_option("--seed", demo_seed, "Sampling and k-means seed (default: SCESAME_SEED or 0)");
    demo->add_option("--noise", demo_noise, "Gaussian noise sigma");
    demo->add_option("--neighbors", demo_neighbors, "k of the kNN graph")->check(CLI::PositiveNumber);
    demo->add_option("--out", demo_out, "CSV of points and labels");

    // fixtures
    auto* fixtures = app.add_subcommand("fixtures", "Write synthetic test data");
    bool want_circles = false, want_scene = false;
    std::optional<std::uint64_t> fx_seed;
    int fx_count = 1;
    double fx_noise = kDefaultCircleNoise;
    std::string fx_out;
    auto* circles_flag = fixtures->add_flag("--circles", want_circles, "Three-circles point set (points.csv)");
    auto* scene_flag = fixtures->add_flag("--scene", want_scene, "Synthetic mask scenes with ground truth");
    circles_flag->excludes(scene_flag);
    fixtures->add_option("--seed", fx_seed, "First seed (default: SCESAME_SEED or 0)");
    fixtures->add_option("--count", fx_count, "Number of scenes, seeds seed..seed+count-1")->check(CLI::PositiveNumber);
    fixtures->add_option("--noise", fx_noise, "Circle noise sigma");
    fixtures->add_option("--out", fx_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*detect) {
            return run_detect(pflags, masks_in, detect_out, detect_jobs, emit_masks,
                              manifest ? std::optional<fs::path>(*manifest) : std::nullopt);
        }
        if (*evaluate) {
            const auto ds = load_dataset(pred_dir, gt_dir);
            EvalOptions opts{tolerance, thin, eval_jobs};
            const auto report = evaluate_dataset(ds.preds, ds.gts, opts);
            auto doc = metrics_to_json(report, ds.names);
            doc["tolerance_fraction"] = tolerance;
            doc["thin"] = thin;
            doc["images"] = ds.names;
            write_output(report_out, doc.dump(2) + "\n");
            std::fprintf(stderr, "ODS %.4f (t=%.2f)  OIS %.4f  AP %.4f  over %zu images\n", report.ods,
                         report.ods_threshold, report.ois, report.ap, ds.names.size());
            return kOk;
        }
        if (*curve) {
            std::vector<PrPoint> points;
            if (curve_report) {
                json doc;
                try {
                    doc = json::parse(read_text_file(*curve_report));
                } catch (const json::exception& e) {
                    throw Error(ErrorKind::MalformedInput, *curve_report + ": " + e.what());
                }
                points = pr_curve_from_json(doc);
            } else if (curve_pred && curve_gt) {
                const auto ds = load_dataset(*curve_pred, *curve_gt);
                EvalOptions opts{curve_tolerance, curve_thin, curve_jobs};
                points = evaluate_dataset(ds.preds, ds.gts, opts).per_threshold;
            } else {
                throw Error(ErrorKind::Parameter, "pr-curve needs --report or both --pred-dir and --gt-dir");
            }
            write_output(curve_out, pr_curve_csv(points));
            return kOk;
        }
        if (*demo) {
            const auto seed = demo_seed ? *demo_seed : env_seed();
            const auto result = cluster_demo(seed, demo_noise, demo_neighbors);
            if (demo_out) write_circles_csv(*demo_out, result.data, &result);
            std::cout << json{{"seed", seed},
                              {"noise", demo_noise},
                              {"neighbors", demo_neighbors},
                              {"spectral_ari", result.spectral_ari},
                              {"kmeans_ari", result.kmeans_ari}}
                             .dump()
                      << "\n";
            return kOk;
        }
        if (*fixtures) {
            if (!want_circles && !want_scene) throw Error(ErrorKind::Parameter, "fixtures needs --circles or --scene");
            const auto seed = fx_seed ? *fx_seed : env_seed();
            const fs::path out = fx_out;
            fs::create_directories(out);
            if (want_circles) {
                write_circles_csv(out / "points.csv", gen_circles(seed, fx_noise), nullptr);
                return kOk;
            }
            for (int i = 0; i < fx_count; ++i) {
                const auto scene = gen_synthetic_scene(seed + static_cast<std::uint64_t>(i));
                const auto name = scene.masks.file_name;
                write_mask_json(out / "masks" / (name + ".json"), scene.masks);
                const auto& ann = scene.ground_truth.annotations;
                for (std::size_t a = 0; a < ann.size(); ++a) {
                    write_binary_pgm(out / "gt" / name / ("annotator_" + std::to_string(a) + ".pgm"), ann[a]);
                }
            }
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << "scesame: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "scesame: " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}
