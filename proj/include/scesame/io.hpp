#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "scesame/edge.hpp"
#include "scesame/evaluation.hpp"
#include "scesame/mask.hpp"

namespace scesame {

namespace fs = std::filesystem;

// Mask document:
// {"image": {"height": H, "width": W, "file_name": str},
//  "masks": [{"id": int, "rle": {"size": [H, W], "counts": [int, ...]},
//             "score": float|null, "logits_file": str|null}]}
// logits_file paths are resolved against `base_dir`.
struct LoadedMasks {
    MaskSet masks;
    std::vector<std::string> warnings;
};

LoadedMasks parse_mask_json(const nlohmann::json& doc, const fs::path& base_dir);
LoadedMasks load_mask_json(const fs::path& path);

// `members` (optional, parallel to masks) is written as an extra "members"
// field. Logits are not re-emitted.
nlohmann::json mask_set_to_json(const MaskSet& masks, const std::vector<std::vector<int>>* members = nullptr);
void write_mask_json(const fs::path& path, const MaskSet& masks,
                     const std::vector<std::vector<int>>* members = nullptr);

// Raw little-endian float32, row-major, H * W values.
Grid<float> read_logits(const fs::path& path, int height, int width);
void write_logits(const fs::path& path, const Grid<float>& logits);

// Portable float map, little-endian, bottom row first.
void write_pfm(const fs::path& path, const EdgeMap& e);
EdgeMap read_pfm(const fs::path& path);

// 8-bit PGM with value round(255 * clamp(v, 0, 1)).
void write_pgm(const fs::path& path, const EdgeMap& e);
// 8-bit PGM, 255 on foreground.
void write_binary_pgm(const fs::path& path, const BinaryMask& m);
// Binary edge annotation from a PGM (P2/P5) or PNG file; nonzero is edge.
BinaryMask read_binary_image(const fs::path& path);

// Every .pgm/.png file of a directory (sorted by name) as one annotator.
GroundTruth load_ground_truth_dir(const fs::path& dir);

// Metrics report as JSON; `image_names` (optional, parallel to
// per_image_best) labels the per-image rows.
nlohmann::json metrics_to_json(const MetricsReport& report, const std::vector<std::string>& image_names = {});
// threshold,precision,recall,f1 with a header row.
std::string pr_curve_csv(const std::vector<PrPoint>& curve);
std::vector<PrPoint> pr_curve_from_json(const nlohmann::json& report);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace scesame
