#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scesame/edge.hpp"
#include "scesame/evaluation.hpp"
#include "scesame/mask.hpp"
#include "scesame/spectral.hpp"

namespace scesame {

// Defaults are the t=3, c=2, p=5 configuration.
struct PipelineConfig {
    std::optional<int> tms_t = 3;
    std::optional<int> sc_c = 2;
    double tau = 0.5;
    int scale_neighbor = 7;
    int bzp_p = 5;
    bool box_nms = true;
    double nms_iou = 0.7;
    int blur_kernel = 3;
    bool blur = true;
    bool edge_nms = true;
    double nms_low_suppress = 0.0;
    LaplacianVariant laplacian = LaplacianVariant::Normalized;
    bool row_normalize = false;
    std::uint64_t seed = 0;
    double tolerance_fraction = kBsdsTolerance;
};

// "amg", "tms-t3", "sc-c2", "scesame-t3c2", each with a "p<N>" suffix when
// boundary zero padding is on.
std::string variant_name(const PipelineConfig& cfg);

// Configurations for the ablation rows: sam, sam-p5, tms-t3, tms-t3p5, sc-c2,
// sc-c2p5, scesame-t3c2, scesame-t3c2p5 (any t, c, p values are accepted).
PipelineConfig preset_config(const std::string& name);

nlohmann::json config_to_json(const PipelineConfig& cfg);
// Keys absent from the document keep the values already in `cfg`.
void apply_config_json(const nlohmann::json& doc, PipelineConfig& cfg);
// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

struct StageCounts {
    std::size_t input = 0;
    std::size_t after_nms = 0;
    std::size_t after_tms = 0;
    std::size_t after_sc = 0;
};

struct DetectResult {
    EdgeMap edges;
    StageCounts counts;
    // Final mask set fed to edge extraction with the source ids of each mask.
    MaskSet final_masks;
    std::vector<std::vector<int>> final_members;
    std::vector<std::string> warnings;
};

// box NMS -> TMS -> affinity + spectral clustering + merge -> per-mask edge
// response -> max + min-max normalization -> BZP -> blur -> edge NMS. Every
// stage can be switched off through the config.
DetectResult detect_edges(const MaskSet& masks, const PipelineConfig& cfg);

}  // namespace scesame
