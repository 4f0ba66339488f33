#include "scesame/pipeline.hpp"

#include <cstdio>
#include <regex>

#include "scesame/affinity.hpp"
#include "scesame/ensemble.hpp"
#include "scesame/error.hpp"
#include "scesame/tms.hpp"

namespace scesame {

std::string variant_name(const PipelineConfig& cfg) {
    const bool tms = cfg.tms_t.has_value();
    const bool sc = cfg.sc_c.has_value();
    std::string name;
    if (tms && sc) {
        name = "scesame-t" + std::to_string(*cfg.tms_t) + "c" + std::to_string(*cfg.sc_c);
    } else if (tms) {
        name = "tms-t" + std::to_string(*cfg.tms_t);
    } else if (sc) {
        name = "sc-c" + std::to_string(*cfg.sc_c);
    } else {
        name = "amg";
    }
    if (cfg.bzp_p > 0) name += (tms || sc ? "p" : "-p") + std::to_string(cfg.bzp_p);
    return name;
}

PipelineConfig preset_config(const std::string& name) {
    static const std::regex pattern(R"(^(sam|amg|tms-t(\d+)|sc-c(\d+)|scesame-t(\d+)c(\d+))(?:-?p(\d+))?$)");
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) throw Error(ErrorKind::Parameter, "unknown preset '" + name + "'");
    PipelineConfig cfg;
    cfg.tms_t.reset();
    cfg.sc_c.reset();
    if (m[2].matched) cfg.tms_t = std::stoi(m[2]);
    if (m[3].matched) cfg.sc_c = std::stoi(m[3]);
    if (m[4].matched) {
        cfg.tms_t = std::stoi(m[4]);
        cfg.sc_c = std::stoi(m[5]);
    }
    cfg.bzp_p = m[6].matched ? std::stoi(m[6]) : 0;
    return cfg;
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
    nlohmann::json j;
    j["tms_t"] = cfg.tms_t ? nlohmann::json(*cfg.tms_t) : nlohmann::json(nullptr);
    j["sc_c"] = cfg.sc_c ? nlohmann::json(*cfg.sc_c) : nlohmann::json(nullptr);
    j["tau"] = cfg.tau;
    j["scale_neighbor"] = cfg.scale_neighbor;
    j["bzp_p"] = cfg.bzp_p;
    j["box_nms"] = cfg.box_nms;
    j["nms_iou"] = cfg.nms_iou;
    j["blur_kernel"] = cfg.blur_kernel;
    j["blur"] = cfg.blur;
    j["edge_nms"] = cfg.edge_nms;
    j["nms_low_suppress"] = cfg.nms_low_suppress;
    j["laplacian_variant"] = to_string(cfg.laplacian);
    j["row_normalize"] = cfg.row_normalize;
    j["seed"] = cfg.seed;
    j["tolerance_fraction"] = cfg.tolerance_fraction;
    return j;
}

void apply_config_json(const nlohmann::json& doc, PipelineConfig& cfg) {
    if (!doc.is_object()) throw Error(ErrorKind::MalformedInput, "config must be a JSON object");
    try {
        auto opt_int = [&](const char* key, std::optional<int>& dst) {
            if (!doc.contains(key)) return;
            const auto& v = doc.at(key);
            if (v.is_null() || (v.is_number_integer() && v.get<int>() == 0)) {
                dst.reset();
            } else {
                dst = v.get<int>();
            }
        };
        opt_int("tms_t", cfg.tms_t);
        opt_int("sc_c", cfg.sc_c);
        if (doc.contains("tau")) cfg.tau = doc.at("tau").get<double>();
        if (doc.contains("scale_neighbor")) cfg.scale_neighbor = doc.at("scale_neighbor").get<int>();
        if (doc.contains("bzp_p")) cfg.bzp_p = doc.at("bzp_p").get<int>();
        if (doc.contains("box_nms")) cfg.box_nms = doc.at("box_nms").get<bool>();
        if (doc.contains("nms_iou")) cfg.nms_iou = doc.at("nms_iou").get<double>();
        if (doc.contains("blur_kernel")) cfg.blur_kernel = doc.at("blur_kernel").get<int>();
        if (doc.contains("blur")) cfg.blur = doc.at("blur").get<bool>();
        if (doc.contains("edge_nms")) cfg.edge_nms = doc.at("edge_nms").get<bool>();
        if (doc.contains("nms_low_suppress")) cfg.nms_low_suppress = doc.at("nms_low_suppress").get<double>();
        if (doc.contains("laplacian_variant")) {
            cfg.laplacian = parse_laplacian_variant(doc.at("laplacian_variant").get<std::string>());
        }
        if (doc.contains("row_normalize")) cfg.row_normalize = doc.at("row_normalize").get<bool>();
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("tolerance_fraction")) cfg.tolerance_fraction = doc.at("tolerance_fraction").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedInput, std::string("bad config value: ") + e.what());
    }
}

std::string config_hash(const PipelineConfig& cfg) {
    const std::string text = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

DetectResult detect_edges(const MaskSet& input, const PipelineConfig& cfg) {
    if (input.masks.empty()) throw Error(ErrorKind::EmptySelection, "no masks to detect edges from");
    const int h = input.image_height;
    const int w = input.image_width;

    DetectResult res;
    res.counts.input = input.masks.size();

    MaskSet masks = cfg.box_nms ? box_nms(input, cfg.nms_iou) : input;
    res.counts.after_nms = masks.masks.size();

    if (cfg.tms_t) masks = top_mask_selection(masks, TmsConfig{*cfg.tms_t});
    res.counts.after_tms = masks.masks.size();

    EdgeMap acc(h, w, 0.0);
    auto accumulate = [&](const EnsembleMask& em) { max_accumulate(acc, mask_edge_response(em)); };

    if (cfg.sc_c && masks.masks.size() >= 2) {
        const int n = static_cast<int>(masks.masks.size());
        const int k = cluster_count(n, *cfg.sc_c);
        AffinityParams ap;
        ap.tau = cfg.tau;
        ap.local_scale_neighbor = cfg.scale_neighbor;
        const auto affinity = scesame_affinity(masks, ap);
        SpectralOptions so;
        so.variant = cfg.laplacian;
        so.row_normalize = cfg.row_normalize;
        so.kmeans.seed = cfg.seed;
        const auto assignment = spectral_cluster(affinity, k, so);
        const auto merged = merge_clusters(masks, assignment);
        for (const auto& em : merged) {
            accumulate(em);
            res.final_members.push_back(em.member_ids);
        }
        res.final_masks = ensemble_to_mask_set(merged, masks);
    } else {
        if (cfg.sc_c) res.warnings.push_back("spectral clustering skipped: fewer than two masks");
        for (const auto& m : masks.masks) {
            accumulate(as_ensemble(m, h, w));
            res.final_members.push_back({m.id});
        }
        res.final_masks = masks;
    }
    res.counts.after_sc = res.final_members.size();

    min_max_normalize(acc);
    if (cfg.bzp_p > 0 && 2 * cfg.bzp_p >= std::min(h, w)) {
        res.warnings.push_back("boundary zero padding covers the whole image");
    }
    acc = boundary_zero_padding(acc, cfg.bzp_p);
    if (cfg.blur) acc = gaussian_blur(acc, cfg.blur_kernel);
    if (cfg.edge_nms) acc = edge_nms(acc, cfg.nms_low_suppress);
    res.edges = std::move(acc);
    return res;
}

}  // namespace scesame
