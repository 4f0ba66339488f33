#include "scesame/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "scesame/error.hpp"

namespace scesame {

int cluster_count(int n, int c) {
    if (n < 1) throw Error(ErrorKind::Parameter, "cluster count needs n >= 1");
    if (c < 2) throw Error(ErrorKind::Parameter, "cluster divisor c must be >= 2");
    return std::min(n, std::max(n / c, 2));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

RealMap mask_probability(const MaskRecord& mask, int height, int width) {
    if (mask.logits) {
        const auto& lg = *mask.logits;
        if (lg.height != height || lg.width != width) throw Error(ErrorKind::Shape, "logits do not match the image size");
        RealMap p(height, width);
        for (std::size_t i = 0; i < lg.data.size(); ++i) p.data[i] = sigmoid(lg.data[i]);
        return p;
    }
    const auto bin = rle_decode(mask.segmentation);
    RealMap p(height, width);
    for (std::size_t i = 0; i < bin.data.size(); ++i) p.data[i] = bin.data[i] ? 1.0 : 0.0;
    return p;
}

EnsembleMask as_ensemble(const MaskRecord& mask, int height, int width) {
    return EnsembleMask{{mask.id}, mask.segmentation, mask_probability(mask, height, width)};
}

std::vector<EnsembleMask> merge_clusters(const MaskSet& masks, const ClusterAssignment& assignment) {
    const int h = masks.image_height;
    const int w = masks.image_width;
    if (assignment.labels.size() != masks.masks.size()) {
        throw Error(ErrorKind::Assignment, "assignment does not cover every mask");
    }
    const int k = assignment.k();
    for (int l : assignment.labels) {
        if (l < 0 || l >= k) throw Error(ErrorKind::Assignment, "label " + std::to_string(l) + " out of range");
    }

    std::vector<EnsembleMask> out;
    for (int c = 0; c < k; ++c) {
        EnsembleMask merged;
        BinaryMask support(h, w, 0);
        merged.probability = RealMap(h, w, 0.0);
        for (std::size_t i = 0; i < masks.masks.size(); ++i) {
            if (assignment.labels[i] != c) continue;
            const auto& m = masks.masks[i];
            merged.member_ids.push_back(m.id);
            const auto bin = rle_decode(m.segmentation);
            for (std::size_t p = 0; p < bin.data.size(); ++p) support.data[p] |= bin.data[p];
            const auto prob = mask_probability(m, h, w);
            for (std::size_t p = 0; p < prob.data.size(); ++p) {
                merged.probability.data[p] = std::max(merged.probability.data[p], prob.data[p]);
            }
        }
        if (merged.member_ids.empty()) continue;
        merged.segmentation = rle_encode(support);
        out.push_back(std::move(merged));
    }
    return out;
}

MaskSet ensemble_to_mask_set(const std::vector<EnsembleMask>& ensemble, const MaskSet& like) {
    MaskSet out{like.image_height, like.image_width, like.file_name, {}};
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        out.masks.push_back(make_mask_record(static_cast<int>(i), ensemble[i].segmentation));
    }
    return out;
}

}  // namespace scesame
