#pragma once

#include <vector>

#include "scesame/mask.hpp"
#include "scesame/spectral.hpp"

namespace scesame {

struct EnsembleMask {
    std::vector<int> member_ids;
    Rle segmentation;
    // Pixelwise max of member probabilities: sigmoid(logits) where a member
    // carries logits, its binary mask otherwise.
    RealMap probability;
};

// max(floor(n / c), 2), capped at n.
int cluster_count(int n, int c);

double sigmoid(double x);

// Probability map of a single mask (see EnsembleMask::probability).
RealMap mask_probability(const MaskRecord& mask, int height, int width);

EnsembleMask as_ensemble(const MaskRecord& mask, int height, int width);

// One ensemble mask per nonempty cluster, in cluster order.
std::vector<EnsembleMask> merge_clusters(const MaskSet& masks, const ClusterAssignment& assignment);

// Ensemble masks as a MaskSet (ids are positions), for re-serialization.
MaskSet ensemble_to_mask_set(const std::vector<EnsembleMask>& ensemble, const MaskSet& like);

}  // namespace scesame
