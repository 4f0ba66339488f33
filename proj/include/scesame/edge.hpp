#pragma once

#include <span>
#include <vector>

#include "scesame/ensemble.hpp"
#include "scesame/grid.hpp"

namespace scesame {

using EdgeMap = RealMap;

struct EdgeConfig {
    int blur_kernel = 3;
    int bzp_p = 5;
    // Factor applied to non-maximal pixels by edge NMS; 0 suppresses them.
    double nms_low_suppress = 0.0;
    bool blur = true;
    bool nms = true;
};

// Foreground pixels 4-adjacent to background or to the image border.
BinaryMask mask_boundary(const BinaryMask& mask);

// Sobel gradient magnitude of the probability map, kept only on boundary
// pixels of the binary segmentation. Pixels outside the image count as 0.
EdgeMap mask_edge_response(const EnsembleMask& mask);

// acc = max(acc, e) pixelwise.
void max_accumulate(EdgeMap& acc, const EdgeMap& e);

// (v - min) / (max - min); a constant map becomes all zeros.
void min_max_normalize(EdgeMap& e);

EdgeMap aggregate_normalize(std::span<const EdgeMap> responses);

// Normalized 1-D Gaussian taps for an odd kernel size,
// sigma = 0.3 * ((kernel - 1) / 2 - 1) + 0.8.
std::vector<double> gaussian_kernel(int kernel);

// Separable Gaussian blur with reflect-101 borders.
EdgeMap gaussian_blur(const EdgeMap& e, int kernel);

// Gradient-oriented non-maximum suppression with bilinear neighbor sampling.
EdgeMap edge_nms(const EdgeMap& e, double low_suppress = 0.0);

EdgeMap boundary_zero_padding(const EdgeMap& e, int p);

// Mirrors an out-of-range index back into [0, n) without repeating the edge
// sample (gfedcb|abcdefgh|gfedcba).
int reflect101(int i, int n);

}  // namespace scesame
