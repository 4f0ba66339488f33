#pragma once

#include <cstdint>
#include <vector>

#include "scesame/evaluation.hpp"
#include "scesame/mask.hpp"
#include "scesame/spectral.hpp"

namespace scesame {

inline constexpr double kDefaultCircleNoise = 0.02;

struct CirclesDataset {
    std::vector<Point2> points;
    std::vector<int> labels;
};

// 100 points on each of the circles of radius 0.1, 0.5 and 1.0 (evenly
// spaced angles from a random phase) plus isotropic Gaussian noise.
CirclesDataset gen_circles(std::uint64_t seed, double noise_sigma = kDefaultCircleNoise);

struct ClusterDemo {
    CirclesDataset data;
    std::vector<int> spectral_labels;
    std::vector<int> kmeans_labels;
    double spectral_ari = 0.0;
    double kmeans_ari = 0.0;
};

// Circles -> unit kNN graph -> normalized spectral clustering with k = 3,
// next to plain k-means (k = 3) on the raw coordinates.
ClusterDemo cluster_demo(std::uint64_t seed, double noise_sigma = kDefaultCircleNoise, int neighbors = 10);

struct SyntheticScene {
    MaskSet masks;
    GroundTruth ground_truth;
    int background_id = 0;
    // Per large shape: the clean mask id followed by its fragment ids.
    std::vector<std::vector<int>> shape_mask_ids;
    std::vector<int> noise_ids;
};

// A 120x160 scene of 2-4 large rectangles/ellipses. Masks: a background mask,
// one clean mask and three fragments per shape, and 10-30 small noise blobs
// that are always smaller than any other mask and never more than twice the
// number of non-noise masks. Ground truth: inner and outer shape boundaries as
// two annotators.
SyntheticScene gen_synthetic_scene(std::uint64_t seed);

}  // namespace scesame
