#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scesame/mask.hpp"

namespace scesame {

struct AffinityParams {
    double tau = 0.5;
    int local_scale_neighbor = 7;
    double epsilon = 1e-6;
};

// Symmetric, nonnegative, zero diagonal.
struct AffinityMatrix {
    Eigen::MatrixXd w;

    Eigen::Index n() const noexcept { return w.rows(); }
};

// |a ∩ b| / min(|a|, |b|).
double overlap_ratio(const MaskRecord& a, const MaskRecord& b);

// Per-point bandwidth: distance to the neighbor-th closest other point, or to
// the farthest one when fewer points exist; clamped below at epsilon.
std::vector<double> local_scales(std::span<const Point2> centers, const AffinityParams& params);

// exp(r / tau) * exp(-dist2 / (sigma_i * sigma_j)).
double scesame_weight(double overlap, double dist2, double sigma_i, double sigma_j, double tau);

AffinityMatrix scesame_affinity(const MaskSet& masks, const AffinityParams& params);

// Unit-weight kNN graph, symmetrized by union.
AffinityMatrix knn_affinity(std::span<const Point2> points, int k_neighbors);

}  // namespace scesame
