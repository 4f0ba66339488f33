#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scesame/edge.hpp"
#include "scesame/grid.hpp"

namespace scesame {

inline constexpr double kBsdsTolerance = 0.0075;
inline constexpr double kNyudTolerance = 0.011;
inline constexpr int kThresholdCount = 99;

// Per-annotator binary edge maps of one image.
struct GroundTruth {
    std::vector<BinaryMask> annotations;
};

struct Correspondence {
    BinaryMask matched_pred;
    BinaryMask matched_gt;
    std::int64_t matches = 0;
};

// Maximum-cardinality matching between predicted and ground-truth edge pixels,
// linking pixels no farther apart than max_dist (Euclidean).
Correspondence correspond_pixels(const BinaryMask& pred, const BinaryMask& gt, double max_dist);

// fraction * image diagonal.
double match_radius(int height, int width, double tolerance_fraction);

struct PrPoint {
    double threshold = 0.0;
    std::int64_t matched_pred = 0;  // predicted pixels matched by any annotation
    std::int64_t predicted = 0;
    std::int64_t matched_gt = 0;    // summed over annotations
    std::int64_t gt_total = 0;      // summed over annotations
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    std::int64_t tp() const noexcept { return matched_pred; }
    std::int64_t fp() const noexcept { return predicted - matched_pred; }
    std::int64_t fn() const noexcept { return gt_total - matched_gt; }
};

// Fills precision/recall/f1 from the counts (P := 0 with no predictions,
// F := 0 when P + R == 0).
void finalize_counts(PrPoint& p);
double f_measure(double precision, double recall);

// pred >= threshold, optionally thinned.
BinaryMask binarize(const EdgeMap& pred, double threshold, bool thin = false);

// Zhang-Suen skeletonization.
BinaryMask thin_edges(const BinaryMask& edges);

PrPoint prf_at_threshold(const EdgeMap& pred, const GroundTruth& gts, double threshold, double max_dist,
                         bool thin = false);

// thresholds i / (count + 1), i = 1..count.
std::vector<double> sweep_thresholds(int count = kThresholdCount);

// PR points of one image over the full threshold sweep.
std::vector<PrPoint> sweep_image(const EdgeMap& pred, const GroundTruth& gts, double max_dist, bool thin = false);

struct ImageBest {
    double threshold = 0.0;
    double f1 = 0.0;
    PrPoint point;
};

struct OdsOis {
    double ods = 0.0;
    double ods_threshold = 0.0;
    double ois = 0.0;
    std::vector<ImageBest> per_image_best;
    std::vector<PrPoint> dataset_curve;  // counts summed over images per threshold
};

// per_image[i][t] is image i at threshold index t; every row shares thresholds.
OdsOis ods_ois(std::span<const std::vector<PrPoint>> per_image);

// Mean of precision interpolated over recall at 0.01, 0.02, ..., 1.00, with
// zero precision beyond the largest achieved recall.
double average_precision(std::span<const PrPoint> curve);

struct MetricsReport {
    double ods = 0.0;
    double ods_threshold = 0.0;
    double ois = 0.0;
    double ap = 0.0;
    std::vector<PrPoint> per_threshold;
    std::vector<ImageBest> per_image_best;
};

struct EvalOptions {
    double tolerance_fraction = kBsdsTolerance;
    bool thin = false;
    int jobs = 1;
};

MetricsReport evaluate_dataset(std::span<const EdgeMap> preds, std::span<const GroundTruth> gts,
                               const EvalOptions& opts = {});

}  // namespace scesame
