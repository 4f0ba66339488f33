#include "scesame/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scesame/error.hpp"

namespace scesame {

namespace {

double dist2(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

void check_params(const AffinityParams& p) {
    if (!(p.tau > 0.0)) throw Error(ErrorKind::Parameter, "tau must be positive");
    if (p.local_scale_neighbor < 1) throw Error(ErrorKind::Parameter, "scale neighbor must be >= 1");
    if (!(p.epsilon > 0.0)) throw Error(ErrorKind::Parameter, "epsilon must be positive");
}

}  // namespace

double overlap_ratio(const MaskRecord& a, const MaskRecord& b) {
    const auto area_a = rle_area(a.segmentation);
    const auto area_b = rle_area(b.segmentation);
    if (area_a == 0 || area_b == 0) throw Error(ErrorKind::EmptyMask, "overlap of an empty mask");
    const auto shared = rle_intersection_area(a.segmentation, b.segmentation);
    return static_cast<double>(shared) / static_cast<double>(std::min(area_a, area_b));
}

std::vector<double> local_scales(std::span<const Point2> centers, const AffinityParams& params) {
    check_params(params);
    const std::size_t n = centers.size();
    std::vector<double> sigma(n, params.epsilon);
    if (n <= 1) return sigma;

    const auto rank = static_cast<std::size_t>(params.local_scale_neighbor);
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) d[m++] = std::sqrt(dist2(centers[i], centers[j]));
        }
        const std::size_t pick = std::min(rank, n - 1) - 1;
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(pick), d.end());
        sigma[i] = std::max(d[pick], params.epsilon);
    }
    return sigma;
}

double scesame_weight(double overlap, double d2, double sigma_i, double sigma_j, double tau) {
    return std::exp(overlap / tau) * std::exp(-d2 / (sigma_i * sigma_j));
}

AffinityMatrix scesame_affinity(const MaskSet& masks, const AffinityParams& params) {
    check_params(params);
    const std::size_t n = masks.masks.size();
    if (n < 2) throw Error(ErrorKind::TooFewMasks, "affinity needs at least two masks");

    std::vector<Point2> centers(n);
    std::vector<std::vector<Run>> runs(n);
    std::vector<std::int64_t> areas(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& m = masks.masks[i];
        centers[i] = m.center;
        runs[i] = foreground_runs(m.segmentation);
        areas[i] = rle_area(m.segmentation);
        if (areas[i] == 0) throw Error(ErrorKind::EmptyMask, "mask " + std::to_string(m.id) + " is empty");
    }
    const auto sigma = local_scales(centers, params);

    AffinityMatrix out{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            std::int64_t shared = 0;
            std::size_t a = 0;
            std::size_t b = 0;
            const auto& ra = runs[i];
            const auto& rb = runs[j];
            while (a < ra.size() && b < rb.size()) {
                const auto lo = std::max(ra[a].first, rb[b].first);
                const auto hi = std::min(ra[a].second, rb[b].second);
                if (hi > lo) shared += hi - lo;
                if (ra[a].second < rb[b].second) {
                    ++a;
                } else {
                    ++b;
                }
            }
            const double r = static_cast<double>(shared) / static_cast<double>(std::min(areas[i], areas[j]));
            const double w = scesame_weight(r, dist2(centers[i], centers[j]), sigma[i], sigma[j], params.tau);
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            out.w(ii, jj) = w;
            out.w(jj, ii) = w;
        }
    }
    return out;
}

AffinityMatrix knn_affinity(std::span<const Point2> points, int k_neighbors) {
    const std::size_t n = points.size();
    if (k_neighbors < 1 || n <= static_cast<std::size_t>(k_neighbors)) {
        throw Error(ErrorKind::Parameter, "kNN graph needs 1 <= k < n");
    }
    const auto k = static_cast<std::size_t>(k_neighbors);
    AffinityMatrix out{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                          [&](std::size_t a, std::size_t b) {
                              const double da = dist2(points[i], points[a]);
                              const double db = dist2(points[i], points[b]);
                              return da != db ? da < db : a < b;
                          });
        for (std::size_t m = 0; m < k; ++m) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(idx[m]);
            out.w(ii, jj) = 1.0;
            out.w(jj, ii) = 1.0;
        }
        idx.resize(n);
    }
    return out;
}

}  // namespace scesame
