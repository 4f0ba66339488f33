#include "scesame/edge.hpp"

#include <algorithm>
#include <cmath>

#include "scesame/error.hpp"

namespace scesame {

int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

BinaryMask mask_boundary(const BinaryMask& mask) {
    BinaryMask out(mask.height, mask.width, 0);
    for (int r = 0; r < mask.height; ++r) {
        for (int c = 0; c < mask.width; ++c) {
            if (!mask.at(r, c)) continue;
            const bool edge = r == 0 || c == 0 || r == mask.height - 1 || c == mask.width - 1 ||
                              !mask.at(r - 1, c) || !mask.at(r + 1, c) || !mask.at(r, c - 1) || !mask.at(r, c + 1);
            out.at(r, c) = edge ? 1 : 0;
        }
    }
    return out;
}

EdgeMap mask_edge_response(const EnsembleMask& mask) {
    const auto& prob = mask.probability;
    const auto boundary = mask_boundary(rle_decode(mask.segmentation));
    if (!boundary.same_shape(BinaryMask(prob.height, prob.width))) {
        throw Error(ErrorKind::Shape, "probability map and segmentation differ in shape");
    }
    auto px = [&](int r, int c) {
        return (r < 0 || c < 0 || r >= prob.height || c >= prob.width) ? 0.0 : prob.at(r, c);
    };
    EdgeMap out(prob.height, prob.width, 0.0);
    for (int r = 0; r < prob.height; ++r) {
        for (int c = 0; c < prob.width; ++c) {
            if (!boundary.at(r, c)) continue;
            const double gx = (px(r - 1, c + 1) + 2.0 * px(r, c + 1) + px(r + 1, c + 1)) -
                              (px(r - 1, c - 1) + 2.0 * px(r, c - 1) + px(r + 1, c - 1));
            const double gy = (px(r + 1, c - 1) + 2.0 * px(r + 1, c) + px(r + 1, c + 1)) -
                              (px(r - 1, c - 1) + 2.0 * px(r - 1, c) + px(r - 1, c + 1));
            out.at(r, c) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

void max_accumulate(EdgeMap& acc, const EdgeMap& e) {
    if (!acc.same_shape(e)) throw Error(ErrorKind::Shape, "edge maps differ in shape");
    for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] = std::max(acc.data[i], e.data[i]);
}

void min_max_normalize(EdgeMap& e) {
    if (e.data.empty()) return;
    const auto [lo_it, hi_it] = std::minmax_element(e.data.begin(), e.data.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi == lo) {
        std::fill(e.data.begin(), e.data.end(), 0.0);
        return;
    }
    const double span = hi - lo;
    for (auto& v : e.data) v = (v - lo) / span;
}

EdgeMap aggregate_normalize(std::span<const EdgeMap> responses) {
    if (responses.empty()) throw Error(ErrorKind::Parameter, "aggregation needs at least one response");
    EdgeMap acc = responses.front();
    for (std::size_t i = 1; i < responses.size(); ++i) max_accumulate(acc, responses[i]);
    min_max_normalize(acc);
    return acc;
}

std::vector<double> gaussian_kernel(int kernel) {
    if (kernel < 1 || kernel % 2 == 0) throw Error(ErrorKind::Parameter, "blur kernel must be odd and positive");
    if (kernel == 1) return {1.0};
    const int half = kernel / 2;
    const double sigma = 0.3 * ((kernel - 1) * 0.5 - 1.0) + 0.8;
    std::vector<double> taps(static_cast<std::size_t>(kernel));
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(i + half)] = v;
        sum += v;
    }
    for (auto& v : taps) v /= sum;
    return taps;
}

EdgeMap gaussian_blur(const EdgeMap& e, int kernel) {
    const auto taps = gaussian_kernel(kernel);
    if (kernel == 1) return e;
    const int half = kernel / 2;
    EdgeMap tmp(e.height, e.width, 0.0);
    for (int r = 0; r < e.height; ++r) {
        for (int c = 0; c < e.width; ++c) {
            double acc = 0.0;
            for (int t = -half; t <= half; ++t) {
                acc += taps[static_cast<std::size_t>(t + half)] * e.at(r, reflect101(c + t, e.width));
            }
            tmp.at(r, c) = acc;
        }
    }
    EdgeMap out(e.height, e.width, 0.0);
    for (int r = 0; r < e.height; ++r) {
        for (int c = 0; c < e.width; ++c) {
            double acc = 0.0;
            for (int t = -half; t <= half; ++t) {
                acc += taps[static_cast<std::size_t>(t + half)] * tmp.at(reflect101(r + t, e.height), c);
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

namespace {

double bilinear(const EdgeMap& e, double y, double x) {
    y = std::clamp(y, 0.0, static_cast<double>(e.height - 1));
    x = std::clamp(x, 0.0, static_cast<double>(e.width - 1));
    const int r0 = static_cast<int>(std::floor(y));
    const int c0 = static_cast<int>(std::floor(x));
    const int r1 = std::min(r0 + 1, e.height - 1);
    const int c1 = std::min(c0 + 1, e.width - 1);
    const double fy = y - r0;
    const double fx = x - c0;
    return (1 - fy) * ((1 - fx) * e.at(r0, c0) + fx * e.at(r0, c1)) + fy * ((1 - fx) * e.at(r1, c0) + fx * e.at(r1, c1));
}

}  // namespace

EdgeMap edge_nms(const EdgeMap& e, double low_suppress) {
    if (!(low_suppress >= 0.0 && low_suppress < 1.0)) {
        throw Error(ErrorKind::Parameter, "NMS suppression factor must lie in [0, 1)");
    }
    EdgeMap out = e;
    auto px = [&](int r, int c) { return e.at(reflect101(r, e.height), reflect101(c, e.width)); };
    for (int r = 0; r < e.height; ++r) {
        for (int c = 0; c < e.width; ++c) {
            const double v = e.at(r, c);
            if (v <= 0.0) continue;
            const double gx = (px(r - 1, c + 1) + 2.0 * px(r, c + 1) + px(r + 1, c + 1)) -
                              (px(r - 1, c - 1) + 2.0 * px(r, c - 1) + px(r + 1, c - 1));
            const double gy = (px(r + 1, c - 1) + 2.0 * px(r + 1, c) + px(r + 1, c + 1)) -
                              (px(r - 1, c - 1) + 2.0 * px(r - 1, c) + px(r - 1, c + 1));
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            const double ux = gx / mag;
            const double uy = gy / mag;
            const double ahead = bilinear(e, r + uy, c + ux);
            const double behind = bilinear(e, r - uy, c - ux);
            if (v < ahead || v < behind) out.at(r, c) = v * low_suppress;
        }
    }
    return out;
}

EdgeMap boundary_zero_padding(const EdgeMap& e, int p) {
    if (p < 0) throw Error(ErrorKind::Parameter, "BZP width must be nonnegative");
    EdgeMap out = e;
    if (p == 0) return out;
    for (int r = 0; r < e.height; ++r) {
        for (int c = 0; c < e.width; ++c) {
            if (r < p || c < p || r >= e.height - p || c >= e.width - p) out.at(r, c) = 0.0;
        }
    }
    return out;
}

}  // namespace scesame
