#include "scesame/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "scesame/error.hpp"
#include "scesame/parallel.hpp"

namespace scesame {

namespace {

constexpr int kUnmatched = -1;

// Hopcroft-Karp over an adjacency list from left to right vertices.
class BipartiteMatcher {
public:
    BipartiteMatcher(const std::vector<std::vector<int>>& adj, int right_count)
        : adj_(adj),
          match_left_(adj.size(), kUnmatched),
          match_right_(static_cast<std::size_t>(right_count), kUnmatched),
          dist_(adj.size(), 0) {}

    std::int64_t run() {
        std::int64_t total = 0;
        while (bfs()) {
            for (std::size_t u = 0; u < adj_.size(); ++u) {
                if (match_left_[u] == kUnmatched && dfs(static_cast<int>(u))) ++total;
            }
        }
        return total;
    }

    const std::vector<int>& match_left() const { return match_left_; }
    const std::vector<int>& match_right() const { return match_right_; }

private:
    bool bfs() {
        std::queue<int> q;
        bool found_free = false;
        for (std::size_t u = 0; u < adj_.size(); ++u) {
            if (match_left_[u] == kUnmatched) {
                dist_[u] = 0;
                q.push(static_cast<int>(u));
            } else {
                dist_[u] = kInf;
            }
        }
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v : adj_[static_cast<std::size_t>(u)]) {
                const int w = match_right_[static_cast<std::size_t>(v)];
                if (w == kUnmatched) {
                    found_free = true;
                } else if (dist_[static_cast<std::size_t>(w)] == kInf) {
                    dist_[static_cast<std::size_t>(w)] = dist_[static_cast<std::size_t>(u)] + 1;
                    q.push(w);
                }
            }
        }
        return found_free;
    }

    bool dfs(int u) {
        for (int v : adj_[static_cast<std::size_t>(u)]) {
            const int w = match_right_[static_cast<std::size_t>(v)];
            if (w == kUnmatched ||
                (dist_[static_cast<std::size_t>(w)] == dist_[static_cast<std::size_t>(u)] + 1 && dfs(w))) {
                match_left_[static_cast<std::size_t>(u)] = v;
                match_right_[static_cast<std::size_t>(v)] = u;
                return true;
            }
        }
        dist_[static_cast<std::size_t>(u)] = kInf;
        return false;
    }

    static constexpr int kInf = std::numeric_limits<int>::max();
    const std::vector<std::vector<int>>& adj_;
    std::vector<int> match_left_;
    std::vector<int> match_right_;
    std::vector<int> dist_;
};

}  // namespace

double match_radius(int height, int width, double tolerance_fraction) {
    return tolerance_fraction * std::hypot(static_cast<double>(height), static_cast<double>(width));
}

Correspondence correspond_pixels(const BinaryMask& pred, const BinaryMask& gt, double max_dist) {
    if (!pred.same_shape(gt)) throw Error(ErrorKind::Shape, "prediction and ground truth differ in shape");
    if (!(max_dist >= 0.0)) throw Error(ErrorKind::Parameter, "match distance must be nonnegative");
    const int h = pred.height;
    const int w = pred.width;

    std::vector<int> gt_index(gt.size(), kUnmatched);
    std::vector<std::size_t> gt_pixels;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt.data[i]) {
            gt_index[i] = static_cast<int>(gt_pixels.size());
            gt_pixels.push_back(i);
        }
    }

    const int reach = static_cast<int>(std::floor(max_dist));
    const double r2 = max_dist * max_dist;
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
            if (dx * dx + dy * dy <= r2) offsets.emplace_back(dy, dx);
        }
    }
    // Nearest candidates first so augmenting paths prefer short links.
    std::stable_sort(offsets.begin(), offsets.end(), [](const auto& a, const auto& b) {
        return a.first * a.first + a.second * a.second < b.first * b.first + b.second * b.second;
    });

    std::vector<std::size_t> pred_pixels;
    std::vector<std::vector<int>> adj;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!pred.at(r, c)) continue;
            std::vector<int> nbrs;
            for (const auto& [dy, dx] : offsets) {
                const int rr = r + dy;
                const int cc = c + dx;
                if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
                const int g = gt_index[static_cast<std::size_t>(rr) * w + cc];
                if (g != kUnmatched) nbrs.push_back(g);
            }
            pred_pixels.push_back(static_cast<std::size_t>(r) * w + c);
            adj.push_back(std::move(nbrs));
        }
    }

    BipartiteMatcher matcher(adj, static_cast<int>(gt_pixels.size()));
    Correspondence out;
    out.matches = matcher.run();
    out.matched_pred = BinaryMask(h, w, 0);
    out.matched_gt = BinaryMask(h, w, 0);
    for (std::size_t u = 0; u < pred_pixels.size(); ++u) {
        if (matcher.match_left()[u] != kUnmatched) out.matched_pred.data[pred_pixels[u]] = 1;
    }
    for (std::size_t v = 0; v < gt_pixels.size(); ++v) {
        if (matcher.match_right()[v] != kUnmatched) out.matched_gt.data[gt_pixels[v]] = 1;
    }
    return out;
}

double f_measure(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

void finalize_counts(PrPoint& p) {
    p.precision = p.predicted > 0 ? static_cast<double>(p.matched_pred) / static_cast<double>(p.predicted) : 0.0;
    p.recall = p.gt_total > 0 ? static_cast<double>(p.matched_gt) / static_cast<double>(p.gt_total) : 0.0;
    p.f1 = f_measure(p.precision, p.recall);
}

BinaryMask thin_edges(const BinaryMask& edges) {
    BinaryMask img = edges;
    const int h = img.height;
    const int w = img.width;
    auto at = [&](int r, int c) -> int {
        return (r < 0 || c < 0 || r >= h || c >= w) ? 0 : (img.at(r, c) ? 1 : 0);
    };
    bool changed = true;
    std::vector<std::size_t> to_clear;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            to_clear.clear();
            for (int r = 0; r < h; ++r) {
                for (int c = 0; c < w; ++c) {
                    if (!img.at(r, c)) continue;
                    // Neighbors P2..P9 clockwise from north.
                    const int p[8] = {at(r - 1, c), at(r - 1, c + 1), at(r, c + 1), at(r + 1, c + 1),
                                      at(r + 1, c), at(r + 1, c - 1), at(r, c - 1), at(r - 1, c - 1)};
                    int b = 0;
                    int a = 0;
                    for (int i = 0; i < 8; ++i) {
                        b += p[i];
                        if (p[i] == 0 && p[(i + 1) % 8] == 1) ++a;
                    }
                    if (b < 2 || b > 6 || a != 1) continue;
                    const bool cond = pass == 0 ? (p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0)
                                                : (p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0);
                    if (cond) to_clear.push_back(static_cast<std::size_t>(r) * w + c);
                }
            }
            for (auto i : to_clear) img.data[i] = 0;
            if (!to_clear.empty()) changed = true;
        }
    }
    return img;
}

BinaryMask binarize(const EdgeMap& pred, double threshold, bool thin) {
    BinaryMask out(pred.height, pred.width, 0);
    for (std::size_t i = 0; i < pred.data.size(); ++i) out.data[i] = pred.data[i] >= threshold ? 1 : 0;
    return thin ? thin_edges(out) : out;
}

namespace {

PrPoint counts_for(const BinaryMask& bmap, const GroundTruth& gts, double max_dist) {
    PrPoint p;
    BinaryMask any_match(bmap.height, bmap.width, 0);
    for (const auto& gt : gts.annotations) {
        const auto corr = correspond_pixels(bmap, gt, max_dist);
        for (std::size_t i = 0; i < any_match.data.size(); ++i) any_match.data[i] |= corr.matched_pred.data[i];
        p.matched_gt += corr.matches;
        p.gt_total += std::count(gt.data.begin(), gt.data.end(), std::uint8_t{1});
    }
    p.predicted = std::count(bmap.data.begin(), bmap.data.end(), std::uint8_t{1});
    p.matched_pred = std::count(any_match.data.begin(), any_match.data.end(), std::uint8_t{1});
    return p;
}

void check_gt(const EdgeMap& pred, const GroundTruth& gts) {
    if (gts.annotations.empty()) throw Error(ErrorKind::MalformedInput, "image has no ground-truth annotations");
    for (const auto& gt : gts.annotations) {
        if (gt.height != pred.height || gt.width != pred.width) {
            throw Error(ErrorKind::Shape, "ground truth annotation differs in shape from the prediction");
        }
    }
}

}  // namespace

PrPoint prf_at_threshold(const EdgeMap& pred, const GroundTruth& gts, double threshold, double max_dist, bool thin) {
    check_gt(pred, gts);
    PrPoint p = counts_for(binarize(pred, threshold, thin), gts, max_dist);
    p.threshold = threshold;
    finalize_counts(p);
    return p;
}

std::vector<double> sweep_thresholds(int count) {
    std::vector<double> t(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i + 1) / (count + 1);
    return t;
}

std::vector<PrPoint> sweep_image(const EdgeMap& pred, const GroundTruth& gts, double max_dist, bool thin) {
    check_gt(pred, gts);
    std::vector<PrPoint> out;
    BinaryMask previous;
    PrPoint cached;
    for (double t : sweep_thresholds()) {
        auto bmap = binarize(pred, t, thin);
        // Thresholded sets are nested, so an unchanged map reuses its counts.
        if (!(bmap == previous)) {
            cached = counts_for(bmap, gts, max_dist);
            previous = std::move(bmap);
        }
        PrPoint p = cached;
        p.threshold = t;
        finalize_counts(p);
        out.push_back(p);
    }
    return out;
}

OdsOis ods_ois(std::span<const std::vector<PrPoint>> per_image) {
    if (per_image.empty()) throw Error(ErrorKind::EmptyDataset, "no images to aggregate");
    const std::size_t nt = per_image.front().size();
    if (nt == 0) throw Error(ErrorKind::EmptyDataset, "empty threshold sweep");
    for (const auto& row : per_image) {
        if (row.size() != nt) throw Error(ErrorKind::Shape, "images were swept over different thresholds");
    }

    OdsOis out;
    out.dataset_curve.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        PrPoint agg;
        agg.threshold = per_image.front()[t].threshold;
        for (const auto& row : per_image) {
            agg.matched_pred += row[t].matched_pred;
            agg.predicted += row[t].predicted;
            agg.matched_gt += row[t].matched_gt;
            agg.gt_total += row[t].gt_total;
        }
        finalize_counts(agg);
        out.dataset_curve[t] = agg;
        if (t == 0 || agg.f1 > out.ods) {
            out.ods = agg.f1;
            out.ods_threshold = agg.threshold;
        }
    }

    PrPoint best_sum;
    for (const auto& row : per_image) {
        std::size_t best = 0;
        for (std::size_t t = 1; t < nt; ++t) {
            if (row[t].f1 > row[best].f1) best = t;
        }
        out.per_image_best.push_back(ImageBest{row[best].threshold, row[best].f1, row[best]});
        best_sum.matched_pred += row[best].matched_pred;
        best_sum.predicted += row[best].predicted;
        best_sum.matched_gt += row[best].matched_gt;
        best_sum.gt_total += row[best].gt_total;
    }
    finalize_counts(best_sum);
    out.ois = best_sum.f1;
    return out;
}

double average_precision(std::span<const PrPoint> curve) {
    if (curve.empty()) throw Error(ErrorKind::EmptyDataset, "no PR points");
    std::vector<std::pair<double, double>> pts;  // (recall, precision)
    for (const auto& p : curve) pts.emplace_back(p.recall, p.precision);
    std::sort(pts.begin(), pts.end());
    // Keep the best precision per distinct recall.
    std::vector<std::pair<double, double>> uniq;
    for (const auto& p : pts) {
        if (!uniq.empty() && uniq.back().first == p.first) {
            uniq.back().second = std::max(uniq.back().second, p.second);
        } else {
            uniq.push_back(p);
        }
    }
    const double max_recall = uniq.back().first;
    double sum = 0.0;
    constexpr int kSamples = 100;
    for (int j = 1; j <= kSamples; ++j) {
        const double r = j / static_cast<double>(kSamples);
        if (r > max_recall + 1e-12) continue;
        if (r <= uniq.front().first) {
            sum += uniq.front().second;
            continue;
        }
        auto hi = std::lower_bound(uniq.begin(), uniq.end(), r,
                                   [](const auto& p, double v) { return p.first < v; });
        if (hi == uniq.end()) {
            sum += uniq.back().second;
            continue;
        }
        auto lo = std::prev(hi);
        const double f = (r - lo->first) / (hi->first - lo->first);
        sum += lo->second + f * (hi->second - lo->second);
    }
    return sum / kSamples;
}

MetricsReport evaluate_dataset(std::span<const EdgeMap> preds, std::span<const GroundTruth> gts,
                               const EvalOptions& opts) {
    if (preds.size() != gts.size()) throw Error(ErrorKind::Shape, "predictions and ground truths are misaligned");
    if (preds.empty()) throw Error(ErrorKind::EmptyDataset, "empty dataset");
    if (!(opts.tolerance_fraction > 0.0)) throw Error(ErrorKind::Parameter, "tolerance must be positive");

    std::vector<std::vector<PrPoint>> rows(preds.size());
    auto work = [&](std::size_t i) {
        rows[i] = sweep_image(preds[i], gts[i], match_radius(preds[i].height, preds[i].width, opts.tolerance_fraction),
                              opts.thin);
    };
    parallel_for(preds.size(), opts.jobs, work);

    const auto agg = ods_ois(rows);
    MetricsReport report;
    report.ods = agg.ods;
    report.ods_threshold = agg.ods_threshold;
    report.ois = agg.ois;
    report.per_threshold = agg.dataset_curve;
    report.per_image_best = agg.per_image_best;
    report.ap = average_precision(report.per_threshold);
    return report;
}

}  // namespace scesame
