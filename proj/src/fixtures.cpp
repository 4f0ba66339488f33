#include "scesame/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "scesame/edge.hpp"
#include "scesame/error.hpp"

namespace scesame {

namespace {

// Portable draws; std distributions differ across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return mag * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct Shape {
    int x0, y0, x1, y1;  // inclusive bounds
    bool ellipse;

    bool contains(int r, int c, int shrink = 0) const {
        const int a0 = x0 + shrink, a1 = x1 - shrink, b0 = y0 + shrink, b1 = y1 - shrink;
        if (c < a0 || c > a1 || r < b0 || r > b1) return false;
        if (!ellipse) return true;
        const double cx = 0.5 * (a0 + a1);
        const double cy = 0.5 * (b0 + b1);
        const double rx = 0.5 * (a1 - a0) + 0.5;
        const double ry = 0.5 * (b1 - b0) + 0.5;
        const double dx = (c - cx) / rx;
        const double dy = (r - cy) / ry;
        return dx * dx + dy * dy <= 1.0;
    }
};

constexpr int kHeight = 120;
constexpr int kWidth = 160;

}  // namespace

CirclesDataset gen_circles(std::uint64_t seed, double noise_sigma) {
    if (!(noise_sigma >= 0.0)) throw Error(ErrorKind::Parameter, "noise sigma must be nonnegative");
    Rng rng(seed);
    CirclesDataset ds;
    constexpr double radii[3] = {0.1, 0.5, 1.0};
    for (int label = 0; label < 3; ++label) {
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int i = 0; i < 100; ++i) {
            const double theta = phase + 2.0 * std::numbers::pi * i / 100.0;
            Point2 p{radii[label] * std::cos(theta), radii[label] * std::sin(theta)};
            if (noise_sigma > 0.0) {
                p.x += noise_sigma * rng.normal();
                p.y += noise_sigma * rng.normal();
            }
            ds.points.push_back(p);
            ds.labels.push_back(label);
        }
    }
    return ds;
}

ClusterDemo cluster_demo(std::uint64_t seed, double noise_sigma, int neighbors) {
    ClusterDemo demo;
    demo.data = gen_circles(seed, noise_sigma);
    SpectralOptions opts;
    opts.kmeans.seed = seed;
    demo.spectral_labels = spectral_cluster(knn_affinity(demo.data.points, neighbors), 3, opts).labels;
    const auto n = static_cast<Eigen::Index>(demo.data.points.size());
    Eigen::MatrixXd coords(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        coords(i, 0) = demo.data.points[static_cast<std::size_t>(i)].x;
        coords(i, 1) = demo.data.points[static_cast<std::size_t>(i)].y;
    }
    demo.kmeans_labels = kmeans(coords, 3, opts.kmeans).labels;
    demo.spectral_ari = adjusted_rand_index(demo.spectral_labels, demo.data.labels);
    demo.kmeans_ari = adjusted_rand_index(demo.kmeans_labels, demo.data.labels);
    return demo;
}

SyntheticScene gen_synthetic_scene(std::uint64_t seed) {
    Rng rng(seed ^ 0x5ce5a11eULL);
    const int wanted = rng.integer(2, 4);
    std::vector<Shape> shapes;
    constexpr int kBorder = 10;
    constexpr int kGap = 6;
    for (int attempt = 0; attempt < 500 && static_cast<int>(shapes.size()) < wanted; ++attempt) {
        const int w = rng.integer(22, 48);
        const int h = rng.integer(22, 40);
        const int x0 = rng.integer(kBorder, kWidth - kBorder - w);
        const int y0 = rng.integer(kBorder, kHeight - kBorder - h);
        Shape s{x0, y0, x0 + w - 1, y0 + h - 1, rng.uniform() < 0.5};
        const bool clear = std::none_of(shapes.begin(), shapes.end(), [&](const Shape& o) {
            return s.x0 <= o.x1 + kGap && o.x0 <= s.x1 + kGap && s.y0 <= o.y1 + kGap && o.y0 <= s.y1 + kGap;
        });
        if (clear) shapes.push_back(s);
    }
    if (shapes.size() < 2) throw Error(ErrorKind::Numeric, "scene generator could not place two shapes");

    SyntheticScene scene;
    scene.masks.image_height = kHeight;
    scene.masks.image_width = kWidth;
    scene.masks.file_name = "scene_" + std::to_string(seed);
    int next_id = 0;
    auto add = [&](const BinaryMask& m) {
        scene.masks.masks.push_back(make_mask_record(next_id, rle_encode(m)));
        return next_id++;
    };

    BinaryMask union_mask(kHeight, kWidth, 0);
    for (const auto& s : shapes) {
        for (int r = 0; r < kHeight; ++r) {
            for (int c = 0; c < kWidth; ++c) {
                if (s.contains(r, c)) union_mask.at(r, c) = 1;
            }
        }
    }
    BinaryMask background(kHeight, kWidth, 0);
    for (std::size_t i = 0; i < background.data.size(); ++i) background.data[i] = union_mask.data[i] ? 0 : 1;
    scene.background_id = add(background);

    GroundTruth gt;
    BinaryMask inner(kHeight, kWidth, 0);
    BinaryMask outer(kHeight, kWidth, 0);
    for (const auto& s : shapes) {
        BinaryMask clean(kHeight, kWidth, 0);
        for (int r = 0; r < kHeight; ++r) {
            for (int c = 0; c < kWidth; ++c) clean.at(r, c) = s.contains(r, c) ? 1 : 0;
        }
        const auto b = mask_boundary(clean);
        for (std::size_t i = 0; i < b.data.size(); ++i) inner.data[i] |= b.data[i];
        for (int r = 0; r < kHeight; ++r) {
            for (int c = 0; c < kWidth; ++c) {
                if (clean.at(r, c)) continue;
                const bool touches = (r > 0 && clean.at(r - 1, c)) || (r + 1 < kHeight && clean.at(r + 1, c)) ||
                                     (c > 0 && clean.at(r, c - 1)) || (c + 1 < kWidth && clean.at(r, c + 1));
                if (touches) outer.at(r, c) = 1;
            }
        }

        std::vector<int> ids{add(clean)};
        // Two halves split across the longer side, and a shrunken copy.
        const bool split_x = (s.x1 - s.x0) >= (s.y1 - s.y0);
        const int lo = split_x ? s.x0 : s.y0;
        const int hi = split_x ? s.x1 : s.y1;
        const int cut = lo + static_cast<int>(std::lround((hi - lo) * rng.uniform(0.35, 0.65)));
        BinaryMask first(kHeight, kWidth, 0);
        BinaryMask second(kHeight, kWidth, 0);
        for (int r = 0; r < kHeight; ++r) {
            for (int c = 0; c < kWidth; ++c) {
                if (!clean.at(r, c)) continue;
                ((split_x ? c : r) <= cut ? first : second).at(r, c) = 1;
            }
        }
        ids.push_back(add(first));
        ids.push_back(add(second));
        const int shrink = rng.integer(2, 4);
        BinaryMask shrunk(kHeight, kWidth, 0);
        for (int r = 0; r < kHeight; ++r) {
            for (int c = 0; c < kWidth; ++c) shrunk.at(r, c) = s.contains(r, c, shrink) ? 1 : 0;
        }
        ids.push_back(add(shrunk));
        scene.shape_mask_ids.push_back(std::move(ids));
    }
    gt.annotations = {inner, outer};
    scene.ground_truth = std::move(gt);

    const int non_noise = static_cast<int>(scene.masks.masks.size());
    const int noise_count = rng.integer(10, std::min(30, 2 * non_noise));
    for (int i = 0; i < noise_count; ++i) {
        const int radius = rng.integer(1, 3);
        const int cr = rng.integer(radius, kHeight - 1 - radius);
        const int cc = rng.integer(radius, kWidth - 1 - radius);
        BinaryMask blob(kHeight, kWidth, 0);
        for (int r = cr - radius; r <= cr + radius; ++r) {
            for (int c = cc - radius; c <= cc + radius; ++c) {
                if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= radius * radius) blob.at(r, c) = 1;
            }
        }
        scene.noise_ids.push_back(add(blob));
    }
    return scene;
}

}  // namespace scesame
