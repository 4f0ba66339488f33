#include "scesame/mask.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "scesame/error.hpp"

namespace scesame {

namespace {

std::int64_t pixel_count(const Rle& rle) {
    return static_cast<std::int64_t>(rle.height) * static_cast<std::int64_t>(rle.width);
}

void check_rle(const Rle& rle) {
    if (rle.height <= 0 || rle.width <= 0) {
        throw Error(ErrorKind::MalformedInput, "RLE dimensions must be positive");
    }
    std::int64_t total = 0;
    for (auto c : rle.counts) total += c;
    if (total != pixel_count(rle)) {
        throw Error(ErrorKind::MalformedInput,
                    "RLE run lengths sum to " + std::to_string(total) + ", expected " +
                        std::to_string(pixel_count(rle)));
    }
}

}  // namespace

BinaryMask rle_decode(const Rle& rle) {
    check_rle(rle);
    BinaryMask grid(rle.height, rle.width, 0);
    std::int64_t pos = 0;
    for (std::size_t i = 0; i < rle.counts.size(); ++i) {
        const std::int64_t end = pos + rle.counts[i];
        if (i % 2 == 1) {
            for (std::int64_t p = pos; p < end; ++p) {
                grid.at(static_cast<int>(p % rle.height), static_cast<int>(p / rle.height)) = 1;
            }
        }
        pos = end;
    }
    return grid;
}

Rle rle_encode(const BinaryMask& grid) {
    Rle rle{grid.height, grid.width, {}};
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (int col = 0; col < grid.width; ++col) {
        for (int row = 0; row < grid.height; ++row) {
            const std::uint8_t v = grid.at(row, col) ? 1 : 0;
            if (v != current) {
                rle.counts.push_back(run);
                run = 0;
                current = v;
            }
            ++run;
        }
    }
    rle.counts.push_back(run);
    return rle;
}

std::vector<Run> foreground_runs(const Rle& rle) {
    check_rle(rle);
    std::vector<Run> runs;
    std::int64_t pos = 0;
    for (std::size_t i = 0; i < rle.counts.size(); ++i) {
        const std::int64_t end = pos + rle.counts[i];
        if (i % 2 == 1 && end > pos) runs.emplace_back(pos, end);
        pos = end;
    }
    return runs;
}

std::int64_t rle_area(const Rle& rle) {
    std::int64_t area = 0;
    for (std::size_t i = 1; i < rle.counts.size(); i += 2) area += rle.counts[i];
    return area;
}

std::int64_t rle_intersection_area(const Rle& a, const Rle& b) {
    if (a.height != b.height || a.width != b.width) {
        throw Error(ErrorKind::Shape, "RLE shapes differ");
    }
    const auto ra = foreground_runs(a);
    const auto rb = foreground_runs(b);
    std::int64_t shared = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ra.size() && j < rb.size()) {
        const auto lo = std::max(ra[i].first, rb[j].first);
        const auto hi = std::min(ra[i].second, rb[j].second);
        if (hi > lo) shared += hi - lo;
        if (ra[i].second < rb[j].second) {
            ++i;
        } else {
            ++j;
        }
    }
    return shared;
}

MaskGeometry mask_geometry(const BinaryMask& grid) {
    int x0 = std::numeric_limits<int>::max();
    int y0 = std::numeric_limits<int>::max();
    int x1 = -1;
    int y1 = -1;
    std::int64_t area = 0;
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            if (!grid.at(r, c)) continue;
            ++area;
            x0 = std::min(x0, c);
            y0 = std::min(y0, r);
            x1 = std::max(x1, c);
            y1 = std::max(y1, r);
        }
    }
    if (area == 0) throw Error(ErrorKind::EmptyMask, "mask has no foreground pixels");
    MaskGeometry g;
    g.area = area;
    g.bbox = Box{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    g.center = Point2{x0 + g.bbox.w / 2.0, y0 + g.bbox.h / 2.0};
    return g;
}

MaskGeometry mask_geometry(const Rle& rle) {
    // Works on runs directly so large masks never need a decoded grid.
    const auto runs = foreground_runs(rle);
    if (runs.empty()) throw Error(ErrorKind::EmptyMask, "mask has no foreground pixels");
    const std::int64_t h = rle.height;
    std::int64_t area = 0;
    std::int64_t x0 = std::numeric_limits<std::int64_t>::max();
    std::int64_t y0 = x0;
    std::int64_t x1 = -1;
    std::int64_t y1 = -1;
    for (const auto& [begin, end] : runs) {
        area += end - begin;
        const std::int64_t c_first = begin / h;
        const std::int64_t c_last = (end - 1) / h;
        x0 = std::min(x0, c_first);
        x1 = std::max(x1, c_last);
        if (c_first == c_last) {
            y0 = std::min(y0, begin % h);
            y1 = std::max(y1, (end - 1) % h);
        } else {
            // A run spanning columns covers the bottom of its first column and
            // the top of its last one.
            y0 = 0;
            y1 = h - 1;
        }
    }
    MaskGeometry g;
    g.area = area;
    g.bbox = Box{static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0 + 1),
                 static_cast<int>(y1 - y0 + 1)};
    g.center = Point2{x0 + g.bbox.w / 2.0, y0 + g.bbox.h / 2.0};
    return g;
}

MaskRecord make_mask_record(int id, Rle segmentation, std::optional<double> score) {
    const auto g = mask_geometry(segmentation);
    MaskRecord rec;
    rec.id = id;
    rec.segmentation = std::move(segmentation);
    rec.area = g.area;
    rec.bbox = g.bbox;
    rec.center = g.center;
    rec.score = score;
    return rec;
}

double box_iou(const Box& a, const Box& b) {
    const int ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const int iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = static_cast<double>(ix) * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

MaskSet box_nms(const MaskSet& masks, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw Error(ErrorKind::Parameter, "NMS IoU threshold must lie in (0, 1]");
    }
    const double pixels = static_cast<double>(masks.image_height) * masks.image_width;
    auto rank_score = [&](const MaskRecord& m) {
        return m.score ? *m.score : (pixels > 0 ? static_cast<double>(m.area) / pixels : 0.0);
    };
    std::vector<std::size_t> order(masks.masks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        const auto& a = masks.masks[i];
        const auto& b = masks.masks[j];
        const double sa = rank_score(a);
        const double sb = rank_score(b);
        if (sa != sb) return sa > sb;
        if (a.area != b.area) return a.area > b.area;
        return a.id < b.id;
    });

    MaskSet out{masks.image_height, masks.image_width, masks.file_name, {}};
    for (std::size_t idx : order) {
        const auto& cand = masks.masks[idx];
        const bool keep = std::all_of(out.masks.begin(), out.masks.end(), [&](const MaskRecord& k) {
            return box_iou(cand.bbox, k.bbox) < iou_threshold;
        });
        if (keep) out.masks.push_back(cand);
    }
    return out;
}

std::vector<std::string> validate_mask_set(MaskSet& masks) {
    std::vector<std::string> warnings;
    std::set<int> ids;
    std::vector<MaskRecord> kept;
    kept.reserve(masks.masks.size());
    for (auto& m : masks.masks) {
        if (m.segmentation.height != masks.image_height || m.segmentation.width != masks.image_width) {
            throw Error(ErrorKind::Shape, "mask " + std::to_string(m.id) + " does not match the image size");
        }
        check_rle(m.segmentation);
        if (!ids.insert(m.id).second) {
            throw Error(ErrorKind::MalformedInput, "duplicate mask id " + std::to_string(m.id));
        }
        if (m.logits && (m.logits->height != masks.image_height || m.logits->width != masks.image_width)) {
            throw Error(ErrorKind::Shape, "logits of mask " + std::to_string(m.id) + " do not match the image size");
        }
        if (rle_area(m.segmentation) == 0) {
            warnings.push_back("dropping mask " + std::to_string(m.id) + ": zero area");
            continue;
        }
        const auto g = mask_geometry(m.segmentation);
        m.area = g.area;
        m.bbox = g.bbox;
        m.center = g.center;
        kept.push_back(std::move(m));
    }
    masks.masks = std::move(kept);
    return warnings;
}

}  // namespace scesame
