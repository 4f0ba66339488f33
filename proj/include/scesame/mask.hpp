#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scesame/grid.hpp"

namespace scesame {

// Uncompressed COCO-style run-length encoding: column-major, alternating
// background/foreground runs, always starting with a (possibly empty)
// background run.
struct Rle {
    int height = 0;
    int width = 0;
    std::vector<std::uint32_t> counts;

    bool operator==(const Rle&) const = default;
};

// Pixel rectangle [x, x + w) x [y, y + h).
struct Box {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    double area() const noexcept { return static_cast<double>(w) * h; }
    bool operator==(const Box&) const = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

struct MaskGeometry {
    std::int64_t area = 0;
    Box bbox;
    Point2 center;
};

struct MaskRecord {
    int id = 0;
    Rle segmentation;
    std::int64_t area = 0;
    Box bbox;
    Point2 center;
    std::optional<Grid<float>> logits;
    std::optional<double> score;
};

struct MaskSet {
    int image_height = 0;
    int image_width = 0;
    std::string file_name;
    std::vector<MaskRecord> masks;
};

// Half-open foreground interval in column-major linear pixel index space.
using Run = std::pair<std::int64_t, std::int64_t>;

BinaryMask rle_decode(const Rle& rle);
Rle rle_encode(const BinaryMask& grid);

// Foreground intervals of an RLE, sorted and disjoint.
std::vector<Run> foreground_runs(const Rle& rle);
std::int64_t rle_area(const Rle& rle);
// Number of foreground pixels shared by two RLEs of equal shape.
std::int64_t rle_intersection_area(const Rle& a, const Rle& b);

// Throws Error(EmptyMask) for a mask without foreground.
MaskGeometry mask_geometry(const BinaryMask& grid);
MaskGeometry mask_geometry(const Rle& rle);

// Builds a record from an RLE, filling area, bbox and center.
MaskRecord make_mask_record(int id, Rle segmentation, std::optional<double> score = std::nullopt);

double box_iou(const Box& a, const Box& b);

// Greedy box NMS. Masks are visited by score (descending; area, then id break
// ties) and kept iff their IoU with every kept box is below the threshold.
// Masks without a score are ranked by area / (H * W).
MaskSet box_nms(const MaskSet& masks, double iou_threshold);

// Drops zero-area masks and throws on RLE/shape/id violations. Returns a
// human-readable warning per dropped mask.
std::vector<std::string> validate_mask_set(MaskSet& masks);

}  // namespace scesame
