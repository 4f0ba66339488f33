#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "scesame/error.hpp"
#include "scesame/mask.hpp"

using namespace scesame;

TEST_SUITE("mask_model") {

TEST_CASE("rle_decode small cases") {
    const auto full = rle_decode(Rle{2, 2, {0, 4}});
    CHECK(std::count(full.data.begin(), full.data.end(), 1) == 4);

    const auto empty = rle_decode(Rle{2, 2, {4}});
    CHECK(std::count(empty.data.begin(), empty.data.end(), 1) == 0);

    const Rle r{3, 2, {1, 2, 3}};
    const auto g = rle_decode(r);
    CHECK(g == oracle::decode_rle(r));
    CHECK(g.at(1, 0) == 1);
    CHECK(g.at(2, 0) == 1);
    CHECK(g.at(0, 0) == 0);
    CHECK(g.at(0, 1) == 0);
    CHECK(g.at(1, 1) == 0);
    CHECK(g.at(2, 1) == 0);
}

TEST_CASE("rle_decode rejects run-length mismatch") {
    try {
        rle_decode(Rle{2, 2, {1, 2}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedInput);
    }
}

TEST_CASE("rle_encode starts with a background run") {
    CHECK(rle_encode(BinaryMask(2, 2, 0)).counts == std::vector<std::uint32_t>{4});
    CHECK(rle_encode(BinaryMask(2, 2, 1)).counts == std::vector<std::uint32_t>{0, 4});
}

TEST_CASE("rle round trip on random grids") {
    std::mt19937 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const auto g = oracle::random_grid(rng, 8, 8, (i % 10) / 10.0);
        const auto rle = rle_encode(g);
        REQUIRE(rle_decode(rle) == g);
        REQUIRE(oracle::decode_rle(rle) == g);
        std::int64_t fg = 0;
        for (std::size_t k = 1; k < rle.counts.size(); k += 2) fg += rle.counts[k];
        REQUIRE(fg == std::count(g.data.begin(), g.data.end(), 1));
    }
}

TEST_CASE("mask_geometry") {
    BinaryMask px(8, 8, 0);
    px.at(4, 3) = 1;  // (x=3, y=4)
    auto g = mask_geometry(px);
    CHECK(g.area == 1);
    CHECK(g.bbox == Box{3, 4, 1, 1});
    CHECK(g.center == Point2{3.5, 4.5});

    g = mask_geometry(BinaryMask(10, 10, 1));
    CHECK(g.area == 100);
    CHECK(g.center == Point2{5.0, 5.0});

    BinaryMask l(5, 5, 0);
    l.at(0, 0) = l.at(1, 0) = l.at(2, 0) = l.at(0, 1) = 1;
    g = mask_geometry(l);
    CHECK(g.area == 4);
    CHECK(g.bbox == Box{0, 0, 2, 3});

    CHECK_THROWS_AS(mask_geometry(BinaryMask(3, 3, 0)), Error);
}

TEST_CASE("RLE-based geometry agrees with grid geometry") {
    std::mt19937 rng(11);
    for (int i = 0; i < 500; ++i) {
        std::uniform_int_distribution<int> dim(1, 9);
        const int h = dim(rng), w = dim(rng);
        const auto g = oracle::random_grid(rng, h, w, 0.15);
        if (std::count(g.data.begin(), g.data.end(), 1) == 0) continue;
        const auto a = mask_geometry(g);
        const auto b = mask_geometry(rle_encode(g));
        REQUIRE(a.area == b.area);
        REQUIRE(a.bbox == b.bbox);
        REQUIRE(a.center == b.center);
        // Center lies inside or on the bbox.
        REQUIRE(a.center.x >= a.bbox.x);
        REQUIRE(a.center.x <= a.bbox.x + a.bbox.w);
        REQUIRE(a.center.y >= a.bbox.y);
        REQUIRE(a.center.y <= a.bbox.y + a.bbox.h);
    }
}

TEST_CASE("rle intersection counts shared pixels") {
    std::mt19937 rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto a = oracle::random_grid(rng, 7, 9, 0.4);
        const auto b = oracle::random_grid(rng, 7, 9, 0.4);
        std::int64_t shared = 0;
        for (std::size_t k = 0; k < a.size(); ++k) shared += a.data[k] && b.data[k];
        REQUIRE(rle_intersection_area(rle_encode(a), rle_encode(b)) == shared);
    }
}

TEST_CASE("box_iou") {
    const Box a{0, 0, 2, 2};
    CHECK(box_iou(a, a) == 1.0);
    CHECK(box_iou(a, Box{5, 5, 2, 2}) == 0.0);
    CHECK(box_iou(a, Box{1, 0, 2, 2}) == doctest::Approx(2.0 / 6.0).epsilon(1e-15));

    std::mt19937 rng(5);
    std::uniform_int_distribution<int> pos(0, 10), len(1, 6);
    for (int i = 0; i < 300; ++i) {
        const Box p{pos(rng), pos(rng), len(rng), len(rng)};
        const Box q{pos(rng), pos(rng), len(rng), len(rng)};
        const double v = box_iou(p, q);
        REQUIRE(v == box_iou(q, p));
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        REQUIRE(v == doctest::Approx(oracle::box_iou(p, q)).epsilon(1e-12));
    }
}

namespace {

MaskRecord box_mask(int id, int h, int w, Box b, std::optional<double> score) {
    return make_mask_record(id, rle_encode(oracle::block(h, w, b.y, b.x, b.h, b.w)), score);
}

}  // namespace

TEST_CASE("box_nms keeps the higher score of two identical boxes") {
    MaskSet s{20, 20, "", {box_mask(1, 20, 20, {2, 2, 5, 5}, 0.8), box_mask(2, 20, 20, {2, 2, 5, 5}, 0.9)}};
    const auto out = box_nms(s, 0.7);
    REQUIRE(out.masks.size() == 1);
    CHECK(out.masks[0].id == 2);
    CHECK(s.masks.size() == 2);
}

TEST_CASE("box_nms keeps disjoint boxes") {
    MaskSet s{20, 20, "", {}};
    for (int i = 0; i < 4; ++i) s.masks.push_back(box_mask(i, 20, 20, {i * 5, 0, 4, 4}, std::nullopt));
    CHECK(box_nms(s, 0.7).masks.size() == 4);
    CHECK(box_nms(MaskSet{20, 20, "", {}}, 0.7).masks.empty());
    CHECK_THROWS_AS(box_nms(s, 0.0), Error);
}

TEST_CASE("box_nms matches the brute-force greedy reference") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> count(0, 10), pos(0, 12), len(1, 8), coin(0, 2);
    std::uniform_real_distribution<double> sc(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        MaskSet s{20, 20, "", {}};
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            std::optional<double> score;
            if (coin(rng) > 0) score = std::round(sc(rng) * 4) / 4;  // induce ties
            s.masks.push_back(box_mask(i, 20, 20, {pos(rng), pos(rng), len(rng), len(rng)}, score));
        }
        const double thr = std::vector<double>{0.3, 0.5, 0.7, 1.0}[static_cast<std::size_t>(trial % 4)];
        const auto out = box_nms(s, thr);
        std::vector<int> ids;
        for (const auto& m : out.masks) ids.push_back(m.id);
        REQUIRE(ids == oracle::nms_ids(s, thr));
        // Lower thresholds never keep more.
        REQUIRE(box_nms(s, thr * 0.5).masks.size() <= out.masks.size());
    }
}

TEST_CASE("validate_mask_set drops empty masks and rejects duplicates") {
    MaskSet s{4, 4, "", {}};
    MaskRecord empty;
    empty.id = 1;
    empty.segmentation = Rle{4, 4, {16}};
    s.masks.push_back(empty);
    MaskRecord one;
    one.id = 2;
    one.segmentation = Rle{4, 4, {5, 2, 9}};
    s.masks.push_back(one);
    const auto warnings = validate_mask_set(s);
    CHECK(warnings.size() == 1);
    REQUIRE(s.masks.size() == 1);
    CHECK(s.masks[0].area == 2);
    CHECK(s.masks[0].bbox == Box{1, 1, 1, 2});

    s.masks.push_back(s.masks[0]);
    CHECK_THROWS_AS(validate_mask_set(s), Error);

    MaskSet wrong{5, 4, "", {one}};
    CHECK_THROWS_AS(validate_mask_set(wrong), Error);
}

}
