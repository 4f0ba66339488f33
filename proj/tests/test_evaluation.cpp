#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "scesame/error.hpp"
#include "scesame/evaluation.hpp"
#include "scesame/parallel.hpp"

using namespace scesame;

namespace {

PrPoint counts(double thr, std::int64_t mp, std::int64_t pred, std::int64_t mg, std::int64_t gt) {
    PrPoint p;
    p.threshold = thr;
    p.matched_pred = mp;
    p.predicted = pred;
    p.matched_gt = mg;
    p.gt_total = gt;
    finalize_counts(p);
    return p;
}

std::vector<std::pair<int, int>> pixels(const BinaryMask& m) {
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (m.at(y, x)) out.emplace_back(y, x);
        }
    }
    return out;
}

EdgeMap as_map(const BinaryMask& m, double on) {
    EdgeMap e(m.height, m.width, 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) e.data[i] = m.data[i] ? on : 0.0;
    return e;
}

BinaryMask square_outline(int h, int w, int y0, int x0, int side) {
    BinaryMask m(h, w, 0);
    for (int i = 0; i < side; ++i) {
        m.at(y0, x0 + i) = m.at(y0 + side - 1, x0 + i) = 1;
        m.at(y0 + i, x0) = m.at(y0 + i, x0 + side - 1) = 1;
    }
    return m;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("match_radius") {
    CHECK(match_radius(3, 4, 0.1) == doctest::Approx(0.5));
    CHECK(match_radius(321, 481, kBsdsTolerance) == doctest::Approx(0.0075 * std::sqrt(321.0 * 321 + 481.0 * 481)));
}

TEST_CASE("identical maps match completely") {
    std::mt19937 rng(41);
    const auto m = oracle::random_grid(rng, 12, 12, 0.2);
    const auto c = correspond_pixels(m, m, 0.0);
    CHECK(c.matches == static_cast<std::int64_t>(pixels(m).size()));
    CHECK(c.matched_pred == m);
    CHECK(c.matched_gt == m);
}

TEST_CASE("displacement beyond the radius yields no match") {
    BinaryMask p(10, 10, 0), g(10, 10, 0);
    p.at(2, 2) = 1;
    g.at(2, 5) = 1;
    CHECK(correspond_pixels(p, g, 2.9).matches == 0);
    CHECK(correspond_pixels(p, g, 3.0).matches == 1);
    g.at(2, 5) = 0;
    g.at(4, 4) = 1;  // distance sqrt(8)
    CHECK(correspond_pixels(p, g, 2.82).matches == 0);
    CHECK(correspond_pixels(p, g, 2.83).matches == 1);
}

TEST_CASE("matching is maximum and symmetric") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> radius(0.0, 2.5);
    for (int t = 0; t < 500; ++t) {
        const auto p = oracle::random_grid(rng, 5, 5, 0.25);
        const auto g = oracle::random_grid(rng, 5, 5, 0.25);
        const auto pp = pixels(p), gp = pixels(g);
        if (pp.size() > 9 || gp.size() > 9) continue;
        const double r = radius(rng);
        const auto c = correspond_pixels(p, g, r);
        REQUIRE(c.matches == oracle::max_matching_bruteforce(pp, gp, r));
        REQUIRE(correspond_pixels(g, p, r).matches == c.matches);
        std::int64_t mp = 0, mg = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            REQUIRE((!c.matched_pred.data[i] || p.data[i]));
            REQUIRE((!c.matched_gt.data[i] || g.data[i]));
            mp += c.matched_pred.data[i];
            mg += c.matched_gt.data[i];
        }
        REQUIRE(mp == c.matches);
        REQUIRE(mg == c.matches);
    }
}

TEST_CASE("correspond_pixels rejects mismatched shapes") {
    CHECK_THROWS_AS(correspond_pixels(BinaryMask(3, 3, 0), BinaryMask(3, 4, 0), 1.0), Error);
}

TEST_CASE("prf_at_threshold") {
    const auto gt = square_outline(20, 20, 4, 4, 10);
    const GroundTruth one{{gt}};

    auto p = prf_at_threshold(as_map(gt, 0.8), one, 0.5, 1.0);
    CHECK(p.precision == 1.0);
    CHECK(p.recall == 1.0);
    CHECK(p.f1 == 1.0);

    p = prf_at_threshold(as_map(gt, 0.3), one, 0.5, 1.0);
    CHECK(p.predicted == 0);
    CHECK(p.precision == 0.0);
    CHECK(p.recall == 0.0);
    CHECK(p.f1 == 0.0);

    // Second annotator disjoint and far away: every prediction still counts
    // as matched, but only half of all annotated pixels are recalled.
    const auto other = square_outline(40, 40, 25, 25, 10);
    BinaryMask big_gt(40, 40, 0);
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) big_gt.at(y, x) = gt.at(y, x);
    }
    const GroundTruth two{{big_gt, other}};
    p = prf_at_threshold(as_map(big_gt, 1.0), two, 0.5, 1.0);
    CHECK(p.precision == 1.0);
    CHECK(p.recall == doctest::Approx(0.5));
    CHECK(p.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(p.fp() == 0);
    CHECK(p.fn() == 36);

    CHECK_THROWS_AS(prf_at_threshold(as_map(gt, 1.0), GroundTruth{}, 0.5, 1.0), Error);
}

TEST_CASE("binarize uses >=") {
    EdgeMap e(1, 3);
    e.data = {0.49, 0.5, 0.51};
    CHECK(binarize(e, 0.5).data == std::vector<std::uint8_t>{0, 1, 1});
}

TEST_CASE("thinning reduces a thick bar to a one-pixel line") {
    BinaryMask bar(9, 20, 0);
    for (int y = 3; y < 6; ++y) {
        for (int x = 2; x < 18; ++x) bar.at(y, x) = 1;
    }
    const auto thin = thin_edges(bar);
    for (int x = 0; x < 20; ++x) {
        int column = 0;
        for (int y = 0; y < 9; ++y) column += thin.at(y, x);
        CHECK(column <= 1);
    }
    int total = 0;
    for (std::size_t i = 0; i < thin.size(); ++i) {
        CHECK((!thin.data[i] || bar.data[i]));
        total += thin.data[i];
    }
    CHECK(total >= 10);

    const auto line = square_outline(12, 12, 1, 1, 8);
    CHECK(thin_edges(line) == line);
}

TEST_CASE("sweep_thresholds") {
    const auto t = sweep_thresholds();
    REQUIRE(t.size() == 99);
    CHECK(t.front() == doctest::Approx(0.01));
    CHECK(t.back() == doctest::Approx(0.99));
    CHECK(t[49] == doctest::Approx(0.5));
}

TEST_CASE("sweep_image agrees with prf_at_threshold") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EdgeMap e(16, 16);
    for (auto& v : e.data) v = u(rng) < 0.7 ? 0.0 : u(rng);
    const GroundTruth g{{oracle::random_grid(rng, 16, 16, 0.1), oracle::random_grid(rng, 16, 16, 0.1)}};
    const auto curve = sweep_image(e, g, 1.5);
    const auto thr = sweep_thresholds();
    REQUIRE(curve.size() == thr.size());
    for (std::size_t i = 0; i < thr.size(); i += 7) {
        const auto ref = prf_at_threshold(e, g, thr[i], 1.5);
        CHECK(curve[i].matched_pred == ref.matched_pred);
        CHECK(curve[i].predicted == ref.predicted);
        CHECK(curve[i].matched_gt == ref.matched_gt);
        CHECK(curve[i].gt_total == ref.gt_total);
    }
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].predicted <= curve[i - 1].predicted);
}

TEST_CASE("ods_ois on a frozen three-image example") {
    const std::vector<std::vector<PrPoint>> images{
        {counts(0.25, 8, 10, 8, 20), counts(0.5, 6, 6, 6, 20), counts(0.75, 2, 2, 2, 20)},
        {counts(0.25, 5, 20, 10, 10), counts(0.5, 5, 8, 9, 10), counts(0.75, 3, 3, 5, 10)},
        {counts(0.25, 0, 5, 0, 4), counts(0.5, 2, 3, 2, 4), counts(0.75, 1, 1, 1, 4)},
    };
    const auto r = ods_ois(images);
    CHECK(r.ods == doctest::Approx(0.6046511627906976).epsilon(1e-14));
    CHECK(r.ods_threshold == 0.5);
    CHECK(r.ois == doctest::Approx(0.6270627062706271).epsilon(1e-14));
    REQUIRE(r.per_image_best.size() == 3);
    CHECK(r.per_image_best[0].threshold == 0.25);
    CHECK(r.per_image_best[1].threshold == 0.5);
    CHECK(r.per_image_best[2].threshold == 0.5);
    REQUIRE(r.dataset_curve.size() == 3);
    CHECK(r.dataset_curve[0].matched_pred == 13);
    CHECK(r.dataset_curve[0].predicted == 35);
    CHECK(r.dataset_curve[1].matched_gt == 17);
    CHECK(r.dataset_curve[2].gt_total == 34);
}

TEST_CASE("ods_ois ties resolve to the lowest threshold and rejects ragged input") {
    const std::vector<std::vector<PrPoint>> flat{{counts(0.2, 1, 2, 1, 2), counts(0.4, 1, 2, 1, 2)}};
    const auto r = ods_ois(flat);
    CHECK(r.ods_threshold == 0.2);
    CHECK(r.per_image_best[0].threshold == 0.2);

    const std::vector<std::vector<PrPoint>> ragged{{counts(0.2, 1, 2, 1, 2)}, {}};
    CHECK_THROWS_AS(ods_ois(ragged), Error);
    CHECK_THROWS_AS(ods_ois(std::span<const std::vector<PrPoint>>{}), Error);
}

TEST_CASE("average_precision") {
    // Precision 1 at full recall.
    std::vector<PrPoint> perfect{counts(0.5, 10, 10, 10, 10)};
    CHECK(average_precision(perfect) == doctest::Approx(1.0));

    // Precision 1 up to recall 0.5, nothing beyond.
    std::vector<PrPoint> half{counts(0.5, 5, 5, 5, 10)};
    CHECK(average_precision(half) == doctest::Approx(0.5));

    std::vector<PrPoint> empty{counts(0.5, 0, 0, 0, 10)};
    CHECK(average_precision(empty) == 0.0);

    // A monotone curve against a direct evaluation of the interpolation rule.
    std::vector<PrPoint> curve{counts(0.2, 9, 10, 9, 10), counts(0.5, 7, 7, 6, 10), counts(0.8, 2, 2, 2, 10)};
    const std::vector<std::pair<double, double>> rp{{0.2, 1.0}, {0.6, 1.0}, {0.9, 0.9}};
    double expected = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double r = i / 100.0;
        double p = 0.0;
        if (r <= rp.front().first) {
            p = rp.front().second;
        } else if (r <= rp.back().first + 1e-12) {
            for (std::size_t k = 1; k < rp.size(); ++k) {
                if (r <= rp[k].first + 1e-12) {
                    const double f = (r - rp[k - 1].first) / (rp[k].first - rp[k - 1].first);
                    p = rp[k - 1].second + f * (rp[k].second - rp[k - 1].second);
                    break;
                }
            }
        }
        expected += p;
    }
    expected /= 100.0;
    CHECK(average_precision(curve) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(average_precision(curve) <= 1.0);
}

TEST_CASE("evaluate_dataset") {
    const auto gt = square_outline(24, 24, 5, 5, 12);
    const std::vector<GroundTruth> gts{GroundTruth{{gt}}, GroundTruth{{gt}}};

    const std::vector<EdgeMap> perfect{as_map(gt, 1.0), as_map(gt, 0.9)};
    auto r = evaluate_dataset(perfect, gts);
    CHECK(r.ods == doctest::Approx(1.0));
    CHECK(r.ois == doctest::Approx(1.0));
    CHECK(r.ap == doctest::Approx(1.0));
    CHECK(r.per_threshold.size() == 99);
    CHECK(r.per_image_best.size() == 2);

    const std::vector<EdgeMap> blank{EdgeMap(24, 24, 0.0), EdgeMap(24, 24, 0.0)};
    r = evaluate_dataset(blank, gts);
    CHECK(r.ods == 0.0);
    CHECK(r.ois == 0.0);
    CHECK(r.ap == 0.0);

    EvalOptions threaded;
    threaded.jobs = 3;
    const auto a = evaluate_dataset(perfect, gts);
    const auto b = evaluate_dataset(perfect, gts, threaded);
    CHECK(a.ods == b.ods);
    CHECK(a.ois == b.ois);
    CHECK(a.ap == b.ap);

    CHECK_THROWS_AS(evaluate_dataset(std::span<const EdgeMap>{}, std::span<const GroundTruth>{}), Error);
    CHECK_THROWS_AS(evaluate_dataset(std::span<const EdgeMap>(perfect.data(), 1), gts), Error);
}

TEST_CASE("metric invariants on random soft predictions") {
    std::mt19937 rng(44);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        std::vector<EdgeMap> preds;
        std::vector<GroundTruth> gts;
        for (int i = 0; i < 4; ++i) {
            const auto gt = square_outline(30, 30, 3 + i, 4 + t, 14 + i);
            EdgeMap e(30, 30, 0.0);
            for (std::size_t k = 0; k < e.size(); ++k) {
                e.data[k] = gt.data[k] ? 0.3 + 0.7 * u(rng) : (u(rng) < 0.05 ? u(rng) : 0.0);
            }
            preds.push_back(e);
            gts.push_back(GroundTruth{{gt, square_outline(30, 30, 2 + i, 4 + t, 15 + i)}});
        }
        const auto r = evaluate_dataset(preds, gts);
        for (double v : {r.ods, r.ois, r.ap}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(r.ois >= r.ods - 1e-12);
        for (const auto& p : r.per_threshold) {
            CHECK(p.matched_pred <= p.predicted);
            CHECK(p.matched_gt <= p.gt_total);
        }
    }
}

}

TEST_SUITE("evaluation") {

TEST_CASE("parallel_for visits each index once and rethrows") {
    for (int jobs : {1, 2, 4}) {
        std::vector<int> hits(37, 0);
        parallel_for(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
        CHECK_THROWS_AS(parallel_for(10, jobs,
                                     [](std::size_t i) {
                                         if (i == 7) throw Error(ErrorKind::Numeric, "boom");
                                     }),
                        Error);
    }
    parallel_for(0, 3, [](std::size_t) { FAIL("no calls expected"); });
}

}

TEST_SUITE("evaluation") {

TEST_CASE("ods_ois aggregation invariants") {
    const std::vector<PrPoint> row{counts(0.25, 8, 10, 8, 20), counts(0.5, 6, 6, 6, 20), counts(0.75, 2, 2, 2, 20)};
    double best = 0.0;
    for (const auto& p : row) best = std::max(best, p.f1);
    const std::vector<std::vector<PrPoint>> single{row};
    const auto one = ods_ois(single);
    CHECK(one.ois == doctest::Approx(best).epsilon(1e-15));
    CHECK(one.ods == doctest::Approx(best).epsilon(1e-15));

    const std::vector<std::vector<PrPoint>> twice{row, row};
    const auto two = ods_ois(twice);
    CHECK(two.ods == doctest::Approx(one.ods).epsilon(1e-15));
    CHECK(two.ods_threshold == one.ods_threshold);
    CHECK(two.ois == doctest::Approx(one.ois).epsilon(1e-15));
}

}
