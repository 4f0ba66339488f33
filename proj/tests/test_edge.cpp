#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "scesame/edge.hpp"
#include "scesame/error.hpp"

using namespace scesame;

namespace {

EnsembleMask binary_ensemble(const BinaryMask& m) {
    return as_ensemble(make_mask_record(0, rle_encode(m)), m.height, m.width);
}

EdgeMap random_map(std::mt19937& rng, int h, int w) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EdgeMap e(h, w);
    for (auto& v : e.data) v = u(rng);
    return e;
}

}  // namespace

TEST_SUITE("edge_pipeline") {

TEST_CASE("full-image mask responds only on the image border") {
    const auto r = mask_edge_response(binary_ensemble(BinaryMask(6, 7, 1)));
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 7; ++x) {
            const bool border = y == 0 || x == 0 || y == 5 || x == 6;
            CHECK((r.at(y, x) > 0.0) == border);
        }
    }
}

TEST_CASE("single-pixel mask response is confined to that pixel") {
    BinaryMask m(5, 5, 0);
    m.at(2, 2) = 1;
    const auto r = mask_edge_response(binary_ensemble(m));
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) {
            if (y != 2 || x != 2) CHECK(r.at(y, x) == 0.0);
        }
    }
    // Sobel taps vanish at the kernel center, so an isolated pixel has no gradient.
    CHECK(r.at(2, 2) == 0.0);
}

TEST_CASE("block response is the Sobel magnitude on the 36-pixel ring") {
    const auto m = oracle::block(20, 20, 5, 5, 10, 10);
    const auto r = mask_edge_response(binary_ensemble(m));
    RealMap prob(20, 20, 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) prob.data[i] = m.data[i];
    const auto ref = oracle::sobel_zero_pad(prob);
    int nonzero = 0;
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) {
            const bool ring = m.at(y, x) && (y == 5 || y == 14 || x == 5 || x == 14);
            CHECK((r.at(y, x) > 0.0) == ring);
            if (ring) CHECK(r.at(y, x) == doctest::Approx(ref.at(y, x)).epsilon(1e-15));
            nonzero += r.at(y, x) > 0.0;
        }
    }
    CHECK(nonzero == 36);
}

TEST_CASE("aggregate_normalize") {
    EdgeMap a(2, 2), b(2, 2, 1.0);
    a.data = {0, 2, 4, 2};
    const std::vector<EdgeMap> both{a, b};
    const auto out = aggregate_normalize(both);
    CHECK(out.data[0] == 0.0);
    CHECK(out.data[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(out.data[2] == 1.0);
    CHECK(out.data[3] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    EdgeMap unit(2, 2);
    unit.data = {0.0, 0.25, 1.0, 0.5};
    const std::vector<EdgeMap> single{unit};
    CHECK(aggregate_normalize(single) == unit);

    const std::vector<EdgeMap> with_zero{EdgeMap(2, 2, 0.0), a};
    auto norm_a = a;
    min_max_normalize(norm_a);
    CHECK(aggregate_normalize(with_zero) == norm_a);

    const std::vector<EdgeMap> constant{EdgeMap(3, 3, 0.7)};
    CHECK(aggregate_normalize(constant) == EdgeMap(3, 3, 0.0));

    const std::vector<EdgeMap> mismatch{EdgeMap(2, 2), EdgeMap(2, 3)};
    CHECK_THROWS_AS(aggregate_normalize(mismatch), Error);
}

TEST_CASE("aggregate_normalize spans [0, 1] for non-constant input") {
    std::mt19937 rng(31);
    for (int t = 0; t < 50; ++t) {
        const std::vector<EdgeMap> maps{random_map(rng, 5, 6), random_map(rng, 5, 6)};
        const auto out = aggregate_normalize(maps);
        REQUIRE(*std::min_element(out.data.begin(), out.data.end()) == 0.0);
        REQUIRE(*std::max_element(out.data.begin(), out.data.end()) == 1.0);
    }
}

TEST_CASE("gaussian_blur") {
    std::mt19937 rng(32);
    const auto e = random_map(rng, 6, 5);
    CHECK(gaussian_blur(e, 1) == e);

    const auto flat = gaussian_blur(EdgeMap(6, 5, 0.4), 3);
    for (double v : flat.data) CHECK(v == doctest::Approx(0.4).epsilon(1e-15));

    EdgeMap impulse(7, 7, 0.0);
    impulse.at(3, 3) = 1.0;
    const auto out = gaussian_blur(impulse, 3);
    // sigma = 0.8; taps exp(-x^2 / 1.28) normalized.
    CHECK(out.at(3, 3) == doctest::Approx(0.2724959735107281).epsilon(1e-12));
    CHECK(out.at(2, 2) == doctest::Approx(0.05711825900067254).epsilon(1e-12));
    CHECK(out.at(2, 3) == doctest::Approx(0.1247577476216454).epsilon(1e-12));
    double sum = 0.0;
    for (double v : out.data) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(out.at(1, 3) == 0.0);

    CHECK_THROWS_AS(gaussian_blur(e, 4), Error);
}

TEST_CASE("reflect101") {
    CHECK(reflect101(-1, 5) == 1);
    CHECK(reflect101(5, 5) == 3);
    CHECK(reflect101(-7, 5) == 1);
    CHECK(reflect101(3, 1) == 0);
}

TEST_CASE("edge_nms") {
    EdgeMap line(9, 9, 0.0);
    for (int y = 0; y < 9; ++y) line.at(y, 4) = 0.8;
    CHECK(edge_nms(line) == line);

    CHECK(edge_nms(EdgeMap(5, 5, 0.0)) == EdgeMap(5, 5, 0.0));

    EdgeMap band(9, 11, 0.0);
    for (int y = 0; y < 9; ++y) {
        const double peak = 0.6 + 0.04 * y;
        band.at(y, 4) = 0.5 * peak;
        band.at(y, 5) = peak;
        band.at(y, 6) = 0.4 * peak;
    }
    const auto out = edge_nms(band);
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 11; ++x) {
            if (x == 5) {
                CHECK(out.at(y, x) == band.at(y, x));
            } else {
                CHECK(out.at(y, x) == 0.0);
            }
        }
    }

    const auto soft = edge_nms(band, 0.5);
    CHECK(soft.at(4, 4) == doctest::Approx(0.5 * band.at(4, 4)));
    CHECK(soft.at(4, 5) == band.at(4, 5));
}

TEST_CASE("edge_nms never raises a value and keeps survivors exact") {
    std::mt19937 rng(33);
    for (int t = 0; t < 30; ++t) {
        const auto e = random_map(rng, 8, 9);
        for (double low : {0.0, 0.3}) {
            const auto out = edge_nms(e, low);
            for (std::size_t i = 0; i < e.size(); ++i) {
                REQUIRE(out.data[i] <= e.data[i]);
                REQUIRE(out.data[i] >= 0.0);
                REQUIRE((out.data[i] == e.data[i] || out.data[i] == e.data[i] * low));
            }
        }
    }
}

TEST_CASE("boundary_zero_padding") {
    std::mt19937 rng(34);
    const auto e = random_map(rng, 12, 14);
    CHECK(boundary_zero_padding(e, 0) == e);

    const auto ones = boundary_zero_padding(EdgeMap(20, 20, 1.0), 5);
    int lit = 0;
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) {
            const bool inner = y >= 5 && y < 15 && x >= 5 && x < 15;
            CHECK(ones.at(y, x) == (inner ? 1.0 : 0.0));
            lit += ones.at(y, x) > 0;
        }
    }
    CHECK(lit == 100);
    CHECK(boundary_zero_padding(EdgeMap(20, 20, 1.0), 10) == EdgeMap(20, 20, 0.0));

    const auto once = boundary_zero_padding(e, 3);
    CHECK(boundary_zero_padding(once, 3) == once);
    for (int y = 3; y < 9; ++y) {
        for (int x = 3; x < 11; ++x) CHECK(once.at(y, x) == e.at(y, x));
    }
    CHECK_THROWS_AS(boundary_zero_padding(e, -1), Error);
}

}
