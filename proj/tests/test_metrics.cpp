#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "digitsum/metrics.hpp"
#include "digitsum/rng.hpp"

using namespace digitsum;

TEST_CASE("rounding accuracy on the paper's example predictions") {
    // (prediction, label, correct under rounding)
    CHECK(rounding_correct(11.1652, 11));
    CHECK(rounding_correct(8.6814, 9));
    CHECK(rounding_correct(5.99666, 6));
    CHECK(rounding_correct(10.3215, 10));
    CHECK_FALSE(rounding_correct(4.49, 5));
    CHECK(rounding_correct(4.49, 4));
    // Half rounds away from zero.
    CHECK(rounding_correct(4.5, 5));
    CHECK(rounding_correct(-0.5, -1));
}

TEST_CASE("floor/ceiling accuracy on the paper's example predictions") {
    CHECK(floor_ceiling_correct(8.6814, 9));    // ceil
    CHECK(floor_ceiling_correct(10.0746, 10));  // floor
    CHECK(floor_ceiling_correct(9.84883, 10));  // ceil
    CHECK_FALSE(floor_ceiling_correct(6.2, 8));
    CHECK_FALSE(floor_ceiling_correct(6.2, 5));
}

TEST_CASE("within-one accuracy") {
    CHECK(within_one_correct(5.99666, 6));
    CHECK(within_one_correct(4.23593, 4));
    CHECK(within_one_correct(5.2, 6));   // rounds to 5, |5-6| = 1
    CHECK_FALSE(within_one_correct(9.0, 11));
}

TEST_CASE("aggregate metrics match hand counts") {
    const std::vector<double> preds = {11.1652, 8.6814, 4.49, 6.2};
    const std::vector<int> labels = {11, 9, 5, 8};
    // round: correct, correct, wrong, wrong -> 0.5
    CHECK(accuracy_rounding(preds, labels) == 0.5);
    // floorceil: correct, correct, correct(4.49 floor 4? no label 5 -> ceil 5 yes), wrong
    CHECK(accuracy_floor_ceiling(preds, labels) == 0.75);
    // pm1: all but 6.2-vs-8 -> 0.75
    CHECK(accuracy_within_one(preds, labels) == 0.75);
}

TEST_CASE("length mismatch is rejected") {
    const std::vector<double> p = {1.0};
    const std::vector<int> l = {1, 2};
    CHECK_THROWS_AS(accuracy_rounding(p, l), LengthMismatch);
    CHECK_THROWS_AS(accuracy_floor_ceiling(p, l), LengthMismatch);
    CHECK_THROWS_AS(accuracy_within_one(p, l), LengthMismatch);
}

TEST_CASE("metric ordering holds on random vectors and matches brute force") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.next_below(40);
        std::vector<double> preds(n);
        std::vector<std::uint8_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = rng.next_unit() * 22.0 - 2.0;  // deliberately off-range too
            labels[i] = std::uint8_t(rng.next_below(19));
        }
        const double r = accuracy_rounding(preds, labels);
        const double fc = accuracy_floor_ceiling(preds, labels);
        const double p1 = accuracy_within_one(preds, labels);

        // Brute-force recount straight from the definitions.
        std::size_t cr = 0, cfc = 0, cp1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double pr = preds[i];
            const long lab = labels[i];
            const long rounded = std::lround(pr);
            if (rounded == lab) ++cr;
            if (long(std::floor(pr)) == lab || long(std::ceil(pr)) == lab) ++cfc;
            if (std::labs(rounded - lab) <= 1) ++cp1;
        }
        REQUIRE(r == double(cr) / double(n));
        REQUIRE(fc == double(cfc) / double(n));
        REQUIRE(p1 == double(cp1) / double(n));

        REQUIRE(r <= fc);
        REQUIRE(fc <= p1);
    }
}
