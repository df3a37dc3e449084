#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vscene/labels.hpp"

using namespace vscene;

namespace {

std::vector<GroundTruthBox> one_box(double ex, double ey, double ez) {
    return {{{1.0, 2.0, 3.0}, {ex, ey, ez}, "chair"}};
}

}  // namespace

TEST_CASE("zero error rate is the identity") {
    Rng rng(1);
    const auto labels = boxes_to_labels(one_box(2, 2, 2), 0.0, rng);
    REQUIRE(labels.size() == 1);
    REQUIRE(labels[0].center.x == 1.0);
    REQUIRE(labels[0].center.y == 2.0);
    REQUIRE(labels[0].center.z == 3.0);
    REQUIRE(labels[0].category == "chair");
}

TEST_CASE("jitter respects the per-axis bound") {
    Rng rng(2);
    const auto boxes = one_box(2, 2, 2);
    for (int i = 0; i < 10000; ++i) {
        const auto labels = boxes_to_labels(boxes, 0.5, rng);
        REQUIRE(std::abs(labels[0].center.x - 1.0) <= 1.0);
        REQUIRE(std::abs(labels[0].center.y - 2.0) <= 1.0);
        REQUIRE(std::abs(labels[0].center.z - 3.0) <= 1.0);
    }
}

TEST_CASE("empirical jitter maximum approaches the bound") {
    Rng rng(3);
    const auto boxes = one_box(1.5, 0.75, 0.5);
    double max_ratio = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const auto labels = boxes_to_labels(boxes, 0.1, rng);
        max_ratio = std::max(max_ratio, std::abs(labels[0].center.x - 1.0) / 1.5);
        max_ratio = std::max(max_ratio, std::abs(labels[0].center.y - 2.0) / 0.75);
        max_ratio = std::max(max_ratio, std::abs(labels[0].center.z - 3.0) / 0.5);
    }
    REQUIRE(max_ratio <= 0.1);
    REQUIRE(max_ratio >= 0.1 - 0.005);
}

TEST_CASE("error rate outside [0,1] is rejected") {
    Rng rng(4);
    REQUIRE_THROWS_AS(boxes_to_labels(one_box(1, 1, 1), -0.1, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(boxes_to_labels(one_box(1, 1, 1), 1.5, rng), std::invalid_argument);
}

TEST_CASE("jitter is deterministic under a fixed seed") {
    const auto boxes = one_box(1, 1, 1);
    Rng a(42), b(42);
    const auto la = boxes_to_labels(boxes, 0.3, a);
    const auto lb = boxes_to_labels(boxes, 0.3, b);
    REQUIRE(la[0].center.x == lb[0].center.x);
    REQUIRE(la[0].center.y == lb[0].center.y);
    REQUIRE(la[0].center.z == lb[0].center.z);
}

TEST_CASE("jitter_labels uses category mean extents") {
    const std::map<std::string, std::array<double, 3>> sizes{{"table", {1.5, 0.8, 0.72}}};
    const std::vector<WeakLabel> labels{{{0, 0, 0}, "table"}};

    Rng rng(5);
    const auto same = jitter_labels(labels, sizes, 0.0, rng);
    REQUIRE(same[0].center.x == 0.0);

    for (int i = 0; i < 2000; ++i) {
        const auto jittered = jitter_labels(labels, sizes, 0.1, rng);
        REQUIRE(std::abs(jittered[0].center.x) <= 0.15);
        REQUIRE(std::abs(jittered[0].center.y) <= 0.08);
        REQUIRE(std::abs(jittered[0].center.z) <= 0.072);
    }

    const std::vector<WeakLabel> unknown{{{0, 0, 0}, "spaceship"}};
    REQUIRE_THROWS_AS(jitter_labels(unknown, sizes, 0.1, rng), std::invalid_argument);
}

TEST_CASE("ball jitter stays inside the scaled ball") {
    Rng rng(6);
    const auto boxes = one_box(2, 1, 0.5);
    for (int i = 0; i < 5000; ++i) {
        const auto labels = boxes_to_labels(boxes, 0.2, rng, JitterLaw::UniformBall);
        const double nx = (labels[0].center.x - 1.0) / (0.2 * 2.0);
        const double ny = (labels[0].center.y - 2.0) / (0.2 * 1.0);
        const double nz = (labels[0].center.z - 3.0) / (0.2 * 0.5);
        REQUIRE(nx * nx + ny * ny + nz * nz <= 1.0 + 1e-12);
    }
}
