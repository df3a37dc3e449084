#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vscene/geometry.hpp"
#include "vscene/rng.hpp"

namespace vscene {

/// Position-level annotation: an object center plus its semantic class.
struct WeakLabel {
    Point3 center;
    std::string category;
};

struct GroundTruthBox {
    Point3 center;
    std::array<double, 3> extents{};  // l, w, h
    std::string category;
};

/// How the jitter offset is drawn. PerAxisUniform draws each axis
/// independently from [-rate * extent, +rate * extent]; UniformBall draws a
/// point uniformly in the unit ball and scales it by rate * extents.
enum class JitterLaw { PerAxisUniform, UniformBall };

namespace detail {

inline Point3 jitter_offset(const std::array<double, 3>& extents, double rate, Rng& rng,
                            JitterLaw law) {
    if (law == JitterLaw::PerAxisUniform) {
        return {(2.0 * rng.uniform() - 1.0) * rate * extents[0],
                (2.0 * rng.uniform() - 1.0) * rate * extents[1],
                (2.0 * rng.uniform() - 1.0) * rate * extents[2]};
    }
    for (;;) {
        const Point3 u{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0,
                       2.0 * rng.uniform() - 1.0};
        if (dot(u, u) <= 1.0) {
            return {u.x * rate * extents[0], u.y * rate * extents[1], u.z * rate * extents[2]};
        }
    }
}

}  // namespace detail

/// Degrades ground-truth boxes into position-level labels by jittering each
/// center within `error_rate` of the box size.
inline std::vector<WeakLabel> boxes_to_labels(const std::vector<GroundTruthBox>& boxes,
                                              double error_rate, Rng& rng,
                                              JitterLaw law = JitterLaw::PerAxisUniform) {
    if (!(error_rate >= 0.0 && error_rate <= 1.0)) {
        throw std::invalid_argument("error_rate must be in [0, 1]");
    }
    std::vector<WeakLabel> out;
    out.reserve(boxes.size());
    for (const GroundTruthBox& box : boxes) {
        const Point3 d = detail::jitter_offset(box.extents, error_rate, rng, law);
        out.push_back({box.center + d, box.category});
    }
    return out;
}

/// Jitters existing labels using per-category mean extents (the source-domain
/// noise used to train center refinement). Unknown categories are an error.
inline std::vector<WeakLabel> jitter_labels(
    const std::vector<WeakLabel>& labels,
    const std::map<std::string, std::array<double, 3>>& sizes, double error_rate, Rng& rng,
    JitterLaw law = JitterLaw::PerAxisUniform) {
    if (!(error_rate >= 0.0 && error_rate <= 1.0)) {
        throw std::invalid_argument("error_rate must be in [0, 1]");
    }
    std::vector<WeakLabel> out;
    out.reserve(labels.size());
    for (const WeakLabel& label : labels) {
        const auto it = sizes.find(label.category);
        if (it == sizes.end()) throw std::invalid_argument("unknown category: " + label.category);
        const Point3 d = detail::jitter_offset(it->second, error_rate, rng, law);
        out.push_back({label.center + d, label.category});
    }
    return out;
}

}  // namespace vscene
