#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vscene/geometry.hpp"

namespace vscene {

/// Inputs for the center hinge loss: predictions, ground-truth centers and a
/// scalar size per ground truth (the mean of the class extents).
struct CenterPredictions {
    std::vector<Point3> predicted;
    std::vector<Point3> ground_truth;
    std::vector<double> gt_sizes;
};

/// sum_i max(||C_gi - C_i|| - lambda * S_gi, 0) where C_gi is the nearest
/// ground-truth center to prediction i. The margin lambda * S_gi absorbs the
/// expected labeling error.
inline double hinge_center_loss(const CenterPredictions& cp, double lambda = 0.05) {
    if (cp.ground_truth.empty()) throw std::invalid_argument("hinge_center_loss: no ground truth");
    if (cp.ground_truth.size() != cp.gt_sizes.size()) {
        throw std::invalid_argument("hinge_center_loss: sizes do not match ground truth");
    }
    double total = 0.0;
    for (const Point3& c : cp.predicted) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < cp.ground_truth.size(); ++i) {
            const double d = distance(cp.ground_truth[i], c);
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        total += std::max(best - lambda * cp.gt_sizes[best_i], 0.0);
    }
    return total;
}

/// Symmetric Chamfer distance with squared Euclidean terms:
/// mean_a min_b ||a-b||^2 + mean_b min_a ||a-b||^2.
inline double chamfer_distance(const std::vector<Point3>& a, const std::vector<Point3>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("chamfer_distance: empty point set");
    const auto directed = [](const std::vector<Point3>& from, const std::vector<Point3>& to) {
        double sum = 0.0;
        for (const Point3& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const Point3& q : to) {
                const Point3 d = p - q;
                best = std::min(best, dot(d, d));
            }
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };
    return directed(a, b) + directed(b, a);
}

/// Focal alignment loss -sum_i (1 - p_i)^gamma * ln(p_i). Probabilities are
/// clamped to 1e-7 before the log.
inline double focal_alignment_loss(const std::vector<double>& p, double gamma = 3.0) {
    double total = 0.0;
    for (double pi : p) {
        pi = std::max(pi, 1e-7);
        total -= std::pow(1.0 - pi, gamma) * std::log(pi);
    }
    return total;
}

/// Objectness-weighted L2 alignment loss sum_ij s_ij * (1 - p_ij)^2 over
/// flattened B x N grids. Throws on shape mismatch.
inline double proposal_alignment_loss(const std::vector<double>& p,
                                      const std::vector<double>& objectness) {
    if (p.size() != objectness.size()) {
        throw std::invalid_argument("proposal_alignment_loss: shape mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        total += objectness[i] * (1.0 - p[i]) * (1.0 - p[i]);
    }
    return total;
}

/// Local KNN feature graph around a jittered center: per-feature vectors f_i
/// with coordinates c_i and neighbor count k.
struct LocalGraphInput {
    Point3 center;
    std::vector<Point3> coordinates;
    std::vector<std::vector<double>> features;
    std::size_t k = 16;
};

using FeatureMap = std::function<std::vector<double>(const std::vector<double>&)>;

inline std::vector<double> identity_map(const std::vector<double>& v) { return v; }

/// The pooled-feature kernel of the center refinement module: for each of the
/// k nearest feature points concatenate [f_i ; c_i - c], map through `inner`,
/// max-pool channel-wise, then map through `outer`. With identity maps this
/// is exactly the concat-and-max kernel.
inline std::vector<double> local_graph_feature(const LocalGraphInput& input,
                                               const FeatureMap& inner = identity_map,
                                               const FeatureMap& outer = identity_map) {
    if (input.coordinates.size() != input.features.size()) {
        throw std::invalid_argument("local_graph_feature: coordinates/features mismatch");
    }
    if (input.coordinates.size() < input.k) {
        throw std::invalid_argument("local_graph_feature: fewer than k feature points");
    }
    PointCloud cloud;
    cloud.points = input.coordinates;
    const auto nn = knn(input.center, cloud, input.k);

    std::vector<double> pooled;
    bool first = true;
    for (const std::size_t i : nn) {
        std::vector<double> concat = input.features[i];
        const Point3 rel = input.coordinates[i] - input.center;
        concat.push_back(rel.x);
        concat.push_back(rel.y);
        concat.push_back(rel.z);
        const std::vector<double> mapped = inner(concat);
        if (first) {
            pooled = mapped;
            first = false;
        } else {
            if (mapped.size() != pooled.size()) {
                throw std::invalid_argument("local_graph_feature: inconsistent feature widths");
            }
            for (std::size_t c = 0; c < pooled.size(); ++c) {
                pooled[c] = std::max(pooled[c], mapped[c]);
            }
        }
    }
    return outer(pooled);
}

/// KPS sampling with the same-instance constraint dropped: exactly the k
/// nearest cloud points to the object center.
inline std::vector<std::size_t> relaxed_kps_sample(const Point3& center, const PointCloud& cloud,
                                                   std::size_t k) {
    return knn(center, cloud, k);
}

/// Externally computed scalar terms plus the inputs of the analytic ones.
struct WeakDetectionInputs {
    double semantic_ce = 0.0;    // L_s
    double objectness_ce = 0.0;  // L_o
    CenterPredictions centers;   // drives L_c
    double lambda = 0.05;
    std::vector<Point3> votes;         // drives L_i (Chamfer)
    std::vector<Point3> vote_targets;
};

struct WeakDetectionLoss {
    double semantic = 0.0;
    double objectness = 0.0;
    double center = 0.0;
    double final_prediction = 0.0;  // L_f = L_s + L_o + L_c
    double intermediate = 0.0;      // L_i
    double total = 0.0;             // L_3 = L_f + L_i
};

/// L_3 = L_f + L_i with L_f = L_s + L_o + L_c; returns the full breakdown.
inline WeakDetectionLoss weak_detection_loss(const WeakDetectionInputs& in) {
    WeakDetectionLoss out;
    out.semantic = in.semantic_ce;
    out.objectness = in.objectness_ce;
    out.center = hinge_center_loss(in.centers, in.lambda);
    out.final_prediction = out.semantic + out.objectness + out.center;
    out.intermediate = chamfer_distance(in.votes, in.vote_targets);
    out.total = out.final_prediction + out.intermediate;
    return out;
}

}  // namespace vscene
