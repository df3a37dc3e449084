#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace vscene {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec2 xy() const { return {x, y}; }
};

inline Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, Point3 p) { return {s * p.x, s * p.y, s * p.z}; }
inline double dot(Point3 a, Point3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Point3 p) { return std::sqrt(dot(p, p)); }
inline double distance(Point3 a, Point3 b) { return norm(a - b); }

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Oriented rectangle in the XY plane.
///
/// `length` is the extent along direction `theta` (degrees), `width` the
/// extent along `theta + 90`. Canonical form keeps theta in [0, 90); the
/// quarter-turn fold swaps the extents so the denoted region is preserved
/// exactly. For min-area rectangles of typical (near-axis-aligned) inputs
/// the longer side ends up as `length`.
struct Rect {
    double cx = 0.0;
    double cy = 0.0;
    double length = 0.0;
    double width = 0.0;
    double theta = 0.0;

    double area() const { return length * width; }
    Vec2 center() const { return {cx, cy}; }

    /// Unit direction of the `length` side.
    Vec2 axis() const {
        const double t = deg_to_rad(theta);
        return {std::cos(t), std::sin(t)};
    }

    /// Corners in counterclockwise order.
    std::array<Vec2, 4> corners() const {
        const Vec2 u = axis();
        const Vec2 v{-u.y, u.x};
        const Vec2 c{cx, cy};
        const Vec2 du = 0.5 * length * u;
        const Vec2 dv = 0.5 * width * v;
        return {c + du + dv, c - du + dv, c - du - dv, c + du - dv};
    }

    bool contains(Vec2 p, double slack = 0.0) const {
        const Vec2 u = axis();
        const Vec2 d = p - Vec2{cx, cy};
        const double a = dot(d, u);
        const double b = cross(u, d);  // component along theta + 90
        return std::abs(a) <= 0.5 * length + slack && std::abs(b) <= 0.5 * width + slack;
    }

    /// Nearest point inside the rectangle (used to confine supportees).
    Vec2 clamp(Vec2 p) const {
        const Vec2 u = axis();
        const Vec2 v{-u.y, u.x};
        const Vec2 d = p - Vec2{cx, cy};
        const double a = std::clamp(dot(d, u), -0.5 * length, 0.5 * length);
        const double b = std::clamp(dot(d, v), -0.5 * width, 0.5 * width);
        return Vec2{cx, cy} + a * u + b * v;
    }
};

/// Builds a canonical Rect from any oriented description: `ext_along` is the
/// extent along `theta_deg` and `ext_perp` the perpendicular one. Theta is
/// folded into [0, 90) by quarter turns, swapping extents as needed, so the
/// rectangle itself is unchanged.
inline Rect make_rect(double cx, double cy, double ext_along, double ext_perp, double theta_deg) {
    double t = std::fmod(theta_deg, 180.0);
    if (t < 0.0) t += 180.0;
    if (t >= 90.0) {
        t -= 90.0;
        std::swap(ext_along, ext_perp);
    }
    return Rect{cx, cy, ext_along, ext_perp, t};
}

/// Convex hull in counterclockwise order (Andrew monotone chain).
/// Collinear boundary points are excluded; degenerate inputs yield 1- or
/// 2-vertex hulls. Throws on empty input.
inline std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts) {
    if (pts.empty()) throw std::invalid_argument("empty point set");
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;

    std::vector<Vec2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {  // lower chain
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {  // upper chain
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);  // last point equals the first
    return hull;
}

/// Shoelace area of a simple polygon; accepts degenerate 1- or 2-vertex
/// polygons (area 0).
inline double polygon_area(const std::vector<Vec2>& poly) {
    if (poly.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        twice += cross(poly[j], poly[i]);
    }
    return 0.5 * std::abs(twice);
}

/// Minimum-area enclosing rectangle via rotating calipers over hull edges:
/// one rectangle edge is collinear with a hull edge. Degenerate inputs
/// (single point, collinear set) produce zero-extent rectangles.
inline Rect min_area_rect(const std::vector<Vec2>& pts) {
    const std::vector<Vec2> hull = convex_hull_2d(pts);  // throws on empty
    if (hull.size() == 1) return Rect{hull[0].x, hull[0].y, 0.0, 0.0, 0.0};
    if (hull.size() == 2) {
        const Vec2 d = hull[1] - hull[0];
        const Vec2 mid = 0.5 * (hull[0] + hull[1]);
        return make_rect(mid.x, mid.y, norm(d), 0.0, rad_to_deg(std::atan2(d.y, d.x)));
    }

    double best_area = std::numeric_limits<double>::infinity();
    Rect best;
    for (std::size_t i = 0, j = hull.size() - 1; i < hull.size(); j = i++) {
        const Vec2 e = hull[i] - hull[j];
        const double len = norm(e);
        if (len < 1e-300) continue;
        const Vec2 u{e.x / len, e.y / len};
        const Vec2 v{-u.y, u.x};
        double umin = std::numeric_limits<double>::infinity(), umax = -umin;
        double vmin = umin, vmax = -umin;
        for (const Vec2& p : hull) {
            const double a = dot(p, u), b = dot(p, v);
            umin = std::min(umin, a);
            umax = std::max(umax, a);
            vmin = std::min(vmin, b);
            vmax = std::max(vmax, b);
        }
        const double area = (umax - umin) * (vmax - vmin);
        if (area < best_area) {
            best_area = area;
            const double cu = 0.5 * (umin + umax);
            const double cv = 0.5 * (vmin + vmax);
            best = make_rect(cu * u.x + cv * v.x, cu * u.y + cv * v.y,
                             umax - umin, vmax - vmin, rad_to_deg(std::atan2(u.y, u.x)));
        }
    }
    return best;
}

struct OverlapResult {
    bool overlapping = false;
    double area = 0.0;
};

namespace detail {

// Sutherland-Hodgman: clip a convex CCW polygon by the half-plane to the
// left of the directed edge a->b.
inline std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, Vec2 a, Vec2 b) {
    std::vector<Vec2> out;
    out.reserve(poly.size() + 1);
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = poly[i];
        const Vec2 q = poly[(i + 1) % n];
        const double sp = cross(b - a, p - a);
        const double sq = cross(b - a, q - a);
        if (sp >= 0.0) out.push_back(p);
        if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) {
            const double t = sp / (sp - sq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

}  // namespace detail

/// Exact intersection area of two oriented rectangles (convex polygon
/// clipping); `overlapping` is true iff the area exceeds 1e-8 m^2.
/// Arguments are ordered internally so the result is exactly symmetric.
inline OverlapResult rects_overlap(const Rect& a, const Rect& b) {
    const auto key = [](const Rect& r) {
        return std::array<double, 5>{r.cx, r.cy, r.length, r.width, r.theta};
    };
    const Rect& first = key(a) <= key(b) ? a : b;
    const Rect& second = key(a) <= key(b) ? b : a;
    const auto ca = first.corners();
    std::vector<Vec2> poly(ca.begin(), ca.end());
    const auto cb = second.corners();
    for (std::size_t i = 0; i < 4 && !poly.empty(); ++i) {
        poly = detail::clip_halfplane(poly, cb[i], cb[(i + 1) % 4]);
    }
    const double area = polygon_area(poly);
    return {area > 1e-8, area};
}

struct PointCloud {
    std::vector<Point3> points;
    std::vector<Point3> normals;  // empty, or unit vectors with one entry per point

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_normals() const { return !normals.empty(); }
};

/// Exact k-nearest-neighbor queries over a fixed point set. Ties are broken
/// by lower point index.
class KdTree3 {
public:
    /// The tree keeps a reference to `pts`; the vector must outlive the tree.
    explicit KdTree3(const std::vector<Point3>& pts) : pts_(pts) {
        index_.resize(pts.size());
        axes_.assign(pts.size(), 0);
        for (std::size_t i = 0; i < pts.size(); ++i) index_[i] = i;
        if (!pts_.empty()) build(0, pts_.size());
    }

    std::size_t size() const { return pts_.size(); }

    /// Indices of the k nearest points, sorted by (distance, index).
    std::vector<std::size_t> nearest(const Point3& q, std::size_t k) const {
        if (k == 0) return {};
        if (k > pts_.size()) throw std::invalid_argument("knn: k exceeds cloud size");
        std::vector<std::pair<double, std::size_t>> heap;  // max-heap on (d2, index)
        heap.reserve(k + 1);
        search(0, pts_.size(), q, k, heap);
        std::sort_heap(heap.begin(), heap.end());
        std::vector<std::size_t> out(heap.size());
        for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].second;
        return out;
    }

private:
    void build(std::size_t lo, std::size_t hi) {
        if (hi - lo <= 1) return;
        const int axis = widest_axis(lo, hi);
        const std::size_t mid = (lo + hi) / 2;
        std::nth_element(index_.begin() + lo, index_.begin() + mid, index_.begin() + hi,
                         [&](std::size_t a, std::size_t b) {
                             const double ca = coord(pts_[a], axis), cb = coord(pts_[b], axis);
                             return ca < cb || (ca == cb && a < b);
                         });
        axes_[mid] = static_cast<std::uint8_t>(axis);
        build(lo, mid);
        build(mid + 1, hi);
    }

    int widest_axis(std::size_t lo, std::size_t hi) const {
        Point3 mn = pts_[index_[lo]], mx = mn;
        for (std::size_t i = lo; i < hi; ++i) {
            const Point3& p = pts_[index_[i]];
            mn = {std::min(mn.x, p.x), std::min(mn.y, p.y), std::min(mn.z, p.z)};
            mx = {std::max(mx.x, p.x), std::max(mx.y, p.y), std::max(mx.z, p.z)};
        }
        const double dx = mx.x - mn.x, dy = mx.y - mn.y, dz = mx.z - mn.z;
        if (dx >= dy && dx >= dz) return 0;
        return dy >= dz ? 1 : 2;
    }

    static double coord(const Point3& p, int axis) {
        return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
    }

    void search(std::size_t lo, std::size_t hi, const Point3& q, std::size_t k,
                std::vector<std::pair<double, std::size_t>>& heap) const {
        if (lo >= hi) return;
        const std::size_t mid = (lo + hi) / 2;
        const std::size_t idx = index_[mid];
        const Point3& p = pts_[idx];
        const double dx = q.x - p.x, dy = q.y - p.y, dz = q.z - p.z;
        consider({dx * dx + dy * dy + dz * dz, idx}, k, heap);
        if (hi - lo == 1) return;

        const int axis = axes_[mid];
        const double delta = coord(q, axis) - coord(p, axis);
        const std::size_t first_lo = delta < 0.0 ? lo : mid + 1;
        const std::size_t first_hi = delta < 0.0 ? mid : hi;
        const std::size_t second_lo = delta < 0.0 ? mid + 1 : lo;
        const std::size_t second_hi = delta < 0.0 ? hi : mid;
        search(first_lo, first_hi, q, k, heap);
        // Equal axis distances must still be visited so index tie-breaks stay exact.
        if (heap.size() < k || delta * delta <= heap.front().first) {
            search(second_lo, second_hi, q, k, heap);
        }
    }

    static void consider(std::pair<double, std::size_t> cand, std::size_t k,
                         std::vector<std::pair<double, std::size_t>>& heap) {
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end());
        }
    }

    const std::vector<Point3>& pts_;
    std::vector<std::size_t> index_;
    std::vector<std::uint8_t> axes_;
};

/// Exact k nearest cloud points to `query` by Euclidean distance, ties by
/// lower index. Throws if k exceeds the cloud size.
inline std::vector<std::size_t> knn(const Point3& query, const PointCloud& cloud, std::size_t k) {
    if (k > cloud.size()) throw std::invalid_argument("knn: k exceeds cloud size");
    KdTree3 tree(cloud.points);
    return tree.nearest(query, k);
}

namespace detail {

// Eigen decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
// Returns eigenvalues (ascending) and matching unit eigenvectors.
struct Eigen3 {
    std::array<double, 3> values;
    std::array<Point3, 3> vectors;
};

inline Eigen3 symmetric_eigen3(std::array<std::array<double, 3>, 3> a) {
    std::array<std::array<double, 3>, 3> v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double phi = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                const double c = std::cos(phi), s = std::sin(phi);
                for (int i = 0; i < 3; ++i) {
                    const double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (int i = 0; i < 3; ++i) {
                    const double api = a[p][i], aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for (int i = 0; i < 3; ++i) {
                    const double vip = v[i][p], viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    Eigen3 out;
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] < a[j][j]; });
    for (int i = 0; i < 3; ++i) {
        out.values[i] = a[order[i]][order[i]];
        out.vectors[i] = {v[0][order[i]], v[1][order[i]], v[2][order[i]]};
    }
    return out;
}

}  // namespace detail

/// Per-point normals as the least eigenvector of the covariance over each
/// point's k nearest neighbors (the point itself excluded). Signs are fixed
/// so the z component is nonnegative. Requires at least k+1 points.
inline PointCloud estimate_normals(const PointCloud& cloud, std::size_t k = 16) {
    if (cloud.size() < k + 1) {
        throw std::invalid_argument("estimate_normals: need at least k+1 points");
    }
    KdTree3 tree(cloud.points);
    PointCloud out;
    out.points = cloud.points;
    out.normals.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto nn = tree.nearest(cloud.points[i], k + 1);
        nn.erase(std::remove(nn.begin(), nn.end(), i), nn.end());
        nn.resize(k);

        Point3 mean{};
        for (std::size_t j : nn) mean = mean + cloud.points[j];
        mean = (1.0 / static_cast<double>(k)) * mean;
        std::array<std::array<double, 3>, 3> cov{};
        for (std::size_t j : nn) {
            const Point3 d = cloud.points[j] - mean;
            const double c[3] = {d.x, d.y, d.z};
            for (int r = 0; r < 3; ++r)
                for (int s = 0; s < 3; ++s) cov[r][s] += c[r] * c[s];
        }
        Point3 n = detail::symmetric_eigen3(cov).vectors[0];
        const double len = norm(n);
        n = len > 0.0 ? (1.0 / len) * n : Point3{0, 0, 1};
        if (n.z < 0.0) n = -1.0 * n;
        out.normals[i] = n;
    }
    return out;
}

struct KMeansResult {
    std::vector<int> assignment;  // one cluster index per input point
    std::vector<Vec2> centroids;
    int iterations = 0;
};

/// Lloyd's algorithm in 2D. Stops when assignments are stable or after 100
/// iterations. With `initial` given, those centroids are used verbatim
/// (cluster j corresponds to initial[j]); otherwise farthest-point seeding
/// from points[0] makes the result deterministic.
inline KMeansResult kmeans_2d(const std::vector<Vec2>& pts, std::size_t k,
                              const std::vector<Vec2>* initial = nullptr) {
    if (k == 0 || k > pts.size()) throw std::invalid_argument("kmeans_2d: bad cluster count");
    std::vector<Vec2> centroids;
    if (initial) {
        if (initial->size() != k) throw std::invalid_argument("kmeans_2d: bad initial centroids");
        centroids = *initial;
    } else {
        centroids.push_back(pts[0]);
        std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
        while (centroids.size() < k) {
            std::size_t far = 0;
            double best = -1.0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const Vec2 d = pts[i] - centroids.back();
                d2[i] = std::min(d2[i], dot(d, d));
                if (d2[i] > best) {
                    best = d2[i];
                    far = i;
                }
            }
            centroids.push_back(pts[far]);
        }
    }

    KMeansResult res;
    res.assignment.assign(pts.size(), -1);
    res.centroids = std::move(centroids);
    for (res.iterations = 0; res.iterations < 100; ++res.iterations) {
        bool changed = false;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const Vec2 d = pts[i] - res.centroids[c];
                const double dd = dot(d, d);
                if (dd < best_d) {
                    best_d = dd;
                    best = static_cast<int>(c);
                }
            }
            if (res.assignment[i] != best) {
                res.assignment[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        std::vector<Vec2> sum(k);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            sum[res.assignment[i]] = sum[res.assignment[i]] + pts[i];
            ++count[res.assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] > 0) res.centroids[c] = (1.0 / static_cast<double>(count[c])) * sum[c];
        }
    }
    return res;
}

}  // namespace vscene
