// Quaternion algebra, pose arithmetic, convex 2D geometry and
// ray-heightfield intersection. All pure functions; positions in cm.
#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <vector>

#include "scanlab/errors.hpp"
#include "scanlab/vec.hpp"

namespace scanlab {

// Unit quaternion {w,x,y,z}. Stored on the w >= 0 hemisphere (if w == 0 the
// first nonzero of x,y,z is positive) so that componentwise differences of
// nearby orientations stay small.
struct Quaternion {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    double dot(const Quaternion& o) const {
        return w * o.w + x * o.x + y * o.y + z * o.z;
    }
    Quaternion conjugate() const { return {w, -x, -y, -z}; }
    Quaternion operator-() const { return {-w, -x, -y, -z}; }
    bool operator==(const Quaternion&) const = default;

    // Hamilton product
    Quaternion operator*(const Quaternion& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }

    // Rotate a vector by this (unit) quaternion: v' = q v q*
    Vec3 rotate(Vec3 v) const {
        const Vec3 u{x, y, z};
        const Vec3 t = 2.0 * u.cross(v);
        return v + w * t + u.cross(t);
    }

    Vec3 x_axis() const { return rotate({1, 0, 0}); }
    Vec3 y_axis() const { return rotate({0, 1, 0}); }
    Vec3 z_axis() const { return rotate({0, 0, 1}); }
};

inline Quaternion hemisphere_align(Quaternion q) {
    bool flip = q.w < 0.0;
    if (q.w == 0.0) {
        if (q.x != 0.0)
            flip = q.x < 0.0;
        else if (q.y != 0.0)
            flip = q.y < 0.0;
        else
            flip = q.z < 0.0;
    }
    return flip ? -q : q;
}

inline Quaternion quat_normalize(Quaternion q) {
    const double n = q.norm();
    if (n <= 1e-12)
        throw ZeroNorm("quaternion norm " + std::to_string(n));
    return hemisphere_align({q.w / n, q.x / n, q.y / n, q.z / n});
}

inline bool is_unit(const Quaternion& q, double tol = 1e-6) {
    return std::abs(q.norm() - 1.0) <= tol;
}

inline void require_unit(const Quaternion& q, const char* who) {
    if (!is_unit(q))
        throw NotUnit(std::string(who) + ": |q| = " + std::to_string(q.norm()));
}

// Geodesic angle between two orientations, 2*arccos|<q1,q2>|, in [0, pi].
// Invariant under the q <-> -q double cover.
inline double quat_angle(const Quaternion& q1, const Quaternion& q2) {
    require_unit(q1, "quat_angle");
    require_unit(q2, "quat_angle");
    const double d = std::min(1.0, std::abs(q1.dot(q2)));
    return 2.0 * std::acos(d);
}

// Spherical linear interpolation along the shorter arc. Falls back to
// normalized lerp when the inputs are (anti)parallel within 1e-7.
inline Quaternion slerp(const Quaternion& q1, Quaternion q2, double t) {
    require_unit(q1, "slerp");
    require_unit(q2, "slerp");
    assert(t >= 0.0 && t <= 1.0);
    double d = q1.dot(q2);
    if (d < 0.0) {
        q2 = -q2;
        d = -d;
    }
    double a, b;
    if (d > 1.0 - 1e-7) {
        a = 1.0 - t;
        b = t;
    } else {
        const double theta = std::acos(std::min(1.0, d));
        const double s = std::sin(theta);
        a = std::sin((1.0 - t) * theta) / s;
        b = std::sin(t * theta) / s;
    }
    return quat_normalize({a * q1.w + b * q2.w, a * q1.x + b * q2.x,
                           a * q1.y + b * q2.y, a * q1.z + b * q2.z});
}

// Quaternion from orthonormal frame axes (columns of a rotation matrix),
// Shepperd's method for numerical robustness.
inline Quaternion quat_from_axes(Vec3 ex, Vec3 ey, Vec3 ez) {
    const double m00 = ex.x, m01 = ey.x, m02 = ez.x;
    const double m10 = ex.y, m11 = ey.y, m12 = ez.y;
    const double m20 = ex.z, m21 = ey.z, m22 = ez.z;
    const double tr = m00 + m11 + m22;
    Quaternion q;
    if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        q = {0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s};
    } else if (m00 > m11 && m00 > m22) {
        double s = std::sqrt(1.0 + m00 - m11 - m22) * 2.0;
        q = {(m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s};
    } else if (m11 > m22) {
        double s = std::sqrt(1.0 + m11 - m00 - m22) * 2.0;
        q = {(m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s};
    } else {
        double s = std::sqrt(1.0 + m22 - m00 - m11) * 2.0;
        q = {(m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s};
    }
    return quat_normalize(q);
}

// Rotation taking unit vector `from` onto unit vector `to` (shortest arc).
inline Quaternion quat_between(Vec3 from, Vec3 to) {
    const double d = std::clamp(from.dot(to), -1.0, 1.0);
    Vec3 axis = from.cross(to);
    if (axis.norm() < 1e-12) {
        if (d > 0.0)
            return {1, 0, 0, 0};
        // 180 degrees: any axis orthogonal to `from`
        axis = std::abs(from.x) < 0.9 ? from.cross({1, 0, 0})
                                      : from.cross({0, 1, 0});
        axis = axis.normalized();
        return quat_normalize({0.0, axis.x, axis.y, axis.z});
    }
    const double half = 0.5 * std::acos(d);
    axis = axis.normalized() * std::sin(half);
    return quat_normalize({std::cos(half), axis.x, axis.y, axis.z});
}

// Cartesian position (cm) plus unit orientation quaternion.
struct Pose {
    Vec3 position;
    Quaternion orientation;
    bool operator==(const Pose&) const = default;
};

struct Ray {
    Vec3 origin;
    Vec3 direction; // unit

    Vec3 at(double t) const { return origin + t * direction; }
};

// Convex counter-clockwise polygon in the scene x-y plane.
struct Polygon2D {
    std::vector<Vec2> vertices;
};

inline void validate_polygon(const Polygon2D& poly) {
    const auto& v = poly.vertices;
    if (v.size() < 3)
        throw Degenerate("polygon with " + std::to_string(v.size()) +
                         " vertices");
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = v[(i + 1) % n] - v[i];
        const Vec2 b = v[(i + 2) % n] - v[(i + 1) % n];
        if (a.x == 0.0 && a.y == 0.0)
            throw Degenerate("duplicate consecutive vertices");
        if (a.cross(b) < 0.0)
            throw Degenerate("polygon not convex CCW");
    }
}

// Andrew's monotone chain. Collinear boundary points are dropped, output is
// CCW starting from the lexicographically smallest vertex.
inline Polygon2D convex_hull(std::vector<Vec2> points) {
    constexpr double kEps = 1e-12;
    std::sort(points.begin(), points.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() < 3)
        throw Degenerate("need >= 3 distinct points");

    std::vector<Vec2> hull(2 * points.size());
    std::size_t k = 0;
    for (const Vec2& p : points) { // lower
        while (k >= 2 &&
               (hull[k - 1] - hull[k - 2]).cross(p - hull[k - 2]) <= kEps)
            --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = points.rbegin() + 1; it != points.rend(); ++it) { // upper
        while (k >= lower &&
               (hull[k - 1] - hull[k - 2]).cross(*it - hull[k - 2]) <= kEps)
            --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    if (hull.size() < 3)
        throw Degenerate("all points collinear");
    return Polygon2D{std::move(hull)};
}

// Inside-or-on-boundary test for convex CCW polygons.
inline bool point_in_polygon(Vec2 p, const Polygon2D& poly) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e = v[(i + 1) % n] - v[i];
        if (e.cross(p - v[i]) < -1e-12)
            return false;
    }
    return true;
}

// Shoelace area; positive for CCW polygons.
inline double polygon_area(const Polygon2D& poly) {
    const auto& v = poly.vertices;
    double twice = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        twice += v[i].cross(v[(i + 1) % v.size()]);
    return 0.5 * twice;
}

inline Vec2 polygon_centroid(const Polygon2D& poly) {
    const auto& v = poly.vertices;
    double twice = 0.0;
    Vec2 c{0, 0};
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i], b = v[(i + 1) % v.size()];
        const double w = a.cross(b);
        twice += w;
        c = c + (a + b) * w;
    }
    return c / (3.0 * twice);
}

// Clip the line p(s) = origin + s*dir against a convex CCW polygon
// (Cyrus-Beck). Returns the [smin, smax] parameter range, or nullopt if the
// line misses the polygon.
inline std::optional<std::pair<double, double>>
clip_line(const Polygon2D& poly, Vec2 origin, Vec2 dir) {
    double smin = -std::numeric_limits<double>::infinity();
    double smax = std::numeric_limits<double>::infinity();
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e = v[(i + 1) % n] - v[i];
        const double c0 = e.cross(origin - v[i]);
        const double c1 = e.cross(dir);
        if (std::abs(c1) < 1e-15) {
            if (c0 < 0.0)
                return std::nullopt;
            continue;
        }
        const double s = -c0 / c1;
        if (c1 > 0.0)
            smin = std::max(smin, s);
        else
            smax = std::min(smax, s);
    }
    if (smin > smax)
        return std::nullopt;
    return std::make_pair(smin, smax);
}

struct RectBounds {
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    bool contains(Vec2 p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

struct SurfaceHit {
    Vec3 point;
    Vec3 normal; // unit, positive z component
    double t;    // distance along the ray, cm
};

namespace detail {
// Intersect the ray with an axis-aligned slab [lo, hi] along one coordinate.
inline bool clip_slab(double o, double d, double lo, double hi, double& t0,
                      double& t1) {
    if (std::abs(d) < 1e-15)
        return o >= lo && o <= hi;
    double a = (lo - o) / d, b = (hi - o) / d;
    if (a > b)
        std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    return t0 <= t1;
}
} // namespace detail

// First intersection of a ray with the surface z = h(x,y), by fixed-step
// marching (step = half the heightfield cell) within the scene's bounding
// box plus 40 bisection refinements of the bracketing interval.
//
// Heightfield requirements: height(x,y), gradient(x,y) -> Vec2,
// bounds() -> RectBounds, min_height(), max_height(), march_cell().
template <typename Heightfield>
std::optional<SurfaceHit> ray_heightfield_intersect(const Ray& ray,
                                                    const Heightfield& field) {
    assert(std::abs(ray.direction.norm() - 1.0) <= 1e-9);
    const RectBounds bb = field.bounds();
    const double zpad = 1e-3;
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    if (!detail::clip_slab(ray.origin.x, ray.direction.x, bb.xmin, bb.xmax, t0, t1))
        return std::nullopt;
    if (!detail::clip_slab(ray.origin.y, ray.direction.y, bb.ymin, bb.ymax, t0, t1))
        return std::nullopt;
    if (!detail::clip_slab(ray.origin.z, ray.direction.z,
                           field.min_height() - zpad, field.max_height() + zpad,
                           t0, t1))
        return std::nullopt;
    if (t1 < 0.0)
        return std::nullopt;
    t0 = std::max(t0, 0.0);

    const double scale = std::max(bb.width(), bb.height());
    const double tol = 1e-6 * scale;
    const double step = 0.5 * field.march_cell();
    const auto signed_gap = [&](double t) {
        const Vec3 p = ray.at(t);
        return p.z - field.height(p.x, p.y);
    };

    double ta = t0;
    double fa = signed_gap(ta);
    if (std::abs(fa) <= tol) {
        // entered the box already on the surface
    } else if (fa < 0.0) {
        return std::nullopt; // enters below the surface; no crossing in view
    } else {
        bool bracketed = false;
        double tb = ta, fb = fa;
        while (ta < t1) {
            tb = std::min(ta + step, t1);
            fb = signed_gap(tb);
            if (fb <= tol) {
                bracketed = true;
                break;
            }
            if (tb >= t1)
                break;
            ta = tb;
            fa = fb;
        }
        if (!bracketed)
            return std::nullopt;
        for (int i = 0; i < 40; ++i) {
            const double tm = 0.5 * (ta + tb);
            if (signed_gap(tm) > 0.0)
                ta = tm;
            else
                tb = tm;
        }
        ta = 0.5 * (ta + tb);
    }

    const Vec3 p = ray.at(ta);
    const Vec2 g = field.gradient(p.x, p.y);
    const Vec3 n = Vec3{-g.x, -g.y, 1.0}.normalized();
    return SurfaceHit{{p.x, p.y, field.height(p.x, p.y)}, n, ta};
}

} // namespace scanlab
