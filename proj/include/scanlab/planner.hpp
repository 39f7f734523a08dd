// Scanning-path generation: Gaussian target-region sampling, boustrophedon
// raster coverage of the hull, projection onto the surface, and smooth
// offset pose trajectories (centripetal Catmull-Rom + slerp).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include <json.hpp>

#include "scanlab/errors.hpp"
#include "scanlab/geometry.hpp"
#include "scanlab/rng.hpp"
#include "scanlab/scene.hpp"

namespace scanlab {

struct Mat2 {
    // row-major [[a, b], [c, d]]
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
};

// Lower-triangular Cholesky factor {l00, l10, l11}; throws NotSPD.
inline std::array<double, 3> cholesky_spd(const Mat2& m) {
    if (std::abs(m.b - m.c) > 1e-9 * (std::abs(m.b) + std::abs(m.d) + 1.0))
        throw NotSPD("covariance not symmetric");
    if (m.a <= 0.0 || m.a * m.d - m.b * m.c <= 0.0)
        throw NotSPD("covariance not positive definite");
    const double l00 = std::sqrt(m.a);
    const double l10 = m.b / l00;
    const double rem = m.d - l10 * l10;
    if (rem <= 0.0)
        throw NotSPD("covariance not positive definite");
    return {l00, l10, std::sqrt(rem)};
}

struct TargetRegion {
    Polygon2D hull; // CCW, scene x-y plane, cm
    std::uint64_t sample_seed = 0;
    Vec2 gaussian_mean;
    Mat2 gaussian_cov;
};

struct PlannerParams {
    double spacing = 0.8;  // raster line and in-line waypoint spacing, cm
    double d_offset = 3.0; // probe-to-surface standoff, cm
    double step_len = 0.1; // trajectory resampling step, cm
    int region_points = 24;
};

// Gaussian cloud -> clip to bounds -> convex hull. Regions with area < 1 cm^2
// or > 25% of the scene are rejected and resampled (<= 100 retries).
inline TargetRegion sample_target_region(std::uint64_t seed,
                                         const SurfaceScene& scene, Vec2 mean,
                                         const Mat2& cov, int n_points) {
    if (n_points < 8)
        throw BadParams("need at least 8 sample points");
    if (!scene.bounds().contains(mean))
        throw BadParams("region mean outside scene bounds");
    const auto L = cholesky_spd(cov);
    const RectBounds bb = scene.bounds();

    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        std::vector<Vec2> pts;
        pts.reserve(static_cast<std::size_t>(n_points));
        for (int i = 0; i < n_points; ++i) {
            const double z0 = rng.gaussian(), z1 = rng.gaussian();
            Vec2 p{mean.x + L[0] * z0, mean.y + L[1] * z0 + L[2] * z1};
            p.x = std::clamp(p.x, bb.xmin, bb.xmax);
            p.y = std::clamp(p.y, bb.ymin, bb.ymax);
            pts.push_back(p);
        }
        try {
            Polygon2D hull = convex_hull(pts);
            const double area = polygon_area(hull);
            if (area < 1.0 || area > 0.25 * bb.area())
                continue;
            return TargetRegion{std::move(hull), seed, mean, cov};
        } catch (const Degenerate&) {
            continue;
        }
    }
    throw RegionSamplingFailed("no acceptable region in 100 attempts");
}

namespace detail {
// Unit eigenvector of the larger eigenvalue of the symmetric matrix
// [[a, b], [b, c]]; falls back to world x on a (near-)isotropic spectrum.
inline Vec2 principal_axis(double a, double b, double c) {
    const double half_gap = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    if (2.0 * half_gap < 1e-9)
        return {1.0, 0.0};
    const double lmax = 0.5 * (a + c) + half_gap;
    Vec2 u{b, lmax - a};
    if (u.norm() < 1e-12)
        u = {lmax - c, b};
    if (u.norm() < 1e-12)
        u = a >= c ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
    u = u / u.norm();
    // deterministic sign
    if (u.x < 0.0 || (std::abs(u.x) < 1e-12 && u.y < 0.0))
        u = u * -1.0;
    return u;
}
} // namespace detail

// Boustrophedon raster over the hull: scan lines parallel to the hull's
// principal axis, `spacing` apart and centered across the hull's extent,
// alternating direction; per-line waypoints every `spacing` plus both
// clipped endpoints. Degenerate hulls (narrower than spacing both ways)
// yield the single centroid waypoint.
inline std::vector<Vec2> plan_raster_path(const TargetRegion& region,
                                          double spacing) {
    if (spacing <= 0.0)
        throw BadParams("spacing must be positive");
    const auto& verts = region.hull.vertices;
    Vec2 m{0, 0};
    for (const Vec2& v : verts)
        m = m + v;
    m = m / static_cast<double>(verts.size());
    double ca = 0, cb = 0, cc = 0;
    for (const Vec2& v : verts) {
        const Vec2 d = v - m;
        ca += d.x * d.x;
        cb += d.x * d.y;
        cc += d.y * d.y;
    }
    const double n = static_cast<double>(verts.size());
    const Vec2 u = detail::principal_axis(ca / n, cb / n, cc / n);
    const Vec2 v{-u.y, u.x};

    double umin = verts[0].dot(u), umax = umin;
    double vmin = verts[0].dot(v), vmax = vmin;
    for (const Vec2& p : verts) {
        umin = std::min(umin, p.dot(u));
        umax = std::max(umax, p.dot(u));
        vmin = std::min(vmin, p.dot(v));
        vmax = std::max(vmax, p.dot(v));
    }
    if (umax - umin < spacing && vmax - vmin < spacing)
        return {polygon_centroid(region.hull)};

    const int nlines =
        static_cast<int>(std::floor((vmax - vmin) / spacing + 1e-9)) + 1;
    const double v0 = vmin + 0.5 * ((vmax - vmin) - (nlines - 1) * spacing);

    std::vector<Vec2> waypoints;
    for (int k = 0; k < nlines; ++k) {
        const Vec2 line_origin = (v0 + k * spacing) * v;
        const auto span = clip_line(region.hull, line_origin, u);
        if (!span)
            continue;
        auto [smin, smax] = *span;
        std::vector<Vec2> line;
        for (double s = smin; s < smax - 1e-9; s += spacing)
            line.push_back(line_origin + s * u);
        line.push_back(line_origin + smax * u);
        if (k % 2 == 1)
            std::reverse(line.begin(), line.end());
        for (const Vec2& p : line)
            if (waypoints.empty() || (p - waypoints.back()).norm() > 1e-9)
                waypoints.push_back(p);
    }
    if (waypoints.empty())
        waypoints.push_back(polygon_centroid(region.hull));
    return waypoints;
}

struct SurfaceSample {
    Vec3 point;
    Vec3 normal;
};

// Vertical drop of each 2D waypoint onto the surface via the ray marcher;
// output order matches input order.
inline std::vector<SurfaceSample>
project_waypoints(const std::vector<Vec2>& waypoints2d,
                  const SurfaceScene& scene) {
    std::vector<SurfaceSample> out;
    out.reserve(waypoints2d.size());
    const double z0 = scene.max_height() + 1.0;
    for (const Vec2& w : waypoints2d) {
        if (!scene.bounds().contains(w))
            throw OutOfBounds("waypoint outside scene bounds");
        const Ray ray{{w.x, w.y, z0}, {0.0, 0.0, -1.0}};
        const auto hit = ray_heightfield_intersect(ray, scene);
        if (!hit)
            throw ProjectionMiss("vertical ray missed the heightfield");
        out.push_back({hit->point, hit->normal});
    }
    return out;
}

struct ScanPath {
    std::vector<Pose> waypoints; // world frame, step_len apart
    double arc_length = 0.0;     // cm
    TargetRegion region;
    // key poses (pre-interpolation), kept for offset/perpendicularity checks
    std::vector<Pose> key_poses;
    std::vector<SurfaceSample> key_surface;
    double d_offset = 0.0;
    double step_len = 0.0;
};

namespace detail {

// Tool orientation at a key: forward axis (-z of the tool frame) onto the
// inward surface direction, tool x aligned with the horizontal travel
// direction (world x when travel is within 1 degree of the normal axis).
inline Quaternion key_orientation(Vec3 normal, Vec3 travel) {
    const Vec3 zt = normal; // forward = -z_tool = -normal
    Vec3 hint{travel.x, travel.y, 0.0};
    const double cos1deg = std::cos(std::numbers::pi / 180.0);
    if (travel.norm() < 1e-12 ||
        std::abs(travel.normalized().dot(normal)) > cos1deg ||
        hint.norm() < 1e-12)
        hint = {1.0, 0.0, 0.0};
    Vec3 xt = hint - hint.dot(zt) * zt;
    if (xt.norm() < 1e-9) {
        hint = {0.0, 1.0, 0.0};
        xt = hint - hint.dot(zt) * zt;
    }
    xt = xt.normalized();
    const Vec3 yt = zt.cross(xt);
    return quat_from_axes(xt, yt, zt);
}

// Centripetal Catmull-Rom (Barry-Goldman) through p1..p2 with neighbors
// p0, p3; u in [0, 1] maps onto the [t1, t2] knot interval.
inline Vec3 catmull_rom(Vec3 p0, Vec3 p1, Vec3 p2, Vec3 p3, double u) {
    const auto knot = [](double t, Vec3 a, Vec3 b) {
        return t + std::sqrt((b - a).norm());
    };
    const double t0 = 0.0;
    const double t1 = knot(t0, p0, p1);
    const double t2 = knot(t1, p1, p2);
    const double t3 = knot(t2, p2, p3);
    if (t2 - t1 < 1e-12)
        return p1;
    const double t = t1 + u * (t2 - t1);
    const auto lerp = [](Vec3 a, Vec3 b, double ta, double tb, double t) {
        if (tb - ta < 1e-12)
            return a;
        const double w = (t - ta) / (tb - ta);
        return a * (1.0 - w) + b * w;
    };
    const Vec3 a1 = lerp(p0, p1, t0, t1, t);
    const Vec3 a2 = lerp(p1, p2, t1, t2, t);
    const Vec3 a3 = lerp(p2, p3, t2, t3, t);
    const Vec3 b1 = lerp(a1, a2, t0, t2, t);
    const Vec3 b2 = lerp(a2, a3, t1, t3, t);
    return lerp(b1, b2, t1, t2, t);
}

} // namespace detail

// Key poses at surface + d_offset * normal, oriented probe-down; between
// keys positions follow a centripetal Catmull-Rom and orientations slerp.
// The result is resampled at arc-length step_len, so consecutive waypoints
// are never farther apart than step_len.
inline ScanPath offset_and_interpolate(const std::vector<SurfaceSample>& surf,
                                       const TargetRegion& region,
                                       double d_offset = 3.0,
                                       double step_len = 0.1) {
    if (surf.size() < 2)
        throw TooFewPoints("need >= 2 projected waypoints");
    if (d_offset <= 0.0 || step_len <= 0.0)
        throw BadParams("d_offset and step_len must be positive");

    // offset keys, deduplicated
    std::vector<Vec3> pos;
    std::vector<SurfaceSample> keep;
    for (const auto& s : surf) {
        const Vec3 p = s.point + d_offset * s.normal;
        if (!pos.empty() && (p - pos.back()).norm() < 1e-12)
            continue;
        pos.push_back(p);
        keep.push_back(s);
    }
    if (pos.size() < 2)
        throw TooFewPoints("all projected waypoints coincide");
    const std::size_t nk = pos.size();

    std::vector<Quaternion> quat(nk);
    for (std::size_t i = 0; i < nk; ++i) {
        const Vec3 travel =
            (i == 0 ? pos[1] - pos[0]
                    : (i + 1 == nk ? pos[nk - 1] - pos[nk - 2]
                                   : pos[i + 1] - pos[i - 1]));
        quat[i] = detail::key_orientation(keep[i].normal, travel);
    }

    ScanPath path;
    path.region = region;
    path.d_offset = d_offset;
    path.step_len = step_len;
    path.key_surface = keep;
    path.key_poses.resize(nk);
    for (std::size_t i = 0; i < nk; ++i)
        path.key_poses[i] = Pose{pos[i], quat[i]};

    // fine polyline with per-point (segment, u) for orientation lookup
    struct FinePoint {
        Vec3 p;
        std::size_t seg;
        double u;
    };
    std::vector<FinePoint> fine;
    for (std::size_t i = 0; i + 1 < nk; ++i) {
        const Vec3 p0 = pos[i == 0 ? 0 : i - 1];
        const Vec3 p3 = pos[std::min(i + 2, nk - 1)];
        const double chord = (pos[i + 1] - pos[i]).norm();
        const int m = std::max(8, static_cast<int>(std::ceil(8.0 * chord / step_len)));
        for (int j = (i == 0 ? 0 : 1); j <= m; ++j) {
            const double u = static_cast<double>(j) / m;
            fine.push_back(
                {detail::catmull_rom(p0, pos[i], pos[i + 1], p3, u), i, u});
        }
    }

    // walk the polyline, emitting a pose every step_len of arc
    const auto emit = [&](const FinePoint& a, const FinePoint& b, double w) {
        const Vec3 p = a.p * (1.0 - w) + b.p * w;
        double u;
        std::size_t seg;
        if (a.seg == b.seg) {
            seg = a.seg;
            u = a.u * (1.0 - w) + b.u * w;
        } else { // crossing a key: parameters live on different segments
            seg = w < 0.5 ? a.seg : b.seg;
            u = w < 0.5 ? a.u : b.u;
        }
        return Pose{p, slerp(quat[seg], quat[seg + 1], std::clamp(u, 0.0, 1.0))};
    };

    path.waypoints.push_back(emit(fine[0], fine[0], 0.0));
    double carried = 0.0;
    for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
        const double piece = (fine[i + 1].p - fine[i].p).norm();
        double along = -carried;
        while (along + step_len <= piece + 1e-15) {
            along += step_len;
            path.waypoints.push_back(
                emit(fine[i], fine[i + 1], piece > 0 ? along / piece : 0.0));
        }
        carried = piece - along;
    }
    const Vec3 last = fine.back().p;
    if ((path.waypoints.back().position - last).norm() > 1e-12)
        path.waypoints.push_back(emit(fine.back(), fine.back(), 0.0));

    double len = 0.0;
    for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i)
        len += (path.waypoints[i + 1].position - path.waypoints[i].position)
                   .norm();
    path.arc_length = len;
    return path;
}

struct PathStats {
    double trajectory_length = 0.0; // cm
    double coverage_area = 0.0;     // cm^2
};

inline PathStats path_stats(const ScanPath& path, const TargetRegion& region) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i)
        len += (path.waypoints[i + 1].position - path.waypoints[i].position)
                   .norm();
    return {len, polygon_area(region.hull)};
}

inline nlohmann::json pose_to_json(const Pose& p) {
    return nlohmann::json::array({p.position.x, p.position.y, p.position.z,
                                  p.orientation.w, p.orientation.x,
                                  p.orientation.y, p.orientation.z});
}

inline Pose pose_from_json(const nlohmann::json& j) {
    return Pose{{j.at(0), j.at(1), j.at(2)},
                {j.at(3), j.at(4), j.at(5), j.at(6)}};
}

inline nlohmann::json region_to_json(const TargetRegion& r) {
    nlohmann::json hull = nlohmann::json::array();
    for (const Vec2& v : r.hull.vertices)
        hull.push_back({v.x, v.y});
    return {{"hull", hull},
            {"sample_seed", r.sample_seed},
            {"mean", {r.gaussian_mean.x, r.gaussian_mean.y}},
            {"cov", {r.gaussian_cov.a, r.gaussian_cov.b, r.gaussian_cov.c,
                     r.gaussian_cov.d}}};
}

inline TargetRegion region_from_json(const nlohmann::json& j) {
    TargetRegion r;
    for (const auto& v : j.at("hull"))
        r.hull.vertices.push_back({v.at(0), v.at(1)});
    r.sample_seed = j.at("sample_seed");
    r.gaussian_mean = {j.at("mean").at(0), j.at("mean").at(1)};
    r.gaussian_cov = {j.at("cov").at(0), j.at("cov").at(1), j.at("cov").at(2),
                      j.at("cov").at(3)};
    return r;
}

inline nlohmann::json scanpath_to_json(const ScanPath& p) {
    nlohmann::json poses = nlohmann::json::array();
    for (const Pose& w : p.waypoints)
        poses.push_back(pose_to_json(w));
    return {{"poses", poses},
            {"arc_length", p.arc_length},
            {"d_offset", p.d_offset},
            {"step_len", p.step_len},
            {"region", region_to_json(p.region)}};
}

} // namespace scanlab
