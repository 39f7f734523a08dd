#include <catch2/catch_amalgamated.hpp>

#include "scanlab/geometry.hpp"
#include "scanlab/rng.hpp"
#include "scanlab/scene.hpp"

#include "oracles.hpp"

using namespace scanlab;

namespace {
Quaternion rotation_about_x(double angle) {
    return {std::cos(angle / 2), std::sin(angle / 2), 0, 0};
}
} // namespace

TEST_CASE("quat_normalize scales and applies the hemisphere convention",
          "[geometry]") {
    auto q = quat_normalize({2, 0, 0, 0});
    CHECK(q == Quaternion{1, 0, 0, 0});

    q = quat_normalize({-1, 0, 0, 0});
    CHECK(q == Quaternion{1, 0, 0, 0});

    q = quat_normalize({1, 1, 1, 1}); // divide by sqrt(4)
    CHECK(q.w == Catch::Approx(0.5).margin(1e-15));
    CHECK(q.x == Catch::Approx(0.5).margin(1e-15));
    CHECK(q.y == Catch::Approx(0.5).margin(1e-15));
    CHECK(q.z == Catch::Approx(0.5).margin(1e-15));

    // w == 0: first nonzero of x,y,z must end up positive
    q = quat_normalize({0, -1, 0, 0});
    CHECK(q == Quaternion{0, 1, 0, 0});
    q = quat_normalize({0, 0, 0, -3});
    CHECK(q == Quaternion{0, 0, 0, 1});

    CHECK_THROWS_AS(quat_normalize({1e-13, 0, 0, 0}), ZeroNorm);

    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        const auto r = quat_normalize(oracle::random_unit_quat(rng));
        CHECK(std::abs(r.norm() - 1.0) <= 1e-9);
        CHECK(r.w >= 0.0);
    }
}

TEST_CASE("quat_angle matches the rotation-matrix trace oracle",
          "[geometry]") {
    const Quaternion id{1, 0, 0, 0};
    CHECK(quat_angle(id, id) == 0.0);

    // 45 degree half-angle doubles to a 90 degree rotation
    const Quaternion half{std::cos(std::numbers::pi / 4),
                          std::sin(std::numbers::pi / 4), 0, 0};
    CHECK(quat_angle(id, half) ==
          Catch::Approx(std::numbers::pi / 2).margin(1e-12));
    CHECK(oracle::trace_angle(id, half) ==
          Catch::Approx(std::numbers::pi / 2).margin(1e-9));

    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const auto q1 = oracle::random_unit_quat(rng);
        const auto q2 = oracle::random_unit_quat(rng);
        CHECK(quat_angle(q1, q2) ==
              Catch::Approx(oracle::trace_angle(q1, q2)).margin(1e-7));
        // symmetry and double cover
        CHECK(std::abs(quat_angle(q1, q2) - quat_angle(q2, q1)) <= 1e-12);
        CHECK(quat_angle(q1, -q1) == 0.0);
    }

    CHECK_THROWS_AS(quat_angle({2, 0, 0, 0}, id), NotUnit);
}

TEST_CASE("slerp endpoints, equidistance and arc monotonicity", "[geometry]") {
    Rng rng(11);
    const auto qa = oracle::random_unit_quat(rng);
    CHECK(quat_angle(slerp(qa, qa, 0.5), qa) <= 1e-12);

    for (int i = 0; i < 100; ++i) {
        const auto q1 = oracle::random_unit_quat(rng);
        const auto q2 = oracle::random_unit_quat(rng);
        const auto mid = slerp(q1, q2, 0.5);
        CHECK(std::abs(quat_angle(q1, mid) - quat_angle(mid, q2)) <= 1e-9);
        CHECK(quat_angle(slerp(q1, q2, 0.0), q1) <= 1e-9);
        CHECK(quat_angle(slerp(q1, q2, 1.0), q2) <= 1e-9);

        double prev = -1.0;
        for (int k = 0; k <= 10; ++k) {
            const double ang = quat_angle(q1, slerp(q1, q2, k / 10.0));
            CHECK(ang >= prev - 1e-9);
            prev = ang;
        }
    }

    // near-parallel inputs take the nlerp fallback and stay unit
    const Quaternion q1{1, 0, 0, 0};
    const auto q2 = quat_normalize({1, 1e-9, 0, 0});
    CHECK(std::abs(slerp(q1, q2, 0.3).norm() - 1.0) <= 1e-12);
}

TEST_CASE("convex_hull agrees with containment oracles", "[geometry]") {
    // unit square corners plus center point
    auto hull = convex_hull(
        {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
    REQUIRE(hull.vertices.size() == 4);
    validate_polygon(hull);

    // already-convex triangle comes back CCW
    auto tri = convex_hull({{0, 0}, {2, 0}, {0, 2}});
    REQUIRE(tri.vertices.size() == 3);
    validate_polygon(tri);
    CHECK(polygon_area(tri) == Catch::Approx(2.0));

    CHECK_THROWS_AS(convex_hull({{0, 0}, {1, 1}, {2, 2}, {3, 3}}), Degenerate);

    Rng rng(3);
    std::vector<Vec2> pts;
    for (int i = 0; i < 100; ++i)
        pts.push_back({rng.gaussian(), rng.gaussian()});
    hull = convex_hull(pts);
    validate_polygon(hull);
    for (const Vec2& p : pts)
        CHECK(oracle::crossing_number_inside(p, hull, 1e-9));

    double xmin = pts[0].x, xmax = xmin, ymin = pts[0].y, ymax = ymin;
    for (const Vec2& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    CHECK(polygon_area(hull) <= (xmax - xmin) * (ymax - ymin));

    // idempotence
    auto hull2 = convex_hull(hull.vertices);
    REQUIRE(hull2.vertices.size() == hull.vertices.size());
    for (std::size_t i = 0; i < hull.vertices.size(); ++i)
        CHECK(hull2.vertices[i] == hull.vertices[i]);

    // monotonicity under point-set inclusion
    std::vector<Vec2> subset(pts.begin(), pts.begin() + 40);
    CHECK(polygon_area(convex_hull(subset)) <= polygon_area(hull) + 1e-12);
}

TEST_CASE("point_in_polygon matches the ray-crossing oracle", "[geometry]") {
    Rng rng(5);
    std::vector<Vec2> pts;
    for (int i = 0; i < 40; ++i)
        pts.push_back({rng.gaussian() * 2, rng.gaussian()});
    const auto hull = convex_hull(pts);

    const Vec2 c = polygon_centroid(hull);
    CHECK(point_in_polygon(c, hull));
    for (const Vec2& v : hull.vertices)
        CHECK(point_in_polygon(v, hull));

    double maxr = 0.0;
    for (const Vec2& v : hull.vertices)
        maxr = std::max(maxr, (v - c).norm());
    CHECK_FALSE(point_in_polygon(c + Vec2{2 * maxr, 0}, hull));

    for (int i = 0; i < 2000; ++i) {
        const Vec2 p{rng.uniform(-6, 6), rng.uniform(-4, 4)};
        // skip points hugging the boundary where the two epsilon rules differ
        bool near_edge = false;
        const auto& v = hull.vertices;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const Vec2 e = v[(k + 1) % v.size()] - v[k];
            if (std::abs(e.cross(p - v[k])) / e.norm() < 1e-7)
                near_edge = true;
        }
        if (near_edge)
            continue;
        CHECK(point_in_polygon(p, hull) ==
              oracle::crossing_number_inside(p, hull));
    }
}

TEST_CASE("polygon_area matches Monte-Carlo containment", "[geometry]") {
    const Polygon2D square{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    CHECK(polygon_area(square) == Catch::Approx(1.0));
    const Polygon2D tri{{{0, 0}, {2, 0}, {0, 2}}};
    CHECK(polygon_area(tri) == Catch::Approx(2.0));

    Rng rng(9);
    std::vector<Vec2> pts;
    for (int i = 0; i < 60; ++i)
        pts.push_back({rng.gaussian() * 3, rng.gaussian() * 2});
    const auto hull = convex_hull(pts);
    const double mc = oracle::monte_carlo_area(hull, 1'000'000, rng);
    CHECK(polygon_area(hull) == Catch::Approx(mc).epsilon(0.01));
}

TEST_CASE("ray_heightfield_intersect on flat and bumpy scenes", "[geometry]") {
    SceneParams flat_params;
    flat_params.bump_count = 0;
    const auto flat = generate_scene(0, flat_params);

    const Ray down{{1, 2, 5}, {0, 0, -1}};
    const auto hit = ray_heightfield_intersect(down, flat);
    REQUIRE(hit.has_value());
    CHECK(hit->point.x == Catch::Approx(1.0).margin(1e-9));
    CHECK(hit->point.y == Catch::Approx(2.0).margin(1e-9));
    CHECK(std::abs(hit->point.z) <= 1e-9);
    CHECK(hit->normal == Vec3{0, 0, 1});
    CHECK(hit->t == Catch::Approx(5.0).margin(1e-6));

    // single bump: vertical ray over the center hits at z = amplitude
    SurfaceScene bump(0, 0, {-10, 10, -10, 10}, {{{1.5, -2.0}, 1.2, 2.0}}, 1);
    const Ray over{{1.5, -2.0, 8}, {0, 0, -1}};
    const auto bh = ray_heightfield_intersect(over, bump);
    REQUIRE(bh.has_value());
    CHECK(bh->point.z == Catch::Approx(1.2).margin(1e-5));

    // ray leaving the bounds: no hit
    const Ray away{{0, 0, 5}, Vec3{1, 0, 0.5}.normalized()};
    CHECK_FALSE(ray_heightfield_intersect(away, flat).has_value());
}

TEST_CASE("ray march agrees with a brute-force 1e6-step oracle",
          "[geometry][slow]") {
    Rng rng(123);
    for (int s = 0; s < 4; ++s) {
        const auto scene = generate_scene(1000 + s, SceneParams{});
        for (int i = 0; i < 8; ++i) {
            const Vec3 origin{rng.uniform(-8, 8), rng.uniform(-8, 8),
                              scene.max_height() + rng.uniform(3, 10)};
            const Vec3 dir = Vec3{rng.uniform(-0.4, 0.4),
                                  rng.uniform(-0.4, 0.4), -1.0}
                                 .normalized();
            const Ray ray{origin, dir};
            const auto fast = ray_heightfield_intersect(ray, scene);
            const auto slow = oracle::brute_force_march(ray, scene, 40.0,
                                                        1'000'000);
            REQUIRE(fast.has_value() == slow.has_value());
            if (fast)
                CHECK(std::abs(fast->t - *slow) <= 1e-4);
        }
    }
}
