// Procedural tissue-like surfaces: a base plane plus Gaussian bumps, with a
// low-frequency red/pink value-noise palette. Heightfield and gradient are
// analytic, so projection and normals are exactly testable.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "scanlab/errors.hpp"
#include "scanlab/geometry.hpp"
#include "scanlab/rng.hpp"

namespace scanlab {

struct SceneParams {
    RectBounds bounds{-10.0, 10.0, -10.0, 10.0}; // cm
    int bump_count = 8;
    double amplitude_min = -1.5, amplitude_max = 1.5; // cm
    double radius_min = 1.0, radius_max = 4.0;        // cm
};

struct GaussianBump {
    Vec2 center;
    double amplitude = 0.0; // cm, signed
    double radius = 1.0;    // cm
};

struct Rgb {
    double r = 0.0, g = 0.0, b = 0.0;
};

// Seeded lattice value noise, smoothstep-interpolated. Low frequency: the
// lattice spans the scene bounds with kCells cells per axis.
class ValueNoise {
public:
    static constexpr int kCells = 4;

    ValueNoise() = default;
    ValueNoise(std::uint64_t seed, RectBounds bounds) : bounds_(bounds) {
        Rng rng(seed);
        for (auto& v : lattice_)
            v = rng.next_double();
    }

    double operator()(double x, double y) const {
        const double u =
            (x - bounds_.xmin) / bounds_.width() * kCells;
        const double v =
            (y - bounds_.ymin) / bounds_.height() * kCells;
        int i = std::clamp(static_cast<int>(std::floor(u)), 0, kCells - 1);
        int j = std::clamp(static_cast<int>(std::floor(v)), 0, kCells - 1);
        const double fu = smoothstep(std::clamp(u - i, 0.0, 1.0));
        const double fv = smoothstep(std::clamp(v - j, 0.0, 1.0));
        const double a = at(i, j), b = at(i + 1, j);
        const double c = at(i, j + 1), d = at(i + 1, j + 1);
        return (a * (1 - fu) + b * fu) * (1 - fv) +
               (c * (1 - fu) + d * fu) * fv;
    }

private:
    static double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }
    double at(int i, int j) const { return lattice_[j * (kCells + 1) + i]; }

    RectBounds bounds_;
    std::array<double, (kCells + 1) * (kCells + 1)> lattice_{};
};

// Immutable after construction; sampling is concurrency-safe.
class SurfaceScene {
public:
    SurfaceScene(int id, std::uint64_t seed, RectBounds bounds,
                 std::vector<GaussianBump> bumps, std::uint64_t palette_seed)
        : id_(id), seed_(seed), bounds_(bounds), bumps_(std::move(bumps)),
          palette_seed_(palette_seed), noise_warm_(palette_seed, bounds),
          noise_cool_(derive_seed(palette_seed, 1), bounds) {
        compute_height_range();
    }

    int id() const { return id_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t palette_seed() const { return palette_seed_; }
    const std::vector<GaussianBump>& bumps() const { return bumps_; }
    RectBounds bounds() const { return bounds_; }
    double min_height() const { return min_h_; }
    double max_height() const { return max_h_; }
    // Nominal grid cell of the heightfield (bounds at a 256^2 resolution);
    // the ray march steps at half of this.
    double march_cell() const {
        return std::min(bounds_.width(), bounds_.height()) / 256.0;
    }

    double height(double x, double y) const {
        double h = 0.0;
        for (const auto& b : bumps_) {
            const double dx = x - b.center.x, dy = y - b.center.y;
            const double d2 = dx * dx + dy * dy;
            const double r2 = b.radius * b.radius;
            if (d2 > 40.0 * r2) // exp(-20) ~ 2e-9, below any tolerance used
                continue;
            h += b.amplitude * std::exp(-0.5 * d2 / r2);
        }
        return h;
    }

    Vec2 gradient(double x, double y) const {
        Vec2 g{0, 0};
        for (const auto& b : bumps_) {
            const double dx = x - b.center.x, dy = y - b.center.y;
            const double d2 = dx * dx + dy * dy;
            const double r2 = b.radius * b.radius;
            if (d2 > 40.0 * r2)
                continue;
            const double e = b.amplitude * std::exp(-0.5 * d2 / r2) / r2;
            g.x -= e * dx;
            g.y -= e * dy;
        }
        return g;
    }

    Rgb color(double x, double y) const {
        const double n1 = noise_warm_(x, y);
        const double n2 = noise_cool_(x, y);
        // blend between a deep tissue red and a lighter pink
        const Rgb dark{0.45, 0.12, 0.14};
        const Rgb pale{0.85, 0.50, 0.54};
        Rgb c{dark.r + (pale.r - dark.r) * n1, dark.g + (pale.g - dark.g) * n1,
              dark.b + (pale.b - dark.b) * n1};
        c.g = std::clamp(c.g + 0.10 * (n2 - 0.5), 0.0, 1.0);
        c.b = std::clamp(c.b + 0.14 * (n2 - 0.5), 0.0, 1.0);
        return c;
    }

private:
    void compute_height_range() {
        // tight range for the ray-march bounding slab, padded by one cell of
        // worst-case slope
        constexpr int n = 128;
        double lo = 0.0, hi = 0.0, max_grad = 0.0;
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                const double x = bounds_.xmin + bounds_.width() * i / n;
                const double y = bounds_.ymin + bounds_.height() * j / n;
                const double h = height(x, y);
                lo = std::min(lo, h);
                hi = std::max(hi, h);
                max_grad = std::max(max_grad, gradient(x, y).norm());
            }
        }
        const double pad =
            (max_grad + 0.5) * std::max(bounds_.width(), bounds_.height()) / n;
        min_h_ = lo - pad;
        max_h_ = hi + pad;
    }

    int id_;
    std::uint64_t seed_;
    RectBounds bounds_;
    std::vector<GaussianBump> bumps_;
    std::uint64_t palette_seed_;
    ValueNoise noise_warm_, noise_cool_;
    double min_h_ = 0.0, max_h_ = 0.0;
};

inline SurfaceScene generate_scene(std::uint64_t seed,
                                   const SceneParams& params, int id = 0) {
    if (params.bounds.area() <= 0.0)
        throw BadParams("scene bounds area must be positive");
    if (params.bump_count < 0)
        throw BadParams("bump count must be >= 0");
    if (params.amplitude_min > params.amplitude_max)
        throw BadParams("empty amplitude range");
    if (params.radius_min > params.radius_max || params.radius_min <= 0.0)
        throw BadParams("bad radius range");

    Rng rng(derive_seed(seed, 0x5ce2eULL));
    std::vector<GaussianBump> bumps;
    bumps.reserve(static_cast<std::size_t>(params.bump_count));
    for (int i = 0; i < params.bump_count; ++i) {
        GaussianBump b;
        b.center.x = rng.uniform(params.bounds.xmin, params.bounds.xmax);
        b.center.y = rng.uniform(params.bounds.ymin, params.bounds.ymax);
        b.amplitude = rng.uniform(params.amplitude_min, params.amplitude_max);
        b.radius = rng.uniform(params.radius_min, params.radius_max);
        bumps.push_back(b);
    }
    const std::uint64_t palette_seed = derive_seed(seed, 0xc0102ULL);
    return SurfaceScene(id, seed, params.bounds, std::move(bumps),
                        palette_seed);
}

// z = h(x,y) and the analytic outward normal at (x,y).
inline std::pair<double, Vec3> sample_height_and_normal(const SurfaceScene& s,
                                                        double x, double y) {
    if (!s.bounds().contains({x, y}))
        throw OutOfBounds("(" + std::to_string(x) + ", " + std::to_string(y) +
                          ") outside scene bounds");
    const Vec2 g = s.gradient(x, y);
    return {s.height(x, y), Vec3{-g.x, -g.y, 1.0}.normalized()};
}

inline nlohmann::json scene_to_json(const SurfaceScene& s) {
    nlohmann::json bumps = nlohmann::json::array();
    for (const auto& b : s.bumps())
        bumps.push_back({{"cx", b.center.x},
                         {"cy", b.center.y},
                         {"amplitude", b.amplitude},
                         {"radius", b.radius}});
    const RectBounds bb = s.bounds();
    return {{"id", s.id()},
            {"seed", s.seed()},
            {"bounds", {bb.xmin, bb.xmax, bb.ymin, bb.ymax}},
            {"bumps", bumps},
            {"palette_seed", s.palette_seed()}};
}

inline SurfaceScene scene_from_json(const nlohmann::json& j) {
    RectBounds bb{j.at("bounds").at(0), j.at("bounds").at(1),
                  j.at("bounds").at(2), j.at("bounds").at(3)};
    std::vector<GaussianBump> bumps;
    for (const auto& jb : j.at("bumps"))
        bumps.push_back({{jb.at("cx"), jb.at("cy")}, jb.at("amplitude"),
                         jb.at("radius")});
    return SurfaceScene(j.at("id"), j.at("seed"), bb, std::move(bumps),
                        j.at("palette_seed"));
}

} // namespace scanlab
