#pragma once

#include <vector>

#include "viewfuse/random.hpp"
#include "viewfuse/raycast.hpp"
#include "viewfuse/synth.hpp"

#include "reference_consistency.hpp"

namespace viewfuse::fixtures {

// Fronto-parallel camera at the origin looking down +z.
inline CameraModel frontal(int width, int height, double f) {
    CameraModel cam;
    cam.fx = cam.fy = f;
    cam.cx = 0.5 * (width - 1);
    cam.cy = 0.5 * (height - 1);
    cam.width = width;
    cam.height = height;
    return cam;
}

inline DepthMap constant_depth(int width, int height, double d) { return DepthMap::Constant(height, width, d); }

// A wall two meters behind an object; the object is the clutter.
struct WallScene {
    LabeledMesh full;
    LabeledMesh clean;
};

inline WallScene wall_scene(double object_size = 1.0, double edge = 0.25) {
    WallScene s;
    BoxPrimitive wall;
    wall.center = Eigen::Vector3d(0.0, 3.0, 1.0);
    wall.size = Eigen::Vector3d(6.0, 0.1, 6.0);
    BoxPrimitive object;
    object.center = Eigen::Vector3d(0.0, 1.8, 1.0);
    object.size = Eigen::Vector3d::Constant(object_size);
    object.yaw = 0.3;
    s.clean = tessellate_box(wall, edge, 0, false);
    s.full = s.clean;
    append(s.full, tessellate_box(object, edge, 1, true));
    return s;
}

// Random tiny multi-view consistency case: up to 3 views of the wall scene
// with the object masked and a randomly corrupted completion.
inline std::vector<reference::View> random_case(std::uint64_t seed) {
    static const WallScene scene = wall_scene();
    static const RayCaster full(scene.full), clean(scene.clean);
    Rng rng(seed);
    const int n = 1 + static_cast<int>(rng.index(3));
    const int w = 4 + static_cast<int>(rng.index(5)), h = 4 + static_cast<int>(rng.index(5));
    std::vector<reference::View> views;
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d eye(rng.uniform(-0.4, 0.4), 0.0, 1.0 + rng.uniform(-0.3, 0.3));
        const Eigen::Vector3d target(rng.uniform(-0.2, 0.2), 3.0, 1.0 + rng.uniform(-0.2, 0.2));
        reference::View v;
        v.camera = look_at(eye, target, 0.8 * w, 0.8 * w, w, h);
        const RayCastImage a = cast_view(full, v.camera), b = cast_view(clean, v.camera);
        v.captured = a.depth;
        v.hole = Mask::Zero(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (a.triangle(y, x) >= 0 && scene.full.triangle_is_clutter(static_cast<std::size_t>(a.triangle(y, x))))
                    v.hole(y, x) = 1;
        // Occasional extra hole pixels and sensor dropouts.
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (rng.uniform() < 0.08) v.hole(y, x) = 1;
                if (rng.uniform() < 0.05) v.captured(y, x) = 0.0;
            }
        v.completed = v.captured;
        const int mode = static_cast<int>(rng.index(5));
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!v.hole(y, x)) continue;
                double d = b.depth(y, x);
                switch (mode) {
                    case 0: break;                                  // exact
                    case 1: d += rng.uniform(-0.08, 0.08); break;   // noisy
                    case 2: d -= rng.uniform(0.0, 1.2); break;      // floating toward the camera
                    case 3: d += rng.uniform(0.0, 0.6); break;      // behind the wall
                    case 4: if (rng.uniform() < 0.3) d = 0.0; break;  // partial fill
                }
                v.completed(y, x) = d > 0.0 ? d : 0.0;
            }
        views.push_back(std::move(v));
    }
    return views;
}

inline std::vector<ConsistencyView> consistency_views(const std::vector<reference::View>& views) {
    std::vector<ConsistencyView> out;
    for (const auto& v : views) out.push_back({&v.camera, &v.captured, &v.completed, &v.hole});
    return out;
}

// The views are borrowed; a temporary would dangle.
std::vector<ConsistencyView> consistency_views(std::vector<reference::View>&&) = delete;

inline ConsistencyConfig random_config(std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 77));
    ConsistencyConfig cfg;
    cfg.connectivity = rng.uniform() < 0.5 ? 4 : 8;
    cfg.region_aggregate = static_cast<RegionAggregate>(rng.index(3));
    cfg.occlusion_window = static_cast<int>(rng.index(2));
    cfg.vote_window = static_cast<int>(rng.index(2));
    cfg.strict_voting = rng.uniform() < 0.3;
    cfg.plane_correction = rng.uniform() < 0.7;
    cfg.max_region_fraction = rng.uniform() < 0.3 ? 0.2 : 0.5;
    return cfg;
}

inline bool equal(const DepthMap& a, const DepthMap& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a == b).all();
}

}  // namespace viewfuse::fixtures
