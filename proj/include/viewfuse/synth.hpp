#pragma once

#include <cstdint>
#include <vector>

#include "viewfuse/convex_hull.hpp"
#include "viewfuse/raycast.hpp"
#include "viewfuse/scene.hpp"

#include "json.hpp"

namespace viewfuse {

/// Axis-aligned box rotated by `yaw` radians about its vertical axis.
struct BoxPrimitive {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector3d size = Eigen::Vector3d::Ones();
    double yaw = 0.0;
    Rgb albedo = Rgb(200, 200, 200);
};

struct SpherePrimitive {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 0.1;
    Rgb albedo = Rgb(200, 200, 200);
};

/// Procedural room. The room spans [0, room.x] x [0, room.y] x [0, room.z]
/// with z up. Explicit primitive lists replace the random ones of the same
/// kind; random furniture stands on the floor and random clutter rests on
/// the floor or on furniture tops.
struct SceneSpec {
    Eigen::Vector3d room = Eigen::Vector3d(6.0, 5.0, 3.0);
    int furniture_count = 3;
    int clutter_count = 6;
    double sphere_fraction = 0.4;
    std::vector<BoxPrimitive> furniture;
    std::vector<BoxPrimitive> clutter_boxes;
    std::vector<SpherePrimitive> clutter_spheres;

    int camera_count = 20;
    double camera_min_distance = 2.0;  ///< meters from the look-at target
    double camera_max_distance = 5.0;
    double look_jitter = 0.3;          ///< meters
    int width = 160;
    int height = 120;
    double fov_deg = 60.0;             ///< horizontal

    double edge = 0.05;  ///< tessellation edge length, meters
    Eigen::Vector3d light_dir = Eigen::Vector3d(0.3, 0.5, 1.0);
    double ambient = 0.35;
    /// clean_observed keeps triangles seen this close; the fusion depth cap
    double observed_max_depth = 3.5;
    std::uint64_t seed = 0;

    void validate() const;
};

SceneSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SceneSpec& spec);

/// Instance ids: 0..5 room shell (floor, ceiling, four walls), then
/// furniture, then clutter.
struct SceneLayout {
    std::vector<BoxPrimitive> furniture;
    std::vector<BoxPrimitive> clutter_boxes;
    std::vector<SpherePrimitive> clutter_spheres;
    std::vector<CameraModel> cameras;
};

/// Resolves the random parts of the spec.
SceneLayout layout_scene(const SceneSpec& spec);

/// Tessellated, labeled scene mesh with per-vertex albedo.
LabeledMesh build_mesh(const SceneSpec& spec, const SceneLayout& layout);

LabeledMesh tessellate_box(const BoxPrimitive& box, double edge, int instance, bool clutter,
                           bool inward = false);
LabeledMesh tessellate_sphere(const SpherePrimitive& sphere, double edge, int instance, bool clutter);

struct Lighting {
    Eigen::Vector3d direction = Eigen::Vector3d(0.3, 0.5, 1.0);  ///< toward the light
    double ambient = 0.35;
};

struct Render {
    ColorImage color;
    DepthMap depth;
    Image<int> triangle;  ///< first-hit triangle, -1 on miss
};

/// Ray-cast render: exact first-hit depth and two-sided Lambert shading of
/// each triangle's albedo.
Render render_view(const RayCaster& caster, const TriangleMesh& mesh, const CameraModel& cam,
                   const Lighting& light);

struct SynthScene {
    SceneBundle bundle;       ///< cluttered frames (empty masks), full mesh, clean renders
    SceneBundle clean;        ///< clutter-free frames and mesh, same cameras
    std::vector<Mask> truth_masks;  ///< pixels whose first hit is clutter
    LabeledMesh clean_observed;     ///< clean triangles some pixel hits within observed_max_depth
    SceneLayout layout;
};

/// Throws DomainError for a degenerate spec.
SynthScene generate(const SceneSpec& spec);

/// One hull per clutter instance of `clutter`.
std::vector<ConvexHull> clutter_hulls(const LabeledMesh& clutter);

/// `clean` without the triangles whose centroid lies inside (or on) the
/// convex hull of any clutter instance.
LabeledMesh carve_holes(const LabeledMesh& clean, const LabeledMesh& clutter);

}  // namespace viewfuse
