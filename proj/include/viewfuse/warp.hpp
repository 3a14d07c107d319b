#pragma once

#include <optional>
#include <span>
#include <vector>

#include "viewfuse/camera.hpp"
#include "viewfuse/image.hpp"

namespace viewfuse {

/// Where one source pixel lands in the target view.
struct WarpedPixel {
    int src_u;
    int src_v;
    int dst_u;
    int dst_v;
    double depth;  ///< depth in the target camera
};

struct WarpStats {
    long written = 0;
    long behind_camera = 0;
    long out_of_bounds = 0;
    long collisions = 0;
};

/// Z-buffered forward splat of a depth map into another view.
struct WarpResult {
    DepthMap depth;         ///< target-view depth, 0 where nothing landed
    DepthMap source_depth;  ///< source depth of the winning sample per target pixel
    WarpStats stats;
};

/// Camera-frame unit surface normals of a depth map, row-major; a zero
/// vector marks pixels without a reliable local plane.
struct NormalMap {
    int width = 0;
    int height = 0;
    std::vector<Eigen::Vector3d> normal;

    const Eigen::Vector3d& at(int u, int v) const {
        return normal[static_cast<std::size_t>(v) * width + u];
    }
};

/// Local tangent planes from finite differences of unprojected neighbors.
/// Per image axis, the central difference is used when both one-sided
/// differences are parallel; otherwise a one-sided difference whose next
/// step continues in a straight line (so a crease picks the pixel's own
/// face). Neighbors across relative depth jumps above `max_jump` are never
/// used. Pixels without a usable difference on both axes get no normal.
NormalMap normal_map(const CameraModel& cam, const DepthMap& depth, double max_jump = 0.05,
                     double parallel_tol = 0.02);

/// Source depth and camera of one view, borrowed.
struct DepthView {
    const DepthMap* depth;
    const CameraModel* camera;
    const Mask* select = nullptr;      ///< optional subset of source pixels to warp
    const NormalMap* normals = nullptr;  ///< enables plane-corrected landing depth
};

/// Target pixel and depth of source pixel (u, v) at depth `depth`, given the
/// relative transform source-camera -> target-camera. The landing pixel is
/// the nearest one to the projected point. With a nonzero source-camera
/// `normal`, the landing depth is where the target pixel's center ray meets
/// the source pixel's tangent plane (exact for planar surfaces); the
/// correction is skipped when the ray grazes the plane or the corrected
/// depth moves by more than `max_jump` relative. nullopt when the point is
/// behind the target camera or rounds outside its image; `behind` tells which.
struct Landing {
    int u;
    int v;
    double depth;
    double point_depth;  ///< depth of the warped point itself, never corrected
};
std::optional<Landing> warp_point(const Eigen::Isometry3d& rel, const CameraModel& src_cam,
                                  const CameraModel& dst_cam, int u, int v, double depth,
                                  bool* behind = nullptr, const Eigen::Vector3d* normal = nullptr,
                                  double max_jump = 0.05);

/// Source-camera to target-camera transform.
Eigen::Isometry3d relative_transform(const CameraModel& src_cam, const CameraModel& dst_cam);

/// Maps every valid (and selected) source pixel into the target view by
/// unprojecting, applying the relative rigid transform and rounding to the
/// nearest target pixel. Points behind the target camera or outside its
/// image are dropped and counted in `stats`.
std::vector<WarpedPixel> forward_map(const DepthMap& src, const CameraModel& src_cam,
                                     const CameraModel& dst_cam, const Mask* select = nullptr,
                                     WarpStats* stats = nullptr, const NormalMap* normals = nullptr);

/// Forward splat with z-buffering: each target pixel keeps the smallest
/// landing depth. Landing depths are plane-corrected unless
/// `plane_correction` is false.
WarpResult warp_depth(const DepthMap& src, const CameraModel& src_cam, const CameraModel& dst_cam,
                      const Mask* select = nullptr, bool plane_correction = true);

struct PairWarp {
    int source;
    int target;
    WarpResult result;
};

/// All N(N-1) ordered pair warps, ordered by (source, target). Pairs are
/// computed concurrently; output does not depend on the thread count.
/// With plane correction, views without normals get them computed, so each
/// result equals the corresponding warp_depth call.
std::vector<PairWarp> warp_all_pairs(std::span<const DepthView> views, bool plane_correction = true);

}  // namespace viewfuse
