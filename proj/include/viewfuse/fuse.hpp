#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "viewfuse/camera.hpp"
#include "viewfuse/image.hpp"
#include "viewfuse/mesh.hpp"
#include "viewfuse/refine.hpp"

namespace viewfuse {

/// One posed color + depth pair to fuse, borrowed.
struct FuseView {
    int id;
    const CameraModel* camera;
    const ColorImage* color;
    const DepthMap* depth;
};

/// Views of the final refine output, one per frame.
std::vector<FuseView> fuse_views(std::span<const Frame> frames, std::span<const InpaintState> states);

/// Views of captured frames as they are.
std::vector<FuseView> fuse_views(std::span<const Frame> frames);

struct PointSource {
    int frame;
    int u;
    int v;
};

struct FusedCloud {
    std::vector<Eigen::Vector3d> points;
    std::vector<Eigen::Vector3d> normals;  ///< unit, facing the source camera
    std::vector<Rgb> colors;
    std::vector<PointSource> source;

    std::size_t size() const { return points.size(); }
};

/// Camera-frame normal of pixel (u, v) from cross products of neighboring
/// unprojected points. Neighbors across depth jumps larger than
/// `max_jump` * depth are ignored; without usable neighbors the normal
/// points back along the viewing ray.
Eigen::Vector3d depth_normal(const CameraModel& cam, const DepthMap& depth, int u, int v,
                             double max_jump = 0.05);

/// Every valid pixel with depth <= fuse_max_depth, in frame then raster
/// order. When more than fuse_max_points qualify, a uniform subset drawn with
/// `seed` is kept (order preserved). Throws EmptyInputError when no pixel
/// qualifies.
FusedCloud fuse(std::span<const FuseView> views, const RefineConfig& cfg);

/// Binary little-endian PLY with float xyz, float normal and uchar rgb.
void write_cloud_ply(const std::filesystem::path& path, const FusedCloud& cloud);

/// Truncated signed-distance integration over a voxel grid covering the
/// observed points, surfaced by marching cubes. Distances are projective
/// (along the camera z axis) with weight 1 per observation; voxels are
/// updated in frame order, so the result does not depend on thread count.
/// Throws EmptyInputError without views or valid depth, and
/// GridTooLargeError when the grid would exceed tsdf_max_voxels.
TriangleMesh tsdf_fuse(std::span<const FuseView> views, const RefineConfig& cfg);

/// Scalar field sampled on a regular grid, x fastest.
struct VoxelGrid {
    Eigen::Vector3d origin;
    double voxel = 1.0;
    Eigen::Vector3i dims = Eigen::Vector3i::Zero();
    std::vector<float> value;
    std::vector<float> weight;            ///< 0 marks unobserved samples
    std::vector<std::array<float, 3>> color;  ///< optional, [0,255]

    std::size_t index(int x, int y, int z) const {
        return (static_cast<std::size_t>(z) * dims.y() + y) * dims.x() + x;
    }
};

/// Zero level set of the grid. Cubes with an unobserved corner are skipped.
/// Triangles face the direction of increasing value; shared edge vertices
/// are merged.
TriangleMesh marching_cubes(const VoxelGrid& grid);

}  // namespace viewfuse
