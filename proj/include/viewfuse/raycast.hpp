#pragma once

#include <optional>
#include <vector>

#include "viewfuse/camera.hpp"
#include "viewfuse/image.hpp"
#include "viewfuse/mesh.hpp"

namespace viewfuse {

struct RayHit {
    double t;      ///< ray parameter; equals camera depth for camera rays
    int triangle;  ///< index into the mesh triangle list
};

/// Exact nearest-hit ray casting against a triangle mesh through a bounding
/// volume hierarchy. Equal-distance hits resolve to the lower triangle index.
class RayCaster {
public:
    explicit RayCaster(const TriangleMesh& mesh);

    std::optional<RayHit> intersect(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                    double t_max = std::numeric_limits<double>::infinity()) const;

    std::size_t triangle_count() const { return a_.size(); }

private:
    struct Node {
        Eigen::Vector3d lo, hi;
        int left = -1, right = -1;  ///< children; -1 for leaves
        int begin = 0, end = 0;     ///< range into order_ for leaves
    };

    int build(int begin, int end);

    std::vector<Eigen::Vector3d> a_, e1_, e2_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

/// Per-pixel result of casting the camera's pixel-center rays.
struct RayCastImage {
    DepthMap depth;       ///< camera depth of the first hit, 0 on miss
    Image<int> triangle;  ///< first-hit triangle, -1 on miss
};

RayCastImage cast_view(const RayCaster& caster, const CameraModel& cam);

}  // namespace viewfuse
