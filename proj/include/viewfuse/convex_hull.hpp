#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace viewfuse {

/// Closed convex polytope with outward-facing triangles.
struct ConvexHull {
    std::vector<Eigen::Vector3d> points;
    std::vector<Eigen::Vector3i> faces;  ///< counter-clockwise seen from outside
    std::vector<Eigen::Vector4d> planes; ///< (n, d) with n.x <= d inside, |n| = 1

    /// Inclusive: points on the boundary (within eps) count as inside.
    bool contains(const Eigen::Vector3d& p, double eps = 1e-9) const;
};

/// Incremental hull of a 3D point set. Throws DomainError when the points do
/// not span a volume.
ConvexHull convex_hull(std::span<const Eigen::Vector3d> points);

}  // namespace viewfuse
