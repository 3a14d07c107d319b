#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>

#include "viewfuse/image.hpp"

namespace viewfuse {

/// Pinhole camera with a rigid camera-to-world pose. Camera axes follow the
/// usual vision convention: +x right, +y down, +z forward. Pixel (u, v) has
/// its center at integer coordinates.
struct CameraModel {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;
    Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();

    Eigen::Matrix3d rotation() const { return pose.topLeftCorner<3, 3>(); }
    Eigen::Vector3d center() const { return pose.topRightCorner<3, 1>(); }

    /// Rigid world-to-camera transform.
    Eigen::Isometry3d world_to_camera() const;
    Eigen::Isometry3d camera_to_world() const;

    /// Throws InvalidCameraError when an invariant is violated.
    void validate() const;

    bool operator==(const CameraModel&) const = default;
};

/// Builds a camera at `eye` looking at `target` with world +z as up.
CameraModel look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double fx, double fy,
                    int width, int height);

/// Continuous image coordinates plus depth of a projected point.
struct Projection {
    Eigen::Vector2d pixel;
    double depth;
};

/// Projects a camera-frame point. Returns nullopt for points with z <= 0.
std::optional<Projection> project_camera(const CameraModel& cam, const Eigen::Vector3d& p_cam);

/// Projects a world point into the camera.
std::optional<Projection> project(const CameraModel& cam, const Eigen::Vector3d& p_world);

/// Camera-frame point seen at `pixel` with metric depth `depth`.
Eigen::Vector3d unproject_camera(const CameraModel& cam, const Eigen::Vector2d& pixel, double depth);

/// World point seen at `pixel` with metric depth `depth`. Throws
/// InvalidDepthError for non-positive or non-finite depth.
Eigen::Vector3d unproject(const CameraModel& cam, const Eigen::Vector2d& pixel, double depth);

/// Rounds continuous coordinates to the nearest pixel; nullopt when outside
/// the image.
std::optional<Eigen::Vector2i> nearest_pixel(const CameraModel& cam, const Eigen::Vector2d& pixel);

template <typename Raster>
void require_camera_size(const CameraModel& cam, const Raster& raster, const char* what) {
    if (raster.rows() != cam.height || raster.cols() != cam.width)
        throw DimensionMismatchError(std::string(what) + ": raster is " +
                                     std::to_string(raster.cols()) + "x" +
                                     std::to_string(raster.rows()) + ", camera is " +
                                     std::to_string(cam.width) + "x" +
                                     std::to_string(cam.height));
}

}  // namespace viewfuse
