#include "viewfuse/camera.hpp"

#include <cmath>
#include <string>

namespace viewfuse {

Eigen::Isometry3d CameraModel::camera_to_world() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = rotation();
    t.translation() = center();
    return t;
}

Eigen::Isometry3d CameraModel::world_to_camera() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    const Eigen::Matrix3d rt = rotation().transpose();
    t.linear() = rt;
    t.translation() = -rt * center();
    return t;
}

void CameraModel::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
        throw InvalidCameraError("focal lengths must be positive");
    if (width <= 0 || height <= 0) throw InvalidCameraError("image size must be positive");
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
        throw InvalidCameraError("principal point outside the image");
    if (!pose.allFinite()) throw InvalidCameraError("pose is not finite");
    if ((pose.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12)
        throw InvalidCameraError("pose last row must be [0 0 0 1]");
    const Eigen::Matrix3d r = rotation();
    if ((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6)
        throw InvalidCameraError("pose rotation is not orthonormal");
    if (std::abs(r.determinant() - 1.0) > 1e-6)
        throw InvalidCameraError("pose rotation has determinant != +1");
}

CameraModel look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double fx, double fy,
                    int width, int height) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d up(0, 0, 1);
    if (std::abs(forward.dot(up)) > 0.999) up = Eigen::Vector3d(0, 1, 0);
    const Eigen::Vector3d right = forward.cross(up).normalized();
    const Eigen::Vector3d down = forward.cross(right);

    CameraModel cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.width = width;
    cam.height = height;
    cam.cx = 0.5 * (width - 1);
    cam.cy = 0.5 * (height - 1);
    cam.pose.setIdentity();
    cam.pose.block<3, 1>(0, 0) = right;
    cam.pose.block<3, 1>(0, 1) = down;
    cam.pose.block<3, 1>(0, 2) = forward;
    cam.pose.block<3, 1>(0, 3) = eye;
    return cam;
}

std::optional<Projection> project_camera(const CameraModel& cam, const Eigen::Vector3d& p) {
    if (!(p.z() > 0.0)) return std::nullopt;
    return Projection{{cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy}, p.z()};
}

std::optional<Projection> project(const CameraModel& cam, const Eigen::Vector3d& p_world) {
    const Eigen::Matrix3d r = cam.rotation();
    return project_camera(cam, r.transpose() * (p_world - cam.center()));
}

Eigen::Vector3d unproject_camera(const CameraModel& cam, const Eigen::Vector2d& pixel, double depth) {
    return {(pixel.x() - cam.cx) * depth / cam.fx, (pixel.y() - cam.cy) * depth / cam.fy, depth};
}

Eigen::Vector3d unproject(const CameraModel& cam, const Eigen::Vector2d& pixel, double depth) {
    if (!(depth > 0.0) || !std::isfinite(depth))
        throw InvalidDepthError("unproject: depth must be positive and finite, got " +
                                std::to_string(depth));
    return cam.rotation() * unproject_camera(cam, pixel, depth) + cam.center();
}

std::optional<Eigen::Vector2i> nearest_pixel(const CameraModel& cam, const Eigen::Vector2d& pixel) {
    const double u = std::floor(pixel.x() + 0.5);
    const double v = std::floor(pixel.y() + 0.5);
    if (!(u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height)) return std::nullopt;
    return Eigen::Vector2i(static_cast<int>(u), static_cast<int>(v));
}

}  // namespace viewfuse
