#include "viewfuse/warp.hpp"

#include <string>

#include "viewfuse/parallel.hpp"

namespace viewfuse {

Eigen::Isometry3d relative_transform(const CameraModel& src_cam, const CameraModel& dst_cam) {
    return dst_cam.world_to_camera() * src_cam.camera_to_world();
}

NormalMap normal_map(const CameraModel& cam, const DepthMap& depth, double max_jump, double parallel_tol) {
    require_camera_size(cam, depth, "normal_map depth");
    const int w = cam.width, h = cam.height;
    std::vector<Eigen::Vector3d> pts(static_cast<std::size_t>(w) * h, Eigen::Vector3d::Zero());
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            if (depth(v, u) > 0.0) pts[static_cast<std::size_t>(v) * w + u] = unproject_camera(cam, Eigen::Vector2d(u, v), depth(v, u));

    NormalMap out{w, h, std::vector<Eigen::Vector3d>(pts.size(), Eigen::Vector3d::Zero())};
    auto parallel = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
        return a.dot(b) > 0.0 && a.cross(b).norm() <= parallel_tol * a.norm() * b.norm();
    };
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
        const int v = static_cast<int>(row);
        for (int u = 0; u < w; ++u) {
            const double z = depth(v, u);
            if (!(z > 0.0)) continue;
            // Neighbor k steps along (du, dv), if it continues the same surface.
            auto step = [&](int du, int dv, int k, double ref) -> const Eigen::Vector3d* {
                const int uu = u + k * du, vv = v + k * dv;
                if (uu < 0 || vv < 0 || uu >= w || vv >= h) return nullptr;
                const double d = depth(vv, uu);
                if (!(d > 0.0) || std::abs(d - ref) > max_jump * ref) return nullptr;
                return &pts[static_cast<std::size_t>(vv) * w + uu];
            };
            const Eigen::Vector3d& p = pts[static_cast<std::size_t>(v) * w + u];
            auto axis = [&](int du, int dv, Eigen::Vector3d& out_diff) {
                const Eigen::Vector3d* f1 = step(du, dv, 1, z);
                const Eigen::Vector3d* b1 = step(-du, -dv, 1, z);
                if (f1 && b1 && parallel(*f1 - p, p - *b1)) {
                    out_diff = *f1 - *b1;
                    return true;
                }
                if (f1) {
                    const Eigen::Vector3d* f2 = step(du, dv, 2, (*f1).z());
                    if (f2 && parallel(*f2 - *f1, *f1 - p)) {
                        out_diff = *f1 - p;
                        return true;
                    }
                }
                if (b1) {
                    const Eigen::Vector3d* b2 = step(-du, -dv, 2, (*b1).z());
                    if (b2 && parallel(*b1 - *b2, p - *b1)) {
                        out_diff = p - *b1;
                        return true;
                    }
                }
                return false;
            };
            Eigen::Vector3d dx, dy;
            if (!axis(1, 0, dx) || !axis(0, 1, dy)) continue;
            Eigen::Vector3d n = dx.cross(dy);
            const double len = n.norm();
            if (!(len > 0.0)) continue;
            n /= len;
            out.normal[static_cast<std::size_t>(v) * w + u] = n.dot(p) > 0.0 ? Eigen::Vector3d(-n) : n;
        }
    });
    return out;
}

std::optional<Landing> warp_point(const Eigen::Isometry3d& rel, const CameraModel& src_cam,
                                  const CameraModel& dst_cam, int u, int v, double depth,
                                  bool* behind, const Eigen::Vector3d* normal, double max_jump) {
    const Eigen::Vector3d p = rel * unproject_camera(src_cam, Eigen::Vector2d(u, v), depth);
    const auto proj = project_camera(dst_cam, p);
    if (behind) *behind = !proj;
    if (!proj) return std::nullopt;
    const auto px = nearest_pixel(dst_cam, proj->pixel);
    if (!px) return std::nullopt;
    Landing land{px->x(), px->y(), proj->depth, proj->depth};
    if (normal && !normal->isZero()) {
        const Eigen::Vector3d n = rel.linear() * *normal;
        const Eigen::Vector3d ray((land.u - dst_cam.cx) / dst_cam.fx, (land.v - dst_cam.cy) / dst_cam.fy, 1.0);
        const double denom = n.dot(ray);
        // Grazing rays (under ~3 degrees) make the intersection unstable.
        if (std::abs(denom) > 0.05 * ray.norm()) {
            const double z = n.dot(p) / denom;
            if (z > 0.0 && std::abs(z - land.depth) <= max_jump * land.depth) land.depth = z;
        }
    }
    return land;
}

std::vector<WarpedPixel> forward_map(const DepthMap& src, const CameraModel& src_cam,
                                     const CameraModel& dst_cam, const Mask* select,
                                     WarpStats* stats, const NormalMap* normals) {
    require_camera_size(src_cam, src, "warp source");
    if (select) require_same_size(src, *select, "warp selection mask");
    if (normals && (normals->width != src.cols() || normals->height != src.rows()))
        throw DimensionMismatchError("warp normals: size mismatch");

    const Eigen::Isometry3d rel = relative_transform(src_cam, dst_cam);
    std::vector<WarpedPixel> out;
    WarpStats local;
    for (int v = 0; v < src.rows(); ++v) {
        for (int u = 0; u < src.cols(); ++u) {
            const double d = src(v, u);
            if (!(d > 0.0)) continue;
            if (select && (*select)(v, u) == 0) continue;
            bool behind = false;
            const auto land = warp_point(rel, src_cam, dst_cam, u, v, d, &behind,
                                         normals ? &normals->at(u, v) : nullptr);
            if (!land) {
                ++(behind ? local.behind_camera : local.out_of_bounds);
                continue;
            }
            out.push_back({u, v, land->u, land->v, land->depth});
        }
    }
    if (stats) *stats = local;
    return out;
}

namespace {

WarpResult warp_with(const DepthView& src, const CameraModel& dst_cam) {
    WarpResult r;
    const auto mapped = forward_map(*src.depth, *src.camera, dst_cam, src.select, &r.stats, src.normals);
    r.depth = DepthMap::Zero(dst_cam.height, dst_cam.width);
    r.source_depth = DepthMap::Zero(dst_cam.height, dst_cam.width);
    for (const auto& w : mapped) {
        double& slot = r.depth(w.dst_v, w.dst_u);
        if (slot > 0.0) {
            ++r.stats.collisions;
            if (w.depth >= slot) continue;
        } else {
            ++r.stats.written;
        }
        slot = w.depth;
        r.source_depth(w.dst_v, w.dst_u) = (*src.depth)(w.src_v, w.src_u);
    }
    return r;
}

}  // namespace

WarpResult warp_depth(const DepthMap& src, const CameraModel& src_cam, const CameraModel& dst_cam,
                      const Mask* select, bool plane_correction) {
    require_camera_size(src_cam, src, "warp source");
    std::optional<NormalMap> normals;
    if (plane_correction) normals = normal_map(src_cam, src);
    return warp_with({&src, &src_cam, select, normals ? &*normals : nullptr}, dst_cam);
}

std::vector<PairWarp> warp_all_pairs(std::span<const DepthView> input, bool plane_correction) {
    const int n = static_cast<int>(input.size());
    std::vector<PairWarp> out;
    if (n < 2) return out;
    std::vector<DepthView> views(input.begin(), input.end());
    std::vector<NormalMap> normals(views.size());
    parallel_for(views.size(), [&](std::size_t i) {
        if (!plane_correction) {
            views[i].normals = nullptr;
            return;
        }
        const auto& cam = *views[i].camera;
        // Size errors are reported per pair below.
        if (views[i].normals || views[i].depth->rows() != cam.height || views[i].depth->cols() != cam.width) return;
        normals[i] = normal_map(cam, *views[i].depth);
        views[i].normals = &normals[i];
    });
    out.resize(static_cast<std::size_t>(n) * (n - 1));
    for (int s = 0, k = 0; s < n; ++s)
        for (int t = 0; t < n; ++t)
            if (s != t) {
                out[k].source = s;
                out[k].target = t;
                ++k;
            }
    parallel_for(out.size(), [&](std::size_t k) {
        auto& pw = out[k];
        const auto& sv = views[pw.source];
        const auto& tv = views[pw.target];
        try {
            pw.result = warp_with(sv, *tv.camera);
        } catch (const Error& e) {
            throw DimensionMismatchError("warp " + std::to_string(pw.source) + "->" +
                                         std::to_string(pw.target) + ": " + e.what());
        }
    });
    return out;
}

}  // namespace viewfuse
