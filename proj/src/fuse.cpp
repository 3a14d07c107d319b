#include "viewfuse/fuse.hpp"

#include <fstream>

#include "viewfuse/parallel.hpp"
#include "viewfuse/random.hpp"

namespace viewfuse {

std::vector<FuseView> fuse_views(std::span<const Frame> frames, std::span<const InpaintState> states) {
    if (frames.size() != states.size())
        throw DimensionMismatchError("fuse_views: frame and state counts differ");
    std::vector<FuseView> out;
    for (std::size_t i = 0; i < frames.size(); ++i)
        out.push_back({frames[i].id, &frames[i].camera, &states[i].color_pre, &states[i].depth_pre});
    return out;
}

std::vector<FuseView> fuse_views(std::span<const Frame> frames) {
    std::vector<FuseView> out;
    for (const auto& f : frames) out.push_back({f.id, &f.camera, &f.color, &f.depth_cap});
    return out;
}

Eigen::Vector3d depth_normal(const CameraModel& cam, const DepthMap& depth, int u, int v,
                             double max_jump) {
    const double z = depth(v, u);
    const Eigen::Vector3d p = unproject_camera(cam, Eigen::Vector2d(u, v), z);
    auto usable = [&](int uu, int vv) {
        if (uu < 0 || vv < 0 || uu >= depth.cols() || vv >= depth.rows()) return false;
        const double d = depth(vv, uu);
        return d > 0.0 && std::abs(d - z) <= max_jump * z;
    };
    auto at = [&](int uu, int vv) { return unproject_camera(cam, Eigen::Vector2d(uu, vv), depth(vv, uu)); };
    auto diff = [&](int du, int dv, Eigen::Vector3d& out) {
        const bool fwd = usable(u + du, v + dv), back = usable(u - du, v - dv);
        if (fwd && back) out = at(u + du, v + dv) - at(u - du, v - dv);
        else if (fwd) out = at(u + du, v + dv) - p;
        else if (back) out = p - at(u - du, v - dv);
        else return false;
        return true;
    };
    Eigen::Vector3d dx, dy;
    if (diff(1, 0, dx) && diff(0, 1, dy)) {
        Eigen::Vector3d n = dx.cross(dy);
        const double len = n.norm();
        if (len > 0.0) {
            n /= len;
            return n.dot(p) > 0.0 ? Eigen::Vector3d(-n) : n;
        }
    }
    return -p.normalized();
}

FusedCloud fuse(std::span<const FuseView> views, const RefineConfig& cfg) {
    cfg.validate();
    std::vector<FusedCloud> parts(views.size());
    parallel_for(views.size(), [&](std::size_t i) {
        const FuseView& view = views[i];
        const CameraModel& cam = *view.camera;
        require_camera_size(cam, *view.depth, "fuse depth");
        require_camera_size(cam, *view.color, "fuse color");
        const Eigen::Matrix3d r = cam.rotation();
        FusedCloud& part = parts[i];
        for (int v = 0; v < cam.height; ++v)
            for (int u = 0; u < cam.width; ++u) {
                const double d = (*view.depth)(v, u);
                if (!(d > 0.0) || d > cfg.fuse_max_depth) continue;
                part.points.push_back(unproject(cam, Eigen::Vector2d(u, v), d));
                part.normals.push_back((r * depth_normal(cam, *view.depth, u, v)).normalized());
                part.colors.push_back(Rgb(view.color->channel[0](v, u), view.color->channel[1](v, u),
                                          view.color->channel[2](v, u)));
                part.source.push_back({view.id, u, v});
            }
    });
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    if (total == 0) throw EmptyInputError("fuse: no valid depth within range");

    // Selection sampling keeps exactly fuse_max_points in original order.
    std::vector<bool> keep(total, true);
    if (total > cfg.fuse_max_points) {
        Rng rng(cfg.seed);
        std::size_t needed = cfg.fuse_max_points;
        for (std::size_t k = 0; k < total; ++k) {
            keep[k] = rng.uniform() * static_cast<double>(total - k) < static_cast<double>(needed);
            if (keep[k]) --needed;
        }
    }
    FusedCloud out;
    const std::size_t n_out = std::min(total, cfg.fuse_max_points);
    out.points.reserve(n_out);
    out.normals.reserve(n_out);
    out.colors.reserve(n_out);
    out.source.reserve(n_out);
    std::size_t k = 0;
    for (const auto& p : parts)
        for (std::size_t j = 0; j < p.size(); ++j, ++k) {
            if (!keep[k]) continue;
            out.points.push_back(p.points[j]);
            out.normals.push_back(p.normals[j]);
            out.colors.push_back(p.colors[j]);
            out.source.push_back(p.source[j]);
        }
    return out;
}

namespace {

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

void write_cloud_ply(const std::filesystem::path& path, const FusedCloud& cloud) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    out << "property float nx\nproperty float ny\nproperty float nz\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (int k = 0; k < 3; ++k) put(out, static_cast<float>(cloud.points[i][k]));
        for (int k = 0; k < 3; ++k) put(out, static_cast<float>(cloud.normals[i][k]));
        for (int k = 0; k < 3; ++k) put(out, cloud.colors[i][k]);
    }
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace viewfuse
