#include <algorithm>
#include <regex>

#include "viewfuse/io.hpp"
#include "viewfuse/scene.hpp"

namespace viewfuse {

void Frame::validate() const {
    camera.validate();
    require_camera_size(camera, depth_cap, "frame depth");
    require_camera_size(camera, mask, "frame mask");
    if (color.rows() != camera.height || color.cols() != camera.width)
        throw DimensionMismatchError("frame color: size does not match camera");
    if ((mask > 1).any()) throw DomainError("frame mask values must be 0 or 1");
    if (!depth_cap.allFinite() || (depth_cap < 0.0).any())
        throw InvalidDepthError("frame depth must be finite and non-negative");
}

bool valid_subset(const DepthMap& a, const DepthMap& b) {
    if (!same_size(a, b)) return false;
    return !((a > 0.0) && !(b > 0.0)).any();
}

bool InpaintState::monotone() const {
    if (!valid_subset(stage_outputs[0], depth_pre)) return false;
    for (int j = 1; j < 4; ++j)
        if (!valid_subset(stage_outputs[j], stage_outputs[j - 1])) return false;
    return true;
}

void SceneBundle::validate() const {
    if (frames.empty()) throw EmptyInputError("bundle has no frames");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].id != static_cast<int>(i))
            throw DomainError("bundle frame ids must be dense 0..N-1");
        frames[i].validate();
    }
    if (!clean_renders.empty() && clean_renders.size() != frames.size())
        throw DimensionMismatchError("clean renders must match frame count");
    if (!mesh.vertices.empty()) mesh.validate();
}

namespace io {

namespace {

fs::path depth_file(const fs::path& dir, int index) {
    const auto png = dir / frame_name(index, ".png");
    if (fs::exists(png)) return png;
    const auto vfd = dir / frame_name(index, ".vfd");
    if (fs::exists(vfd)) return vfd;
    return png;
}

template <typename Raster>
void check_size(const Raster& r, const CameraModel& cam, const fs::path& path) {
    if (r.rows() != cam.height || r.cols() != cam.width)
        throw DimensionMismatchError("dimension mismatch in " + path.string() + ": " +
                                     std::to_string(r.cols()) + "x" + std::to_string(r.rows()) +
                                     " vs camera " + std::to_string(cam.width) + "x" +
                                     std::to_string(cam.height));
}

}  // namespace

SceneBundle load_bundle(const fs::path& dir, int stride) {
    if (stride < 1) throw DomainError("stride must be >= 1");
    const fs::path cam_dir = dir / "cameras";
    if (!fs::is_directory(cam_dir)) throw MissingFileError(cam_dir.string());

    std::vector<int> indices;
    static const std::regex pattern(R"((\d{6})\.json)");
    for (const auto& entry : fs::directory_iterator(cam_dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (std::regex_match(name, m, pattern)) indices.push_back(std::stoi(m[1]));
    }
    std::sort(indices.begin(), indices.end());
    if (indices.empty()) throw EmptyInputError("no cameras in " + cam_dir.string());

    const bool has_masks = fs::is_directory(dir / "mask");
    const bool has_clean = fs::is_directory(dir / "clean");

    SceneBundle bundle;
    for (std::size_t k = 0; k < indices.size(); k += static_cast<std::size_t>(stride)) {
        const int index = indices[k];
        Frame f;
        f.id = static_cast<int>(bundle.frames.size());
        f.source_index = index;
        f.camera = read_camera(cam_dir / frame_name(index, ".json"));

        const auto color_path = dir / "color" / frame_name(index, ".png");
        f.color = read_color_png(color_path);
        check_size(f.color, f.camera, color_path);

        const auto depth_path = depth_file(dir / "depth", index);
        f.depth_cap = read_depth(depth_path);
        check_size(f.depth_cap, f.camera, depth_path);

        if (has_masks) {
            const auto mask_path = dir / "mask" / frame_name(index, ".png");
            f.mask = read_mask_png(mask_path);
            check_size(f.mask, f.camera, mask_path);
        } else {
            f.mask = Mask::Zero(f.camera.height, f.camera.width);
        }

        if (has_clean) {
            CleanRender c;
            const auto cc = dir / "clean" / "color" / frame_name(index, ".png");
            c.color = read_color_png(cc);
            check_size(c.color, f.camera, cc);
            const auto cd = depth_file(dir / "clean" / "depth", index);
            c.depth = read_depth(cd);
            check_size(c.depth, f.camera, cd);
            bundle.clean_renders.push_back(std::move(c));
        }
        bundle.frames.push_back(std::move(f));
    }
    if (fs::exists(dir / "mesh.ply")) bundle.mesh = read_mesh_ply(dir / "mesh.ply");
    return bundle;
}

void save_masks(const std::vector<Frame>& frames, const fs::path& dir) {
    for (const auto& f : frames) write_mask_png(dir / "mask" / frame_name(f.source_index, ".png"), f.mask);
}

void save_bundle(const SceneBundle& bundle, const fs::path& dir, const SaveOptions& opts) {
    bundle.validate();
    const char* depth_ext = opts.lossless_depth ? ".vfd" : ".png";
    fs::create_directories(dir);
    for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
        const auto& f = bundle.frames[i];
        const int index = f.source_index;
        write_camera(dir / "cameras" / frame_name(index, ".json"), f.camera);
        write_color_png(dir / "color" / frame_name(index, ".png"), f.color);
        write_depth(dir / "depth" / frame_name(index, depth_ext), f.depth_cap);
        write_mask_png(dir / "mask" / frame_name(index, ".png"), f.mask);
        if (bundle.has_clean()) {
            write_color_png(dir / "clean" / "color" / frame_name(index, ".png"),
                            bundle.clean_renders[i].color);
            write_depth(dir / "clean" / "depth" / frame_name(index, depth_ext),
                        bundle.clean_renders[i].depth);
        }
    }
    if (!bundle.mesh.vertices.empty()) write_mesh_ply(dir / "mesh.ply", bundle.mesh);
}

}  // namespace io
}  // namespace viewfuse
