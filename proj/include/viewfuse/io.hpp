#pragma once

#include <filesystem>
#include <string>

#include "viewfuse/camera.hpp"
#include "viewfuse/image.hpp"
#include "viewfuse/mesh.hpp"
#include "viewfuse/scene.hpp"

#include "json.hpp"

namespace viewfuse::io {

namespace fs = std::filesystem;

ColorImage read_color_png(const fs::path& path);
void write_color_png(const fs::path& path, const ColorImage& image);

/// 8-bit mask PNG; any nonzero value reads as 1, written as 0/255.
Mask read_mask_png(const fs::path& path);
void write_mask_png(const fs::path& path, const Mask& mask);

/// 16-bit grayscale PNG holding millimeters; 0 is invalid.
DepthMap read_depth_png(const fs::path& path);
/// Depth is rounded to the nearest millimeter and clamped to 65535.
void write_depth_png(const fs::path& path, const DepthMap& depth);

/// Lossless float container: 16-byte header {"VFD1", width u32, height u32,
/// scale f32} followed by width*height little-endian f32 values; meters =
/// value * scale.
DepthMap read_depth_vfd(const fs::path& path);
void write_depth_vfd(const fs::path& path, const DepthMap& depth, float scale = 1.0f);

/// Dispatches on extension: ".png" (millimeters) or ".vfd".
DepthMap read_depth(const fs::path& path);
void write_depth(const fs::path& path, const DepthMap& depth);

CameraModel camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const CameraModel& cam);
CameraModel read_camera(const fs::path& path);
void write_camera(const fs::path& path, const CameraModel& cam);

/// Binary little-endian PLY. The labeled mesh carries per-vertex
/// `instance_id:int32` and `clutter:uint8`, plus rgb when present. Reading
/// accepts ascii or binary_little_endian files with any scalar types; label
/// properties default to 0 when missing.
LabeledMesh read_mesh_ply(const fs::path& path);
void write_mesh_ply(const fs::path& path, const LabeledMesh& mesh);
void write_mesh_ply(const fs::path& path, const TriangleMesh& mesh);

/// Per-vertex class probabilities: 16-byte header {"VFP1", count u32,
/// classes u32 (= 2), reserved u32} followed by count rows of two
/// little-endian f32 values (non-clutter, clutter).
Eigen::Matrix<double, Eigen::Dynamic, 2> read_probs(const fs::path& path);
void write_probs(const fs::path& path, const Eigen::Matrix<double, Eigen::Dynamic, 2>& probs);

/// Zero-padded six digit frame file name, e.g. "000042.png".
std::string frame_name(int index, const char* ext);

nlohmann::json read_json(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& j);

}  // namespace viewfuse::io

namespace viewfuse::io {

struct SaveOptions {
    bool lossless_depth = false;  ///< write depth as .vfd instead of 16-bit PNG
};

/// Loads a bundle directory:
///   cameras/%06d.json color/%06d.png depth/%06d.{png,vfd} mask/%06d.png
///   mesh.ply clean/color/%06d.png clean/depth/%06d.{png,vfd}
/// Frames are enumerated from cameras/ and every `stride`-th one is kept.
/// The mask directory, mesh.ply and clean/ are optional as a whole; once
/// present, every selected frame must have its file.
SceneBundle load_bundle(const fs::path& dir, int stride = 5);

/// Writes the bundle; frame files are named by Frame::source_index.
void save_bundle(const SceneBundle& bundle, const fs::path& dir, const SaveOptions& opts = {});

/// Writes mask/%06d.png for each frame.
void save_masks(const std::vector<Frame>& frames, const fs::path& dir);

}  // namespace viewfuse::io
