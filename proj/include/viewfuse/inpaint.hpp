#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "viewfuse/camera.hpp"
#include "viewfuse/image.hpp"
#include "viewfuse/scene.hpp"

namespace viewfuse {

enum class BackendKind { diffusion_color, planefit_depth, oracle, external };

/// Parses "diffusion", "diffusion_color", "planefit", "planefit_depth",
/// "oracle" or "external".
BackendKind parse_backend_kind(const std::string& name);
std::string to_string(BackendKind kind);

struct BackendSpec {
    BackendKind kind = BackendKind::diffusion_color;

    // Diffusion fill.
    int max_iterations = 2000;
    double color_tolerance = 1.0 / 255.0;  ///< on [0,1]-normalized values
    double depth_tolerance = 1e-4;         ///< meters

    // Plane fitting.
    double ransac_threshold = 0.01;  ///< meters
    int ransac_iterations = 200;
    int ransac_min_points = 3;
    int band_width = 50;    ///< pixels around a hole searched for support
    int color_levels = 4;   ///< per-channel quantization of the guidance image
    std::uint64_t seed = 0;

    // External process; the command sees VF_IN_COLOR, VF_IN_DEPTH, VF_IN_MASK
    // and VF_OUT in its environment.
    std::string command;
    int max_parallel = 1;

    void validate() const;
};

struct InpaintRequest {
    ColorImage color;  ///< holes carry the fill value
    DepthMap depth;    ///< 0 inside holes
    Mask hole;
    std::optional<ColorImage> guidance;  ///< inpainted color for guided depth completion
    const CameraModel* camera = nullptr;  ///< required by planefit_depth
    const CleanRender* truth = nullptr;   ///< required by the oracle backend
    int frame_id = 0;

    void validate() const;
};

/// Fills every hole pixel of the color image; other pixels are unchanged.
ColorImage inpaint_color(const InpaintRequest& req, const BackendSpec& spec);

struct DepthCompletion {
    DepthMap depth;
    Mask unfilled;  ///< hole pixels whose neighborhood had no valid depth
};

/// Like complete_depth but reports unfillable holes instead of throwing.
DepthCompletion complete_depth_partial(const InpaintRequest& req, const BackendSpec& spec);

/// Fills every hole pixel with positive depth; other pixels are unchanged.
/// Throws UnfillableError when a hole has no valid depth within band_width.
DepthMap complete_depth(const InpaintRequest& req, const BackendSpec& spec);

/// Supervision pair for training an external depth-completion model.
struct TrainingSample {
    Mask mask;        ///< m2 minus m1
    DepthMap masked;  ///< depth with `mask` zeroed
    DepthMap target;  ///< the unmodified depth
};

/// Pastes mask m2 (from another view, same resolution) onto the depth of a
/// frame whose own clutter mask is m1, never masking pixels inside m1.
TrainingSample synth_training_masks(const DepthMap& depth, const Mask& m1, const Mask& m2);

/// Deterministic choice of a different frame to borrow m2 from.
int pick_training_partner(int frame, int frame_count, std::uint64_t seed);

// Building blocks shared with the built-in backends.

/// Harmonic fill of `hole` pixels from known neighbors: onion-peel
/// initialization followed by Jacobi relaxation until the largest update is
/// below `tolerance` or `max_iterations` is reached. Pixels where
/// known == 0 and hole == 0 are neither sources nor filled.
/// Hole pixels with no path to a known pixel keep their input value and are
/// flagged in `unreached` when given.
Image<double> diffuse_fill(const Image<double>& values, const Mask& known, const Mask& hole,
                           double tolerance, int max_iterations, Mask* unreached = nullptr);

/// External-process adapter; see BackendSpec::command.
ColorImage external_inpaint_color(const InpaintRequest& req, const BackendSpec& spec);
DepthMap external_complete_depth(const InpaintRequest& req, const BackendSpec& spec);

}  // namespace viewfuse
