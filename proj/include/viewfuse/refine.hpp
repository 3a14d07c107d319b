#pragma once

#include <functional>
#include <span>
#include <vector>

#include "viewfuse/consistency.hpp"
#include "viewfuse/inpaint.hpp"
#include "viewfuse/scene.hpp"

#include "json.hpp"

namespace viewfuse {

struct RefineConfig {
    int max_iterations = 10;
    long min_progress_pixels = 1;
    double fuse_max_depth = 3.5;             ///< meters
    std::size_t fuse_max_points = 16000000;
    double tsdf_voxel = 0.02;                ///< meters
    double tsdf_trunc = 0.08;                ///< meters
    std::size_t tsdf_max_voxels = 64u << 20;  ///< grid memory cap
    std::uint64_t seed = 0;                  ///< point subsampling
    bool fallback = true;  ///< unconstrained last pass over holes left at the end

    void validate() const;
};

/// Color and depth inpainting used by refine. Both are called once per frame
/// per iteration, possibly concurrently for different frames.
struct Inpainter {
    std::function<ColorImage(const InpaintRequest&)> color;
    std::function<DepthCompletion(const InpaintRequest&)> depth;
};

/// Built-in or external backends selected by spec.
Inpainter make_inpainter(const BackendSpec& color_spec, const BackendSpec& depth_spec);

struct IterationReport {
    int iteration = 0;                 ///< 1-based
    long residual_before = 0;          ///< holes handed to the inpainters
    long residual_after = 0;           ///< holes left for the next iteration
    long accepted = 0;                 ///< hole pixels that survived all stages
    long unobservable = 0;             ///< holes dropped because d_cap is empty
    std::vector<StageCounts> frames;   ///< per-frame consistency counts
    double seconds = 0.0;
};

struct RefineReport {
    std::vector<IterationReport> iterations;
    bool converged = false;        ///< residual emptied without fallback
    bool fallback_used = false;
    long fallback_pixels = 0;      ///< holes filled by the fallback pass
    long unfilled_pixels = 0;      ///< holes still empty at the end

    nlohmann::json to_json() const;
};

struct RefineResult {
    std::vector<InpaintState> states;  ///< final color/depth; stages of the last pass
    RefineReport report;
};

/// Iterative inpainting with consistency pruning. Hole pixels are each
/// frame's clutter mask. Per iteration, residual holes are inpainted, all
/// four checks run on them, survivors are frozen and pruned pixels with a
/// valid capture become the next residual. Stops when the residual is empty,
/// at max_iterations, or when fewer than min_progress_pixels were accepted.
/// `truth` (one per frame, or empty) is passed to the backends as the oracle.
RefineResult refine(std::span<const Frame> frames, std::span<const CleanRender> truth,
                    const Inpainter& inpainter, const ConsistencyConfig& ccfg,
                    const RefineConfig& rcfg);

}  // namespace viewfuse
