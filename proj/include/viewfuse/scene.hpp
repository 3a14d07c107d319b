#pragma once

#include <array>
#include <optional>
#include <vector>

#include "viewfuse/camera.hpp"
#include "viewfuse/image.hpp"
#include "viewfuse/mesh.hpp"
#include "viewfuse/warp.hpp"

namespace viewfuse {

/// One posed RGB-D capture.
struct Frame {
    int id = 0;               ///< dense view index within the bundle
    int source_index = 0;     ///< index in the raw sequence on disk
    ColorImage color;
    DepthMap depth_cap;       ///< captured depth
    Mask mask;                ///< clutter mask, {0,1}
    CameraModel camera;

    /// Throws DimensionMismatchError / DomainError on broken invariants.
    void validate() const;

    DepthView depth_view(const Mask* select = nullptr) const {
        return {&depth_cap, &camera, select};
    }
};

/// Ground-truth clean render of one view.
struct CleanRender {
    ColorImage color;
    DepthMap depth;
};

/// Evolving inpainting record for one frame.
struct InpaintState {
    ColorImage color_pre;
    DepthMap depth_pre;
    std::array<DepthMap, 4> stage_outputs;  ///< pixel, region, cross-frame, voting
    Mask residual_mask;

    /// True when every stage's valid set is contained in the previous one.
    bool monotone() const;
};

/// A sequence of frames with the labeled mesh and optional ground truth.
struct SceneBundle {
    std::vector<Frame> frames;
    LabeledMesh mesh;
    std::vector<CleanRender> clean_renders;  ///< empty, or one per frame

    void validate() const;
    bool has_clean() const { return !clean_renders.empty(); }
};

/// valid(a) is a subset of valid(b).
bool valid_subset(const DepthMap& a, const DepthMap& b);

}  // namespace viewfuse
