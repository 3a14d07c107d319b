#pragma once

#include <span>
#include <vector>

#include "viewfuse/mesh.hpp"
#include "viewfuse/raycast.hpp"
#include "viewfuse/scene.hpp"

namespace viewfuse {

struct ProjectionConfig {
    int dilation_iters = 6;
    double depth_agreement_tol = 0.05;  ///< meters
    int min_mask_pixels = 1;            ///< smaller raw masks are dropped

    void validate() const;
};

/// Clutter pixels of one view before dilation: the first mesh surface hit by
/// the pixel ray is clutter and its depth agrees with the captured depth.
Mask project_clutter(const RayCaster& caster, const LabeledMesh& mesh, const Frame& frame,
                     const ProjectionConfig& cfg);

/// `iterations` rounds of binary dilation with the 3x3 cross kernel.
Mask dilate_cross(const Mask& mask, int iterations);

struct ProjectedMasks {
    std::vector<Mask> raw;    ///< before dilation
    std::vector<Mask> final;  ///< dilated, united with each frame's own mask
};

/// Projects the clutter instances of `mesh` into every frame. Throws
/// MisalignmentError when fewer than 0.1% of the in-view clutter vertices
/// agree with the captured depth in any view.
ProjectedMasks project_masks(const LabeledMesh& mesh, std::span<const Frame> frames,
                             const ProjectionConfig& cfg = {});

/// Fraction of clutter vertices (among those projecting into some view) whose
/// depth agrees with the captured depth in at least one view.
double clutter_vertex_agreement(const LabeledMesh& mesh, std::span<const Frame> frames, double tol);

/// Color with masked pixels set to the fill value, depth zeroed under the
/// mask, and the hole mask itself.
struct MaskedFrame {
    ColorImage color;
    DepthMap depth;
    Mask hole;
};

inline constexpr std::uint8_t kHoleFill = 0;

MaskedFrame mask_frame(const Frame& frame, const Mask& mask);

}  // namespace viewfuse
