#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "viewfuse/camera.hpp"
#include "viewfuse/image.hpp"
#include "viewfuse/regions.hpp"
#include "viewfuse/warp.hpp"

namespace viewfuse {

/// How a connected hole region compares captured and inpainted depth.
enum class RegionAggregate { mean, min, all_pixels };

RegionAggregate parse_region_aggregate(const std::string& name);
std::string to_string(RegionAggregate a);

struct ConsistencyConfig {
    double alpha = 0.05;               ///< voting agreement distance, meters
    double beta_percent = 30.0;        ///< voting keeps r_alpha > beta%
    double max_region_fraction = 0.5;  ///< larger hole regions are dropped
    /// Slack on "inpainted depth must not be in front of captured depth",
    /// used by the pixel, region and cross-frame rules. Meters.
    double occlusion_tol = 0.01;
    /// Radius of the min filter applied to target captured depth before the
    /// cross-frame occlusion test; 0 compares against the landing pixel only.
    int occlusion_window = 1;
    /// Voting compares d_pre against warped depths within this pixel radius,
    /// absorbing the one-pixel gaps and overhangs of nearest-pixel splats at
    /// depth edges.
    int vote_window = 1;
    int connectivity = 4;
    RegionAggregate region_aggregate = RegionAggregate::mean;
    bool strict_voting = false;  ///< drop pixels no other view supports
    /// Land warped depths on the source pixel's tangent plane (see warp_point).
    bool plane_correction = true;

    // Stage switches for ablations; a disabled stage passes its input through.
    bool single_prune = true;
    bool cross_prune = true;
    bool voting = true;

    void validate() const;
};

/// Borrowed per-view inputs of the consistency checks.
struct ConsistencyView {
    const CameraModel* camera;
    const DepthMap* captured;   ///< d_cap, the original capture (clutter included)
    const DepthMap* completed;  ///< d_pre
    const Mask* hole;           ///< pixels inpainted in this pass, the ones checked
    const NormalMap* normals = nullptr;  ///< of d_pre; computed on demand when absent

    void validate() const;
};

/// d_con1: a hole pixel keeps d_pre only when the captured depth there is
/// valid and d_pre > d_cap - occlusion_tol; other hole pixels become 0.
/// Pixels outside the hole carry d_pre (the capture, on a first pass).
DepthMap prune_single_pixel(const DepthMap& captured, const DepthMap& completed, const Mask& hole,
                            const ConsistencyConfig& cfg);

/// d_con2: each connected hole region keeps its d_con1 values only when the
/// aggregate rule d_pre(i) > d_cap(i) - occlusion_tol holds and the region
/// covers at most max_region_fraction of the image; otherwise it is zeroed.
DepthMap prune_single_region(const DepthMap& captured, const DepthMap& completed,
                             const DepthMap& stage1, const Mask& hole, const ConsistencyConfig& cfg);

/// Captured depth min-filtered over a (2r+1)^2 window, ignoring invalid
/// pixels; 0 where the window has no valid pixel.
DepthMap min_filter_valid(const DepthMap& depth, int radius);

/// d_con3 for every view: a hole pixel of view s is zeroed when its d_pre,
/// warped into any other view t, lands in front of t's (min-filtered)
/// captured depth by more than occlusion_tol. With plane correction both the
/// corrected and the uncorrected landing depth must be in front, so a
/// tangent plane extrapolated past a crease cannot cause a violation.
std::vector<DepthMap> prune_cross_frame(std::span<const ConsistencyView> views,
                                        std::span<const DepthMap> stage2,
                                        const ConsistencyConfig& cfg);

struct VoteCounts {
    Image<int> support;  ///< views that vote on the pixel
    Image<int> agree;    ///< of those, views that agree with d_pre
};

/// Support and agreement counts for view s (hole pixels only).
///
/// Each other view t splats its whole d_pre into s with z-buffering. For a
/// hole pixel p with point X = d_pre(p):
///  - t votes only if X projects inside t and something of t landed within
///    vote_window of p;
///  - t agrees if a landing in that window is within alpha of d_pre(p), or
///    t's own d_pre within vote_window of X's projection is within alpha of
///    X's depth in t;
///  - t abstains when it does not agree, its landings do not cover the
///    whole window in front of X, and t's d_pre has X hidden by more than
///    alpha (t never saw X, so whatever it shows behind X says nothing).
VoteCounts vote_counts(std::span<const ConsistencyView> views, std::size_t s,
                       const ConsistencyConfig& cfg);

/// d_con4 for every view: a hole pixel survives when more than beta% of
/// its votes agree (see vote_counts). Pixels without votes survive unless
/// strict_voting.
std::vector<DepthMap> vote_cross_frame(std::span<const ConsistencyView> views,
                                       std::span<const DepthMap> stage3,
                                       const ConsistencyConfig& cfg);

/// Per-frame pixel counts of one consistency pass.
struct StageCounts {
    long hole = 0;          ///< checked pixels
    long filled = 0;        ///< checked pixels with d_pre > 0
    std::array<long, 4> survived{};  ///< checked pixels valid after each stage
    long zero_support = 0;  ///< checked pixels reaching voting without support
};

struct ConsistencyResult {
    std::vector<std::array<DepthMap, 4>> stages;
    std::vector<StageCounts> counts;
};

/// Views with d_pre normals filled in when plane correction is on; `storage`
/// owns the computed maps.
std::vector<ConsistencyView> with_normals(std::span<const ConsistencyView> views, const ConsistencyConfig& cfg,
                                          std::vector<NormalMap>& storage);

/// All four stages in order, honoring the ablation switches.
ConsistencyResult run_consistency(std::span<const ConsistencyView> views, const ConsistencyConfig& cfg);

}  // namespace viewfuse
