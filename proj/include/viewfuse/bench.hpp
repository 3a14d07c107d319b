#pragma once

#include <vector>

#include "viewfuse/consistency.hpp"
#include "viewfuse/synth.hpp"

namespace viewfuse {

struct BenchPoint {
    int frames;
    double seconds;  ///< best of the repeats
    long checked_pixels;
};

struct BenchResult {
    std::vector<BenchPoint> points;
    double exponent;  ///< least-squares slope of log(seconds) over log(frames)
};

/// Inputs of one consistency pass on a synthetic scene: projected and
/// dilated clutter masks with ground-truth depth inpainted under them.
struct OracleSequence {
    std::vector<Frame> frames;
    std::vector<DepthMap> completed;
};

OracleSequence oracle_sequence(const SynthScene& scene, int dilation_iters = 6);

/// Views over the first `n` frames of a sequence.
std::vector<ConsistencyView> consistency_views(const OracleSequence& seq, std::size_t n);

/// Times run_consistency over the first N frames for each N of
/// `frame_counts` (ascending, at most the scene's camera count).
BenchResult bench_consistency(const SynthScene& scene, const std::vector<int>& frame_counts, int repeats,
                              const ConsistencyConfig& cfg);

/// Slope of the least-squares line through (log x, log y).
double fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace viewfuse
