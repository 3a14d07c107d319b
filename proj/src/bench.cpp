#include "viewfuse/bench.hpp"

#include <chrono>
#include <cmath>

#include "viewfuse/projection.hpp"

namespace viewfuse {

OracleSequence oracle_sequence(const SynthScene& scene, int dilation_iters) {
    OracleSequence seq;
    seq.frames = scene.bundle.frames;
    ProjectionConfig pcfg;
    pcfg.dilation_iters = dilation_iters;
    const ProjectedMasks masks = project_masks(scene.bundle.mesh, seq.frames, pcfg);
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        seq.frames[i].mask = masks.final[i];
        const Mask& m = seq.frames[i].mask;
        seq.completed.push_back((m != 0).select(scene.bundle.clean_renders[i].depth, seq.frames[i].depth_cap));
    }
    return seq;
}

std::vector<ConsistencyView> consistency_views(const OracleSequence& seq, std::size_t n) {
    if (n > seq.frames.size()) throw DomainError("consistency_views: not enough frames");
    std::vector<ConsistencyView> views;
    for (std::size_t i = 0; i < n; ++i) {
        const Frame& f = seq.frames[i];
        views.push_back({&f.camera, &f.depth_cap, &seq.completed[i], &f.mask});
    }
    return views;
}

double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_exponent: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

BenchResult bench_consistency(const SynthScene& scene, const std::vector<int>& frame_counts, int repeats,
                              const ConsistencyConfig& cfg) {
    if (repeats < 1) throw DomainError("repeats must be >= 1");
    const OracleSequence seq = oracle_sequence(scene);
    BenchResult result;
    std::vector<double> xs, ys;
    for (int n : frame_counts) {
        if (n < 1 || static_cast<std::size_t>(n) > seq.frames.size())
            throw DomainError("bench frame count " + std::to_string(n) + " out of range");
        const auto views = consistency_views(seq, static_cast<std::size_t>(n));
        double best = 0.0;
        long checked = 0;
        for (int r = 0; r < repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const ConsistencyResult res = run_consistency(views, cfg);
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (r == 0 || s < best) best = s;
            checked = 0;
            for (const auto& c : res.counts) checked += c.hole;
        }
        result.points.push_back({n, best, checked});
        xs.push_back(n);
        ys.push_back(std::max(best, 1e-9));
    }
    result.exponent = xs.size() >= 2 ? fit_exponent(xs, ys) : 0.0;
    return result;
}

}  // namespace viewfuse
