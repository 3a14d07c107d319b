#include "viewfuse/refine.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "viewfuse/parallel.hpp"
#include "viewfuse/projection.hpp"

namespace viewfuse {

void RefineConfig::validate() const {
    if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
    if (min_progress_pixels < 0) throw DomainError("min_progress_pixels must be >= 0");
    if (!(fuse_max_depth > 0.0)) throw DomainError("fuse_max_depth must be > 0");
    if (fuse_max_points == 0) throw DomainError("fuse_max_points must be > 0");
    if (!(tsdf_voxel > 0.0)) throw DomainError("tsdf_voxel must be > 0");
    if (!(tsdf_trunc >= tsdf_voxel)) throw DomainError("tsdf_trunc must be >= tsdf_voxel");
}

Inpainter make_inpainter(const BackendSpec& color_spec, const BackendSpec& depth_spec) {
    color_spec.validate();
    depth_spec.validate();
    return {
        [color_spec](const InpaintRequest& req) { return inpaint_color(req, color_spec); },
        [depth_spec](const InpaintRequest& req) { return complete_depth_partial(req, depth_spec); },
    };
}

nlohmann::json RefineReport::to_json() const {
    nlohmann::json its = nlohmann::json::array();
    for (const auto& it : iterations) {
        nlohmann::json frames_json = nlohmann::json::array();
        for (std::size_t f = 0; f < it.frames.size(); ++f) {
            const auto& c = it.frames[f];
            frames_json.push_back({{"frame", f},
                                   {"hole", c.hole},
                                   {"filled", c.filled},
                                   {"single_pixel", c.survived[0]},
                                   {"single_region", c.survived[1]},
                                   {"cross_frame", c.survived[2]},
                                   {"voting", c.survived[3]},
                                   {"zero_support", c.zero_support}});
        }
        its.push_back({{"iteration", it.iteration},
                       {"residual_before", it.residual_before},
                       {"residual_after", it.residual_after},
                       {"accepted", it.accepted},
                       {"unobservable", it.unobservable},
                       {"seconds", it.seconds},
                       {"frames", frames_json}});
    }
    return {{"iterations", its},
            {"converged", converged},
            {"fallback_used", fallback_used},
            {"fallback_pixels", fallback_pixels},
            {"unfilled_pixels", unfilled_pixels}};
}

namespace {

struct Pass {
    ColorImage color;
    DepthMap depth;
};

InpaintRequest make_request(const Frame& frame, const ColorImage& color, const DepthMap& depth,
                            const Mask& residual, const CleanRender* truth) {
    InpaintRequest req;
    req.color = color;
    req.depth = depth;
    req.hole = residual;
    for (auto& ch : req.color.channel) ch = (residual != 0).select(std::uint8_t{kHoleFill}, ch);
    req.depth = (residual != 0).select(0.0, req.depth);
    req.camera = &frame.camera;
    req.truth = truth;
    req.frame_id = frame.id;
    return req;
}

Pass run_inpainters(const Inpainter& inpainter, InpaintRequest req, int iteration) {
    try {
        Pass p;
        p.color = inpainter.color(req);
        req.guidance = p.color;
        DepthCompletion dc = inpainter.depth(req);
        require_same_size(dc.depth, req.depth, "inpainted depth");
        p.depth = (req.hole != 0).select(dc.depth.max(0.0), req.depth);
        require_same_size(p.color, req.color, "inpainted color");
        return p;
    } catch (const Error& e) {
        throw BackendError("iteration " + std::to_string(iteration) + ", frame " +
                           std::to_string(req.frame_id) + ": " + e.what());
    }
}

template <typename T>
void paste(Image<T>& dst, const Image<T>& src, const Mask& where) {
    dst = (where != 0).select(src, dst);
}

void paste(ColorImage& dst, const ColorImage& src, const Mask& where) {
    for (int c = 0; c < 3; ++c) paste(dst.channel[c], src.channel[c], where);
}

}  // namespace

RefineResult refine(std::span<const Frame> frames, std::span<const CleanRender> truth,
                    const Inpainter& inpainter, const ConsistencyConfig& ccfg,
                    const RefineConfig& rcfg) {
    ccfg.validate();
    rcfg.validate();
    if (frames.empty()) throw EmptyInputError("refine: no frames");
    if (!truth.empty() && truth.size() != frames.size())
        throw DimensionMismatchError("refine: truth count does not match frame count");
    const std::size_t n = frames.size();
    for (const auto& f : frames) f.validate();

    RefineResult result;
    result.states.resize(n);
    std::vector<Mask> residual(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Frame& f = frames[i];
        auto& st = result.states[i];
        st.color_pre = f.color;
        st.depth_pre = (f.mask != 0).select(0.0, f.depth_cap);
        for (auto& s : st.stage_outputs) s = st.depth_pre;
        residual[i] = f.mask;
    }
    auto truth_of = [&](std::size_t i) { return truth.empty() ? nullptr : &truth[i]; };
    auto total = [](const std::vector<Mask>& masks) {
        long s = 0;
        for (const auto& m : masks) s += count(m);
        return s;
    };

    long remaining = total(residual);
    for (int iter = 1; iter <= rcfg.max_iterations && remaining > 0; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        IterationReport rep;
        rep.iteration = iter;
        rep.residual_before = remaining;

        std::vector<Pass> pass(n);
        parallel_for(n, [&](std::size_t i) {
            const auto& st = result.states[i];
            if (count(residual[i]) == 0) {
                pass[i] = {st.color_pre, st.depth_pre};
                return;
            }
            pass[i] = run_inpainters(
                inpainter, make_request(frames[i], st.color_pre, st.depth_pre, residual[i], truth_of(i)),
                iter);
        });

        std::vector<ConsistencyView> views(n);
        for (std::size_t i = 0; i < n; ++i)
            views[i] = {&frames[i].camera, &frames[i].depth_cap, &pass[i].depth, &residual[i]};
        ConsistencyResult cons = run_consistency(views, ccfg);

        std::vector<long> accepted(n, 0), dropped(n, 0);
        parallel_for(n, [&](std::size_t i) {
            auto& st = result.states[i];
            const Mask& hole = residual[i];
            const DepthMap& final_stage = cons.stages[i][3];
            const Mask keep = ((hole != 0) && (final_stage > 0.0)).cast<std::uint8_t>();
            const Mask dead = ((hole != 0) && !(final_stage > 0.0) && !(frames[i].depth_cap > 0.0))
                                  .cast<std::uint8_t>();
            paste(st.depth_pre, pass[i].depth, keep);
            paste(st.color_pre, pass[i].color, keep);
            paste(st.color_pre, pass[i].color, dead);
            st.stage_outputs = std::move(cons.stages[i]);
            residual[i] = ((hole != 0) && (keep == 0) && (dead == 0)).cast<std::uint8_t>();
            accepted[i] = count(keep);
            dropped[i] = count(dead);
        });

        rep.frames = std::move(cons.counts);
        for (std::size_t i = 0; i < n; ++i) {
            rep.accepted += accepted[i];
            rep.unobservable += dropped[i];
        }
        remaining = total(residual);
        rep.residual_after = remaining;
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        spdlog::info("refine iteration {}: {} holes, {} accepted, {} left", iter, rep.residual_before,
                     rep.accepted, rep.residual_after);
        const long progress = rep.residual_before - remaining;
        result.report.iterations.push_back(std::move(rep));
        if (progress < rcfg.min_progress_pixels) break;
    }

    result.report.converged = remaining == 0;
    if (remaining > 0 && rcfg.fallback) {
        spdlog::warn("refine stopped with {} holes; running unconstrained fallback pass", remaining);
        result.report.fallback_used = true;
        const int iter = static_cast<int>(result.report.iterations.size()) + 1;
        std::vector<long> filled(n, 0);
        parallel_for(n, [&](std::size_t i) {
            if (count(residual[i]) == 0) return;
            auto& st = result.states[i];
            Pass p = run_inpainters(
                inpainter, make_request(frames[i], st.color_pre, st.depth_pre, residual[i], truth_of(i)),
                iter);
            paste(st.depth_pre, p.depth, residual[i]);
            paste(st.color_pre, p.color, residual[i]);
            filled[i] = ((residual[i] != 0) && (st.depth_pre > 0.0)).count();
        });
        for (long f : filled) result.report.fallback_pixels += f;
        result.report.unfilled_pixels = remaining - result.report.fallback_pixels;
    } else {
        result.report.unfilled_pixels = remaining;
    }
    for (std::size_t i = 0; i < n; ++i) result.states[i].residual_mask = std::move(residual[i]);
    return result;
}

}  // namespace viewfuse
