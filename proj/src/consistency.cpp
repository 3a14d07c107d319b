#include "viewfuse/consistency.hpp"

#include <algorithm>
#include <limits>

#include "viewfuse/parallel.hpp"
#include "viewfuse/warp.hpp"

namespace viewfuse {

RegionAggregate parse_region_aggregate(const std::string& name) {
    if (name == "mean") return RegionAggregate::mean;
    if (name == "min") return RegionAggregate::min;
    if (name == "all" || name == "all-pixels" || name == "all_pixels") return RegionAggregate::all_pixels;
    throw DomainError("unknown region aggregate '" + name + "'");
}

std::string to_string(RegionAggregate a) {
    switch (a) {
        case RegionAggregate::mean: return "mean";
        case RegionAggregate::min: return "min";
        case RegionAggregate::all_pixels: return "all-pixels";
    }
    return "unknown";
}

void ConsistencyConfig::validate() const {
    if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
    if (!(beta_percent > 0.0 && beta_percent < 100.0)) throw DomainError("beta must lie in (0, 100)");
    if (!(max_region_fraction > 0.0 && max_region_fraction <= 1.0))
        throw DomainError("max_region_fraction must lie in (0, 1]");
    if (!(occlusion_tol >= 0.0)) throw DomainError("occlusion_tol must be >= 0");
    if (occlusion_window < 0) throw DomainError("occlusion_window must be >= 0");
    if (vote_window < 0) throw DomainError("vote_window must be >= 0");
    if (connectivity != 4 && connectivity != 8) throw DomainError("connectivity must be 4 or 8");
}

void ConsistencyView::validate() const {
    require_camera_size(*camera, *captured, "consistency captured depth");
    require_camera_size(*camera, *completed, "consistency completed depth");
    require_camera_size(*camera, *hole, "consistency hole mask");
    if (normals && (normals->width != camera->width || normals->height != camera->height))
        throw DimensionMismatchError("consistency normals: size mismatch");
}

std::vector<ConsistencyView> with_normals(std::span<const ConsistencyView> views, const ConsistencyConfig& cfg,
                                          std::vector<NormalMap>& storage) {
    std::vector<ConsistencyView> out(views.begin(), views.end());
    storage.assign(views.size(), NormalMap{});
    parallel_for(views.size(), [&](std::size_t i) {
        if (!cfg.plane_correction) {
            out[i].normals = nullptr;
        } else if (!out[i].normals) {
            storage[i] = normal_map(*views[i].camera, *views[i].completed);
            out[i].normals = &storage[i];
        }
    });
    return out;
}

DepthMap prune_single_pixel(const DepthMap& captured, const DepthMap& completed, const Mask& hole,
                            const ConsistencyConfig& cfg) {
    require_same_size(captured, completed, "prune_single_pixel");
    require_same_size(captured, hole, "prune_single_pixel hole");
    const auto keep = (captured > 0.0) && (completed > 0.0) && (completed > captured - cfg.occlusion_tol);
    return (hole == 0 || keep).select(completed, 0.0);
}

DepthMap prune_single_region(const DepthMap& captured, const DepthMap& completed,
                             const DepthMap& stage1, const Mask& hole, const ConsistencyConfig& cfg) {
    require_same_size(captured, completed, "prune_single_region");
    require_same_size(captured, stage1, "prune_single_region stage1");
    require_same_size(captured, hole, "prune_single_region hole");
    const RegionLabeling regions = label_regions(hole, cfg.connectivity);
    const int n = regions.region_count();
    const double area_cap = cfg.max_region_fraction * static_cast<double>(hole.size());

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> sum_cap(n, 0.0), sum_pre(n, 0.0), min_cap(n, inf), min_pre(n, inf);
    std::vector<long> valid(n, 0);
    std::vector<bool> all_ok(n, true);
    for (Eigen::Index v = 0; v < hole.rows(); ++v)
        for (Eigen::Index u = 0; u < hole.cols(); ++u) {
            const int r = regions.label(v, u);
            if (r < 0) continue;
            const double cap = captured(v, u), pre = completed(v, u);
            if (!(cap > 0.0 && pre > 0.0)) continue;
            ++valid[r];
            sum_cap[r] += cap;
            sum_pre[r] += pre;
            min_cap[r] = std::min(min_cap[r], cap);
            min_pre[r] = std::min(min_pre[r], pre);
            if (!(pre > cap - cfg.occlusion_tol)) all_ok[r] = false;
        }

    std::vector<bool> keep(n, false);
    for (int r = 0; r < n; ++r) {
        if (valid[r] == 0 || static_cast<double>(regions.sizes[r]) > area_cap) continue;
        switch (cfg.region_aggregate) {
            case RegionAggregate::mean:
                keep[r] = sum_pre[r] / valid[r] > sum_cap[r] / valid[r] - cfg.occlusion_tol;
                break;
            case RegionAggregate::min: keep[r] = min_pre[r] > min_cap[r] - cfg.occlusion_tol; break;
            case RegionAggregate::all_pixels: keep[r] = all_ok[r]; break;
        }
    }
    DepthMap out = stage1;
    for (Eigen::Index v = 0; v < hole.rows(); ++v)
        for (Eigen::Index u = 0; u < hole.cols(); ++u) {
            const int r = regions.label(v, u);
            if (r >= 0 && !keep[r]) out(v, u) = 0.0;
        }
    return out;
}

DepthMap min_filter_valid(const DepthMap& depth, int radius) {
    if (radius <= 0) return depth;
    const auto rows = depth.rows(), cols = depth.cols();
    constexpr double inf = std::numeric_limits<double>::infinity();
    // Separable: rows then columns.
    DepthMap horiz(rows, cols);
    for (Eigen::Index v = 0; v < rows; ++v)
        for (Eigen::Index u = 0; u < cols; ++u) {
            double m = inf;
            for (Eigen::Index k = std::max<Eigen::Index>(0, u - radius);
                 k <= std::min<Eigen::Index>(cols - 1, u + radius); ++k)
                if (depth(v, k) > 0.0) m = std::min(m, depth(v, k));
            horiz(v, u) = m;
        }
    DepthMap out(rows, cols);
    for (Eigen::Index v = 0; v < rows; ++v)
        for (Eigen::Index u = 0; u < cols; ++u) {
            double m = inf;
            for (Eigen::Index k = std::max<Eigen::Index>(0, v - radius);
                 k <= std::min<Eigen::Index>(rows - 1, v + radius); ++k)
                m = std::min(m, horiz(k, u));
            out(v, u) = m == inf ? 0.0 : m;
        }
    return out;
}

namespace {

struct PixelList {
    std::vector<int> u, v;
    std::vector<double> depth;
};

PixelList collect(const Mask& select, const DepthMap& depth, const DepthMap* gate = nullptr) {
    PixelList out;
    for (int v = 0; v < depth.rows(); ++v)
        for (int u = 0; u < depth.cols(); ++u) {
            if (!select(v, u) || !(depth(v, u) > 0.0)) continue;
            if (gate && !((*gate)(v, u) > 0.0)) continue;
            out.u.push_back(u);
            out.v.push_back(v);
            out.depth.push_back(depth(v, u));
        }
    return out;
}

void validate_views(std::span<const ConsistencyView> views, std::span<const DepthMap> stage) {
    if (stage.size() != views.size())
        throw DimensionMismatchError("consistency: stage count does not match view count");
    for (std::size_t i = 0; i < views.size(); ++i) {
        views[i].validate();
        require_same_size(*views[i].completed, stage[i], "consistency stage input");
    }
}

}  // namespace

std::vector<DepthMap> prune_cross_frame(std::span<const ConsistencyView> input,
                                        std::span<const DepthMap> stage2,
                                        const ConsistencyConfig& cfg) {
    cfg.validate();
    validate_views(input, stage2);
    std::vector<NormalMap> storage;
    const std::vector<ConsistencyView> views = with_normals(input, cfg, storage);
    const std::size_t n = views.size();
    std::vector<DepthMap> reference(n);
    parallel_for(n, [&](std::size_t t) {
        reference[t] = min_filter_valid(*views[t].captured, cfg.occlusion_window);
    });

    std::vector<DepthMap> out(n);
    parallel_for(n, [&](std::size_t s) {
        const auto& vs = views[s];
        out[s] = stage2[s];
        // Pixels already pruned cannot change, so only live ones are warped.
        const PixelList src = collect(*vs.hole, *vs.completed, &stage2[s]);
        std::vector<std::uint8_t> violated(src.u.size(), 0);
        for (std::size_t t = 0; t < n; ++t) {
            if (t == s) continue;
            const auto& vt = views[t];
            const Eigen::Isometry3d rel = relative_transform(*vs.camera, *vt.camera);
            for (std::size_t i = 0; i < src.u.size(); ++i) {
                if (violated[i]) continue;
                const auto land = warp_point(rel, *vs.camera, *vt.camera, src.u[i], src.v[i], src.depth[i],
                                             nullptr, vs.normals ? &vs.normals->at(src.u[i], src.v[i]) : nullptr);
                if (!land) continue;
                const double cap = reference[t](land->v, land->u);
                const double z = std::max(land->depth, land->point_depth);
                if (cap > 0.0 && z < cap - cfg.occlusion_tol) violated[i] = 1;
            }
        }
        for (std::size_t i = 0; i < src.u.size(); ++i)
            if (violated[i]) out[s](src.v[i], src.u[i]) = 0.0;
    });
    return out;
}

VoteCounts vote_counts(std::span<const ConsistencyView> views, std::size_t s,
                       const ConsistencyConfig& cfg) {
    const auto& vs = views[s];
    const int rows = vs.camera->height, cols = vs.camera->width;
    VoteCounts counts{Image<int>::Zero(rows, cols), Image<int>::Zero(rows, cols)};
    DepthMap zbuf = DepthMap::Zero(rows, cols);
    std::vector<int> touched;
    const int r = cfg.vote_window;
    const PixelList holes = collect(*vs.hole, *vs.completed);
    for (std::size_t t = 0; t < views.size(); ++t) {
        if (t == s) continue;
        const auto& vt = views[t];
        const Eigen::Isometry3d rel = relative_transform(*vt.camera, *vs.camera);
        const DepthMap& dt = *vt.completed;
        touched.clear();
        for (int v = 0; v < dt.rows(); ++v)
            for (int u = 0; u < dt.cols(); ++u) {
                if (!(dt(v, u) > 0.0)) continue;
                const auto land = warp_point(rel, *vt.camera, *vs.camera, u, v, dt(v, u), nullptr,
                                             vt.normals ? &vt.normals->at(u, v) : nullptr);
                if (!land) continue;
                double& slot = zbuf(land->v, land->u);
                if (slot == 0.0) {
                    touched.push_back(land->v * cols + land->u);
                    slot = land->depth;
                } else if (land->depth < slot) {
                    slot = land->depth;
                }
            }
        const Eigen::Isometry3d back = rel.inverse();
        for (std::size_t i = 0; i < holes.u.size(); ++i) {
            const int u = holes.u[i], v = holes.v[i];
            const double pre = holes.depth[i];
            // A view outside whose frame the point falls cannot have seen it.
            const auto seen_at = warp_point(back, *vs.camera, *vt.camera, u, v, pre);
            if (!seen_at) continue;
            // "In front" needs the whole window covered by nearer landings;
            // a lone one is usually a foreground silhouette overhanging by
            // up to half a pixel.
            bool landed = false, close = false, in_front = true;
            for (int y = v - r; y <= v + r; ++y)
                for (int x = u - r; x <= u + r; ++x) {
                    if (y < 0 || x < 0 || y >= rows || x >= cols) continue;
                    const double z = zbuf(y, x);
                    if (z == 0.0) {
                        in_front = false;
                        continue;
                    }
                    landed = true;
                    if (std::abs(pre - z) < cfg.alpha) close = true;
                    if (!(z < pre - cfg.alpha)) in_front = false;
                }
            if (!landed) continue;
            // t's own depth where the point projects: equal means t saw the
            // point (its splat may have gone astray at an edge), nearer
            // means the point was hidden from t.
            const double there = dt(seen_at->v, seen_at->u);
            const double z_t = seen_at->point_depth;
            for (int y = std::max(0, seen_at->v - r); y <= std::min<int>(dt.rows() - 1, seen_at->v + r) && !close; ++y)
                for (int x = std::max(0, seen_at->u - r); x <= std::min<int>(dt.cols() - 1, seen_at->u + r); ++x)
                    if (dt(y, x) > 0.0 && std::abs(dt(y, x) - z_t) < cfg.alpha) close = true;
            // All of t's evidence lies behind the point and t never saw it:
            // abstain rather than disagree.
            if (!close && !in_front && there > 0.0 && there < z_t - cfg.alpha) continue;
            ++counts.support(v, u);
            counts.agree(v, u) += close;
        }
        for (int idx : touched) zbuf(idx / cols, idx % cols) = 0.0;
    }
    return counts;
}

namespace {

bool vote_passes(int support, int agree, const ConsistencyConfig& cfg) {
    if (support == 0) return !cfg.strict_voting;
    const double r = static_cast<double>(agree) / static_cast<double>(support);
    return r > cfg.beta_percent / 100.0;
}

}  // namespace

namespace {

std::vector<DepthMap> vote_impl(std::span<const ConsistencyView> views, std::span<const DepthMap> stage3,
                                const ConsistencyConfig& cfg, std::vector<long>& zero_support) {
    std::vector<DepthMap> out(views.size());
    zero_support.assign(views.size(), 0);
    parallel_for(views.size(), [&](std::size_t s) {
        out[s] = stage3[s];
        const VoteCounts c = vote_counts(views, s, cfg);
        const Mask& hole = *views[s].hole;
        for (Eigen::Index v = 0; v < hole.rows(); ++v)
            for (Eigen::Index u = 0; u < hole.cols(); ++u) {
                if (!hole(v, u) || !(out[s](v, u) > 0.0)) continue;
                if (c.support(v, u) == 0) ++zero_support[s];
                if (!vote_passes(c.support(v, u), c.agree(v, u), cfg)) out[s](v, u) = 0.0;
            }
    });
    return out;
}

}  // namespace

std::vector<DepthMap> vote_cross_frame(std::span<const ConsistencyView> input,
                                       std::span<const DepthMap> stage3,
                                       const ConsistencyConfig& cfg) {
    cfg.validate();
    validate_views(input, stage3);
    std::vector<NormalMap> storage;
    const std::vector<ConsistencyView> views = with_normals(input, cfg, storage);
    std::vector<long> zero_support;
    return vote_impl(views, stage3, cfg, zero_support);
}

ConsistencyResult run_consistency(std::span<const ConsistencyView> input, const ConsistencyConfig& cfg) {
    cfg.validate();
    const std::size_t n = input.size();
    for (const auto& v : input) v.validate();
    std::vector<NormalMap> storage;
    const std::vector<ConsistencyView> views = with_normals(input, cfg, storage);
    ConsistencyResult result;
    result.stages.resize(n);
    result.counts.resize(n);

    parallel_for(n, [&](std::size_t s) {
        const auto& v = views[s];
        auto& st = result.stages[s];
        if (cfg.single_prune) {
            st[0] = prune_single_pixel(*v.captured, *v.completed, *v.hole, cfg);
            st[1] = prune_single_region(*v.captured, *v.completed, st[0], *v.hole, cfg);
        } else {
            st[0] = *v.completed;
            st[1] = *v.completed;
        }
    });

    std::vector<DepthMap> stage2(n);
    for (std::size_t s = 0; s < n; ++s) stage2[s] = result.stages[s][1];
    std::vector<DepthMap> stage3 = cfg.cross_prune ? prune_cross_frame(views, stage2, cfg) : stage2;
    std::vector<long> zero_support(n, 0);
    std::vector<DepthMap> stage4 = cfg.voting ? vote_impl(views, stage3, cfg, zero_support) : stage3;

    parallel_for(n, [&](std::size_t s) {
        auto& st = result.stages[s];
        st[2] = std::move(stage3[s]);
        st[3] = std::move(stage4[s]);
        auto& c = result.counts[s];
        const Mask& hole = *views[s].hole;
        c.hole = count(hole);
        c.filled = ((hole != 0) && (*views[s].completed > 0.0)).count();
        for (int j = 0; j < 4; ++j) c.survived[j] = ((hole != 0) && (st[j] > 0.0)).count();
        c.zero_support = zero_support[s];
    });
    return result;
}

}  // namespace viewfuse
