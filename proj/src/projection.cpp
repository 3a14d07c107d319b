#include "viewfuse/projection.hpp"

#include <cmath>

#include "viewfuse/parallel.hpp"

namespace viewfuse {

void ProjectionConfig::validate() const {
    if (dilation_iters < 0) throw DomainError("dilation_iters must be >= 0");
    if (!(depth_agreement_tol > 0.0)) throw DomainError("depth_agreement_tol must be > 0");
    if (min_mask_pixels < 0) throw DomainError("min_mask_pixels must be >= 0");
}

Mask project_clutter(const RayCaster& caster, const LabeledMesh& mesh, const Frame& frame,
                     const ProjectionConfig& cfg) {
    const auto cast = cast_view(caster, frame.camera);
    Mask raw = Mask::Zero(frame.camera.height, frame.camera.width);
    for (int v = 0; v < raw.rows(); ++v)
        for (int u = 0; u < raw.cols(); ++u) {
            const int tri = cast.triangle(v, u);
            if (tri < 0 || !mesh.triangle_is_clutter(static_cast<std::size_t>(tri))) continue;
            const double cap = frame.depth_cap(v, u);
            if (cap > 0.0 && std::abs(cast.depth(v, u) - cap) < cfg.depth_agreement_tol) raw(v, u) = 1;
        }
    if (count(raw) < cfg.min_mask_pixels) raw.setZero();
    return raw;
}

Mask dilate_cross(const Mask& mask, int iterations) {
    Mask cur = (mask != 0).cast<std::uint8_t>();
    const auto rows = cur.rows(), cols = cur.cols();
    for (int it = 0; it < iterations; ++it) {
        Mask next = cur;
        for (Eigen::Index v = 0; v < rows; ++v)
            for (Eigen::Index u = 0; u < cols; ++u) {
                if (!cur(v, u)) continue;
                if (v > 0) next(v - 1, u) = 1;
                if (v + 1 < rows) next(v + 1, u) = 1;
                if (u > 0) next(v, u - 1) = 1;
                if (u + 1 < cols) next(v, u + 1) = 1;
            }
        cur = std::move(next);
    }
    return cur;
}

double clutter_vertex_agreement(const LabeledMesh& mesh, std::span<const Frame> frames, double tol) {
    long seen = 0, agree = 0;
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        if (!mesh.clutter[i]) continue;
        bool in_view = false, ok = false;
        for (const auto& f : frames) {
            const auto proj = project(f.camera, mesh.vertices[i]);
            if (!proj) continue;
            const auto px = nearest_pixel(f.camera, proj->pixel);
            if (!px) continue;
            in_view = true;
            const double cap = f.depth_cap(px->y(), px->x());
            if (cap > 0.0 && std::abs(proj->depth - cap) < tol) {
                ok = true;
                break;
            }
        }
        seen += in_view;
        agree += ok;
    }
    return seen == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(seen);
}

ProjectedMasks project_masks(const LabeledMesh& mesh, std::span<const Frame> frames,
                             const ProjectionConfig& cfg) {
    cfg.validate();
    mesh.validate();
    for (const auto& f : frames) f.validate();
    if (clutter_vertex_agreement(mesh, frames, cfg.depth_agreement_tol) < 1e-3)
        throw MisalignmentError(
            "fewer than 0.1% of clutter vertices agree with captured depth; mesh and cameras "
            "are probably not in the same coordinate frame");

    const RayCaster caster(mesh);
    ProjectedMasks out;
    out.raw.resize(frames.size());
    out.final.resize(frames.size());
    // Ray casting parallelizes over rows inside cast_view.
    for (std::size_t i = 0; i < frames.size(); ++i) {
        out.raw[i] = project_clutter(caster, mesh, frames[i], cfg);
        Mask dilated = dilate_cross(out.raw[i], cfg.dilation_iters);
        out.final[i] = (dilated != 0 || frames[i].mask != 0).cast<std::uint8_t>();
    }
    return out;
}

MaskedFrame mask_frame(const Frame& frame, const Mask& mask) {
    require_same_size(frame.depth_cap, mask, "mask_frame");
    if (frame.color.rows() != mask.rows() || frame.color.cols() != mask.cols())
        throw DimensionMismatchError("mask_frame: color size mismatch");
    MaskedFrame out;
    out.hole = (mask != 0).cast<std::uint8_t>();
    out.depth = (out.hole != 0).select(0.0, frame.depth_cap);
    out.color = frame.color;
    for (auto& c : out.color.channel) c = (out.hole != 0).select(kHoleFill, c);
    return out;
}

}  // namespace viewfuse
