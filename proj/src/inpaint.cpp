#include "viewfuse/inpaint.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>

#include "viewfuse/random.hpp"
#include "viewfuse/regions.hpp"

namespace viewfuse {

BackendKind parse_backend_kind(const std::string& name) {
    if (name == "diffusion" || name == "diffusion_color") return BackendKind::diffusion_color;
    if (name == "planefit" || name == "planefit_depth") return BackendKind::planefit_depth;
    if (name == "oracle") return BackendKind::oracle;
    if (name == "external") return BackendKind::external;
    throw DomainError("unknown backend '" + name + "'");
}

std::string to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::diffusion_color: return "diffusion_color";
        case BackendKind::planefit_depth: return "planefit_depth";
        case BackendKind::oracle: return "oracle";
        case BackendKind::external: return "external";
    }
    return "unknown";
}

void BackendSpec::validate() const {
    if (kind == BackendKind::external && command.empty())
        throw DomainError("external backend requires a command template");
    if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
    if (!(ransac_threshold > 0.0)) throw DomainError("ransac_threshold must be > 0");
    if (ransac_iterations < 1 || ransac_min_points < 3)
        throw DomainError("RANSAC needs >= 1 iteration and >= 3 points");
    if (band_width < 1 || color_levels < 1) throw DomainError("band_width and color_levels must be >= 1");
    if (max_parallel < 1) throw DomainError("max_parallel must be >= 1");
}

void InpaintRequest::validate() const {
    require_same_size(depth, hole, "inpaint request depth/hole");
    if (color.rows() != hole.rows() || color.cols() != hole.cols())
        throw DimensionMismatchError("inpaint request color/hole: size mismatch");
    if (guidance && (guidance->rows() != hole.rows() || guidance->cols() != hole.cols()))
        throw DimensionMismatchError("inpaint request guidance: size mismatch");
    if (camera) require_camera_size(*camera, depth, "inpaint request camera");
}

Image<double> diffuse_fill(const Image<double>& values, const Mask& known, const Mask& hole,
                           double tolerance, int max_iterations, Mask* unreached) {
    const int rows = static_cast<int>(values.rows()), cols = static_cast<int>(values.cols());
    Image<double> out = values;
    Image<std::uint8_t> assigned = (known != 0 && hole == 0).cast<std::uint8_t>();

    std::vector<std::pair<int, int>> pending;
    for (int v = 0; v < rows; ++v)
        for (int u = 0; u < cols; ++u)
            if (hole(v, u)) pending.emplace_back(v, u);
    const auto hole_pixels = pending;

    // Onion peel: each layer averages only values assigned in earlier layers.
    while (!pending.empty()) {
        std::vector<std::pair<int, int>> layer, rest;
        std::vector<double> layer_values;
        for (const auto& [v, u] : pending) {
            double sum = 0.0;
            int n = 0;
            for (int dv = -1; dv <= 1; ++dv)
                for (int du = -1; du <= 1; ++du) {
                    const int nv = v + dv, nu = u + du;
                    if ((dv == 0 && du == 0) || nv < 0 || nv >= rows || nu < 0 || nu >= cols) continue;
                    if (!assigned(nv, nu)) continue;
                    sum += out(nv, nu);
                    ++n;
                }
            if (n > 0) {
                layer.emplace_back(v, u);
                layer_values.push_back(sum / n);
            } else {
                rest.emplace_back(v, u);
            }
        }
        if (layer.empty()) break;
        for (std::size_t i = 0; i < layer.size(); ++i) {
            out(layer[i].first, layer[i].second) = layer_values[i];
            assigned(layer[i].first, layer[i].second) = 1;
        }
        pending.swap(rest);
    }
    if (unreached) {
        *unreached = Mask::Zero(rows, cols);
        for (const auto& [v, u] : pending) (*unreached)(v, u) = 1;
    }

    std::vector<std::pair<int, int>> active;
    for (const auto& p : hole_pixels)
        if (assigned(p.first, p.second)) active.push_back(p);
    std::vector<double> next(active.size());
    static const int dv[4] = {-1, 1, 0, 0};
    static const int du[4] = {0, 0, -1, 1};
    for (int it = 0; it < max_iterations && !active.empty(); ++it) {
        double max_change = 0.0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            const auto [v, u] = active[i];
            double sum = 0.0;
            int n = 0;
            for (int k = 0; k < 4; ++k) {
                const int nv = v + dv[k], nu = u + du[k];
                if (nv < 0 || nv >= rows || nu < 0 || nu >= cols || !assigned(nv, nu)) continue;
                sum += out(nv, nu);
                ++n;
            }
            next[i] = n > 0 ? sum / n : out(v, u);
            max_change = std::max(max_change, std::abs(next[i] - out(v, u)));
        }
        for (std::size_t i = 0; i < active.size(); ++i) out(active[i].first, active[i].second) = next[i];
        if (max_change < tolerance) break;
    }
    return out;
}

namespace {

ColorImage diffuse_color(const InpaintRequest& req, const BackendSpec& spec) {
    ColorImage out = req.color;
    if (count(req.hole) == 0) return out;
    const Mask known = (req.hole == 0).cast<std::uint8_t>();
    for (int c = 0; c < 3; ++c) {
        const Image<double> values = req.color.channel[c].cast<double>() / 255.0;
        Mask unreached;
        const Image<double> filled =
            diffuse_fill(values, known, req.hole, spec.color_tolerance, spec.max_iterations, &unreached);
        for (Eigen::Index v = 0; v < values.rows(); ++v)
            for (Eigen::Index u = 0; u < values.cols(); ++u) {
                if (!req.hole(v, u)) continue;
                // No known pixel at all: mid gray.
                const double x = unreached(v, u) ? 0.5 : filled(v, u);
                out.channel[c](v, u) = static_cast<std::uint8_t>(std::clamp(std::lround(x * 255.0), 0L, 255L));
            }
    }
    return out;
}

ColorImage oracle_color(const InpaintRequest& req) {
    if (!req.truth) throw BackendError("oracle backend needs ground-truth renders");
    ColorImage out = req.color;
    for (int c = 0; c < 3; ++c)
        out.channel[c] = (req.hole != 0).select(req.truth->color.channel[c], req.color.channel[c]);
    return out;
}

DepthCompletion oracle_depth(const InpaintRequest& req) {
    if (!req.truth) throw BackendError("oracle backend needs ground-truth renders");
    DepthCompletion out;
    out.depth = (req.hole != 0).select(req.truth->depth, req.depth);
    out.unfilled = (req.hole != 0 && out.depth <= 0.0).cast<std::uint8_t>();
    return out;
}

/// Plane n.x = d in camera coordinates with unit n.
struct Plane {
    Eigen::Vector3d normal;
    double offset;
};

std::optional<Plane> fit_plane_lsq(const std::vector<Eigen::Vector3d>& pts) {
    if (pts.size() < 3) return std::nullopt;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    if (!(s(1) > 1e-12 * std::max(1.0, s(0)))) return std::nullopt;  // collinear
    const Eigen::Vector3d n = svd.matrixU().col(2);
    return Plane{n, n.dot(mean)};
}

std::optional<Plane> ransac_plane(const std::vector<Eigen::Vector3d>& pts, const BackendSpec& spec,
                                  std::uint64_t seed) {
    if (static_cast<int>(pts.size()) < spec.ransac_min_points) return std::nullopt;
    Rng rng(seed);
    long best_inliers = 0;
    Plane best{};
    const auto n = pts.size();
    for (int it = 0; it < spec.ransac_iterations; ++it) {
        const auto i = rng.index(n), j = rng.index(n), k = rng.index(n);
        if (i == j || j == k || i == k) continue;
        Eigen::Vector3d normal = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
        const double len = normal.norm();
        if (!(len > 1e-12)) continue;
        normal /= len;
        const double offset = normal.dot(pts[i]);
        long inliers = 0;
        for (const auto& p : pts) inliers += std::abs(normal.dot(p) - offset) < spec.ransac_threshold;
        if (inliers > best_inliers) {
            best_inliers = inliers;
            best = {normal, offset};
        }
    }
    if (best_inliers < spec.ransac_min_points) return std::nullopt;
    std::vector<Eigen::Vector3d> inliers;
    for (const auto& p : pts)
        if (std::abs(best.normal.dot(p) - best.offset) < spec.ransac_threshold) inliers.push_back(p);
    if (auto refined = fit_plane_lsq(inliers)) return refined;
    return best;
}

int color_key(const ColorImage& img, Eigen::Index v, Eigen::Index u, int levels) {
    int key = 0;
    for (int c = 0; c < 3; ++c) key = key * levels + img.channel[c](v, u) * levels / 256;
    return key;
}

DepthCompletion planefit_depth(const InpaintRequest& req, const BackendSpec& spec) {
    if (!req.camera) throw BackendError("planefit_depth needs the frame camera");
    const ColorImage& guide = req.guidance ? *req.guidance : req.color;
    const CameraModel& cam = *req.camera;
    const int rows = static_cast<int>(req.depth.rows()), cols = static_cast<int>(req.depth.cols());

    DepthCompletion out;
    out.depth = req.depth;
    out.unfilled = Mask::Zero(rows, cols);
    Mask fallback = Mask::Zero(rows, cols);
    const Mask source = (req.hole == 0 && req.depth > 0.0).cast<std::uint8_t>();

    const RegionLabeling regions = label_regions(req.hole, 4);
    for (int r = 0; r < regions.region_count(); ++r) {
        const Mask component = (regions.label == r).cast<std::uint8_t>();
        const Image<int> dist = l1_distance(component, spec.band_width);

        struct Group {
            std::vector<Eigen::Vector3d> points;
            Eigen::Vector3d color_sum = Eigen::Vector3d::Zero();
        };
        std::map<int, Group> groups;
        long band = 0;
        for (int v = 0; v < rows; ++v)
            for (int u = 0; u < cols; ++u) {
                if (!source(v, u) || dist(v, u) > spec.band_width) continue;
                ++band;
                auto& g = groups[color_key(guide, v, u, spec.color_levels)];
                g.points.push_back(unproject_camera(cam, Eigen::Vector2d(u, v), req.depth(v, u)));
                for (int c = 0; c < 3; ++c) g.color_sum[c] += guide.channel[c](v, u);
            }
        if (band == 0) {
            out.unfilled = (component != 0).select(std::uint8_t{1}, out.unfilled);
            continue;
        }

        struct Candidate {
            Plane plane;
            Eigen::Vector3d color;
        };
        std::vector<Candidate> candidates;
        for (const auto& [key, g] : groups) {
            const std::uint64_t seed = Rng::mix(Rng::mix(spec.seed, static_cast<std::uint64_t>(req.frame_id)),
                                                Rng::mix(static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(key)));
            if (auto plane = ransac_plane(g.points, spec, seed))
                candidates.push_back({*plane, g.color_sum / static_cast<double>(g.points.size())});
        }

        for (int v = 0; v < rows; ++v)
            for (int u = 0; u < cols; ++u) {
                if (regions.label(v, u) != r) continue;
                const Eigen::Vector3d c(guide.channel[0](v, u), guide.channel[1](v, u), guide.channel[2](v, u));
                const Candidate* best = nullptr;
                double best_dist = std::numeric_limits<double>::infinity();
                for (const auto& cand : candidates) {
                    const double d = (cand.color - c).squaredNorm();
                    if (d < best_dist) {
                        best_dist = d;
                        best = &cand;
                    }
                }
                double z = 0.0;
                if (best) {
                    const Eigen::Vector3d ray((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
                    const double denom = best->plane.normal.dot(ray);
                    // Reject grazing intersections.
                    if (std::abs(denom) > 1e-3 * ray.norm()) z = best->plane.offset / denom;
                }
                if (std::isfinite(z) && z > 0.0) {
                    out.depth(v, u) = z;
                } else {
                    fallback(v, u) = 1;
                }
            }
    }

    if (count(fallback) > 0) {
        const Mask known = (source != 0 || (req.hole != 0 && fallback == 0 && out.unfilled == 0 &&
                                            out.depth > 0.0))
                               .cast<std::uint8_t>();
        Mask unreached;
        const DepthMap filled = diffuse_fill(out.depth, known, fallback, spec.depth_tolerance,
                                             spec.max_iterations, &unreached);
        for (int v = 0; v < rows; ++v)
            for (int u = 0; u < cols; ++u) {
                if (!fallback(v, u)) continue;
                if (unreached(v, u) || !(filled(v, u) > 0.0))
                    out.unfilled(v, u) = 1;
                else
                    out.depth(v, u) = filled(v, u);
            }
    }
    return out;
}

DepthCompletion diffusion_depth(const InpaintRequest& req, const BackendSpec& spec) {
    const Mask source = (req.hole == 0 && req.depth > 0.0).cast<std::uint8_t>();
    const RegionLabeling regions = label_regions(req.hole, 4);
    DepthCompletion out;
    out.unfilled = Mask::Zero(req.depth.rows(), req.depth.cols());
    // Holes without support inside the band stay empty.
    for (int r = 0; r < regions.region_count(); ++r) {
        const Mask component = (regions.label == r).cast<std::uint8_t>();
        const Image<int> dist = l1_distance(component, spec.band_width);
        if (!((source != 0) && (dist <= spec.band_width)).any())
            out.unfilled = (component != 0).select(std::uint8_t{1}, out.unfilled);
    }
    const Mask fill = (req.hole != 0 && out.unfilled == 0).cast<std::uint8_t>();
    Mask unreached;
    out.depth = diffuse_fill(req.depth, source, fill, spec.depth_tolerance, spec.max_iterations, &unreached);
    out.unfilled = (out.unfilled != 0 || unreached != 0).cast<std::uint8_t>();
    out.depth = (out.unfilled != 0).select(0.0, out.depth);
    return out;
}

}  // namespace

ColorImage inpaint_color(const InpaintRequest& req, const BackendSpec& spec) {
    spec.validate();
    req.validate();
    if (count(req.hole) == 0) return req.color;
    switch (spec.kind) {
        case BackendKind::diffusion_color: return diffuse_color(req, spec);
        case BackendKind::oracle: return oracle_color(req);
        case BackendKind::external: return external_inpaint_color(req, spec);
        case BackendKind::planefit_depth: break;
    }
    throw BackendError("planefit_depth is not a color backend");
}

DepthCompletion complete_depth_partial(const InpaintRequest& req, const BackendSpec& spec) {
    spec.validate();
    req.validate();
    if (count(req.hole) == 0) return {req.depth, Mask::Zero(req.hole.rows(), req.hole.cols())};
    switch (spec.kind) {
        case BackendKind::planefit_depth: return planefit_depth(req, spec);
        case BackendKind::diffusion_color: return diffusion_depth(req, spec);
        case BackendKind::oracle: return oracle_depth(req);
        case BackendKind::external: {
            DepthCompletion out;
            out.depth = external_complete_depth(req, spec);
            out.unfilled = (req.hole != 0 && out.depth <= 0.0).cast<std::uint8_t>();
            return out;
        }
    }
    throw BackendError("unknown depth backend");
}

DepthMap complete_depth(const InpaintRequest& req, const BackendSpec& spec) {
    auto result = complete_depth_partial(req, spec);
    if (const auto n = count(result.unfilled); n > 0)
        throw UnfillableError("frame " + std::to_string(req.frame_id) + ": " + std::to_string(n) +
                              " hole pixels have no valid depth within " +
                              std::to_string(spec.band_width) + " px");
    return std::move(result.depth);
}

TrainingSample synth_training_masks(const DepthMap& depth, const Mask& m1, const Mask& m2) {
    require_same_size(depth, m1, "synth_training_masks m1");
    require_same_size(depth, m2, "synth_training_masks m2");
    TrainingSample s;
    s.mask = (m2 != 0 && m1 == 0).cast<std::uint8_t>();
    s.target = depth;
    s.masked = (s.mask != 0).select(0.0, depth);
    return s;
}

int pick_training_partner(int frame, int frame_count, std::uint64_t seed) {
    if (frame_count < 2) throw DomainError("training masks need at least two frames");
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(frame)));
    const int k = static_cast<int>(rng.index(static_cast<std::uint64_t>(frame_count - 1)));
    return k >= frame ? k + 1 : k;
}

}  // namespace viewfuse
