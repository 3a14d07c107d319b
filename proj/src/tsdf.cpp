#include "viewfuse/fuse.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "viewfuse/parallel.hpp"

namespace viewfuse {

namespace {

// Cube corner c sits at (c & 1, (c >> 1) & 1, (c >> 2) & 1).
Eigen::Vector3d corner_pos(int c) { return Eigen::Vector3d(c & 1, (c >> 1) & 1, (c >> 2) & 1); }

struct CubeEdge {
    int a, b, axis;
};

std::array<CubeEdge, 12> make_edges() {
    std::array<CubeEdge, 12> edges{};
    int k = 0;
    for (int axis = 0; axis < 3; ++axis)
        for (int c = 0; c < 8; ++c)
            if (!(c & (1 << axis))) edges[k++] = {c, c | (1 << axis), axis};
    return edges;
}

const std::array<CubeEdge, 12> kEdges = make_edges();

int edge_between(int a, int b) {
    for (int e = 0; e < 12; ++e)
        if ((kEdges[e].a == a && kEdges[e].b == b) || (kEdges[e].a == b && kEdges[e].b == a)) return e;
    return -1;
}

/// Triangles (as cube edge triples) per inside-corner configuration.
using CaseTable = std::array<std::vector<std::array<int, 3>>, 256>;

CaseTable make_case_table() {
    CaseTable table;
    for (int config = 0; config < 256; ++config) {
        auto inside = [&](int c) { return (config >> c) & 1; };
        std::array<int, 12> next;
        next.fill(-1);
        for (int axis = 0; axis < 3; ++axis)
            for (int side = 0; side < 2; ++side) {
                const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
                const int base = side << axis;
                const std::array<int, 4> f = {base, base | (1 << a1), base | (1 << a1) | (1 << a2),
                                              base | (1 << a2)};
                Eigen::Vector3d outward = Eigen::Vector3d::Zero();
                outward[axis] = side ? 1.0 : -1.0;
                std::array<int, 4> e;
                for (int k = 0; k < 4; ++k) e[k] = edge_between(f[k], f[(k + 1) % 4]);
                std::vector<int> crossing;
                for (int k = 0; k < 4; ++k)
                    if (inside(f[k]) != inside(f[(k + 1) % 4])) crossing.push_back(k);
                // Segments as (edge slot, edge slot, corner slot on the cut-off side).
                std::vector<std::array<int, 3>> segs;
                if (crossing.size() == 2) {
                    int in_corner = -1;
                    for (int k = 0; k < 4; ++k)
                        if (inside(f[k])) in_corner = k;
                    segs.push_back({crossing[0], crossing[1], in_corner});
                } else if (crossing.size() == 4) {
                    // Inside corners are separated from each other.
                    const int first = inside(f[0]) ? 0 : 1;
                    for (int k = first; k < 4; k += 2) segs.push_back({(k + 3) % 4, k, k});
                }
                for (const auto& s : segs) {
                    auto mid = [&](int slot) -> Eigen::Vector3d {
                        return 0.5 * (corner_pos(f[slot]) + corner_pos(f[(slot + 1) % 4]));
                    };
                    const Eigen::Vector3d pa = mid(s[0]), pb = mid(s[1]);
                    const Eigen::Vector3d toward = corner_pos(f[s[2]]) - 0.5 * (pa + pb);
                    const bool corner_inside = inside(f[s[2]]);
                    // Orient a -> b so that (b - a) x outward points to the inside.
                    const double side_sign = (pb - pa).cross(outward).dot(toward);
                    const bool forward = corner_inside ? side_sign > 0.0 : side_sign < 0.0;
                    const int ea = e[s[0]], eb = e[s[1]];
                    if (forward) next[ea] = eb;
                    else next[eb] = ea;
                }
            }
        std::array<bool, 12> used{};
        for (int start = 0; start < 12; ++start) {
            if (next[start] < 0 || used[start]) continue;
            std::vector<int> loop;
            for (int e = start; !used[e]; e = next[e]) {
                used[e] = true;
                loop.push_back(e);
            }
            for (std::size_t k = 1; k + 1 < loop.size(); ++k)
                table[config].push_back({loop[0], loop[k], loop[k + 1]});
        }
    }
    return table;
}

}  // namespace

TriangleMesh marching_cubes(const VoxelGrid& grid) {
    static const CaseTable table = make_case_table();
    TriangleMesh mesh;
    const int nx = grid.dims.x(), ny = grid.dims.y(), nz = grid.dims.z();
    if (grid.value.size() != static_cast<std::size_t>(nx) * ny * nz || grid.weight.size() != grid.value.size())
        throw DimensionMismatchError("marching_cubes: grid storage does not match dims");
    const bool colored = grid.color.size() == grid.value.size();
    std::unordered_map<std::size_t, int> edge_vertex;
    for (int z = 0; z + 1 < nz; ++z)
        for (int y = 0; y + 1 < ny; ++y)
            for (int x = 0; x + 1 < nx; ++x) {
                std::array<std::size_t, 8> idx;
                int config = 0;
                bool observed = true;
                for (int c = 0; c < 8; ++c) {
                    idx[c] = grid.index(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1));
                    if (!(grid.weight[idx[c]] > 0.0f)) observed = false;
                    if (grid.value[idx[c]] < 0.0f) config |= 1 << c;
                }
                if (!observed || config == 0 || config == 255) continue;
                auto vertex = [&](int e) {
                    const CubeEdge& ce = kEdges[e];
                    const std::size_t key = idx[ce.a] * 3 + ce.axis;
                    auto [it, fresh] = edge_vertex.try_emplace(key, static_cast<int>(mesh.vertices.size()));
                    if (fresh) {
                        const double va = grid.value[idx[ce.a]], vb = grid.value[idx[ce.b]];
                        const double t = va / (va - vb);
                        const Eigen::Vector3d pa = corner_pos(ce.a), pb = corner_pos(ce.b);
                        const Eigen::Vector3d local = pa + t * (pb - pa);
                        mesh.vertices.push_back(grid.origin + grid.voxel * (Eigen::Vector3d(x, y, z) + local));
                        if (colored) {
                            Rgb rgb;
                            for (int k = 0; k < 3; ++k) {
                                const double c = (1.0 - t) * grid.color[idx[ce.a]][k] + t * grid.color[idx[ce.b]][k];
                                rgb[k] = static_cast<std::uint8_t>(std::clamp(std::lround(c), 0L, 255L));
                            }
                            mesh.colors.push_back(rgb);
                        }
                    }
                    return it->second;
                };
                for (const auto& tri : table[config]) {
                    const int a = vertex(tri[0]), b = vertex(tri[1]), c = vertex(tri[2]);
                    if (a != b && b != c && a != c) mesh.triangles.emplace_back(a, b, c);
                }
            }
    return mesh;
}

TriangleMesh tsdf_fuse(std::span<const FuseView> views, const RefineConfig& cfg) {
    cfg.validate();
    if (views.empty()) throw EmptyInputError("tsdf_fuse: no views");

    std::vector<Eigen::AlignedBox3d> boxes(views.size());
    parallel_for(views.size(), [&](std::size_t i) {
        const auto& view = views[i];
        require_camera_size(*view.camera, *view.depth, "tsdf depth");
        require_camera_size(*view.camera, *view.color, "tsdf color");
        for (int v = 0; v < view.camera->height; ++v)
            for (int u = 0; u < view.camera->width; ++u) {
                const double d = (*view.depth)(v, u);
                if (d > 0.0 && d <= cfg.fuse_max_depth)
                    boxes[i].extend(unproject(*view.camera, Eigen::Vector2d(u, v), d));
            }
    });
    Eigen::AlignedBox3d bounds;
    for (const auto& b : boxes)
        if (!b.isEmpty()) bounds.extend(b);
    if (bounds.isEmpty()) throw EmptyInputError("tsdf_fuse: no valid depth within range");

    const double pad = cfg.tsdf_trunc + cfg.tsdf_voxel;
    VoxelGrid grid;
    grid.voxel = cfg.tsdf_voxel;
    grid.origin = bounds.min() - Eigen::Vector3d::Constant(pad);
    const Eigen::Vector3d extent = bounds.sizes() + Eigen::Vector3d::Constant(2.0 * pad);
    double cells = 1.0;
    for (int k = 0; k < 3; ++k) {
        const double n = std::floor(extent[k] / cfg.tsdf_voxel) + 2.0;
        cells *= n;
        grid.dims[k] = cells <= static_cast<double>(cfg.tsdf_max_voxels) ? static_cast<int>(n) : 0;
    }
    if (cells > static_cast<double>(cfg.tsdf_max_voxels))
        throw GridTooLargeError("tsdf grid of " + std::to_string(static_cast<long long>(cells)) +
                                " voxels exceeds the cap of " + std::to_string(cfg.tsdf_max_voxels));
    const std::size_t total = static_cast<std::size_t>(cells);
    grid.value.assign(total, 0.0f);
    grid.weight.assign(total, 0.0f);
    grid.color.assign(total, {0.0f, 0.0f, 0.0f});

    struct Projector {
        Eigen::Matrix3d r;
        Eigen::Vector3d t;
    };
    std::vector<Projector> proj;
    for (const auto& view : views) {
        const Eigen::Isometry3d w2c = view.camera->world_to_camera();
        proj.push_back({w2c.linear(), w2c.translation()});
    }
    const double trunc = cfg.tsdf_trunc;
    parallel_for(static_cast<std::size_t>(grid.dims.z()), [&](std::size_t zi) {
        const int z = static_cast<int>(zi);
        for (int y = 0; y < grid.dims.y(); ++y)
            for (int x = 0; x < grid.dims.x(); ++x) {
                const Eigen::Vector3d p = grid.origin + grid.voxel * Eigen::Vector3d(x, y, z);
                const std::size_t id = grid.index(x, y, z);
                double value = 0.0, weight = 0.0;
                std::array<double, 3> color{};
                for (std::size_t i = 0; i < views.size(); ++i) {
                    const CameraModel& cam = *views[i].camera;
                    const Eigen::Vector3d pc = proj[i].r * p + proj[i].t;
                    if (!(pc.z() > 0.0)) continue;
                    const double fu = cam.fx * pc.x() / pc.z() + cam.cx;
                    const double fv = cam.fy * pc.y() / pc.z() + cam.cy;
                    const double ru = std::floor(fu + 0.5), rv = std::floor(fv + 0.5);
                    if (ru < 0 || rv < 0 || ru >= cam.width || rv >= cam.height) continue;
                    const int u = static_cast<int>(ru), v = static_cast<int>(rv);
                    const double d = (*views[i].depth)(v, u);
                    if (!(d > 0.0) || d > cfg.fuse_max_depth) continue;
                    const double sdf = d - pc.z();
                    if (sdf < -trunc) continue;
                    const double tsdf = std::min(1.0, sdf / trunc);
                    value = (value * weight + tsdf) / (weight + 1.0);
                    for (int c = 0; c < 3; ++c)
                        color[c] = (color[c] * weight + views[i].color->channel[c](v, u)) / (weight + 1.0);
                    weight += 1.0;
                }
                grid.value[id] = static_cast<float>(value);
                grid.weight[id] = static_cast<float>(weight);
                grid.color[id] = {static_cast<float>(color[0]), static_cast<float>(color[1]),
                                  static_cast<float>(color[2])};
            }
    });
    return marching_cubes(grid);
}

}  // namespace viewfuse
