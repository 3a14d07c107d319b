#include "viewfuse/raycast.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

#include "viewfuse/parallel.hpp"

namespace viewfuse {

namespace {

constexpr int kLeafSize = 4;
constexpr double kEdgeEps = 1e-12;

bool slab_test(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, const Eigen::Vector3d& o,
               const Eigen::Vector3d& inv, double t_max, double& t_enter) {
    double t0 = 0.0, t1 = t_max;
    for (int k = 0; k < 3; ++k) {
        double a = (lo[k] - o[k]) * inv[k];
        double b = (hi[k] - o[k]) * inv[k];
        if (a > b) std::swap(a, b);
        // NaN from 0*inf on a slab boundary is treated as inside.
        if (a > t0) t0 = a;
        if (b < t1) t1 = b;
        if (t0 > t1 * (1.0 + 1e-12) + 1e-12) return false;
    }
    t_enter = t0;
    return true;
}

}  // namespace

RayCaster::RayCaster(const TriangleMesh& mesh) {
    const auto n = mesh.triangles.size();
    a_.resize(n);
    e1_.resize(n);
    e2_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = mesh.triangles[i];
        a_[i] = mesh.vertices[t[0]];
        e1_[i] = mesh.vertices[t[1]] - a_[i];
        e2_[i] = mesh.vertices[t[2]] - a_[i];
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    if (n > 0) {
        nodes_.reserve(2 * n / kLeafSize + 2);
        build(0, static_cast<int>(n));
    }
}

int RayCaster::build(int begin, int end) {
    Node node;
    node.lo.setConstant(std::numeric_limits<double>::infinity());
    node.hi.setConstant(-std::numeric_limits<double>::infinity());
    Eigen::Vector3d clo = node.lo, chi = node.hi;
    for (int i = begin; i < end; ++i) {
        const int t = order_[i];
        for (const Eigen::Vector3d& p : {a_[t], Eigen::Vector3d(a_[t] + e1_[t]),
                                         Eigen::Vector3d(a_[t] + e2_[t])}) {
            node.lo = node.lo.cwiseMin(p);
            node.hi = node.hi.cwiseMax(p);
        }
        const Eigen::Vector3d c = a_[t] + (e1_[t] + e2_[t]) / 3.0;
        clo = clo.cwiseMin(c);
        chi = chi.cwiseMax(c);
    }
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) {
        nodes_[index].begin = begin;
        nodes_[index].end = end;
        return index;
    }
    int axis = 0;
    (chi - clo).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int x, int y) {
                         const double cx = a_[x][axis] + (e1_[x][axis] + e2_[x][axis]) / 3.0;
                         const double cy = a_[y][axis] + (e1_[y][axis] + e2_[y][axis]) / 3.0;
                         return cx < cy || (cx == cy && x < y);
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

std::optional<RayHit> RayCaster::intersect(const Eigen::Vector3d& o, const Eigen::Vector3d& dir,
                                           double t_max) const {
    if (nodes_.empty()) return std::nullopt;
    const Eigen::Vector3d inv = dir.cwiseInverse();
    double best_t = t_max;
    int best_tri = -1;

    std::array<int, 128> stack{};
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        double enter;
        if (!slab_test(node.lo, node.hi, o, inv, best_t, enter)) continue;
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int t = order_[i];
                // Moller-Trumbore.
                const Eigen::Vector3d pvec = dir.cross(e2_[t]);
                const double det = e1_[t].dot(pvec);
                if (std::abs(det) < 1e-300) continue;
                const double inv_det = 1.0 / det;
                const Eigen::Vector3d tvec = o - a_[t];
                const double u = tvec.dot(pvec) * inv_det;
                if (u < -kEdgeEps || u > 1.0 + kEdgeEps) continue;
                const Eigen::Vector3d qvec = tvec.cross(e1_[t]);
                const double v = dir.dot(qvec) * inv_det;
                if (v < -kEdgeEps || u + v > 1.0 + kEdgeEps) continue;
                const double hit = e2_[t].dot(qvec) * inv_det;
                if (!(hit > 0.0)) continue;
                if (hit < best_t || (hit == best_t && best_tri >= 0 && t < best_tri)) {
                    best_t = hit;
                    best_tri = t;
                }
            }
            continue;
        }
        // Visit the nearer child first.
        const Node& l = nodes_[node.left];
        const Node& r = nodes_[node.right];
        double el = 0.0, er = 0.0;
        const bool hl = slab_test(l.lo, l.hi, o, inv, best_t, el);
        const bool hr = slab_test(r.lo, r.hi, o, inv, best_t, er);
        if (hl && hr) {
            if (el <= er) {
                stack[top++] = node.right;
                stack[top++] = node.left;
            } else {
                stack[top++] = node.left;
                stack[top++] = node.right;
            }
        } else if (hl) {
            stack[top++] = node.left;
        } else if (hr) {
            stack[top++] = node.right;
        }
    }
    if (best_tri < 0) return std::nullopt;
    return RayHit{best_t, best_tri};
}

RayCastImage cast_view(const RayCaster& caster, const CameraModel& cam) {
    RayCastImage out;
    out.depth = DepthMap::Zero(cam.height, cam.width);
    out.triangle = Image<int>::Constant(cam.height, cam.width, -1);
    const Eigen::Matrix3d r = cam.rotation();
    const Eigen::Vector3d o = cam.center();
    parallel_for(static_cast<std::size_t>(cam.height), [&](std::size_t row) {
        const int v = static_cast<int>(row);
        for (int u = 0; u < cam.width; ++u) {
            // Camera-space direction has z = 1, so the ray parameter is depth.
            const Eigen::Vector3d d_cam((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
            const auto hit = caster.intersect(o, r * d_cam);
            if (!hit) continue;
            out.depth(v, u) = hit->t;
            out.triangle(v, u) = hit->triangle;
        }
    });
    return out;
}

}  // namespace viewfuse
