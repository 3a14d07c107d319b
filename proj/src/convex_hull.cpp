#include "viewfuse/convex_hull.hpp"

#include <algorithm>
#include <map>

#include <Eigen/Geometry>

#include "viewfuse/errors.hpp"

namespace viewfuse {

bool ConvexHull::contains(const Eigen::Vector3d& p, double eps) const {
    if (planes.empty()) return false;
    for (const auto& pl : planes)
        if (pl.head<3>().dot(p) - pl[3] > eps) return false;
    return true;
}

namespace {

Eigen::Vector4d plane_of(const std::vector<Eigen::Vector3d>& pts, const Eigen::Vector3i& f) {
    const Eigen::Vector3d n = (pts[f[1]] - pts[f[0]]).cross(pts[f[2]] - pts[f[0]]).normalized();
    Eigen::Vector4d out;
    out << n, n.dot(pts[f[0]]);
    return out;
}

}  // namespace

ConvexHull convex_hull(std::span<const Eigen::Vector3d> input) {
    if (input.size() < 4) throw DomainError("convex_hull: need at least 4 points");
    std::vector<Eigen::Vector3d> pts(input.begin(), input.end());
    Eigen::Vector3d lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double eps = 1e-10 * std::max(1.0, (hi - lo).norm());

    // Initial tetrahedron from extreme points.
    const auto n = pts.size();
    std::size_t i0 = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (pts[i].x() < pts[i0].x()) i0 = i;
    auto argmax = [&](auto&& score) {
        std::size_t best = 0;
        double best_s = -1.0;
        for (std::size_t i = 0; i < n; ++i)
            if (const double s = score(pts[i]); s > best_s) {
                best_s = s;
                best = i;
            }
        return std::pair{best, best_s};
    };
    const auto [i1, d1] = argmax([&](const Eigen::Vector3d& p) { return (p - pts[i0]).norm(); });
    const Eigen::Vector3d axis = (pts[i1] - pts[i0]) / std::max(d1, eps);
    const auto [i2, d2] = argmax([&](const Eigen::Vector3d& p) { return (p - pts[i0]).cross(axis).norm(); });
    const Eigen::Vector3d normal = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
    const auto [i3, d3] = argmax([&](const Eigen::Vector3d& p) { return std::abs((p - pts[i0]).dot(normal)); });
    if (d1 <= eps || d2 <= eps || d3 <= eps) throw DomainError("convex_hull: points do not span a volume");

    const Eigen::Vector3d inner = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
    std::vector<Eigen::Vector3i> faces;
    auto add_face = [&](int a, int b, int c) {
        Eigen::Vector3i f(a, b, c);
        if (plane_of(pts, f).head<3>().dot(inner - pts[a]) > 0.0) std::swap(f[1], f[2]);
        faces.push_back(f);
    };
    const int t[4] = {static_cast<int>(i0), static_cast<int>(i1), static_cast<int>(i2), static_cast<int>(i3)};
    add_face(t[0], t[1], t[2]);
    add_face(t[0], t[1], t[3]);
    add_face(t[0], t[2], t[3]);
    add_face(t[1], t[2], t[3]);

    std::vector<Eigen::Vector4d> planes;
    for (const auto& f : faces) planes.push_back(plane_of(pts, f));
    for (std::size_t pi = 0; pi < n; ++pi) {
        const int p = static_cast<int>(pi);
        if (p == t[0] || p == t[1] || p == t[2] || p == t[3]) continue;
        std::vector<bool> visible(faces.size(), false);
        bool any = false;
        for (std::size_t f = 0; f < faces.size(); ++f)
            if (planes[f].head<3>().dot(pts[pi]) - planes[f][3] > eps) visible[f] = any = true;
        if (!any) continue;
        std::map<std::pair<int, int>, int> visible_edges;
        for (std::size_t f = 0; f < faces.size(); ++f)
            if (visible[f])
                for (int k = 0; k < 3; ++k) visible_edges[{faces[f][k], faces[f][(k + 1) % 3]}] = 1;
        std::vector<Eigen::Vector3i> kept;
        std::vector<Eigen::Vector4d> kept_planes;
        for (std::size_t f = 0; f < faces.size(); ++f)
            if (!visible[f]) {
                kept.push_back(faces[f]);
                kept_planes.push_back(planes[f]);
            }
        for (const auto& [edge, unused] : visible_edges) {
            (void)unused;
            if (visible_edges.count({edge.second, edge.first})) continue;  // interior edge
            const Eigen::Vector3i f(edge.first, edge.second, p);
            kept.push_back(f);
            kept_planes.push_back(plane_of(pts, f));
        }
        faces = std::move(kept);
        planes = std::move(kept_planes);
    }

    ConvexHull hull;
    hull.points = std::move(pts);
    hull.faces = std::move(faces);
    hull.planes = std::move(planes);
    return hull;
}

}  // namespace viewfuse
