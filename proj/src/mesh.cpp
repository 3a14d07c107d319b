#include "viewfuse/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "viewfuse/errors.hpp"

namespace viewfuse {

void LabeledMesh::validate() const {
    const auto n = vertices.size();
    if (instance_id.size() != n || clutter.size() != n)
        throw DimensionMismatchError("mesh: label arrays do not match vertex count");
    if (!colors.empty() && colors.size() != n)
        throw DimensionMismatchError("mesh: color array does not match vertex count");
    for (const auto& t : triangles)
        for (int k = 0; k < 3; ++k)
            if (t[k] < 0 || static_cast<std::size_t>(t[k]) >= n)
                throw DomainError("mesh: triangle index out of range");
    std::map<int, std::uint8_t> cls;
    for (std::size_t i = 0; i < n; ++i) {
        if (clutter[i] > 1) throw DomainError("mesh: clutter flag must be 0 or 1");
        auto [it, inserted] = cls.emplace(instance_id[i], clutter[i]);
        if (!inserted && it->second != clutter[i])
            throw DomainError("mesh: instance " + std::to_string(instance_id[i]) +
                              " mixes clutter and non-clutter vertices");
    }
}

bool LabeledMesh::triangle_is_clutter(std::size_t t) const {
    const auto& tri = triangles[t];
    return clutter[tri[0]] || clutter[tri[1]] || clutter[tri[2]];
}

LabeledMesh filter_triangles(const LabeledMesh& mesh, const std::vector<bool>& keep) {
    LabeledMesh out;
    std::vector<int> remap(mesh.vertices.size(), -1);
    const bool has_colors = !mesh.colors.empty();
    const bool has_labels = mesh.instance_id.size() == mesh.vertices.size();
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (!keep[t]) continue;
        Eigen::Vector3i tri;
        for (int k = 0; k < 3; ++k) {
            const int v = mesh.triangles[t][k];
            if (remap[v] < 0) {
                remap[v] = static_cast<int>(out.vertices.size());
                out.vertices.push_back(mesh.vertices[v]);
                if (has_colors) out.colors.push_back(mesh.colors[v]);
                if (has_labels) {
                    out.instance_id.push_back(mesh.instance_id[v]);
                    out.clutter.push_back(mesh.clutter[v]);
                }
            }
            tri[k] = remap[v];
        }
        out.triangles.push_back(tri);
    }
    return out;
}

LabeledMesh LabeledMesh::without_clutter() const {
    std::vector<bool> keep(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) keep[t] = !triangle_is_clutter(t);
    return filter_triangles(*this, keep);
}

LabeledMesh LabeledMesh::clutter_only() const {
    std::vector<bool> keep(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) keep[t] = triangle_is_clutter(t);
    return filter_triangles(*this, keep);
}

void append(LabeledMesh& mesh, const LabeledMesh& other) {
    const int offset = static_cast<int>(mesh.vertices.size());
    const bool colors = mesh.colors.size() == mesh.vertices.size() &&
                        other.colors.size() == other.vertices.size();
    mesh.vertices.insert(mesh.vertices.end(), other.vertices.begin(), other.vertices.end());
    if (colors)
        mesh.colors.insert(mesh.colors.end(), other.colors.begin(), other.colors.end());
    else
        mesh.colors.clear();
    mesh.instance_id.insert(mesh.instance_id.end(), other.instance_id.begin(),
                            other.instance_id.end());
    mesh.clutter.insert(mesh.clutter.end(), other.clutter.begin(), other.clutter.end());
    for (const auto& t : other.triangles)
        mesh.triangles.push_back(t + Eigen::Vector3i::Constant(offset));
}

long lower_median(std::vector<long> values) {
    if (values.empty()) throw EmptyInputError("median of an empty list");
    const auto mid = values.begin() + static_cast<long>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

InstanceStats instance_stats(const LabeledMesh& mesh) {
    if (mesh.vertices.empty()) throw EmptyInputError("instance_stats: mesh has no vertices");
    mesh.validate();
    std::map<int, InstanceInfo> table;
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        auto [it, inserted] = table.try_emplace(
            mesh.instance_id[i], InstanceInfo{mesh.instance_id[i],
                                              static_cast<VertexClass>(mesh.clutter[i]), 0});
        ++it->second.vertex_count;
    }
    InstanceStats stats;
    std::vector<long> counts;
    for (const auto& [id, info] : table) {
        stats.instances.push_back(info);
        counts.push_back(info.vertex_count);
    }
    stats.median_count = lower_median(std::move(counts));
    return stats;
}

std::vector<Eigen::Vector3d> sample_surface(const TriangleMesh& mesh, double spacing) {
    std::vector<Eigen::Vector3d> out;
    for (const auto& tri : mesh.triangles) {
        const Eigen::Vector3d& a = mesh.vertices[tri[0]];
        const Eigen::Vector3d& b = mesh.vertices[tri[1]];
        const Eigen::Vector3d& c = mesh.vertices[tri[2]];
        const double longest = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
        const int n = std::max(1, static_cast<int>(std::ceil(longest / spacing)));
        // Interior lattice points of the n-subdivided triangle (centroids of
        // the small triangles) cover the area uniformly.
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n - i; ++j) {
                const double u = (i + 1.0 / 3.0) / n;
                const double v = (j + 1.0 / 3.0) / n;
                out.push_back(a + u * (b - a) + v * (c - a));
                if (i + j + 1 < n) {
                    const double u2 = (i + 2.0 / 3.0) / n;
                    const double v2 = (j + 2.0 / 3.0) / n;
                    out.push_back(a + u2 * (b - a) + v2 * (c - a));
                }
            }
        }
    }
    return out;
}

}  // namespace viewfuse
