#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace viewfuse {

using Rgb = Eigen::Matrix<std::uint8_t, 3, 1>;

struct TriangleMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<Eigen::Vector3i> triangles;
    std::vector<Rgb> colors;  ///< per vertex, empty when absent

    std::size_t vertex_count() const { return vertices.size(); }
    bool empty() const { return triangles.empty(); }
};

enum class VertexClass : std::uint8_t { non_clutter = 0, clutter = 1 };

/// Triangle mesh with one instance id and one binary clutter class per
/// vertex. All vertices of an instance share its class.
struct LabeledMesh : TriangleMesh {
    std::vector<int> instance_id;
    std::vector<std::uint8_t> clutter;

    /// Throws DomainError / DimensionMismatchError on broken invariants.
    void validate() const;

    /// A triangle counts as clutter when any of its vertices is clutter.
    bool triangle_is_clutter(std::size_t t) const;

    /// Copy with every clutter triangle and every unreferenced vertex removed.
    LabeledMesh without_clutter() const;

    /// Copy keeping only the clutter triangles.
    LabeledMesh clutter_only() const;
};

/// Keeps the triangles for which keep(t) is true and compacts vertices.
LabeledMesh filter_triangles(const LabeledMesh& mesh, const std::vector<bool>& keep);

/// Appends `other` to `mesh`, offsetting triangle indices.
void append(LabeledMesh& mesh, const LabeledMesh& other);

struct InstanceInfo {
    int instance_id;
    VertexClass cls;
    long vertex_count;
};

struct InstanceStats {
    std::vector<InstanceInfo> instances;  ///< sorted by instance id
    long median_count;                    ///< lower median of vertex counts
};

/// Per-instance vertex counts and their lower median. Throws EmptyInputError
/// for a mesh without vertices.
InstanceStats instance_stats(const LabeledMesh& mesh);

/// Lower median: element (n-1)/2 of the sorted values.
long lower_median(std::vector<long> values);

/// Deterministic surface samples: each triangle is cut into n^2 similar
/// pieces, n = ceil(longest edge / spacing), with one sample at each piece's
/// centroid. Neighboring samples are never more than `spacing` apart.
std::vector<Eigen::Vector3d> sample_surface(const TriangleMesh& mesh, double spacing);

}  // namespace viewfuse
