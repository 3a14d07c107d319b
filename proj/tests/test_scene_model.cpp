#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "viewfuse/io.hpp"
#include "viewfuse/mesh.hpp"
#include "viewfuse/random.hpp"
#include "viewfuse/scene.hpp"

#include "fixtures.hpp"

using namespace viewfuse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Frame tiny_frame(int index, int w = 3, int h = 2) {
    Frame f;
    f.id = index;
    f.source_index = index;
    f.color = ColorImage(h, w, static_cast<std::uint8_t>(index));
    f.depth_cap = DepthMap::Constant(h, w, 1.0 + 0.001 * index);
    f.mask = Mask::Zero(h, w);
    f.camera = fixtures::frontal(w, h, 2.0);
    f.camera.pose(0, 3) = 0.01 * index;
    return f;
}

LabeledMesh two_instances() {
    LabeledMesh m;
    for (int i = 0; i < 6; ++i) {
        m.vertices.emplace_back(i, i % 2, 0);
        m.instance_id.push_back(i < 3 ? 0 : 1);
        m.clutter.push_back(i < 3 ? 0 : 1);
    }
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    return m;
}

}  // namespace

TEST_CASE("lower median") {
    CHECK(lower_median({2, 4, 9}) == 4);
    CHECK(lower_median({2, 4, 8, 100}) == 4);
    CHECK(lower_median({7}) == 7);
}

TEST_CASE("instance stats") {
    const LabeledMesh m = two_instances();
    const InstanceStats s = instance_stats(m);
    REQUIRE(s.instances.size() == 2);
    CHECK(s.instances[1].cls == VertexClass::clutter);
    CHECK(s.instances[0].vertex_count == 3);
    CHECK(s.median_count == 3);
    CHECK_THROWS_AS(instance_stats(LabeledMesh{}), EmptyInputError);
}

TEST_CASE("labeled mesh invariants") {
    LabeledMesh m = two_instances();
    CHECK_NOTHROW(m.validate());
    m.clutter[0] = 1;  // instance 0 now mixes classes
    CHECK_THROWS_AS(m.validate(), DomainError);
    m = two_instances();
    m.instance_id.pop_back();
    CHECK_THROWS_AS(m.validate(), DimensionMismatchError);
    m = two_instances();
    m.triangles.push_back({0, 1, 9});
    CHECK_THROWS(m.validate());
}

TEST_CASE("clutter split") {
    const LabeledMesh m = two_instances();
    const LabeledMesh clean = m.without_clutter(), clutter = m.clutter_only();
    CHECK(clean.triangles.size() == 1);
    CHECK(clean.vertices.size() == 3);
    CHECK(clutter.vertices.size() == 3);
    CHECK(clutter.clutter[0] == 1);
}

TEST_CASE("surface samples stay on the surface") {
    LabeledMesh m;
    m.vertices = {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}};
    m.triangles = {{0, 1, 2}};
    const auto s = sample_surface(m, 0.02);
    // Longest edge sqrt(2) at 2 cm: 71 cuts per side.
    CHECK(s.size() == 71 * 71);
    for (const auto& p : s) {
        CHECK(p.z() == doctest::Approx(1.0));
        CHECK(p.x() >= -1e-12);
        CHECK(p.x() + p.y() <= 1.0 + 1e-12);
    }
    CHECK(sample_surface(m, 0.02) == s);
}

TEST_CASE("frame invariants") {
    Frame f = tiny_frame(0);
    CHECK_NOTHROW(f.validate());
    f.mask = Mask::Zero(3, 3);
    CHECK_THROWS_AS(f.validate(), DimensionMismatchError);
    f = tiny_frame(0);
    f.mask(0, 0) = 2;
    CHECK_THROWS_AS(f.validate(), DomainError);
    f = tiny_frame(0);
    f.depth_cap(0, 0) = -1.0;
    CHECK_THROWS(f.validate());
}

TEST_CASE("stage monotonicity flag") {
    InpaintState s;
    const DepthMap full = DepthMap::Constant(2, 2, 1.0);
    DepthMap less = full;
    less(0, 0) = 0.0;
    s.depth_pre = full;
    s.stage_outputs = {full, less, less, less};
    CHECK(s.monotone());
    s.stage_outputs[3] = full;
    CHECK_FALSE(s.monotone());
}

TEST_CASE("depth png rounds to millimeters") {
    TempDir dir("vf_test_depth_png");
    DepthMap d(2, 3);
    d << 0.0, 1.0004, 2.5, 65.535, 70.0, 0.0006;
    io::write_depth_png(dir.path / "d.png", d);
    const DepthMap r = io::read_depth_png(dir.path / "d.png");
    CHECK(r(0, 0) == 0.0);
    CHECK(r(0, 1) == doctest::Approx(1.0));
    CHECK(r(0, 2) == doctest::Approx(2.5));
    CHECK(r(1, 0) == doctest::Approx(65.535));
    CHECK(r(1, 1) == doctest::Approx(65.535));
    CHECK(r(1, 2) == doctest::Approx(0.001));
}

TEST_CASE("lossless depth and probabilities round trip") {
    TempDir dir("vf_test_vfd");
    Rng rng(1);
    DepthMap d(5, 7);
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = static_cast<float>(rng.uniform(0.0, 5.0));
    io::write_depth(dir.path / "d.vfd", d);
    CHECK(fixtures::equal(io::read_depth(dir.path / "d.vfd"), d));

    Eigen::Matrix<double, Eigen::Dynamic, 2> p(3, 2);
    p << 0.25, 0.75, 1.0, 0.0, 0.5, 0.5;
    io::write_probs(dir.path / "p.bin", p);
    CHECK(io::read_probs(dir.path / "p.bin") == p);
    std::ofstream(dir.path / "p.bin", std::ios::app) << "x";
    CHECK_THROWS_AS(io::read_probs(dir.path / "p.bin"), MalformedFileError);
}

TEST_CASE("color, mask, camera and mesh round trip") {
    TempDir dir("vf_test_io");
    ColorImage c(4, 5);
    Rng rng(2);
    for (auto& ch : c.channel)
        for (Eigen::Index i = 0; i < ch.size(); ++i) ch(i) = static_cast<std::uint8_t>(rng.index(256));
    io::write_color_png(dir.path / "c.png", c);
    CHECK(io::read_color_png(dir.path / "c.png") == c);

    Mask m = Mask::Zero(4, 5);
    m(1, 2) = 1;
    io::write_mask_png(dir.path / "m.png", m);
    CHECK((io::read_mask_png(dir.path / "m.png") == m).all());

    const CameraModel cam = look_at({1, 2, 1.5}, {0, 4, 1}, 120, 121, 64, 48);
    io::write_camera(dir.path / "cam.json", cam);
    const CameraModel back = io::read_camera(dir.path / "cam.json");
    CHECK(back.width == 64);
    CHECK(back.pose.isApprox(cam.pose, 1e-15));
    CHECK(back.fy == 121.0);

    LabeledMesh mesh = two_instances();
    io::write_mesh_ply(dir.path / "m.ply", mesh);
    const LabeledMesh r = io::read_mesh_ply(dir.path / "m.ply");
    CHECK(r.triangles.size() == 2);
    CHECK(r.instance_id == mesh.instance_id);
    CHECK(r.clutter == mesh.clutter);
    CHECK(r.vertices[4].isApprox(mesh.vertices[4]));
}

TEST_CASE("ascii ply with default labels") {
    TempDir dir("vf_test_ascii_ply");
    std::ofstream(dir.path / "a.ply") << "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\n"
                                         "property float y\nproperty float z\nelement face 1\n"
                                         "property list uchar int vertex_indices\nend_header\n"
                                         "0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
    const LabeledMesh m = io::read_mesh_ply(dir.path / "a.ply");
    CHECK(m.triangles.size() == 1);
    CHECK(m.instance_id == std::vector<int>{0, 0, 0});
}

TEST_CASE("bundle stride and missing files") {
    TempDir dir("vf_test_bundle");
    SceneBundle b;
    for (int i = 0; i < 200; ++i) b.frames.push_back(tiny_frame(i));
    io::save_bundle(b, dir.path);
    const SceneBundle every5 = io::load_bundle(dir.path, 5);
    REQUIRE(every5.frames.size() == 40);
    CHECK(every5.frames[1].source_index == 5);
    CHECK(every5.frames[1].id == 1);
    CHECK(every5.frames[39].color == b.frames[195].color);
    CHECK(io::load_bundle(dir.path, 1).frames.size() == 200);
    CHECK(io::load_bundle(dir.path, 7).frames.size() == 29);
    CHECK_THROWS(io::load_bundle(dir.path, 0));

    fs::remove(dir.path / "depth" / io::frame_name(10, ".png"));
    CHECK_THROWS_AS(io::load_bundle(dir.path, 5), MissingFileError);
    CHECK_NOTHROW(io::load_bundle(dir.path, 3));
    CHECK_THROWS_AS(io::load_bundle(dir.path / "nope", 5), MissingFileError);
}
