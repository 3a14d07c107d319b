#include "doctest.h"

#include "viewfuse/projection.hpp"
#include "viewfuse/raycast.hpp"

#include "fixtures.hpp"

using namespace viewfuse;

namespace {

// A captured frame of the wall scene rendered exactly by ray casting.
Frame capture(const LabeledMesh& mesh, const CameraModel& cam) {
    const RayCaster caster(mesh);
    Frame f;
    f.camera = cam;
    f.depth_cap = cast_view(caster, cam).depth;
    f.color = ColorImage(cam.height, cam.width, 128);
    f.mask = Mask::Zero(cam.height, cam.width);
    return f;
}

Mask silhouette(const LabeledMesh& mesh, const CameraModel& cam) {
    const RayCaster caster(mesh);
    const RayCastImage img = cast_view(caster, cam);
    Mask m = Mask::Zero(cam.height, cam.width);
    for (int v = 0; v < cam.height; ++v)
        for (int u = 0; u < cam.width; ++u)
            m(v, u) = img.triangle(v, u) >= 0 && mesh.triangle_is_clutter(static_cast<std::size_t>(img.triangle(v, u)));
    return m;
}

// Pixels within L1 distance r of the mask, by exhaustive search.
Mask grow(const Mask& m, int r) {
    Mask out = Mask::Zero(m.rows(), m.cols());
    for (Eigen::Index v = 0; v < m.rows(); ++v)
        for (Eigen::Index u = 0; u < m.cols(); ++u)
            for (Eigen::Index y = 0; y < m.rows(); ++y)
                for (Eigen::Index x = 0; x < m.cols(); ++x)
                    if (m(y, x) && std::abs(y - v) + std::abs(x - u) <= r) out(v, u) = 1;
    return out;
}

CameraModel facing_wall() { return look_at({0.0, 0.0, 1.0}, {0.0, 3.0, 1.0}, 40.0, 40.0, 64, 48); }

}  // namespace

TEST_CASE("unoccluded cube projects to its dilated silhouette") {
    const auto scene = fixtures::wall_scene(0.6, 0.1);
    const CameraModel cam = facing_wall();
    const std::vector<Frame> frames{capture(scene.full, cam)};
    const ProjectedMasks m = project_masks(scene.full, frames);
    const Mask sil = silhouette(scene.full, cam);
    REQUIRE(count(sil) > 100);
    CHECK((m.raw[0] == sil).all());
    CHECK((m.final[0] == grow(sil, 6)).all());
}

TEST_CASE("zero dilation keeps the raw mask") {
    const auto scene = fixtures::wall_scene(0.6, 0.1);
    const std::vector<Frame> frames{capture(scene.full, facing_wall())};
    ProjectionConfig cfg;
    cfg.dilation_iters = 0;
    const ProjectedMasks m = project_masks(scene.full, frames, cfg);
    CHECK((m.final[0] == m.raw[0]).all());
}

TEST_CASE("dilation grows monotonically") {
    Mask seed = Mask::Zero(21, 21);
    seed(10, 10) = 1;
    Mask prev = seed;
    for (int it = 1; it <= 6; ++it) {
        const Mask d = dilate_cross(seed, it);
        CHECK(((prev != 0) <= (d != 0)).all());
        CHECK(count(d) == 2 * it * (it + 1) + 1);
        prev = d;
    }
}

TEST_CASE("frame masks are kept") {
    const auto scene = fixtures::wall_scene(0.6, 0.1);
    std::vector<Frame> frames{capture(scene.full, facing_wall())};
    frames[0].mask(0, 0) = 1;
    const ProjectedMasks m = project_masks(scene.full, frames);
    CHECK(m.final[0](0, 0) == 1);
    CHECK(m.raw[0](0, 0) == 0);
}

TEST_CASE("clutter hidden behind the wall is not projected") {
    const auto scene = fixtures::wall_scene(0.6, 0.1);
    const CameraModel behind = look_at({0.0, 5.0, 1.0}, {0.0, 0.0, 1.0}, 40.0, 40.0, 64, 48);
    const Frame f = capture(scene.full, behind);
    const RayCaster caster(scene.full);
    CHECK(count(project_clutter(caster, scene.full, f, {})) == 0);
}

TEST_CASE("captured depth that disagrees with the mesh") {
    const auto scene = fixtures::wall_scene(0.6, 0.1);
    std::vector<Frame> frames{capture(scene.full, facing_wall())};
    frames[0].depth_cap = (frames[0].depth_cap > 0.0).select(frames[0].depth_cap + 1.0, 0.0);
    const RayCaster caster(scene.full);
    CHECK(count(project_clutter(caster, scene.full, frames[0], {})) == 0);
    CHECK_THROWS_AS(project_masks(scene.full, frames), MisalignmentError);
}

TEST_CASE("masking a frame") {
    Frame f;
    f.camera = fixtures::frontal(6, 4, 5.0);
    f.depth_cap = fixtures::constant_depth(6, 4, 2.0);
    f.color = ColorImage(4, 6, 200);
    f.mask = Mask::Zero(4, 6);

    const MaskedFrame none = mask_frame(f, Mask::Zero(4, 6));
    CHECK(fixtures::equal(none.depth, f.depth_cap));
    CHECK(none.color == f.color);

    const MaskedFrame all = mask_frame(f, Mask::Ones(4, 6));
    CHECK((all.depth == 0.0).all());
    CHECK((all.color.channel[1] == kHoleFill).all());

    Mask checker(4, 6);
    for (int v = 0; v < 4; ++v)
        for (int u = 0; u < 6; ++u) checker(v, u) = (u + v) % 2;
    const MaskedFrame half = mask_frame(f, checker);
    CHECK((half.depth == 0.0).count() == 12);
    CHECK((half.hole == checker).all());

    CHECK_THROWS_AS(mask_frame(f, Mask::Zero(3, 6)), DimensionMismatchError);
}
