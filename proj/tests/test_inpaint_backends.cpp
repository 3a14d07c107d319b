#include "doctest.h"

#include "viewfuse/inpaint.hpp"
#include "viewfuse/synth.hpp"

#include "fixtures.hpp"

using namespace viewfuse;

namespace {

Mask box_hole(int rows, int cols, int v0, int u0, int h, int w) {
    Mask m = Mask::Zero(rows, cols);
    m.block(v0, u0, h, w).setOnes();
    return m;
}

InpaintRequest request(const ColorImage& color, const DepthMap& depth, const Mask& hole) {
    InpaintRequest r;
    r.hole = hole;
    r.depth = (hole != 0).select(0.0, depth);
    r.color = color;
    for (auto& c : r.color.channel) c = (hole != 0).select(std::uint8_t{0}, c);
    return r;
}

BackendSpec backend(BackendKind kind) {
    BackendSpec s;
    s.kind = kind;
    return s;
}

}  // namespace

TEST_CASE("empty hole is the identity") {
    const ColorImage c(5, 6, 77);
    const DepthMap d = fixtures::constant_depth(6, 5, 2.0);
    const CameraModel cam = fixtures::frontal(6, 5, 5.0);
    InpaintRequest r = request(c, d, Mask::Zero(5, 6));
    r.camera = &cam;
    for (auto k : {BackendKind::diffusion_color}) CHECK(inpaint_color(r, backend(k)) == c);
    for (auto k : {BackendKind::diffusion_color, BackendKind::planefit_depth})
        CHECK(fixtures::equal(complete_depth(r, backend(k)), d));
}

TEST_CASE("uniform gray stays gray") {
    const ColorImage gray(20, 30, 128);
    const InpaintRequest r =
        request(gray, fixtures::constant_depth(30, 20, 1.0), box_hole(20, 30, 4, 6, 9, 12));
    CHECK(inpaint_color(r, backend(BackendKind::diffusion_color)) == gray);
}

TEST_CASE("oracle returns the ground truth") {
    SceneSpec spec;
    spec.camera_count = 2;
    spec.width = 48;
    spec.height = 36;
    const SynthScene scene = generate(spec);
    const Frame& f = scene.bundle.frames[0];
    InpaintRequest r = request(f.color, f.depth_cap, scene.truth_masks[0]);
    r.truth = &scene.bundle.clean_renders[0];
    const BackendSpec oracle = backend(BackendKind::oracle);
    const ColorImage c = inpaint_color(r, oracle);
    const DepthMap d = complete_depth_partial(r, oracle).depth;
    const Mask& hole = scene.truth_masks[0];
    for (int v = 0; v < hole.rows(); ++v)
        for (int u = 0; u < hole.cols(); ++u)
            if (hole(v, u)) {
                CHECK(c.channel[2](v, u) == r.truth->color.channel[2](v, u));
                CHECK(d(v, u) == r.truth->depth(v, u));
            }
    r.truth = nullptr;
    CHECK_THROWS_AS(inpaint_color(r, oracle), BackendError);
}

TEST_CASE("plane fit recovers a floor") {
    // Camera 1.5 m above the floor z = 0, looking down and forward.
    const CameraModel cam = look_at({0.0, 0.0, 1.5}, {0.0, 3.0, 0.0}, 60.0, 60.0, 80, 60);
    DepthMap floor(60, 80);
    for (int v = 0; v < 60; ++v)
        for (int u = 0; u < 80; ++u) {
            // Camera ray in world coordinates meets z = 0.
            const Eigen::Vector3d ray = cam.rotation() * Eigen::Vector3d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
            floor(v, u) = ray.z() < 0.0 ? -1.5 / ray.z() : 0.0;
        }
    REQUIRE((floor.bottomRows(30) > 0.0).all());
    const Mask hole = box_hole(60, 80, 35, 25, 15, 30);
    InpaintRequest r = request(ColorImage(60, 80, 90), floor, hole);
    r.camera = &cam;
    const DepthMap d = complete_depth(r, backend(BackendKind::planefit_depth));
    for (int v = 0; v < 60; ++v)
        for (int u = 0; u < 80; ++u)
            if (hole(v, u)) CHECK(std::abs(d(v, u) - floor(v, u)) < 1e-3);
    r.camera = nullptr;
    CHECK_THROWS_AS(complete_depth(r, backend(BackendKind::planefit_depth)), BackendError);
}

TEST_CASE("holes without support cannot be filled") {
    const Mask hole = Mask::Ones(10, 10);
    const CameraModel cam = fixtures::frontal(10, 10, 8.0);
    InpaintRequest r = request(ColorImage(10, 10, 50), fixtures::constant_depth(10, 10, 2.0), hole);
    r.camera = &cam;
    for (auto k : {BackendKind::diffusion_color, BackendKind::planefit_depth}) {
        CHECK(count(complete_depth_partial(r, backend(k)).unfilled) == 100);
        CHECK_THROWS_AS(complete_depth(r, backend(k)), UnfillableError);
    }
}

TEST_CASE("planefit is deterministic per seed") {
    Rng rng(3);
    DepthMap d(30, 40);
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = 2.0 + 0.01 * rng.uniform();
    const CameraModel cam = fixtures::frontal(40, 30, 30.0);
    InpaintRequest r = request(ColorImage(30, 40, 10), d, box_hole(30, 40, 10, 10, 8, 8));
    r.camera = &cam;
    const BackendSpec s = backend(BackendKind::planefit_depth);
    CHECK(fixtures::equal(complete_depth(r, s), complete_depth(r, s)));
}

TEST_CASE("training masks") {
    const DepthMap depth = fixtures::constant_depth(8, 6, 1.5);
    const Mask m1 = box_hole(6, 8, 0, 0, 3, 4);
    const Mask m2 = box_hole(6, 8, 2, 2, 3, 4);

    CHECK(count(synth_training_masks(depth, m1, m1).mask) == 0);
    CHECK((synth_training_masks(depth, Mask::Zero(6, 8), m2).mask == m2).all());

    const TrainingSample s = synth_training_masks(depth, m1, m2);
    const long both = ((m1 != 0) && (m2 != 0)).count();
    CHECK(count(s.mask) == count(m2) - both);
    CHECK(((s.mask != 0) == ((m2 != 0) && (m1 == 0))).all());
    CHECK(((s.mask != 0) == (s.masked == 0.0)).all());
    CHECK(fixtures::equal(s.target, depth));
}

TEST_CASE("training partner") {
    for (int f = 0; f < 10; ++f) {
        const int p = pick_training_partner(f, 10, 5);
        CHECK(p != f);
        CHECK(p >= 0);
        CHECK(p < 10);
        CHECK(p == pick_training_partner(f, 10, 5));
    }
    CHECK_THROWS(pick_training_partner(0, 1, 0));
}

TEST_CASE("backend names") {
    CHECK(parse_backend_kind("diffusion") == BackendKind::diffusion_color);
    CHECK(parse_backend_kind("planefit_depth") == BackendKind::planefit_depth);
    CHECK(to_string(BackendKind::oracle) == "oracle");
    CHECK_THROWS(parse_backend_kind("lama"));
}

TEST_CASE("external adapter") {
    const ColorImage c(4, 5, 30);
    const DepthMap d = fixtures::constant_depth(5, 4, 2.0);
    InpaintRequest r = request(c, d, box_hole(4, 5, 1, 1, 2, 2));
    BackendSpec s = backend(BackendKind::external);
    s.command = "cp \"$VF_IN_COLOR\" \"$VF_OUT\"";
    // The input still has the fill value in the hole, so a copy is a valid
    // (if useless) completion.
    CHECK(inpaint_color(r, s) == r.color);
    s.command = "exit 3";
    CHECK_THROWS_AS(inpaint_color(r, s), BackendError);
}
