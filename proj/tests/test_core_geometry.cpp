#include "doctest.h"

#include <cmath>

#include "viewfuse/camera.hpp"
#include "viewfuse/parallel.hpp"
#include "viewfuse/random.hpp"
#include "viewfuse/regions.hpp"
#include "viewfuse/warp.hpp"

#include "fixtures.hpp"

using namespace viewfuse;

TEST_CASE("unproject by hand") {
    CameraModel cam = fixtures::frontal(101, 101, 100.0);
    REQUIRE(cam.cx == 50.0);
    const Eigen::Vector3d p = unproject(cam, Eigen::Vector2d(150.0, 50.0), 2.0);
    CHECK(p.isApprox(Eigen::Vector3d(2.0, 0.0, 2.0)));
}

TEST_CASE("project inverts unproject") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Vector3d eye(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.5, 2.5));
        const Eigen::Vector3d target(rng.uniform(-1, 1), rng.uniform(3, 4), rng.uniform(0, 2));
        const CameraModel cam = look_at(eye, target, rng.uniform(50, 300), rng.uniform(50, 300), 64, 48);
        const Eigen::Vector2d px(rng.uniform(0, 63), rng.uniform(0, 47));
        const double d = rng.uniform(0.1, 8.0);
        const auto back = project(cam, unproject(cam, px, d));
        REQUIRE(back);
        CHECK((back->pixel - px).norm() < 1e-9);
        CHECK(back->depth == doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("points behind the camera do not project") {
    const CameraModel cam = fixtures::frontal(8, 8, 10.0);
    CHECK_FALSE(project(cam, Eigen::Vector3d(0, 0, -1)));
    CHECK_FALSE(project(cam, Eigen::Vector3d(0, 0, 0)));
}

TEST_CASE("unproject rejects bad depth") {
    const CameraModel cam = fixtures::frontal(8, 8, 10.0);
    CHECK_THROWS_AS(unproject(cam, Eigen::Vector2d(1, 1), 0.0), InvalidDepthError);
    CHECK_THROWS_AS(unproject(cam, Eigen::Vector2d(1, 1), NAN), InvalidDepthError);
}

TEST_CASE("camera validation") {
    CameraModel cam = fixtures::frontal(8, 8, 10.0);
    CHECK_NOTHROW(cam.validate());
    cam.fx = -1;
    CHECK_THROWS_AS(cam.validate(), InvalidCameraError);
    cam = fixtures::frontal(8, 8, 10.0);
    cam.pose(0, 0) = 2.0;
    CHECK_THROWS_AS(cam.validate(), InvalidCameraError);
}

TEST_CASE("identity warp reproduces valid input") {
    const CameraModel cam = fixtures::frontal(20, 15, 18.0);
    Rng rng(5);
    DepthMap d(15, 20);
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = rng.uniform() < 0.1 ? 0.0 : rng.uniform(1.0, 4.0);
    for (bool plane : {false, true}) {
        const WarpResult w = warp_depth(d, cam, cam, nullptr, plane);
        for (Eigen::Index i = 0; i < d.size(); ++i)
            if (d(i) > 0.0) CHECK(w.depth(i) == doctest::Approx(d(i)).epsilon(1e-12));
            else CHECK(w.depth(i) == 0.0);
    }
}

TEST_CASE("forward translation subtracts the offset") {
    const CameraModel src = fixtures::frontal(40, 30, 30.0);
    CameraModel dst = src;
    dst.pose(2, 3) = 0.5;
    const DepthMap d = fixtures::constant_depth(40, 30, 3.0);
    const WarpResult w = warp_depth(d, src, dst);
    long landed = 0;
    for (Eigen::Index i = 0; i < w.depth.size(); ++i)
        if (w.depth(i) > 0.0) {
            ++landed;
            CHECK(w.depth(i) == doctest::Approx(2.5).epsilon(1e-12));
        }
    CHECK(landed > 600);
}

TEST_CASE("z-buffer keeps the nearest landing") {
    // A half-resolution target with the same pose: 2x2 source blocks collide.
    const CameraModel src = fixtures::frontal(16, 16, 20.0);
    const CameraModel dst = fixtures::frontal(8, 8, 10.0);
    Rng rng(9);
    DepthMap d(16, 16);
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = rng.uniform(2.0, 3.0);
    const WarpResult w = warp_depth(d, src, dst, nullptr, false);
    DepthMap want = DepthMap::Zero(8, 8);
    for (int v = 0; v < 16; ++v)
        for (int u = 0; u < 16; ++u) {
            // Same pose, so the pixel maps through the intrinsics alone.
            const double x = (u - src.cx) * dst.fx / src.fx + dst.cx, y = (v - src.cy) * dst.fy / src.fy + dst.cy;
            const int tu = static_cast<int>(std::lround(x)), tv = static_cast<int>(std::lround(y));
            if (tu < 0 || tv < 0 || tu >= 8 || tv >= 8) continue;
            if (want(tv, tu) == 0.0 || d(v, u) < want(tv, tu)) want(tv, tu) = d(v, u);
        }
    CHECK(((w.depth - want).abs() < 1e-12).all());
    CHECK(w.stats.collisions > 0);
}

TEST_CASE("selected pixels only") {
    const CameraModel cam = fixtures::frontal(6, 6, 6.0);
    const DepthMap d = fixtures::constant_depth(6, 6, 2.0);
    Mask sel = Mask::Zero(6, 6);
    sel(2, 3) = 1;
    const WarpResult w = warp_depth(d, cam, cam, &sel);
    CHECK(count(valid_mask(w.depth)) == 1);
    CHECK(w.depth(2, 3) == doctest::Approx(2.0));
}

TEST_CASE("plane correction is exact on a tilted plane") {
    // Plane z = 2 + 0.3 x seen from two cameras.
    const CameraModel src = fixtures::frontal(40, 30, 40.0);
    CameraModel dst = src;
    dst.pose.topRightCorner<3, 1>() = Eigen::Vector3d(0.2, 0.05, 0.1);
    auto depth_of = [](const CameraModel& cam) {
        DepthMap d(cam.height, cam.width);
        const Eigen::Vector3d c = cam.center();
        for (int v = 0; v < cam.height; ++v)
            for (int u = 0; u < cam.width; ++u) {
                const Eigen::Vector3d r((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
                // c + t r on z = 2 + 0.3 x.
                const double t = (2.0 + 0.3 * c.x() - c.z()) / (r.z() - 0.3 * r.x());
                d(v, u) = t;
            }
        return d;
    };
    const DepthMap ds = depth_of(src), dt = depth_of(dst);
    const WarpResult w = warp_depth(ds, src, dst);
    long checked = 0;
    for (int v = 1; v < 29; ++v)
        for (int u = 1; u < 39; ++u)
            if (w.depth(v, u) > 0.0) {
                ++checked;
                CHECK(w.depth(v, u) == doctest::Approx(dt(v, u)).epsilon(1e-9));
            }
    CHECK(checked > 500);
}

TEST_CASE("all pairs") {
    const auto views = fixtures::random_case(4);
    std::vector<DepthView> dv;
    for (const auto& v : views) dv.push_back({&v.captured, &v.camera});
    const auto pairs = warp_all_pairs(dv);
    CHECK(pairs.size() == views.size() * (views.size() - 1));

    std::vector<reference::View> three;
    for (std::uint64_t seed = 0; three.size() < 3; ++seed)
        for (auto& v : fixtures::random_case(seed))
            if (three.size() < 3 && (three.empty() || v.captured.rows() == three[0].captured.rows())) three.push_back(v);
    std::vector<DepthView> d3;
    for (const auto& v : three) d3.push_back({&v.captured, &v.camera});
    const auto all = warp_all_pairs(d3);
    REQUIRE(all.size() == 6);
    for (const auto& p : all) {
        const WarpResult one = warp_depth(three[p.source].captured, three[p.source].camera, three[p.target].camera);
        CHECK(fixtures::equal(p.result.depth, one.depth));
    }

    const DepthView single[] = {dv[0]};
    CHECK(warp_all_pairs(single).empty());
}

TEST_CASE("pair warps do not depend on the thread count") {
    std::vector<reference::View> views;
    for (std::uint64_t seed = 10; views.size() < 3; ++seed) {
        auto c = fixtures::random_case(seed);
        if (c.size() == 3) views = c;
    }
    std::vector<DepthView> dv;
    for (const auto& v : views) dv.push_back({&v.completed, &v.camera});
    const int before = max_threads();
    set_max_threads(1);
    const auto a = warp_all_pairs(dv);
    set_max_threads(4);
    const auto b = warp_all_pairs(dv);
    set_max_threads(before);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].source == b[i].source);
        CHECK(fixtures::equal(a[i].result.depth, b[i].result.depth));
    }
}

TEST_CASE("warp rejects mismatched rasters") {
    const CameraModel cam = fixtures::frontal(6, 6, 6.0);
    CHECK_THROWS_AS(warp_depth(fixtures::constant_depth(5, 6, 1.0), cam, cam), DimensionMismatchError);
}

TEST_CASE("region labeling") {
    Mask m = Mask::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(3, 3) = m(3, 2) = 1;
    const RegionLabeling four = label_regions(m, 4);
    CHECK(four.region_count() == 3);
    CHECK(four.label(0, 0) == 0);
    CHECK(four.label(1, 1) == 1);
    CHECK(four.label(3, 2) == four.label(3, 3));
    CHECK(four.label(2, 2) == -1);
    const RegionLabeling eight = label_regions(m, 8);
    CHECK(eight.region_count() == 2);
    CHECK(eight.sizes[0] == 2);
}

TEST_CASE("l1 distance matches brute force") {
    Rng rng(21);
    Mask seeds = Mask::Zero(17, 23);
    for (Eigen::Index i = 0; i < seeds.size(); ++i) seeds(i) = rng.uniform() < 0.02;
    const Image<int> d = l1_distance(seeds, 6);
    for (int v = 0; v < 17; ++v)
        for (int u = 0; u < 23; ++u) {
            int best = 7;
            for (int y = 0; y < 17; ++y)
                for (int x = 0; x < 23; ++x)
                    if (seeds(y, x)) best = std::min(best, std::abs(y - v) + std::abs(x - u));
            CHECK(d(v, u) == best);
        }
}
