#include "doctest.h"

#include "viewfuse/consistency.hpp"
#include "viewfuse/raycast.hpp"

#include "fixtures.hpp"

using namespace viewfuse;

namespace {

DepthMap one(double v) { return DepthMap::Constant(1, 1, v); }

Mask center_hole(int n) {
    Mask m = Mask::Zero(n, n);
    m(n / 2, n / 2) = 1;
    return m;
}

}  // namespace

TEST_CASE("single pixel rule") {
    const ConsistencyConfig cfg;
    const Mask hole = Mask::Ones(1, 1);
    CHECK(prune_single_pixel(one(2.0), one(2.5), hole, cfg)(0) == 2.5);
    CHECK(prune_single_pixel(one(2.0), one(1.5), hole, cfg)(0) == 0.0);
    CHECK(prune_single_pixel(one(0.0), one(2.5), hole, cfg)(0) == 0.0);
    CHECK(prune_single_pixel(one(2.0), one(2.0 - 0.5 * cfg.occlusion_tol), hole, cfg)(0) > 0.0);
    // Outside the hole nothing changes.
    CHECK(prune_single_pixel(one(2.0), one(1.5), Mask::Zero(1, 1), cfg)(0) == 1.5);
}

TEST_CASE("region rules") {
    ConsistencyConfig cfg;
    const DepthMap cap = fixtures::constant_depth(10, 10, 2.0);

    SUBCASE("a passing region is kept") {
        Mask hole = Mask::Zero(10, 10);
        hole.block(2, 2, 3, 3).setOnes();
        const DepthMap pre = fixtures::constant_depth(10, 10, 2.4);
        const DepthMap s1 = prune_single_pixel(cap, pre, hole, cfg);
        CHECK(fixtures::equal(prune_single_region(cap, pre, s1, hole, cfg), s1));
    }
    SUBCASE("a region over half the image is dropped") {
        Mask hole = Mask::Zero(10, 10);
        hole.topRows(6).setOnes();
        const DepthMap pre = fixtures::constant_depth(10, 10, 2.4);
        const DepthMap s1 = prune_single_pixel(cap, pre, hole, cfg);
        const DepthMap s2 = prune_single_region(cap, pre, s1, hole, cfg);
        CHECK((s2.topRows(6) == 0.0).all());
        CHECK((s2.bottomRows(4) == 2.4).all());
    }
    SUBCASE("mean rule drops a whole region") {
        // Left region: mean d_pre behind the capture. Right region: three
        // pixels pass, one is far in front, so the mean is in front.
        Mask hole = Mask::Zero(10, 10);
        hole.block(1, 1, 2, 2).setOnes();
        hole.block(1, 6, 2, 2).setOnes();
        DepthMap pre = fixtures::constant_depth(10, 10, 2.0);
        pre.block(1, 1, 2, 2).setConstant(2.2);
        pre.block(1, 6, 2, 2).setConstant(2.1);
        pre(2, 7) = 1.0;
        const DepthMap s1 = prune_single_pixel(cap, pre, hole, cfg);
        const DepthMap s2 = prune_single_region(cap, pre, s1, hole, cfg);
        // Explicit means: (2.1 * 3 + 1.0) / 4 = 1.825 < 2.0 - tol.
        CHECK((s2.block(1, 1, 2, 2) == 2.2).all());
        CHECK((s2.block(1, 6, 2, 2) == 0.0).all());
        CHECK(s1(1, 6) == 2.1);

        cfg.region_aggregate = RegionAggregate::min;
        CHECK((prune_single_region(cap, pre, s1, hole, cfg).block(1, 6, 2, 2) == 0.0).all());
    }
}

TEST_CASE("min filter over valid pixels") {
    Rng rng(2);
    DepthMap d(9, 11);
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = rng.uniform() < 0.3 ? 0.0 : rng.uniform(1.0, 3.0);
    for (int r : {0, 1, 2}) {
        const DepthMap f = min_filter_valid(d, r);
        for (int v = 0; v < 9; ++v)
            for (int u = 0; u < 11; ++u)
                CHECK(f(v, u) == reference::window_min_capture(d, u, v, r));
    }
}

TEST_CASE("one view has no cross-frame evidence") {
    const auto views = fixtures::random_case(1);
    const auto cv = fixtures::consistency_views(views);
    const ConsistencyConfig cfg;
    const std::vector<DepthMap> s2{views[0].completed};
    CHECK(fixtures::equal(prune_cross_frame(std::span(cv).first(1), s2, cfg)[0], s2[0]));
    CHECK(fixtures::equal(vote_cross_frame(std::span(cv).first(1), s2, cfg)[0], s2[0]));
}

TEST_CASE("a floating blob is seen through from the side") {
    const auto scene = fixtures::wall_scene();
    const RayCaster clean(scene.clean);
    const CameraModel front = look_at({0.0, 0.0, 1.0}, {0.0, 3.0, 1.0}, 12.0, 12.0, 16, 12);
    const CameraModel side = look_at({1.5, 0.5, 1.0}, {0.0, 3.0, 1.0}, 12.0, 12.0, 16, 12);
    reference::View a{front, cast_view(clean, front).depth, {}, Mask::Zero(12, 16)};
    reference::View b{side, cast_view(clean, side).depth, {}, Mask::Zero(12, 16)};
    a.completed = a.captured;
    b.completed = b.captured;
    // A blob one meter in front of the wall, inpainted in the front view.
    a.hole.block(4, 6, 3, 4).setOnes();
    a.completed.block(4, 6, 3, 4) -= 1.0;
    std::vector<reference::View> views{a, b};
    const ConsistencyConfig cfg;
    const std::vector<DepthMap> s2{a.completed, b.completed};
    const auto s3 = prune_cross_frame(fixtures::consistency_views(views), s2, cfg);
    CHECK((s3[0].block(4, 6, 3, 4) == 0.0).all());

    // The true wall in the same hole survives everything.
    views[0].completed = views[0].captured;
    const auto honest = run_consistency(fixtures::consistency_views(views), cfg);
    CHECK(fixtures::equal(honest.stages[0][3], a.captured));
}

TEST_CASE("voting threshold") {
    // Ten identical cameras vote on the center pixel of view 0. Agreeing
    // views repeat its depth, the others put a surface 0.5 m in front.
    auto votes = [](int agreeing) {
        const CameraModel cam = fixtures::frontal(5, 5, 4.0);
        std::vector<reference::View> views;
        views.push_back({cam, fixtures::constant_depth(5, 5, 2.0), fixtures::constant_depth(5, 5, 2.0), center_hole(5)});
        for (int i = 0; i < 10; ++i) {
            const double d = i < agreeing ? 2.0 : 1.5;
            views.push_back({cam, fixtures::constant_depth(5, 5, d), fixtures::constant_depth(5, 5, d), Mask::Zero(5, 5)});
        }
        const ConsistencyConfig cfg;
        const auto cv = fixtures::consistency_views(views);
        const VoteCounts c = vote_counts(cv, 0, cfg);
        std::vector<DepthMap> s3;
        for (const auto& v : views) s3.push_back(v.completed);
        const double kept = vote_cross_frame(cv, s3, cfg)[0](2, 2);
        return std::tuple{c.support(2, 2), c.agree(2, 2), kept};
    };
    {
        const auto [support, agree, kept] = votes(4);
        CHECK(support == 10);
        CHECK(agree == 4);
        CHECK(kept == 2.0);
    }
    {
        const auto [support, agree, kept] = votes(2);
        CHECK(support == 10);
        CHECK(agree == 2);
        CHECK(kept == 0.0);
    }
    CHECK(std::get<2>(votes(3)) == 0.0);  // exactly beta is not enough
}

TEST_CASE("zero support policy") {
    const CameraModel cam = fixtures::frontal(5, 5, 4.0);
    CameraModel away = cam;
    away.pose(0, 3) = 100.0;  // sees nothing of view 0
    std::vector<reference::View> views{
        {cam, fixtures::constant_depth(5, 5, 2.0), fixtures::constant_depth(5, 5, 2.0), center_hole(5)},
        {away, fixtures::constant_depth(5, 5, 2.0), fixtures::constant_depth(5, 5, 2.0), Mask::Zero(5, 5)}};
    const auto cv = fixtures::consistency_views(views);
    const std::vector<DepthMap> s3{views[0].completed, views[1].completed};
    ConsistencyConfig cfg;
    CHECK(vote_cross_frame(cv, s3, cfg)[0](2, 2) == 2.0);
    cfg.strict_voting = true;
    CHECK(vote_cross_frame(cv, s3, cfg)[0](2, 2) == 0.0);
}

TEST_CASE("stages agree with the naive reference") {
    for (std::uint64_t seed = 1000; seed < 1060; ++seed) {
        const auto views = fixtures::random_case(seed);
        const ConsistencyConfig cfg = fixtures::random_config(seed);
        const auto got = run_consistency(fixtures::consistency_views(views), cfg);
        const auto want = reference::run(views, cfg);
        for (std::size_t s = 0; s < views.size(); ++s)
            for (int j = 0; j < 4; ++j) CHECK(fixtures::equal(got.stages[s][j], want[s][j]));
    }
}

TEST_CASE("stages only remove pixels") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto views = fixtures::random_case(seed);
        const ConsistencyConfig cfg = fixtures::random_config(seed);
        const auto r = run_consistency(fixtures::consistency_views(views), cfg);
        for (std::size_t s = 0; s < views.size(); ++s) {
            CHECK(valid_subset(r.stages[s][0], views[s].completed));
            for (int j = 1; j < 4; ++j) CHECK(valid_subset(r.stages[s][j], r.stages[s][j - 1]));
            // Surviving pixels keep their d_pre value.
            CHECK(((r.stages[s][3] == 0.0) || (r.stages[s][3] == views[s].completed)).all());
            // Pixels outside the hole are never touched.
            CHECK(((views[s].hole != 0) || (r.stages[s][3] == views[s].completed)).all());
            const auto& c = r.counts[s];
            CHECK(c.hole == count(views[s].hole));
            CHECK(c.survived[3] <= c.survived[0]);
        }
    }
}

TEST_CASE("single-view checks are idempotent") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto views = fixtures::random_case(seed);
        const ConsistencyConfig cfg = fixtures::random_config(seed);
        const auto& v = views[0];
        const DepthMap s1 = prune_single_pixel(v.captured, v.completed, v.hole, cfg);
        CHECK(fixtures::equal(prune_single_pixel(v.captured, s1, v.hole, cfg), s1));
    }
}

TEST_CASE("ablation switches pass stages through") {
    const auto views = fixtures::random_case(17);
    ConsistencyConfig cfg;
    cfg.single_prune = cfg.cross_prune = cfg.voting = false;
    const auto r = run_consistency(fixtures::consistency_views(views), cfg);
    for (std::size_t s = 0; s < views.size(); ++s)
        for (int j = 0; j < 4; ++j) CHECK(fixtures::equal(r.stages[s][j], views[s].completed));
}

TEST_CASE("config validation") {
    ConsistencyConfig cfg;
    cfg.connectivity = 6;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.beta_percent = 120;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    CHECK(parse_region_aggregate("min") == RegionAggregate::min);
    CHECK_THROWS(parse_region_aggregate("median"));
}
