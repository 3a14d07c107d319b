// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "viewfuse/bench.hpp"
#include "viewfuse/consistency.hpp"
#include "viewfuse/fuse.hpp"
#include "viewfuse/loss.hpp"
#include "viewfuse/metrics.hpp"
#include "viewfuse/parallel.hpp"
#include "viewfuse/projection.hpp"
#include "viewfuse/random.hpp"
#include "viewfuse/raycast.hpp"
#include "viewfuse/refine.hpp"
#include "viewfuse/regions.hpp"
#include "viewfuse/synth.hpp"
#include "viewfuse/warp.hpp"

#include "fixtures.hpp"
#include "reference_consistency.hpp"

#include <spdlog/spdlog.h>

using namespace viewfuse;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ------------------------------------------------------------------ loss

// Plain mean cross entropy, written out directly.
double mean_cross_entropy(const PredictionSet& p, double eps) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < p.probs.rows(); ++j) {
        const double q = std::clamp(p.probs(j, p.label[j]), eps, 1.0 - eps);
        sum -= std::log(q);
    }
    return sum / static_cast<double>(p.probs.rows());
}

PredictionSet random_predictions(Rng& rng) {
    PredictionSet p;
    const int instances = 1 + static_cast<int>(rng.index(8));
    for (int i = 0; i < instances; ++i) {
        const int n = 1 + static_cast<int>(rng.index(200));
        const std::uint8_t cls = rng.uniform() < 0.4 ? 1 : 0;
        for (int j = 0; j < n; ++j) {
            p.instance_id.push_back(i);
            p.label.push_back(cls);
        }
    }
    p.probs.resize(static_cast<Eigen::Index>(p.label.size()), 2);
    for (Eigen::Index j = 0; j < p.probs.rows(); ++j) {
        const double c = rng.uniform();
        p.probs(j, 0) = 1.0 - c;
        p.probs(j, 1) = c;
    }
    return p;
}

Outcome criterion1() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const PredictionSet p = random_predictions(rng);
        LossConfig cfg;
        cfg.k = 0.0;
        const double got = area_sensitive_ce(p, cfg).loss;
        worst = std::max(worst, std::abs(got - mean_cross_entropy(p, cfg.epsilon)));
    }
    return {worst <= 1e-9, fmt("max |loss(k=0) - CE| = %.3g over 100 fixtures", worst)};
}

Outcome criterion2() {
    // Instances of 5, 40 and 300 vertices; the 5-vertex one is below the median.
    PredictionSet p;
    const int sizes[] = {5, 40, 300};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < sizes[i]; ++j) {
            p.instance_id.push_back(i);
            p.label.push_back(i == 0 ? 1 : 0);
        }
    p.probs.resize(static_cast<Eigen::Index>(p.label.size()), 2);
    Rng rng(11);
    for (Eigen::Index j = 0; j < p.probs.rows(); ++j) {
        const double c = rng.uniform(0.05, 0.95);
        p.probs(j, 0) = 1.0 - c;
        p.probs(j, 1) = c;
    }
    std::vector<double> contrib;
    for (double k : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        LossConfig cfg;
        cfg.k = k;
        contrib.push_back(area_sensitive_ce(p, cfg).per_instance.at(0).contribution);
    }
    bool increasing = true;
    for (std::size_t i = 1; i < contrib.size(); ++i) increasing = increasing && contrib[i] > contrib[i - 1];
    return {increasing, fmt("small-instance contribution over k grid: %.4g %.4g %.4g %.4g %.4g", contrib[0],
                            contrib[1], contrib[2], contrib[3], contrib[4])};
}

// ------------------------------------------------------------ consistency

std::vector<Frame> masked_frames(const SynthScene& scene, const ProjectionConfig& pcfg = {}) {
    std::vector<Frame> frames = scene.bundle.frames;
    const ProjectedMasks m = project_masks(scene.bundle.mesh, frames, pcfg);
    for (std::size_t i = 0; i < frames.size(); ++i) frames[i].mask = m.final[i];
    return frames;
}

Inpainter oracle_inpainter() {
    BackendSpec o;
    o.kind = BackendKind::oracle;
    return make_inpainter(o, o);
}

Outcome criterion3() {
    SceneSpec spec;
    spec.camera_count = 20;
    const SynthScene scene = generate(spec);
    const std::vector<Frame> frames = masked_frames(scene);
    const RefineResult res = refine(frames, scene.bundle.clean_renders, oracle_inpainter(), {}, {});
    const auto& first = res.report.iterations.at(0);
    long filled = 0, survived = 0;
    for (const auto& c : first.frames) {
        filled += c.filled;
        survived += c.survived[3];
    }
    const double frac = filled ? static_cast<double>(survived) / filled : 0.0;
    const bool one = res.report.converged && res.report.iterations.size() == 1;
    return {frac >= 0.99 && one, fmt("%ld of %ld inpainted pixels survive (%.4f%%), %zu iteration(s), converged=%d",
                                     survived, filled, 100.0 * frac, res.report.iterations.size(),
                                     int(res.report.converged))};
}

Outcome criterion4() {
    int mismatched = 0, cases = 0;
    long checked = 0, pruned = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto views = fixtures::random_case(seed);
        const ConsistencyConfig cfg = fixtures::random_config(seed);
        const auto cv = fixtures::consistency_views(views);
        const ConsistencyResult got = run_consistency(cv, cfg);
        const auto want = reference::run(views, cfg);
        bool same = true;
        for (std::size_t s = 0; s < views.size(); ++s)
            for (int j = 0; j < 4; ++j) same = same && fixtures::equal(got.stages[s][j], want[s][j]);
        mismatched += !same;
        ++cases;
        for (std::size_t s = 0; s < views.size(); ++s) {
            checked += count(views[s].hole);
            pruned += ((views[s].hole != 0) && (views[s].completed > 0.0) && !(want[s][3] > 0.0)).count();
        }
    }
    return {mismatched == 0, fmt("%d of %d cases differ from the naive reference (%ld hole pixels, %ld pruned)",
                                 mismatched, cases, checked, pruned)};
}

// ------------------------------------------------------------ ablation

// Honest color, then the honest depth with every hole region corrupted on the
// first call per frame: pushed behind the wall, pulled partway toward the
// camera, or pulled well in front of the clutter.
Inpainter adversarial(const Inpainter& honest, std::size_t frames) {
    auto calls = std::make_shared<std::vector<std::atomic<int>>>(frames);
    Inpainter out;
    out.color = honest.color;
    out.depth = [honest, calls](const InpaintRequest& req) {
        DepthCompletion d = honest.depth(req);
        if ((*calls)[static_cast<std::size_t>(req.frame_id)]++ > 0) return d;
        const RegionLabeling regions = label_regions(req.hole, 4);
        for (Eigen::Index v = 0; v < req.hole.rows(); ++v)
            for (Eigen::Index u = 0; u < req.hole.cols(); ++u) {
                const int r = regions.label(v, u);
                if (r < 0 || !(d.depth(v, u) > 0.0)) continue;
                switch ((r + req.frame_id) % 3) {
                    case 0: d.depth(v, u) += 0.5; break;
                    case 1: d.depth(v, u) *= 0.8; break;
                    case 2: d.depth(v, u) *= 0.5; break;
                }
            }
        return d;
    };
    return out;
}

Outcome criterion5() {
    const char* names[] = {"none", "+single", "+cross", "+voting"};
    std::vector<double> mean(4, 0.0);
    const int bundles = 10;
    BackendSpec color, depth;
    color.kind = BackendKind::diffusion_color;
    depth.kind = BackendKind::planefit_depth;
    const Inpainter honest = make_inpainter(color, depth);
    for (int b = 0; b < bundles; ++b) {
        SceneSpec spec;
        spec.seed = static_cast<std::uint64_t>(100 + b);
        spec.camera_count = 12;
        const SynthScene scene = generate(spec);
        const std::vector<Frame> frames = masked_frames(scene);
        const auto truth = sample_surface(scene.clean_observed, 0.02);
        for (int level = 0; level < 4; ++level) {
            ConsistencyConfig cfg;
            cfg.single_prune = level >= 1;
            cfg.cross_prune = level >= 2;
            cfg.voting = level >= 3;
            RefineConfig rcfg;
            const RefineResult res = refine(frames, {}, adversarial(honest, frames.size()), cfg, rcfg);
            const FusedCloud cloud = fuse(fuse_views(frames, res.states), rcfg);
            mean[level] += chamfer(cloud.points, truth) / bundles;
        }
    }
    bool ok = mean[3] <= 0.5 * mean[0];
    for (int i = 1; i < 4; ++i) ok = ok && mean[i] <= mean[i - 1];
    std::string detail = "mean CD (cm):";
    for (int i = 0; i < 4; ++i) detail += fmt(" %s %.3f", names[i], mean[i]);
    return {ok, detail};
}

// ------------------------------------------------------------ round trip

Outcome criterion6() {
    SceneSpec spec;
    spec.camera_count = 20;
    const SynthScene scene = generate(spec);
    const std::vector<Frame> frames = masked_frames(scene);
    RefineConfig rcfg;
    const RefineResult res = refine(frames, scene.bundle.clean_renders, oracle_inpainter(), {}, rcfg);
    const TriangleMesh mesh = tsdf_fuse(fuse_views(frames, res.states), rcfg);
    const double cd = chamfer(sample_surface(mesh, rcfg.tsdf_voxel), sample_surface(scene.clean_observed, rcfg.tsdf_voxel));
    const double limit = 100.0 * 2.0 * rcfg.tsdf_voxel;
    return {cd <= limit, fmt("mesh to clean mesh Chamfer %.3f cm (limit %.1f cm), %zu triangles", cd, limit,
                             mesh.triangles.size())};
}

// ------------------------------------------------------------ warp

// Pixels of a rendered depth map next to a depth discontinuity.
Mask near_boundary(const DepthMap& d) {
    Mask m = Mask::Zero(d.rows(), d.cols());
    for (Eigen::Index v = 0; v < d.rows(); ++v)
        for (Eigen::Index u = 0; u < d.cols(); ++u)
            for (int dv = -1; dv <= 1; ++dv)
                for (int du = -1; du <= 1; ++du) {
                    const Eigen::Index y = v + dv, x = u + du;
                    if (y < 0 || x < 0 || y >= d.rows() || x >= d.cols()) continue;
                    if (std::abs(d(y, x) - d(v, u)) > 0.05 * std::max(d(y, x), d(v, u))) m(v, u) = 1;
                }
    return m;
}

// Source depth with every point hidden from `dst` removed. Visibility comes
// from casting a ray at the point from the destination camera center, so a
// surface that t cannot see never takes part in the comparison.
DepthMap visible_from(const RayCaster& caster, const Frame& src, const CameraModel& dst) {
    DepthMap out = src.depth_cap;
    const Eigen::Vector3d c = dst.center();
    for (Eigen::Index v = 0; v < out.rows(); ++v)
        for (Eigen::Index u = 0; u < out.cols(); ++u) {
            if (!(out(v, u) > 0.0)) continue;
            const Eigen::Vector3d x = unproject(src.camera, Eigen::Vector2d(u, v), out(v, u));
            const double dist = (x - c).norm();
            const auto hit = caster.intersect(c, (x - c) / dist);
            if (hit && hit->t < dist - 1e-4) out(v, u) = 0.0;
        }
    return out;
}

Outcome criterion7() {
    std::vector<SynthScene> scenes;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SceneSpec spec;
        spec.seed = seed;
        scenes.push_back(generate(spec));
    }
    std::vector<RayCaster> casters;
    for (const auto& sc : scenes) casters.emplace_back(sc.bundle.mesh);
    Rng rng(7);
    double worst = 0.0;
    std::vector<double> medians;
    int attempts = 0;
    while (medians.size() < 50 && attempts++ < 1000) {
        const std::size_t scene = rng.index(scenes.size());
        const auto& frames = scenes[scene].bundle.frames;
        const std::size_t s = rng.index(frames.size()), t = rng.index(frames.size());
        if (s == t) continue;
        const WarpResult w = warp_depth(visible_from(casters[scene], frames[s], frames[t].camera), frames[s].camera,
                                        frames[t].camera);
        const DepthMap& truth = frames[t].depth_cap;
        const Mask edge = near_boundary(truth);
        std::vector<double> err;
        for (Eigen::Index v = 0; v < truth.rows(); ++v)
            for (Eigen::Index u = 0; u < truth.cols(); ++u)
                if (w.depth(v, u) > 0.0 && truth(v, u) > 0.0 && !edge(v, u))
                    err.push_back(std::abs(w.depth(v, u) - truth(v, u)));
        if (err.size() < 100) continue;  // pair barely overlaps
        std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
        medians.push_back(err[err.size() / 2]);
        worst = std::max(worst, medians.back());
    }
    std::sort(medians.begin(), medians.end());
    const bool ok = medians.size() == 50 && worst < 1e-3;
    return {ok, fmt("%zu pairs, per-pair median |dz|: median %.3g m, worst %.3g m", medians.size(),
                    medians.empty() ? 0.0 : medians[medians.size() / 2], worst)};
}

// ------------------------------------------------------------ masks

Outcome criterion8() {
    long frames_checked = 0, raw_mismatch = 0, ring_mismatch = 0, max_ring = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        SceneSpec spec;
        spec.seed = seed;
        spec.camera_count = 10;
        const SynthScene scene = generate(spec);
        ProjectionConfig cfg;
        const ProjectedMasks m = project_masks(scene.bundle.mesh, scene.bundle.frames, cfg);
        for (std::size_t i = 0; i < m.raw.size(); ++i) {
            ++frames_checked;
            const Mask& raw = m.raw[i];
            raw_mismatch += (raw != scene.truth_masks[i]).count();
            // Oracle: every pixel within L1 distance 6 of the raw mask.
            for (Eigen::Index v = 0; v < raw.rows(); ++v)
                for (Eigen::Index u = 0; u < raw.cols(); ++u) {
                    long best = -1;
                    for (Eigen::Index y = std::max<Eigen::Index>(0, v - 6); y <= std::min<Eigen::Index>(raw.rows() - 1, v + 6); ++y)
                        for (Eigen::Index x = std::max<Eigen::Index>(0, u - 6); x <= std::min<Eigen::Index>(raw.cols() - 1, u + 6); ++x)
                            if (raw(y, x)) {
                                const long d = std::abs(y - v) + std::abs(x - u);
                                if (best < 0 || d < best) best = d;
                            }
                    const bool want = best >= 0 && best <= cfg.dilation_iters;
                    if (want != (m.final[i](v, u) != 0)) ++ring_mismatch;
                    if (m.final[i](v, u) && best > max_ring) max_ring = best;
                }
        }
    }
    const bool ok = raw_mismatch == 0 && ring_mismatch == 0 && max_ring <= 6;
    return {ok, fmt("%ld frames: %ld raw pixels differ from ray-cast silhouettes, %ld dilated pixels differ from "
                    "the L1<=6 oracle, widest ring %ld px",
                    frames_checked, raw_mismatch, ring_mismatch, max_ring)};
}

// ------------------------------------------------------------ performance

Outcome criterion9() {
    SceneSpec spec;
    spec.camera_count = 50;
    spec.width = 304;
    spec.height = 228;
    const SynthScene scene = generate(spec);
    const BenchResult r = bench_consistency(scene, {10, 20, 40, 50}, 1, {});
    std::vector<double> x, y;
    for (int i = 0; i < 3; ++i) {
        x.push_back(r.points[i].frames);
        y.push_back(r.points[i].seconds);
    }
    const double exponent = fit_exponent(x, y);
    const double t50 = r.points[3].seconds;
    return {t50 < 60.0 && exponent <= 2.3,
            fmt("50 frames in %.2f s on %d thread(s); seconds at 10/20/40 frames: %.3f %.3f %.3f, exponent %.2f", t50,
                max_threads(), y[0], y[1], y[2], exponent)};
}

// ------------------------------------------------------------ determinism

bool same_file(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    return std::equal(std::istreambuf_iterator<char>(fa), {}, std::istreambuf_iterator<char>(fb), {});
}

// Relative paths of every artifact except the timing report.
std::vector<fs::path> artifacts(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "report.json") out.push_back(fs::relative(e.path(), dir));
    std::sort(out.begin(), out.end());
    return out;
}

Outcome criterion10() {
    const fs::path root = fs::temp_directory_path() / "viewfuse_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string bin = VIEWFUSE_BIN;
    auto run = [&](const std::string& args) {
        const std::string cmd = "VIEWFUSE_LOG=warn " + bin + " " + args;
        return std::system(cmd.c_str());
    };
    if (run("synth --frames 8 --out " + (root / "bundle").string()) != 0) return {false, "synth failed"};
    const std::string common = "pipeline --bundle " + (root / "bundle").string();
    if (run(common + " --threads 1 --out " + (root / "t1").string()) != 0 ||
        run(common + " --threads 8 --out " + (root / "t8").string()) != 0 ||
        run(common + " --threads 8 --out " + (root / "t8b").string()) != 0)
        return {false, "pipeline failed"};
    const auto files = artifacts(root / "t1");
    int differ = 0;
    for (const char* other : {"t8", "t8b"}) {
        if (artifacts(root / other) != files) return {false, std::string("artifact set differs in ") + other};
        for (const auto& f : files) differ += !same_file(root / "t1" / f, root / other / f);
    }
    fs::remove_all(root);
    return {differ == 0 && !files.empty(),
            fmt("%zu artifacts compared across threads 1, 8 and a repeat run; %d differ", files.size(), differ)};
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::err);
    std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                      criterion6, criterion7, criterion8, criterion9, criterion10};
    // Optional list of criterion numbers to run.
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d: %s (%s; %.1f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), s);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
