#include "viewfuse/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <type_traits>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "viewfuse/bench.hpp"
#include "viewfuse/consistency.hpp"
#include "viewfuse/errors.hpp"
#include "viewfuse/fuse.hpp"
#include "viewfuse/inpaint.hpp"
#include "viewfuse/io.hpp"
#include "viewfuse/loss.hpp"
#include "viewfuse/metrics.hpp"
#include "viewfuse/parallel.hpp"
#include "viewfuse/projection.hpp"
#include "viewfuse/refine.hpp"
#include "viewfuse/synth.hpp"

namespace viewfuse {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Options every subcommand takes.
struct Common {
    std::string config;
    int threads = 0;
    std::string report;
};

struct BundleOpts {
    std::string dir;
    std::optional<int> stride;
};

// One entry of the "steps" table: name, wall time, bytes (or items) produced.
class Report {
public:
    explicit Report(std::string command) { doc_["command"] = std::move(command); }

    json& operator[](const char* key) { return doc_[key]; }

    template <class F>
    auto step(const std::string& name, F&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        auto out = fn();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        spdlog::info("{}: {:.2f} s", name, s);
        doc_["steps"].push_back(json{{"step", name}, {"seconds", s}, {"output_size", size_of(out)}});
        return out;
    }

    void write(const fs::path& path) const {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        io::write_json(path, doc_);
    }

private:
    // Bytes written for plain counts, element counts for containers.
    template <class T>
    static std::uintmax_t size_of(const T& out) {
        if constexpr (std::is_integral_v<T>) return static_cast<std::uintmax_t>(out);
        else if constexpr (requires { out.size(); }) return out.size();
        else if constexpr (requires { out.triangles.size(); }) return out.triangles.size();
        else if constexpr (requires { out.frames.size(); }) return out.frames.size();
        else if constexpr (requires { out.states.size(); }) return out.states.size();
        else if constexpr (requires { out.bundle.frames.size(); }) return out.bundle.frames.size();
        else if constexpr (requires { out.points.size(); }) return out.points.size();
        else return 0;
    }

    json doc_ = {{"steps", json::array()}};
};

std::uintmax_t bytes_of(const fs::path& p) { return fs::exists(p) ? fs::file_size(p) : 0; }

int resolve_stride(const BundleOpts& b) {
    if (b.stride) return *b.stride;
    const fs::path meta = fs::path(b.dir) / "bundle.json";
    if (fs::exists(meta)) {
        const json j = io::read_json(meta);
        if (j.contains("stride")) return j.at("stride").get<int>();
    }
    return 5;
}

SceneBundle load(const BundleOpts& b, json& echo) {
    const int stride = resolve_stride(b);
    echo["bundle"] = b.dir;
    echo["stride"] = stride;
    return io::load_bundle(b.dir, stride);
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "key = value file of long option names; the command line wins");
    sub->add_option("--threads", c.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    sub->add_option("--report", c.report, "report path (default <out>/report.json)");
}

void add_bundle(CLI::App* sub, BundleOpts& b) {
    sub->add_option("--bundle", b.dir, "bundle directory")->required();
    sub->add_option("--stride", b.stride, "keep every n-th frame (default 5, or the bundle's own)")
        ->check(CLI::PositiveNumber);
}

// Consistency flags shared by `consistency` and `pipeline`.
struct ConsistencyOpts {
    ConsistencyConfig cfg;
    std::string aggregate = "mean";
    std::vector<std::string> ablate;
    bool no_plane_correction = false;

    ConsistencyConfig resolve() {
        cfg.region_aggregate = parse_region_aggregate(aggregate);
        cfg.plane_correction = !no_plane_correction;
        for (const auto& a : ablate) {
            if (a == "no-single-prune") cfg.single_prune = false;
            else if (a == "no-cross-prune") cfg.cross_prune = false;
            else if (a == "no-voting") cfg.voting = false;
        }
        cfg.validate();
        return cfg;
    }
};

void add_consistency(CLI::App* sub, ConsistencyOpts& o) {
    sub->add_option("--alpha", o.cfg.alpha, "voting agreement distance, meters");
    sub->add_option("--beta", o.cfg.beta_percent, "voting keeps pixels with more than beta% agreement");
    sub->add_option("--max-region-frac", o.cfg.max_region_fraction, "hole regions above this image fraction are dropped");
    sub->add_option("--occlusion-tol", o.cfg.occlusion_tol, "slack of the in-front tests, meters");
    sub->add_option("--occlusion-window", o.cfg.occlusion_window, "min-filter radius of the cross-frame test");
    sub->add_option("--vote-window", o.cfg.vote_window, "pixel radius of voting comparisons");
    sub->add_option("--connectivity", o.cfg.connectivity, "hole region connectivity")->check(CLI::IsMember({4, 8}));
    sub->add_option("--region-aggregate", o.aggregate, "mean, min or all-pixels")
        ->check(CLI::IsMember({"mean", "min", "all", "all-pixels", "all_pixels"}));
    sub->add_flag("--strict-voting", o.cfg.strict_voting, "drop pixels no other view votes on");
    sub->add_flag("--no-plane-correction", o.no_plane_correction, "plain nearest-pixel warp depths");
    sub->add_option("--ablate", o.ablate, "disable a stage")
        ->check(CLI::IsMember({"no-single-prune", "no-cross-prune", "no-voting"}))
        ->take_all()
        ->delimiter(',');
}

json consistency_json(const ConsistencyConfig& c) {
    return {{"alpha", c.alpha},
            {"beta_percent", c.beta_percent},
            {"max_region_fraction", c.max_region_fraction},
            {"occlusion_tol", c.occlusion_tol},
            {"occlusion_window", c.occlusion_window},
            {"vote_window", c.vote_window},
            {"connectivity", c.connectivity},
            {"region_aggregate", to_string(c.region_aggregate)},
            {"strict_voting", c.strict_voting},
            {"plane_correction", c.plane_correction},
            {"stages",
             {{"single_prune", c.single_prune}, {"cross_prune", c.cross_prune}, {"voting", c.voting}}}};
}

json counts_json(std::span<const StageCounts> counts, std::span<const Frame> frames) {
    json out = json::array();
    for (std::size_t f = 0; f < counts.size(); ++f) {
        const auto& c = counts[f];
        out.push_back({{"frame", frames[f].source_index},
                       {"hole", c.hole},
                       {"filled", c.filled},
                       {"single_pixel", c.survived[0]},
                       {"single_region", c.survived[1]},
                       {"cross_frame", c.survived[2]},
                       {"voting", c.survived[3]},
                       {"zero_support", c.zero_support}});
    }
    return out;
}

struct BackendOpts {
    std::string color = "diffusion";
    std::string depth = "planefit";
    std::string color_command;
    std::string depth_command;
    std::uint64_t seed = 0;
    int max_parallel = 1;

    std::pair<BackendSpec, BackendSpec> resolve() const {
        BackendSpec c, d;
        c.kind = parse_backend_kind(color);
        d.kind = parse_backend_kind(depth);
        if (c.kind == BackendKind::planefit_depth) throw DomainError("planefit is a depth backend");
        c.command = color_command;
        d.command = depth_command;
        c.seed = d.seed = seed;
        c.max_parallel = d.max_parallel = max_parallel;
        c.validate();
        d.validate();
        return {c, d};
    }
};

void add_backends(CLI::App* sub, BackendOpts& b) {
    sub->add_option("--backend-color", b.color, "diffusion, oracle or external");
    sub->add_option("--backend-depth", b.depth, "planefit, diffusion, oracle or external");
    sub->add_option("--color-command", b.color_command, "command of the external color backend");
    sub->add_option("--depth-command", b.depth_command, "command of the external depth backend");
    sub->add_option("--backend-seed", b.seed, "seed of the plane fitting");
    sub->add_option("--max-parallel", b.max_parallel, "concurrent external processes")->check(CLI::PositiveNumber);
}

json backends_json(const BackendSpec& c, const BackendSpec& d) {
    return {{"color", to_string(c.kind)},
            {"depth", to_string(d.kind)},
            {"color_command", c.command},
            {"depth_command", d.command},
            {"seed", c.seed},
            {"max_parallel", c.max_parallel}};
}

std::vector<CleanRender> truth_of(const SceneBundle& b, const BackendSpec& c, const BackendSpec& d) {
    const bool oracle = c.kind == BackendKind::oracle || d.kind == BackendKind::oracle;
    if (oracle && !b.has_clean()) throw EmptyInputError("oracle backend needs the bundle's clean/ renders");
    return b.clean_renders;
}

// Writes color/%06d.png and depth/%06d.vfd under `dir`; returns bytes.
std::uintmax_t write_frames(const fs::path& dir, std::span<const Frame> frames,
                            std::span<const ColorImage> color, std::span<const DepthMap> depth) {
    std::uintmax_t bytes = 0;
    fs::create_directories(dir / "color");
    fs::create_directories(dir / "depth");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto c = dir / "color" / io::frame_name(frames[i].source_index, ".png");
        const auto d = dir / "depth" / io::frame_name(frames[i].source_index, ".vfd");
        io::write_color_png(c, color[i]);
        io::write_depth_vfd(d, depth[i]);
        bytes += bytes_of(c) + bytes_of(d);
    }
    return bytes;
}

DepthMap read_frame_depth(const fs::path& dir, int index) {
    const auto vfd = dir / io::frame_name(index, ".vfd");
    return io::read_depth(fs::exists(vfd) ? vfd : dir / io::frame_name(index, ".png"));
}

bool mesh_has_clutter(const LabeledMesh& m) {
    return std::any_of(m.clutter.begin(), m.clutter.end(), [](std::uint8_t c) { return c != 0; });
}

// Projects the mesh's clutter into every frame and stores the final masks.
long apply_projection(SceneBundle& bundle, const ProjectionConfig& cfg) {
    const ProjectedMasks masks = project_masks(bundle.mesh, bundle.frames, cfg);
    long pixels = 0;
    for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
        bundle.frames[i].mask = masks.final[i];
        pixels += count(masks.final[i]);
    }
    return pixels;
}

fs::path report_path(const Common& c, const std::string& out) {
    return c.report.empty() ? fs::path(out) / "report.json" : fs::path(c.report);
}

// ---------------------------------------------------------------- commands

struct SynthOpts {
    std::string spec;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> frames;
    bool png_depth = false;
};

int cmd_synth(const SynthOpts& o, const Common& c) {
    Report rep("synth");
    SceneSpec spec = o.spec.empty() ? SceneSpec{} : spec_from_json(io::read_json(o.spec));
    if (o.seed) spec.seed = *o.seed;
    if (o.frames) spec.camera_count = *o.frames;
    spec.validate();
    rep["config"] = {{"spec", spec_to_json(spec)}, {"out", o.out}, {"png_depth", o.png_depth}, {"threads", c.threads}};

    const SynthScene scene = rep.step("generate", [&] { return generate(spec); });
    const fs::path out = o.out;
    rep.step("write", [&] {
        io::save_bundle(scene.bundle, out, {.lossless_depth = !o.png_depth});
        fs::create_directories(out / "truth" / "mask");
        for (std::size_t i = 0; i < scene.truth_masks.size(); ++i)
            io::write_mask_png(out / "truth" / "mask" / io::frame_name(scene.bundle.frames[i].source_index, ".png"),
                               scene.truth_masks[i]);
        io::write_mesh_ply(out / "clean" / "mesh.ply", scene.clean_observed);
        io::write_mesh_ply(out / "clean" / "full_mesh.ply", scene.clean.mesh);
        io::write_json(out / "bundle.json", {{"stride", 1}, {"spec", spec_to_json(spec)}});
        std::uintmax_t bytes = 0;
        for (const auto& e : fs::recursive_directory_iterator(out))
            if (e.is_regular_file()) bytes += e.file_size();
        return bytes;
    });
    rep["frames"] = scene.bundle.frames.size();
    rep["triangles"] = scene.bundle.mesh.triangles.size();
    rep.write(report_path(c, o.out));
    return 0;
}

struct ProjectOpts {
    BundleOpts bundle;
    ProjectionConfig cfg;
    std::string out;
};

int cmd_project(ProjectOpts& o, const Common& c) {
    Report rep("project");
    o.cfg.validate();
    json echo = {{"dilate", o.cfg.dilation_iters},
                 {"depth_tolerance", o.cfg.depth_agreement_tol},
                 {"min_mask_pixels", o.cfg.min_mask_pixels},
                 {"threads", c.threads}};
    SceneBundle bundle = rep.step("load", [&] { return load(o.bundle, echo); });
    const std::string out = o.out.empty() ? o.bundle.dir : o.out;
    echo["out"] = out;
    rep["config"] = echo;
    if (bundle.mesh.vertices.empty()) throw MissingFileError((fs::path(o.bundle.dir) / "mesh.ply").string());
    const ProjectedMasks masks =
        rep.step("project", [&] { return project_masks(bundle.mesh, bundle.frames, o.cfg); });
    json frames = json::array();
    for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
        bundle.frames[i].mask = masks.final[i];
        frames.push_back({{"frame", bundle.frames[i].source_index},
                          {"raw_pixels", count(masks.raw[i])},
                          {"mask_pixels", count(masks.final[i])}});
    }
    rep.step("write", [&] {
        io::save_masks(bundle.frames, out);
        std::uintmax_t bytes = 0;
        for (const auto& f : bundle.frames) bytes += bytes_of(fs::path(out) / "mask" / io::frame_name(f.source_index, ".png"));
        return bytes;
    });
    rep["frames"] = frames;
    rep.write(report_path(c, out));
    return 0;
}

struct InpaintOpts {
    BundleOpts bundle;
    BackendOpts backends;
    std::string backend;
    std::string out;
};

int cmd_inpaint(InpaintOpts& o, const Common& c) {
    Report rep("inpaint");
    if (!o.backend.empty()) {
        // One backend name: it goes where its kind fits.
        switch (parse_backend_kind(o.backend)) {
            case BackendKind::diffusion_color: o.backends.color = o.backend; break;
            case BackendKind::planefit_depth: o.backends.depth = o.backend; break;
            default: o.backends.color = o.backends.depth = o.backend;
        }
    }
    const auto [cspec, dspec] = o.backends.resolve();
    json echo = {{"backends", backends_json(cspec, dspec)}, {"out", o.out}, {"threads", c.threads}};
    const SceneBundle bundle = rep.step("load", [&] { return load(o.bundle, echo); });
    rep["config"] = echo;
    const auto truth = truth_of(bundle, cspec, dspec);
    const Inpainter inp = make_inpainter(cspec, dspec);

    const std::size_t n = bundle.frames.size();
    std::vector<ColorImage> color(n);
    std::vector<DepthMap> depth(n);
    std::vector<long> unfilled(n, 0);
    rep.step("inpaint", [&] {
        parallel_for(n, [&](std::size_t i) {
            const Frame& f = bundle.frames[i];
            const MaskedFrame m = mask_frame(f, f.mask);
            InpaintRequest req;
            req.color = m.color;
            req.depth = m.depth;
            req.hole = m.hole;
            req.camera = &f.camera;
            req.truth = truth.empty() ? nullptr : &truth[i];
            req.frame_id = f.id;
            color[i] = inp.color(req);
            req.guidance = color[i];
            DepthCompletion d = inp.depth(req);
            require_same_size(d.depth, req.depth, "inpainted depth");
            depth[i] = (req.hole != 0).select(d.depth.max(0.0), req.depth);
            unfilled[i] = count(d.unfilled);
        });
        return static_cast<std::uintmax_t>(n);
    });
    rep.step("write", [&] { return write_frames(o.out, bundle.frames, color, depth); });
    json frames = json::array();
    for (std::size_t i = 0; i < n; ++i)
        frames.push_back({{"frame", bundle.frames[i].source_index},
                          {"hole", count(bundle.frames[i].mask)},
                          {"unfilled", unfilled[i]}});
    rep["frames"] = frames;
    rep.write(report_path(c, o.out));
    return 0;
}

struct ConsistencyCmdOpts {
    BundleOpts bundle;
    ConsistencyOpts cons;
    std::string pred;
    std::string out;
};

int cmd_consistency(ConsistencyCmdOpts& o, const Common& c) {
    Report rep("consistency");
    const ConsistencyConfig cfg = o.cons.resolve();
    json echo = {{"consistency", consistency_json(cfg)}, {"pred", o.pred}, {"out", o.out}, {"threads", c.threads}};
    const SceneBundle bundle = rep.step("load", [&] { return load(o.bundle, echo); });
    rep["config"] = echo;
    const std::size_t n = bundle.frames.size();
    std::vector<DepthMap> pred(n);
    rep.step("load_pred", [&] {
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = read_frame_depth(fs::path(o.pred) / "depth", bundle.frames[i].source_index);
            require_same_size(pred[i], bundle.frames[i].depth_cap, "inpainted depth");
        }
        return static_cast<std::uintmax_t>(n);
    });
    std::vector<ConsistencyView> views;
    for (std::size_t i = 0; i < n; ++i) {
        const Frame& f = bundle.frames[i];
        views.push_back({&f.camera, &f.depth_cap, &pred[i], &f.mask});
    }
    const ConsistencyResult res = rep.step("consistency", [&] { return run_consistency(views, cfg); });
    rep.step("write", [&] {
        std::uintmax_t bytes = 0;
        for (int s = 0; s < 4; ++s) {
            const fs::path dir = fs::path(o.out) / ("stage" + std::to_string(s + 1));
            fs::create_directories(dir);
            for (std::size_t i = 0; i < n; ++i) {
                const auto p = dir / io::frame_name(bundle.frames[i].source_index, ".vfd");
                io::write_depth_vfd(p, res.stages[i][s]);
                bytes += bytes_of(p);
            }
        }
        return bytes;
    });
    rep["frames"] = counts_json(res.counts, bundle.frames);
    rep.write(report_path(c, o.out));
    return 0;
}

struct PipelineOpts {
    BundleOpts bundle;
    ConsistencyOpts cons;
    BackendOpts backends;
    RefineConfig refine;
    ProjectionConfig projection;
    bool no_project = false;
    bool no_fallback = false;
    bool no_mesh = false;
    std::string out;
};

json refine_json(const RefineConfig& r) {
    return {{"max_iterations", r.max_iterations},
            {"min_progress_pixels", r.min_progress_pixels},
            {"fuse_max_depth", r.fuse_max_depth},
            {"fuse_max_points", r.fuse_max_points},
            {"tsdf_voxel", r.tsdf_voxel},
            {"tsdf_trunc", r.tsdf_trunc},
            {"tsdf_max_voxels", r.tsdf_max_voxels},
            {"seed", r.seed},
            {"fallback", r.fallback}};
}

void add_fusion(CLI::App* sub, RefineConfig& r) {
    sub->add_option("--max-depth", r.fuse_max_depth, "fused depth cap, meters");
    sub->add_option("--max-points", r.fuse_max_points, "fused point cap");
    sub->add_option("--voxel", r.tsdf_voxel, "TSDF voxel size, meters");
    sub->add_option("--trunc", r.tsdf_trunc, "TSDF truncation, meters");
    sub->add_option("--max-voxels", r.tsdf_max_voxels, "TSDF grid size cap");
    sub->add_option("--seed", r.seed, "point subsampling seed");
}

// Fuses and writes cloud.ply (+ mesh.ply); returns the fused point count.
std::size_t fuse_and_write(Report& rep, std::span<const FuseView> views, const RefineConfig& cfg,
                           const fs::path& out, bool mesh) {
    const FusedCloud cloud = rep.step("fuse", [&] { return fuse(views, cfg); });
    rep.step("write_cloud", [&] {
        write_cloud_ply(out / "cloud.ply", cloud);
        return bytes_of(out / "cloud.ply");
    });
    if (mesh) {
        const TriangleMesh m = rep.step("tsdf", [&] { return tsdf_fuse(views, cfg); });
        rep.step("write_mesh", [&] {
            io::write_mesh_ply(out / "mesh.ply", m);
            return bytes_of(out / "mesh.ply");
        });
        rep["mesh_triangles"] = m.triangles.size();
    }
    rep["cloud_points"] = cloud.size();
    return cloud.size();
}

int cmd_pipeline(PipelineOpts& o, const Common& c) {
    Report rep("pipeline");
    const ConsistencyConfig ccfg = o.cons.resolve();
    const auto [cspec, dspec] = o.backends.resolve();
    o.refine.fallback = !o.no_fallback;
    o.refine.validate();
    o.projection.validate();
    json echo = {{"consistency", consistency_json(ccfg)},
                 {"backends", backends_json(cspec, dspec)},
                 {"refine", refine_json(o.refine)},
                 {"dilate", o.projection.dilation_iters},
                 {"project", !o.no_project},
                 {"mesh", !o.no_mesh},
                 {"out", o.out},
                 {"threads", c.threads}};
    SceneBundle bundle = rep.step("load", [&] { return load(o.bundle, echo); });
    rep["config"] = echo;
    const fs::path out = o.out;
    fs::create_directories(out);

    if (!o.no_project && mesh_has_clutter(bundle.mesh))
        rep.step("project", [&] { return static_cast<std::uintmax_t>(apply_projection(bundle, o.projection)); });
    io::save_masks(bundle.frames, out);

    const auto truth = truth_of(bundle, cspec, dspec);
    const Inpainter inp = make_inpainter(cspec, dspec);
    const RefineResult res = rep.step("refine", [&] { return refine(bundle.frames, truth, inp, ccfg, o.refine); });

    const std::size_t n = bundle.frames.size();
    std::vector<ColorImage> color(n);
    std::vector<DepthMap> depth(n);
    for (std::size_t i = 0; i < n; ++i) {
        color[i] = res.states[i].color_pre;
        depth[i] = res.states[i].depth_pre;
    }
    rep.step("write_final", [&] { return write_frames(out / "final", bundle.frames, color, depth); });
    const auto views = fuse_views(bundle.frames, res.states);
    fuse_and_write(rep, views, o.refine, out, !o.no_mesh);

    rep["refine"] = res.report.to_json();
    rep["frames"] = n;
    rep.write(report_path(c, o.out));
    return 0;
}

struct FuseOpts {
    BundleOpts bundle;
    RefineConfig refine;
    std::string pred;
    std::string out;
    bool no_mesh = false;
};

int cmd_fuse(FuseOpts& o, const Common& c) {
    Report rep("fuse");
    o.refine.validate();
    json echo = {{"refine", refine_json(o.refine)}, {"pred", o.pred}, {"mesh", !o.no_mesh}, {"out", o.out},
                 {"threads", c.threads}};
    SceneBundle bundle = rep.step("load", [&] { return load(o.bundle, echo); });
    rep["config"] = echo;
    if (!o.pred.empty()) {
        // Replace the capture with a pipeline's final (or inpaint's) output.
        const fs::path pred = fs::exists(fs::path(o.pred) / "final") ? fs::path(o.pred) / "final" : fs::path(o.pred);
        rep.step("load_pred", [&] {
            for (auto& f : bundle.frames) {
                f.color = io::read_color_png(pred / "color" / io::frame_name(f.source_index, ".png"));
                f.depth_cap = read_frame_depth(pred / "depth", f.source_index);
                f.validate();
            }
            return static_cast<std::uintmax_t>(bundle.frames.size());
        });
    }
    fs::create_directories(o.out);
    const auto views = fuse_views(bundle.frames);
    fuse_and_write(rep, views, o.refine, o.out, !o.no_mesh);
    rep.write(report_path(c, o.out));
    return 0;
}

struct EvalOpts {
    std::string pred;
    std::string truth;
    std::string region_masks;
    std::string pred_masks;
    std::string truth_masks;
    double spacing = 0.02;
};

std::vector<Eigen::Vector3d> cloud_or_mesh_points(const fs::path& dir, double spacing) {
    if (fs::exists(dir / "mesh.ply")) {
        const LabeledMesh m = io::read_mesh_ply(dir / "mesh.ply");
        if (!m.triangles.empty()) return sample_surface(m, spacing);
        return m.vertices;
    }
    if (fs::exists(dir / "cloud.ply")) return io::read_mesh_ply(dir / "cloud.ply").vertices;
    return {};
}

std::vector<int> frame_indices(const fs::path& dir, const std::string& ext) {
    std::vector<int> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.size() == 6 + ext.size() && name.ends_with(ext) &&
            std::all_of(name.begin(), name.begin() + 6, [](char ch) { return ch >= '0' && ch <= '9'; }))
            out.push_back(std::stoi(name.substr(0, 6)));
    }
    std::sort(out.begin(), out.end());
    return out;
}

int cmd_eval(const EvalOpts& o, const Common& c) {
    Report rep("eval");
    rep["config"] = {{"pred", o.pred},
                     {"truth", o.truth},
                     {"region_masks", o.region_masks},
                     {"pred_masks", o.pred_masks},
                     {"truth_masks", o.truth_masks},
                     {"sample_spacing", o.spacing},
                     {"threads", c.threads}};
    const fs::path pred = fs::exists(fs::path(o.pred) / "final") ? fs::path(o.pred) / "final" : fs::path(o.pred);
    const fs::path truth = o.truth;

    // Renders: every color frame present in both directories.
    json frames = json::array();
    ImageMetrics sum{0.0, 0.0, 0.0, 0.0};
    int used = 0, identical = 0;
    rep.step("images", [&] {
        for (int idx : frame_indices(pred / "color", ".png")) {
            const auto t = truth / "color" / io::frame_name(idx, ".png");
            if (!fs::exists(t)) continue;
            const ColorImage a = io::read_color_png(pred / "color" / io::frame_name(idx, ".png"));
            const ColorImage b = io::read_color_png(t);
            std::optional<Mask> region;
            if (!o.region_masks.empty()) {
                region = io::read_mask_png(fs::path(o.region_masks) / io::frame_name(idx, ".png"));
                if (count(*region) == 0) continue;
            }
            const ImageMetrics m = image_metrics(a, b, region ? &*region : nullptr);
            json j = to_json(m);
            j["frame"] = idx;
            frames.push_back(j);
            sum.l1 += m.l1;
            sum.l2 += m.l2;
            // Identical renders have infinite PSNR; the mean skips them.
            if (std::isfinite(m.psnr)) sum.psnr += m.psnr;
            else ++identical;
            sum.ssim += m.ssim;
            ++used;
        }
        return static_cast<std::uintmax_t>(used);
    });
    if (used > 0) {
        const double psnr = used > identical ? sum.psnr / (used - identical) : std::numeric_limits<double>::infinity();
        ImageMetrics mean{sum.l1 / used, sum.l2 / used, psnr, sum.ssim / used};
        rep["images"] = {{"frames", frames}, {"mean", to_json(mean)}, {"identical_frames", identical}};
    }

    // Geometry: pred mesh (sampled) or cloud against the truth mesh.
    const auto pts = cloud_or_mesh_points(o.pred, o.spacing);
    const auto ref = cloud_or_mesh_points(truth, o.spacing);
    if (!pts.empty() && !ref.empty()) {
        const ChamferResult cd = rep.step("chamfer", [&] { return chamfer_detail(pts, ref); });
        json j = to_json(cd);
        j["formula"] = kChamferFormula;
        j["pred_points"] = pts.size();
        j["truth_points"] = ref.size();
        rep["chamfer"] = j;
    }

    if (!o.pred_masks.empty() && !o.truth_masks.empty()) {
        std::vector<std::uint8_t> p, g;
        rep.step("masks", [&] {
            for (int idx : frame_indices(o.truth_masks, ".png")) {
                const auto pp = fs::path(o.pred_masks) / io::frame_name(idx, ".png");
                if (!fs::exists(pp)) continue;
                const Mask a = io::read_mask_png(pp);
                const Mask b = io::read_mask_png(fs::path(o.truth_masks) / io::frame_name(idx, ".png"));
                require_same_size(a, b, pp.c_str());
                p.insert(p.end(), a.data(), a.data() + a.size());
                g.insert(g.end(), b.data(), b.data() + b.size());
            }
            return static_cast<std::uintmax_t>(p.size());
        });
        if (!p.empty()) rep["masks"] = to_json(mask_metrics(p, g));
    }
    rep.write(c.report.empty() ? fs::path(o.pred) / "metrics.json" : fs::path(c.report));
    return 0;
}

struct LossOpts {
    std::string mesh;
    std::string probs;
    LossConfig cfg;
};

int cmd_loss(LossOpts& o, const Common& c) {
    o.cfg.validate();
    const LabeledMesh mesh = io::read_mesh_ply(o.mesh);
    const PredictionSet preds = make_prediction_set(mesh, io::read_probs(o.probs));
    const LossResult r = area_sensitive_ce(preds, o.cfg);
    json per = json::array();
    for (const auto& i : r.per_instance)
        per.push_back({{"instance_id", i.instance_id},
                       {"class", i.cls == VertexClass::clutter ? "clutter" : "non_clutter"},
                       {"vertex_count", i.vertex_count},
                       {"weight", i.weight},
                       {"contribution", i.contribution}});
    const json out = {{"loss", r.loss},
                      {"median_count", r.median_count},
                      {"config", {{"k", o.cfg.k}, {"epsilon", o.cfg.epsilon}, {"mesh", o.mesh}, {"probs", o.probs}}},
                      {"per_instance", per}};
    std::cout << out.dump(2) << '\n';
    if (!c.report.empty()) io::write_json(c.report, out);
    return 0;
}

struct BenchOpts {
    std::string spec;
    std::vector<int> frames{10, 20, 40};
    int repeats = 3;
    int width = 304;
    int height = 228;
    std::string out = ".";
};

int cmd_bench(BenchOpts& o, const Common& c) {
    Report rep("bench");
    std::sort(o.frames.begin(), o.frames.end());
    SceneSpec spec = o.spec.empty() ? SceneSpec{} : spec_from_json(io::read_json(o.spec));
    spec.camera_count = o.frames.back();
    spec.width = o.width;
    spec.height = o.height;
    spec.validate();
    rep["config"] = {{"spec", spec_to_json(spec)}, {"frames", o.frames}, {"repeats", o.repeats}, {"threads", c.threads}};
    const SynthScene scene = rep.step("generate", [&] { return generate(spec); });
    const BenchResult r = rep.step("bench", [&] { return bench_consistency(scene, o.frames, o.repeats, {}); });
    json pts = json::array();
    for (const auto& p : r.points)
        pts.push_back({{"frames", p.frames}, {"seconds", p.seconds}, {"checked_pixels", p.checked_pixels}});
    rep["points"] = pts;
    rep["exponent"] = r.exponent;
    rep.write(report_path(c, o.out));
    return 0;
}

// ---------------------------------------------------------------- plumbing

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::optional<std::string> closest(const std::string& word, const std::vector<std::string>& names) {
    std::optional<std::string> best;
    std::size_t best_d = std::max<std::size_t>(2, word.size() / 3) + 1;
    for (const auto& n : names) {
        const std::size_t d = edit_distance(word, n);
        if (d < best_d) {
            best_d = d;
            best = n;
        }
    }
    return best;
}

// "did you mean" for every argument CLI11 did not recognize.
void suggest(const CLI::App& app, const std::vector<std::string>& args) {
    const CLI::App* sub = nullptr;
    std::vector<std::string> commands;
    for (const CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; })) commands.push_back(s->get_name());
    for (std::size_t i = 0; i < args.size() && !sub; ++i)
        for (const CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; }))
            if (s->get_name() == args[i]) sub = s;
    if (!sub) {
        for (const auto& a : args) {
            if (a.starts_with("-")) continue;
            if (auto m = closest(a, commands)) std::cerr << "unknown command '" << a << "'; did you mean '" << *m << "'?\n";
            break;
        }
        return;
    }
    std::vector<std::string> flags;
    for (const CLI::Option* opt : sub->get_options())
        for (const auto& l : opt->get_lnames()) flags.push_back("--" + l);
    for (std::string a : args) {
        if (!a.starts_with("--")) continue;
        a = a.substr(0, a.find('='));
        if (std::find(flags.begin(), flags.end(), a) != flags.end()) continue;
        if (auto m = closest(a, flags)) std::cerr << "unknown option '" << a << "'; did you mean '" << *m << "'?\n";
        else std::cerr << "unknown option '" << a << "'\n";
    }
}

// Expands `--config FILE` into command-line tokens. Keys are long option
// names, bare or under a [subcommand] section; options already given on the
// command line are left alone.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    auto it = std::find_if(args.begin(), args.end(),
                           [](const std::string& a) { return a == "--config" || a.starts_with("--config="); });
    if (it == args.end()) return args;
    std::string file;
    if (*it == "--config") {
        if (it + 1 == args.end()) return args;  // CLI11 reports the missing value
        file = *(it + 1);
    } else {
        file = it->substr(9);
    }
    const std::string sub = args.empty() ? "" : args.front();
    const std::vector<CLI::ConfigItem> items = CLI::ConfigTOML().from_file(file);
    std::vector<std::string> extra;
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;  // section markers
        if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub)) continue;
        const std::string flag = "--" + item.name;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.starts_with(flag + "=");
        });
        if (given) continue;
        if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
            if (item.inputs[0] == "true") extra.push_back(flag);
            continue;
        }
        for (const auto& v : item.inputs) {
            extra.push_back(flag);
            extra.push_back(v);
        }
    }
    args.insert(args.begin() + (args.empty() ? 0 : 1), extra.begin(), extra.end());
    return args;
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("viewfuse");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("VIEWFUSE_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only honor real ones.
        if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
        else spdlog::warn("VIEWFUSE_LOG='{}' is not a log level", env);
    }
}

}  // namespace

int run_cli(int argc, char** argv) {
    if (!spdlog::get("viewfuse")) setup_logging();

    CLI::App app("Clutter removal and view-consistent inpainting for posed RGB-D sequences", "viewfuse");
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");

    Common common;
    SynthOpts synth;
    ProjectOpts project;
    InpaintOpts inpaint;
    ConsistencyCmdOpts cons;
    PipelineOpts pipe;
    FuseOpts fuse_o;
    EvalOpts eval;
    LossOpts loss;
    BenchOpts bench;

    auto* s = app.add_subcommand("synth", "generate a synthetic cluttered bundle with ground truth");
    s->add_option("--spec", synth.spec, "scene spec JSON (defaults when omitted)");
    s->add_option("--out", synth.out, "output bundle directory")->required();
    s->add_option("--seed", synth.seed, "override the spec seed");
    s->add_option("--frames", synth.frames, "override the camera count")->check(CLI::PositiveNumber);
    s->add_flag("--png-depth", synth.png_depth, "16-bit millimeter PNG depth instead of lossless .vfd");
    add_common(s, common);

    auto* p = app.add_subcommand("project", "project mesh clutter into per-frame masks");
    add_bundle(p, project.bundle);
    p->add_option("--dilate", project.cfg.dilation_iters, "dilation iterations");
    p->add_option("--depth-tol", project.cfg.depth_agreement_tol, "mesh/capture depth agreement, meters");
    p->add_option("--min-mask-pixels", project.cfg.min_mask_pixels, "smaller raw masks are dropped");
    p->add_option("--out", project.out, "directory receiving mask/ (default: the bundle)");
    add_common(p, common);

    auto* i = app.add_subcommand("inpaint", "one inpainting pass over the masked pixels");
    add_bundle(i, inpaint.bundle);
    add_backends(i, inpaint.backends);
    i->add_option("--backend", inpaint.backend, "set one backend by name");
    i->add_option("--out", inpaint.out, "output directory")->required();
    add_common(i, common);

    auto* c = app.add_subcommand("consistency", "run the four consistency checks on inpainted depth");
    add_bundle(c, cons.bundle);
    add_consistency(c, cons.cons);
    c->add_option("--pred", cons.pred, "directory with depth/ from `inpaint`")->required();
    c->add_option("--out", cons.out, "output directory")->required();
    add_common(c, common);

    auto* pl = app.add_subcommand("pipeline", "masks, iterative inpainting, fusion");
    add_bundle(pl, pipe.bundle);
    add_consistency(pl, pipe.cons);
    add_backends(pl, pipe.backends);
    add_fusion(pl, pipe.refine);
    pl->add_option("--max-iterations", pipe.refine.max_iterations, "refinement iterations");
    pl->add_option("--min-progress", pipe.refine.min_progress_pixels, "stop when fewer pixels are accepted");
    pl->add_flag("--no-fallback", pipe.no_fallback, "leave unresolved holes empty");
    pl->add_option("--dilate", pipe.projection.dilation_iters, "mask dilation iterations");
    pl->add_flag("--no-project", pipe.no_project, "use the bundle's masks as they are");
    pl->add_flag("--no-mesh", pipe.no_mesh, "skip TSDF meshing");
    pl->add_option("--out", pipe.out, "output directory")->required();
    add_common(pl, common);

    auto* f = app.add_subcommand("fuse", "fuse frames into cloud.ply and mesh.ply");
    add_bundle(f, fuse_o.bundle);
    add_fusion(f, fuse_o.refine);
    f->add_option("--pred", fuse_o.pred, "pipeline or inpaint output to fuse instead of the capture");
    f->add_flag("--no-mesh", fuse_o.no_mesh, "skip TSDF meshing");
    f->add_option("--out", fuse_o.out, "output directory")->required();
    add_common(f, common);

    auto* e = app.add_subcommand("eval", "render, geometry and mask metrics");
    e->add_option("--pred", eval.pred, "pipeline output directory")->required();
    e->add_option("--truth", eval.truth, "ground truth directory (color/, depth/, mesh.ply)")->required();
    e->add_option("--region-masks", eval.region_masks, "restrict render metrics to these masks");
    e->add_option("--pred-masks", eval.pred_masks, "predicted clutter masks");
    e->add_option("--truth-masks", eval.truth_masks, "ground-truth clutter masks");
    e->add_option("--sample-spacing", eval.spacing, "mesh sampling for Chamfer, meters")->check(CLI::PositiveNumber);
    add_common(e, common);

    auto* l = app.add_subcommand("loss", "instance-weighted cross entropy of per-vertex probabilities");
    l->add_option("--mesh", loss.mesh, "labeled mesh PLY")->required();
    l->add_option("--probs", loss.probs, "probability file")->required();
    l->add_option("--k", loss.cfg.k, "modulating factor");
    l->add_option("--epsilon", loss.cfg.epsilon, "probability clamp");
    add_common(l, common);

    auto* b = app.add_subcommand("bench", "time the consistency checks over growing frame counts");
    b->add_option("--spec", bench.spec, "scene spec JSON");
    b->add_option("--frames", bench.frames, "frame counts")->delimiter(',');
    b->add_option("--repeats", bench.repeats, "best of this many runs")->check(CLI::PositiveNumber);
    b->add_option("--width", bench.width, "image width")->check(CLI::PositiveNumber);
    b->add_option("--height", bench.height, "image height")->check(CLI::PositiveNumber);
    b->add_option("--out", bench.out, "report directory");
    add_common(b, common);

    std::vector<std::string> args;
    try {
        try {
            args = expand_config(argc, argv);
        } catch (const CLI::FileError& err) {
            std::cerr << err.what() << '\n';
            return kExitData;
        } catch (const CLI::ParseError& err) {
            std::cerr << "config: " << err.what() << '\n';
            return kExitUsage;
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForVersion& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        std::cerr << err.what() << '\n';
        suggest(app, args);
        std::cerr << "run with --help for usage\n";
        return kExitUsage;
    }

    set_max_threads(common.threads);
    try {
        if (*s) return cmd_synth(synth, common);
        if (*p) return cmd_project(project, common);
        if (*i) return cmd_inpaint(inpaint, common);
        if (*c) return cmd_consistency(cons, common);
        if (*pl) return cmd_pipeline(pipe, common);
        if (*f) return cmd_fuse(fuse_o, common);
        if (*e) return cmd_eval(eval, common);
        if (*l) return cmd_loss(loss, common);
        if (*b) return cmd_bench(bench, common);
    } catch (const Error& err) {
        spdlog::error("{}", err.what());
        return kExitData;
    } catch (const nlohmann::json::exception& err) {
        spdlog::error("malformed JSON: {}", err.what());
        return kExitData;
    } catch (const std::exception& err) {
        spdlog::error("{}", err.what());
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace viewfuse
