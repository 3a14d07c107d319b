#include "viewfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "viewfuse/parallel.hpp"
#include "viewfuse/random.hpp"

namespace viewfuse {

void SceneSpec::validate() const {
    if (!(room.minCoeff() > 0.0)) throw DomainError("room dimensions must be positive");
    if (camera_count < 1) throw DomainError("camera_count must be >= 1");
    if (furniture_count < 0 || clutter_count < 0) throw DomainError("primitive counts must be >= 0");
    if (!(sphere_fraction >= 0.0 && sphere_fraction <= 1.0)) throw DomainError("sphere_fraction must lie in [0, 1]");
    if (!(camera_min_distance > 0.0 && camera_max_distance >= camera_min_distance))
        throw DomainError("camera distance band must satisfy 0 < min <= max");
    if (width < 2 || height < 2) throw DomainError("image size must be at least 2x2");
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw DomainError("fov_deg must lie in (0, 180)");
    if (!(edge > 0.0)) throw DomainError("edge must be > 0");
    if (!(light_dir.norm() > 0.0)) throw DomainError("light_dir must be nonzero");
    if (!(ambient >= 0.0 && ambient <= 1.0)) throw DomainError("ambient must lie in [0, 1]");
    if (!(observed_max_depth > 0.0)) throw DomainError("observed_max_depth must be positive");
    if (!(look_jitter >= 0.0)) throw DomainError("look_jitter must be >= 0");
    auto inside = [&](const Eigen::Vector3d& p) {
        return (p.array() >= 0.0).all() && (p.array() <= room.array()).all();
    };
    for (const auto& b : furniture)
        if (!inside(b.center) || !(b.size.minCoeff() > 0.0)) throw DomainError("furniture box outside room or empty");
    for (const auto& b : clutter_boxes)
        if (!inside(b.center) || !(b.size.minCoeff() > 0.0)) throw DomainError("clutter box outside room or empty");
    for (const auto& s : clutter_spheres)
        if (!inside(s.center) || !(s.radius > 0.0)) throw DomainError("clutter sphere outside room or empty");
}

namespace {

using nlohmann::json;

json vec_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
json rgb_json(const Rgb& c) { return {c[0], c[1], c[2]}; }

Eigen::Vector3d vec_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw DomainError("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Rgb rgb_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw DomainError("expected an rgb triple");
    return Rgb(j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>());
}

BoxPrimitive box_from(const json& j) {
    BoxPrimitive b;
    b.center = vec_from(j.at("center"));
    b.size = vec_from(j.at("size"));
    b.yaw = j.value("yaw", 0.0);
    if (j.contains("albedo")) b.albedo = rgb_from(j["albedo"]);
    return b;
}

json box_json(const BoxPrimitive& b) {
    return {{"center", vec_json(b.center)}, {"size", vec_json(b.size)}, {"yaw", b.yaw}, {"albedo", rgb_json(b.albedo)}};
}

}  // namespace

SceneSpec spec_from_json(const json& j) {
    static const char* known[] = {"room", "furniture_count", "clutter_count", "sphere_fraction", "furniture",
                                  "clutter_boxes", "clutter_spheres", "camera_count", "camera_min_distance",
                                  "camera_max_distance", "look_jitter", "width", "height", "fov_deg", "edge",
                                  "light_dir", "ambient", "observed_max_depth", "seed"};
    if (!j.is_object()) throw DomainError("scene spec must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw DomainError("unknown scene spec key '" + key + "'");
    }
    SceneSpec s;
    try {
        if (j.contains("room")) s.room = vec_from(j["room"]);
        s.furniture_count = j.value("furniture_count", s.furniture_count);
        s.clutter_count = j.value("clutter_count", s.clutter_count);
        s.sphere_fraction = j.value("sphere_fraction", s.sphere_fraction);
        if (j.contains("furniture"))
            for (const auto& b : j["furniture"]) s.furniture.push_back(box_from(b));
        if (j.contains("clutter_boxes"))
            for (const auto& b : j["clutter_boxes"]) s.clutter_boxes.push_back(box_from(b));
        if (j.contains("clutter_spheres"))
            for (const auto& b : j["clutter_spheres"]) {
                SpherePrimitive sp;
                sp.center = vec_from(b.at("center"));
                sp.radius = b.at("radius").get<double>();
                if (b.contains("albedo")) sp.albedo = rgb_from(b["albedo"]);
                s.clutter_spheres.push_back(sp);
            }
        s.camera_count = j.value("camera_count", s.camera_count);
        s.camera_min_distance = j.value("camera_min_distance", s.camera_min_distance);
        s.camera_max_distance = j.value("camera_max_distance", s.camera_max_distance);
        s.look_jitter = j.value("look_jitter", s.look_jitter);
        s.width = j.value("width", s.width);
        s.height = j.value("height", s.height);
        s.fov_deg = j.value("fov_deg", s.fov_deg);
        s.edge = j.value("edge", s.edge);
        if (j.contains("light_dir")) s.light_dir = vec_from(j["light_dir"]);
        s.ambient = j.value("ambient", s.ambient);
        s.observed_max_depth = j.value("observed_max_depth", s.observed_max_depth);
        s.seed = j.value("seed", s.seed);
    } catch (const json::exception& e) {
        throw DomainError(std::string("scene spec: ") + e.what());
    }
    s.validate();
    return s;
}

json spec_to_json(const SceneSpec& s) {
    json furniture = json::array(), boxes = json::array(), spheres = json::array();
    for (const auto& b : s.furniture) furniture.push_back(box_json(b));
    for (const auto& b : s.clutter_boxes) boxes.push_back(box_json(b));
    for (const auto& sp : s.clutter_spheres)
        spheres.push_back({{"center", vec_json(sp.center)}, {"radius", sp.radius}, {"albedo", rgb_json(sp.albedo)}});
    return {{"room", vec_json(s.room)},
            {"furniture_count", s.furniture_count},
            {"clutter_count", s.clutter_count},
            {"sphere_fraction", s.sphere_fraction},
            {"furniture", furniture},
            {"clutter_boxes", boxes},
            {"clutter_spheres", spheres},
            {"camera_count", s.camera_count},
            {"camera_min_distance", s.camera_min_distance},
            {"camera_max_distance", s.camera_max_distance},
            {"look_jitter", s.look_jitter},
            {"width", s.width},
            {"height", s.height},
            {"fov_deg", s.fov_deg},
            {"edge", s.edge},
            {"light_dir", vec_json(s.light_dir)},
            {"ambient", s.ambient},
            {"observed_max_depth", s.observed_max_depth},
            {"seed", s.seed}};
}

namespace {

Eigen::Matrix3d yaw_rotation(double yaw) {
    return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

double footprint_radius(const BoxPrimitive& b) { return 0.5 * std::hypot(b.size.x(), b.size.y()); }

struct Disc {
    Eigen::Vector2d c;
    double r;
};

bool overlaps(const Disc& d, const std::vector<Disc>& others, double gap) {
    for (const auto& o : others)
        if ((d.c - o.c).norm() < d.r + o.r + gap) return true;
    return false;
}

Rgb random_albedo(Rng& rng, int lo, int hi) {
    Rgb c;
    for (int k = 0; k < 3; ++k) c[k] = static_cast<std::uint8_t>(lo + rng.index(static_cast<std::uint64_t>(hi - lo + 1)));
    return c;
}

bool inside_box(const BoxPrimitive& b, const Eigen::Vector3d& p, double margin) {
    const Eigen::Vector3d local = yaw_rotation(b.yaw).transpose() * (p - b.center);
    return (local.array().abs() <= (0.5 * b.size.array() + margin)).all();
}

}  // namespace

SceneLayout layout_scene(const SceneSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SceneLayout layout;
    const Eigen::Vector3d& room = spec.room;
    constexpr int kTries = 1000;

    layout.furniture = spec.furniture;
    std::vector<Disc> furniture_discs;
    for (const auto& b : layout.furniture) furniture_discs.push_back({b.center.head<2>(), footprint_radius(b)});
    if (spec.furniture.empty()) {
        for (int i = 0; i < spec.furniture_count; ++i) {
            for (int attempt = 0; attempt < kTries; ++attempt) {
                BoxPrimitive b;
                b.size = {rng.uniform(0.6, 1.6), rng.uniform(0.4, 1.0), rng.uniform(0.4, 0.9)};
                b.size = b.size.cwiseMin(0.45 * room);
                b.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
                const double r = footprint_radius(b);
                if (2.0 * (r + 0.1) >= std::min(room.x(), room.y())) continue;
                b.center = {rng.uniform(r + 0.1, room.x() - r - 0.1), rng.uniform(r + 0.1, room.y() - r - 0.1),
                            0.5 * b.size.z()};
                b.albedo = random_albedo(rng, 60, 200);
                const Disc d{b.center.head<2>(), r};
                if (overlaps(d, furniture_discs, 0.3)) continue;
                furniture_discs.push_back(d);
                layout.furniture.push_back(b);
                break;
            }
        }
    }

    layout.clutter_boxes = spec.clutter_boxes;
    layout.clutter_spheres = spec.clutter_spheres;
    if (spec.clutter_boxes.empty() && spec.clutter_spheres.empty()) {
        std::vector<Disc> clutter_discs;
        for (int i = 0; i < spec.clutter_count; ++i) {
            const bool sphere = rng.uniform() < spec.sphere_fraction;
            for (int attempt = 0; attempt < kTries; ++attempt) {
                BoxPrimitive box;
                SpherePrimitive ball;
                double r, height;
                if (sphere) {
                    ball.radius = rng.uniform(0.08, 0.18);
                    r = ball.radius;
                    height = 2.0 * ball.radius;
                } else {
                    box.size = {rng.uniform(0.12, 0.4), rng.uniform(0.12, 0.4), rng.uniform(0.1, 0.35)};
                    box.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
                    r = footprint_radius(box);
                    height = box.size.z();
                }
                Eigen::Vector3d base;
                const bool on_furniture = !layout.furniture.empty() && rng.uniform() < 0.5;
                if (on_furniture) {
                    const auto& f = layout.furniture[rng.index(layout.furniture.size())];
                    const double hx = 0.5 * f.size.x() - r, hy = 0.5 * f.size.y() - r;
                    if (hx <= 0.0 || hy <= 0.0) continue;
                    const Eigen::Vector3d local(rng.uniform(-hx, hx), rng.uniform(-hy, hy), 0.5 * f.size.z());
                    base = f.center + yaw_rotation(f.yaw) * local;
                } else {
                    const double m = r + 0.05;
                    base = {rng.uniform(m, room.x() - m), rng.uniform(m, room.y() - m), 0.0};
                    if (overlaps({base.head<2>(), r}, furniture_discs, 0.02)) continue;
                }
                const Disc d{base.head<2>(), r};
                if (overlaps(d, clutter_discs, 0.05)) continue;
                if (base.z() + height > room.z() - 0.1) continue;
                clutter_discs.push_back(d);
                if (sphere) {
                    ball.center = base + Eigen::Vector3d(0.0, 0.0, ball.radius);
                    ball.albedo = random_albedo(rng, 120, 255);
                    layout.clutter_spheres.push_back(ball);
                } else {
                    box.center = base + Eigen::Vector3d(0.0, 0.0, 0.5 * height);
                    box.albedo = random_albedo(rng, 120, 255);
                    layout.clutter_boxes.push_back(box);
                }
                break;
            }
        }
    }

    std::vector<Eigen::Vector3d> targets;
    for (const auto& b : layout.clutter_boxes) targets.push_back(b.center);
    for (const auto& s : layout.clutter_spheres) targets.push_back(s.center);
    const double fx = 0.5 * spec.width / std::tan(0.5 * spec.fov_deg * std::numbers::pi / 180.0);
    for (int k = 0; k < spec.camera_count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < kTries && !placed; ++attempt) {
            Eigen::Vector3d target;
            if (!targets.empty()) {
                target = targets[static_cast<std::size_t>(k) % targets.size()];
            } else {
                target = {rng.uniform(0.2, room.x() - 0.2), rng.uniform(0.2, room.y() - 0.2), 0.0};
            }
            for (int c = 0; c < 3; ++c) target[c] += rng.uniform(-spec.look_jitter, spec.look_jitter);
            const double dist = rng.uniform(spec.camera_min_distance, spec.camera_max_distance);
            const double az = rng.uniform(-std::numbers::pi, std::numbers::pi);
            const double el = rng.uniform(20.0, 60.0) * std::numbers::pi / 180.0;
            const Eigen::Vector3d eye =
                target + dist * Eigen::Vector3d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
            const double margin = 0.15;
            if (eye.x() < margin || eye.y() < margin || eye.x() > room.x() - margin || eye.y() > room.y() - margin ||
                eye.z() < 0.3 || eye.z() > room.z() - margin)
                continue;
            bool blocked = false;
            for (const auto& b : layout.furniture) blocked = blocked || inside_box(b, eye, 0.15);
            for (const auto& b : layout.clutter_boxes) blocked = blocked || inside_box(b, eye, 0.15);
            for (const auto& s : layout.clutter_spheres) blocked = blocked || (eye - s.center).norm() < s.radius + 0.15;
            if (blocked) continue;
            layout.cameras.push_back(look_at(eye, target, fx, fx, spec.width, spec.height));
            placed = true;
        }
        if (!placed) throw DomainError("could not place camera " + std::to_string(k) + " inside the room");
    }
    return layout;
}

namespace {

/// Grid over the quad c00, c10, c11 = c10 + c01 - c00, c01; faces along
/// (c10 - c00) x (c01 - c00).
void add_quad(LabeledMesh& mesh, const Eigen::Vector3d& c00, const Eigen::Vector3d& c10,
              const Eigen::Vector3d& c01, double edge, int instance, bool clutter,
              const Rgb& albedo) {
    const int nu = std::max(1, static_cast<int>(std::ceil((c10 - c00).norm() / edge - 1e-9)));
    const int nv = std::max(1, static_cast<int>(std::ceil((c01 - c00).norm() / edge - 1e-9)));
    const int base = static_cast<int>(mesh.vertices.size());
    for (int j = 0; j <= nv; ++j)
        for (int i = 0; i <= nu; ++i) {
            const double s = static_cast<double>(i) / nu, t = static_cast<double>(j) / nv;
            // Faces are parallelograms; stepping along the edges keeps a
            // coordinate that is constant over the face exact.
            mesh.vertices.push_back(c00 + s * (c10 - c00) + t * (c01 - c00));
            mesh.colors.push_back(albedo);
            mesh.instance_id.push_back(instance);
            mesh.clutter.push_back(clutter ? 1 : 0);
        }
    auto at = [&](int i, int j) { return base + j * (nu + 1) + i; };
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            mesh.triangles.emplace_back(at(i, j), at(i + 1, j), at(i + 1, j + 1));
            mesh.triangles.emplace_back(at(i, j), at(i + 1, j + 1), at(i, j + 1));
        }
}

using Corners = std::array<Eigen::Vector3d, 8>;

Corners box_corners(const BoxPrimitive& b) {
    Corners c;
    const Eigen::Matrix3d r = yaw_rotation(b.yaw);
    for (int k = 0; k < 8; ++k) {
        const Eigen::Vector3d local((k & 1) - 0.5, ((k >> 1) & 1) - 0.5, ((k >> 2) & 1) - 0.5);
        c[k] = b.center + r * local.cwiseProduct(b.size);
    }
    return c;
}

// Corner bit layout x | y << 1 | z << 2. Faces as (c00, c10, c01) with an
// outward normal along (c10 - c00) x (c01 - c00): -z, +z, -x, +x, -y, +y.
constexpr std::array<std::array<int, 3>, 6> kBoxFaces = {{
    {0, 2, 1}, {4, 5, 6}, {0, 4, 2}, {1, 3, 5}, {0, 1, 4}, {2, 6, 3},
}};

void add_box_face(LabeledMesh& mesh, const Corners& c, int face, double edge, int instance, bool clutter,
                  const Rgb& albedo, bool inward) {
    int a = kBoxFaces[face][0], b = kBoxFaces[face][1], d = kBoxFaces[face][2];
    if (inward) std::swap(b, d);
    add_quad(mesh, c[a], c[b], c[d], edge, instance, clutter, albedo);
}

}  // namespace

LabeledMesh tessellate_box(const BoxPrimitive& box, double edge, int instance, bool clutter, bool inward) {
    LabeledMesh mesh;
    const Corners c = box_corners(box);
    for (int f = 0; f < 6; ++f) add_box_face(mesh, c, f, edge, instance, clutter, box.albedo, inward);
    return mesh;
}

LabeledMesh tessellate_sphere(const SpherePrimitive& s, double edge, int instance, bool clutter) {
    LabeledMesh mesh;
    const double pi = std::numbers::pi;
    const int n_lon = std::max(8, static_cast<int>(std::ceil(2.0 * pi * s.radius / edge)));
    const int n_lat = std::max(4, static_cast<int>(std::ceil(pi * s.radius / edge)));
    auto add_vertex = [&](const Eigen::Vector3d& p) {
        mesh.vertices.push_back(s.center + s.radius * p);
        mesh.colors.push_back(s.albedo);
        mesh.instance_id.push_back(instance);
        mesh.clutter.push_back(clutter ? 1 : 0);
        return static_cast<int>(mesh.vertices.size()) - 1;
    };
    const int north = add_vertex(Eigen::Vector3d::UnitZ());
    std::vector<int> rings;
    for (int j = 1; j < n_lat; ++j) {
        const double theta = pi * j / n_lat;
        for (int i = 0; i < n_lon; ++i) {
            const double phi = 2.0 * pi * i / n_lon;
            rings.push_back(add_vertex({std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)}));
        }
    }
    const int south = add_vertex(-Eigen::Vector3d::UnitZ());
    auto ring = [&](int j, int i) { return rings[static_cast<std::size_t>((j - 1) * n_lon + (i % n_lon))]; };
    for (int i = 0; i < n_lon; ++i) mesh.triangles.emplace_back(north, ring(1, i), ring(1, i + 1));
    for (int j = 1; j + 1 < n_lat; ++j)
        for (int i = 0; i < n_lon; ++i) {
            mesh.triangles.emplace_back(ring(j, i), ring(j + 1, i), ring(j + 1, i + 1));
            mesh.triangles.emplace_back(ring(j, i), ring(j + 1, i + 1), ring(j, i + 1));
        }
    for (int i = 0; i < n_lon; ++i) mesh.triangles.emplace_back(ring(n_lat - 1, i), south, ring(n_lat - 1, i + 1));
    return mesh;
}

LabeledMesh build_mesh(const SceneSpec& spec, const SceneLayout& layout) {
    LabeledMesh mesh;
    BoxPrimitive shell;
    shell.center = 0.5 * spec.room;
    shell.size = spec.room;
    const Corners c = box_corners(shell);
    const std::array<Rgb, 6> shell_colors = {Rgb(150, 120, 90),  Rgb(235, 235, 230), Rgb(200, 190, 170),
                                             Rgb(190, 200, 185), Rgb(180, 185, 205), Rgb(205, 185, 185)};
    for (int f = 0; f < 6; ++f) add_box_face(mesh, c, f, spec.edge, f, false, shell_colors[f], true);
    int instance = 6;
    for (const auto& b : layout.furniture) append(mesh, tessellate_box(b, spec.edge, instance++, false));
    for (const auto& b : layout.clutter_boxes) append(mesh, tessellate_box(b, spec.edge, instance++, true));
    for (const auto& s : layout.clutter_spheres) append(mesh, tessellate_sphere(s, spec.edge, instance++, true));
    mesh.validate();
    return mesh;
}

Render render_view(const RayCaster& caster, const TriangleMesh& mesh, const CameraModel& cam,
                   const Lighting& light) {
    RayCastImage hits = cast_view(caster, cam);
    Render out;
    out.color = ColorImage(cam.height, cam.width, 0);
    const Eigen::Vector3d l = light.direction.normalized();
    std::vector<double> shade(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Eigen::Vector3d n =
            (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]).cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
        const double len = n.norm();
        shade[t] = light.ambient + (1.0 - light.ambient) * (len > 0.0 ? std::abs(n.dot(l)) / len : 0.0);
    }
    const bool colored = mesh.colors.size() == mesh.vertices.size();
    for (int v = 0; v < cam.height; ++v)
        for (int u = 0; u < cam.width; ++u) {
            const int t = hits.triangle(v, u);
            if (t < 0) continue;
            const Rgb albedo = colored ? mesh.colors[mesh.triangles[t][0]] : Rgb(200, 200, 200);
            for (int k = 0; k < 3; ++k)
                out.color.channel[k](v, u) = static_cast<std::uint8_t>(
                    std::clamp(std::lround(albedo[k] * shade[t]), 0L, 255L));
        }
    out.depth = std::move(hits.depth);
    out.triangle = std::move(hits.triangle);
    return out;
}

SynthScene generate(const SceneSpec& spec) {
    SynthScene scene;
    scene.layout = layout_scene(spec);
    const LabeledMesh mesh = build_mesh(spec, scene.layout);
    const LabeledMesh clean_mesh = mesh.without_clutter();
    const RayCaster full_caster(mesh), clean_caster(clean_mesh);
    const Lighting light{spec.light_dir, spec.ambient};
    const std::size_t n = scene.layout.cameras.size();
    scene.bundle.frames.resize(n);
    scene.bundle.clean_renders.resize(n);
    scene.clean.frames.resize(n);
    scene.truth_masks.resize(n);
    std::vector<bool> seen(clean_mesh.triangles.size(), false);
    for (std::size_t k = 0; k < n; ++k) {
        const CameraModel& cam = scene.layout.cameras[k];
        Render full = render_view(full_caster, mesh, cam, light);
        Render clean = render_view(clean_caster, clean_mesh, cam, light);
        for (int v = 0; v < cam.height; ++v)
            for (int u = 0; u < cam.width; ++u)
                if (clean.triangle(v, u) >= 0 && clean.depth(v, u) <= spec.observed_max_depth)
                    seen[static_cast<std::size_t>(clean.triangle(v, u))] = true;
        Mask truth = Mask::Zero(cam.height, cam.width);
        for (int v = 0; v < cam.height; ++v)
            for (int u = 0; u < cam.width; ++u) {
                const int t = full.triangle(v, u);
                truth(v, u) = t >= 0 && mesh.triangle_is_clutter(static_cast<std::size_t>(t)) ? 1 : 0;
            }
        Frame f;
        f.id = static_cast<int>(k);
        f.source_index = static_cast<int>(k);
        f.camera = cam;
        f.mask = Mask::Zero(cam.height, cam.width);
        Frame cf = f;
        f.color = std::move(full.color);
        f.depth_cap = std::move(full.depth);
        cf.color = clean.color;
        cf.depth_cap = clean.depth;
        scene.bundle.frames[k] = std::move(f);
        scene.clean.frames[k] = std::move(cf);
        scene.bundle.clean_renders[k] = {std::move(clean.color), std::move(clean.depth)};
        scene.truth_masks[k] = std::move(truth);
    }
    scene.bundle.mesh = mesh;
    scene.clean.mesh = clean_mesh;
    scene.clean_observed = filter_triangles(clean_mesh, seen);
    scene.clean.clean_renders = scene.bundle.clean_renders;
    return scene;
}

std::vector<ConvexHull> clutter_hulls(const LabeledMesh& clutter) {
    std::map<int, std::vector<Eigen::Vector3d>> groups;
    for (std::size_t i = 0; i < clutter.vertices.size(); ++i)
        if (clutter.clutter.empty() || clutter.clutter[i]) groups[clutter.instance_id[i]].push_back(clutter.vertices[i]);
    std::vector<ConvexHull> hulls;
    for (const auto& [id, pts] : groups) {
        (void)id;
        hulls.push_back(convex_hull(pts));
    }
    return hulls;
}

LabeledMesh carve_holes(const LabeledMesh& clean, const LabeledMesh& clutter) {
    const std::vector<ConvexHull> hulls = clutter_hulls(clutter);
    std::vector<Eigen::AlignedBox3d> boxes;
    for (const auto& h : hulls) {
        Eigen::AlignedBox3d b;
        for (const auto& p : h.points) b.extend(p);
        boxes.push_back(b);
    }
    constexpr double eps = 1e-6;
    std::vector<std::uint8_t> inside(clean.triangles.size(), 0);
    parallel_for(clean.triangles.size(), [&](std::size_t t) {
        const auto& tri = clean.triangles[t];
        const Eigen::Vector3d c = (clean.vertices[tri[0]] + clean.vertices[tri[1]] + clean.vertices[tri[2]]) / 3.0;
        for (std::size_t h = 0; h < hulls.size(); ++h) {
            if (boxes[h].exteriorDistance(c) > eps) continue;
            if (hulls[h].contains(c, eps)) {
                inside[t] = 1;
                return;
            }
        }
    });
    std::vector<bool> keep(inside.size());
    for (std::size_t t = 0; t < inside.size(); ++t) keep[t] = !inside[t];
    return filter_triangles(clean, keep);
}

}  // namespace viewfuse
