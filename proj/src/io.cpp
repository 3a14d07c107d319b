#include "viewfuse/io.hpp"

#include <png.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace viewfuse::io {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        if (mode[0] == 'r') throw MissingFileError(path.string());
        throw Error("cannot open for writing: " + path.string());
    }
    return f;
}

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
    auto* text = static_cast<std::string*>(png_get_error_ptr(png));
    if (text) *text = msg;
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

/// Decoded PNG samples, row major, interleaved.
struct PngData {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;
    std::vector<std::uint8_t> bytes;  // 16-bit samples stored native-endian
};

enum class PngTarget { rgb8, gray8, gray16 };

PngData read_png(const fs::path& path, PngTarget target) {
    auto file = open_file(path, "rb");
    std::array<png_byte, 8> sig{};
    if (std::fread(sig.data(), 1, sig.size(), file.get()) != sig.size() ||
        png_sig_cmp(sig.data(), 0, sig.size()) != 0)
        throw MalformedFileError(path.string(), "not a PNG file");

    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                             png_warning_handler);
    png_infop info = png_create_info_struct(png);
    PngData out;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw MalformedFileError(path.string(), err.empty() ? "decode failed" : err);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (target == PngTarget::gray16) {
        if (color_type != PNG_COLOR_TYPE_GRAY || depth != 16) {
            png_destroy_read_struct(&png, &info, nullptr);
            throw MalformedFileError(path.string(), "depth PNG must be 16-bit grayscale");
        }
        png_set_swap(png);
    } else {
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (depth == 16) png_set_strip_16(png);
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        if (target == PngTarget::rgb8 &&
            (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA))
            png_set_gray_to_rgb(png);
        if (target == PngTarget::gray8 &&
            (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
             color_type == PNG_COLOR_TYPE_PALETTE))
            png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.bytes.resize(stride * out.height);
    rows.resize(out.height);
    for (int r = 0; r < out.height; ++r) rows[r] = out.bytes.data() + stride * r;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_png(const fs::path& path, const PngData& data) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto file = open_file(path, "wb");
    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                              png_warning_handler);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("PNG encode failed for " + path.string() + ": " + err);
    }
    png_init_io(png, file.get());
    const int color_type = data.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(png, info, data.width, data.height, data.bit_depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 3);
    png_write_info(png, info);
    if (data.bit_depth == 16) png_set_swap(png);
    const std::size_t stride =
        static_cast<std::size_t>(data.width) * data.channels * (data.bit_depth / 8);
    std::vector<png_bytep> rows(data.height);
    for (int r = 0; r < data.height; ++r)
        rows[r] = const_cast<png_bytep>(data.bytes.data() + stride * r);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

ColorImage read_color_png(const fs::path& path) {
    const auto data = read_png(path, PngTarget::rgb8);
    ColorImage img(data.height, data.width);
    for (int v = 0; v < data.height; ++v)
        for (int u = 0; u < data.width; ++u)
            for (int c = 0; c < 3; ++c)
                img.channel[c](v, u) = data.bytes[(static_cast<std::size_t>(v) * data.width + u) * 3 + c];
    return img;
}

void write_color_png(const fs::path& path, const ColorImage& image) {
    PngData data;
    data.width = static_cast<int>(image.cols());
    data.height = static_cast<int>(image.rows());
    data.channels = 3;
    data.bit_depth = 8;
    data.bytes.resize(static_cast<std::size_t>(data.width) * data.height * 3);
    for (int v = 0; v < data.height; ++v)
        for (int u = 0; u < data.width; ++u)
            for (int c = 0; c < 3; ++c)
                data.bytes[(static_cast<std::size_t>(v) * data.width + u) * 3 + c] = image.channel[c](v, u);
    write_png(path, data);
}

Mask read_mask_png(const fs::path& path) {
    const auto data = read_png(path, PngTarget::gray8);
    Mask m(data.height, data.width);
    for (int v = 0; v < data.height; ++v)
        for (int u = 0; u < data.width; ++u)
            m(v, u) = data.bytes[static_cast<std::size_t>(v) * data.width + u] != 0 ? 1 : 0;
    return m;
}

void write_mask_png(const fs::path& path, const Mask& mask) {
    PngData data;
    data.width = static_cast<int>(mask.cols());
    data.height = static_cast<int>(mask.rows());
    data.channels = 1;
    data.bit_depth = 8;
    data.bytes.resize(static_cast<std::size_t>(data.width) * data.height);
    for (int v = 0; v < data.height; ++v)
        for (int u = 0; u < data.width; ++u)
            data.bytes[static_cast<std::size_t>(v) * data.width + u] = mask(v, u) ? 255 : 0;
    write_png(path, data);
}

DepthMap read_depth_png(const fs::path& path) {
    const auto data = read_png(path, PngTarget::gray16);
    DepthMap d(data.height, data.width);
    for (int v = 0; v < data.height; ++v)
        for (int u = 0; u < data.width; ++u) {
            std::uint16_t mm;
            std::memcpy(&mm, data.bytes.data() + (static_cast<std::size_t>(v) * data.width + u) * 2, 2);
            d(v, u) = mm / 1000.0;
        }
    return d;
}

void write_depth_png(const fs::path& path, const DepthMap& depth) {
    PngData data;
    data.width = static_cast<int>(depth.cols());
    data.height = static_cast<int>(depth.rows());
    data.channels = 1;
    data.bit_depth = 16;
    data.bytes.resize(static_cast<std::size_t>(data.width) * data.height * 2);
    for (int v = 0; v < data.height; ++v)
        for (int u = 0; u < data.width; ++u) {
            const double d = depth(v, u);
            const double mm = (d > 0.0 && std::isfinite(d)) ? std::min(65535.0, std::round(d * 1000.0)) : 0.0;
            const auto q = static_cast<std::uint16_t>(mm);
            std::memcpy(data.bytes.data() + (static_cast<std::size_t>(v) * data.width + u) * 2, &q, 2);
        }
    write_png(path, data);
}

DepthMap read_depth_vfd(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError(path.string());
    char magic[4];
    std::uint32_t w = 0, h = 0;
    float scale = 0.0f;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    in.read(reinterpret_cast<char*>(&scale), 4);
    if (!in || std::memcmp(magic, "VFD1", 4) != 0)
        throw MalformedFileError(path.string(), "bad VFD1 header");
    if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16 || !(scale > 0.0f))
        throw MalformedFileError(path.string(), "bad VFD1 dimensions or scale");
    std::vector<float> values(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * 4));
    if (!in) throw MalformedFileError(path.string(), "truncated VFD1 payload");
    DepthMap d(h, w);
    for (std::uint32_t v = 0; v < h; ++v)
        for (std::uint32_t u = 0; u < w; ++u) {
            const double m = static_cast<double>(values[v * w + u]) * scale;
            d(v, u) = (std::isfinite(m) && m > 0.0) ? m : 0.0;
        }
    return d;
}

void write_depth_vfd(const fs::path& path, const DepthMap& depth, float scale) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path.string());
    const auto w = static_cast<std::uint32_t>(depth.cols());
    const auto h = static_cast<std::uint32_t>(depth.rows());
    out.write("VFD1", 4);
    out.write(reinterpret_cast<const char*>(&w), 4);
    out.write(reinterpret_cast<const char*>(&h), 4);
    out.write(reinterpret_cast<const char*>(&scale), 4);
    std::vector<float> values(static_cast<std::size_t>(w) * h);
    for (std::uint32_t v = 0; v < h; ++v)
        for (std::uint32_t u = 0; u < w; ++u)
            values[v * w + u] = static_cast<float>(depth(v, u) / scale);
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * 4));
}

Eigen::Matrix<double, Eigen::Dynamic, 2> read_probs(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError(path.string());
    char magic[4];
    std::uint32_t count = 0, classes = 0, reserved = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&count), 4);
    in.read(reinterpret_cast<char*>(&classes), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    if (!in || std::memcmp(magic, "VFP1", 4) != 0) throw MalformedFileError(path.string(), "bad VFP1 header");
    if (classes != 2) throw MalformedFileError(path.string(), "expected 2 classes");
    std::vector<float> values(static_cast<std::size_t>(count) * 2);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * 4));
    if (!in) throw MalformedFileError(path.string(), "truncated VFP1 payload");
    if (in.peek() != std::ifstream::traits_type::eof())
        throw MalformedFileError(path.string(), "trailing bytes after VFP1 payload");
    Eigen::Matrix<double, Eigen::Dynamic, 2> probs(count, 2);
    for (std::uint32_t i = 0; i < count; ++i) {
        probs(i, 0) = values[2 * i];
        probs(i, 1) = values[2 * i + 1];
    }
    return probs;
}

void write_probs(const fs::path& path, const Eigen::Matrix<double, Eigen::Dynamic, 2>& probs) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path.string());
    const auto count = static_cast<std::uint32_t>(probs.rows());
    const std::uint32_t classes = 2, reserved = 0;
    out.write("VFP1", 4);
    out.write(reinterpret_cast<const char*>(&count), 4);
    out.write(reinterpret_cast<const char*>(&classes), 4);
    out.write(reinterpret_cast<const char*>(&reserved), 4);
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        for (int c = 0; c < 2; ++c) {
            const auto v = static_cast<float>(probs(i, c));
            out.write(reinterpret_cast<const char*>(&v), 4);
        }
    if (!out) throw Error("write failed: " + path.string());
}

DepthMap read_depth(const fs::path& path) {
    if (path.extension() == ".vfd") return read_depth_vfd(path);
    return read_depth_png(path);
}

void write_depth(const fs::path& path, const DepthMap& depth) {
    if (path.extension() == ".vfd")
        write_depth_vfd(path, depth);
    else
        write_depth_png(path, depth);
}

CameraModel camera_from_json(const nlohmann::json& j) {
    CameraModel cam;
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    const auto pose = j.at("pose").get<std::vector<double>>();
    if (pose.size() != 16) throw DomainError("camera pose must have 16 entries");
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) cam.pose(r, c) = pose[r * 4 + c];
    return cam;
}

nlohmann::json camera_to_json(const CameraModel& cam) {
    std::vector<double> pose(16);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) pose[r * 4 + c] = cam.pose(r, c);
    return {{"fx", cam.fx}, {"fy", cam.fy},         {"cx", cam.cx},   {"cy", cam.cy},
            {"width", cam.width}, {"height", cam.height}, {"pose", pose}};
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError(path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedFileError(path.string(), e.what());
    }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

CameraModel read_camera(const fs::path& path) {
    const auto j = read_json(path);
    try {
        auto cam = camera_from_json(j);
        cam.validate();
        return cam;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedFileError(path.string(), e.what());
    } catch (const Error& e) {
        throw MalformedFileError(path.string(), e.what());
    }
}

void write_camera(const fs::path& path, const CameraModel& cam) {
    write_json(path, camera_to_json(cam));
}

std::string frame_name(int index, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06d%s", index, ext);
    return buf;
}

// ---------------------------------------------------------------------------
// PLY

namespace {

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

PlyType parse_ply_type(const std::string& s, const fs::path& path) {
    if (s == "char" || s == "int8") return PlyType::i8;
    if (s == "uchar" || s == "uint8") return PlyType::u8;
    if (s == "short" || s == "int16") return PlyType::i16;
    if (s == "ushort" || s == "uint16") return PlyType::u16;
    if (s == "int" || s == "int32") return PlyType::i32;
    if (s == "uint" || s == "uint32") return PlyType::u32;
    if (s == "float" || s == "float32") return PlyType::f32;
    if (s == "double" || s == "float64") return PlyType::f64;
    throw MalformedFileError(path.string(), "unknown PLY type '" + s + "'");
}

std::size_t ply_size(PlyType t) {
    switch (t) {
        case PlyType::i8:
        case PlyType::u8: return 1;
        case PlyType::i16:
        case PlyType::u16: return 2;
        case PlyType::i32:
        case PlyType::u32:
        case PlyType::f32: return 4;
        case PlyType::f64: return 8;
    }
    return 0;
}

struct PlyProperty {
    std::string name;
    PlyType type;
    bool is_list = false;
    PlyType count_type = PlyType::u8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

class PlyReader {
public:
    PlyReader(std::istream& in, bool binary, const fs::path& path)
        : in_(in), binary_(binary), path_(path) {}

    double read(PlyType t) {
        if (!binary_) {
            double v;
            if (!(in_ >> v)) throw MalformedFileError(path_.string(), "truncated ascii PLY body");
            return v;
        }
        char buf[8];
        in_.read(buf, static_cast<std::streamsize>(ply_size(t)));
        if (!in_) throw MalformedFileError(path_.string(), "truncated PLY body");
        switch (t) {
            case PlyType::i8: return static_cast<std::int8_t>(buf[0]);
            case PlyType::u8: return static_cast<std::uint8_t>(buf[0]);
            case PlyType::i16: return as<std::int16_t>(buf);
            case PlyType::u16: return as<std::uint16_t>(buf);
            case PlyType::i32: return as<std::int32_t>(buf);
            case PlyType::u32: return as<std::uint32_t>(buf);
            case PlyType::f32: return as<float>(buf);
            case PlyType::f64: return as<double>(buf);
        }
        return 0.0;
    }

private:
    template <typename T>
    static double as(const char* buf) {
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return static_cast<double>(v);
    }

    std::istream& in_;
    bool binary_;
    fs::path path_;
};

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

LabeledMesh read_mesh_ply(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError(path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("ply", 0) != 0) throw MalformedFileError(path.string(), "missing 'ply' magic");

    bool binary = false;
    std::vector<PlyElement> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "binary_little_endian")
                binary = true;
            else if (fmt != "ascii")
                throw MalformedFileError(path.string(), "unsupported PLY format " + fmt);
        } else if (key == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (key == "property") {
            if (elements.empty()) throw MalformedFileError(path.string(), "property before element");
            PlyProperty p;
            std::string type;
            ls >> type;
            if (type == "list") {
                std::string ct, it;
                ls >> ct >> it;
                p.is_list = true;
                p.count_type = parse_ply_type(ct, path);
                p.type = parse_ply_type(it, path);
            } else {
                p.type = parse_ply_type(type, path);
            }
            ls >> p.name;
            elements.back().props.push_back(p);
        } else if (key == "end_header") {
            break;
        }
    }
    if (!in) throw MalformedFileError(path.string(), "missing end_header");

    LabeledMesh mesh;
    PlyReader reader(in, binary, path);
    for (const auto& e : elements) {
        if (e.name == "vertex") {
            mesh.vertices.resize(e.count, Eigen::Vector3d::Zero());
            mesh.instance_id.assign(e.count, 0);
            mesh.clutter.assign(e.count, 0);
            bool has_color = false;
            for (const auto& p : e.props) has_color |= p.name == "red";
            if (has_color) mesh.colors.assign(e.count, Rgb::Zero());
            for (std::size_t i = 0; i < e.count; ++i) {
                for (const auto& p : e.props) {
                    if (p.is_list) {
                        const auto n = static_cast<std::size_t>(reader.read(p.count_type));
                        for (std::size_t k = 0; k < n; ++k) reader.read(p.type);
                        continue;
                    }
                    const double v = reader.read(p.type);
                    if (p.name == "x") mesh.vertices[i].x() = v;
                    else if (p.name == "y") mesh.vertices[i].y() = v;
                    else if (p.name == "z") mesh.vertices[i].z() = v;
                    else if (p.name == "red") mesh.colors[i][0] = static_cast<std::uint8_t>(v);
                    else if (p.name == "green") mesh.colors[i][1] = static_cast<std::uint8_t>(v);
                    else if (p.name == "blue") mesh.colors[i][2] = static_cast<std::uint8_t>(v);
                    else if (p.name == "instance_id") mesh.instance_id[i] = static_cast<int>(v);
                    else if (p.name == "clutter") mesh.clutter[i] = v != 0.0 ? 1 : 0;
                }
            }
        } else {
            const bool is_face = e.name == "face";
            for (std::size_t i = 0; i < e.count; ++i) {
                for (const auto& p : e.props) {
                    if (!p.is_list) {
                        reader.read(p.type);
                        continue;
                    }
                    const auto n = static_cast<std::size_t>(reader.read(p.count_type));
                    std::vector<int> idx(n);
                    for (std::size_t k = 0; k < n; ++k) idx[k] = static_cast<int>(reader.read(p.type));
                    if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index")) {
                        // Fan-triangulate polygons.
                        for (std::size_t k = 2; k < n; ++k)
                            mesh.triangles.emplace_back(idx[0], idx[k - 1], idx[k]);
                    }
                }
            }
        }
    }
    try {
        mesh.validate();
    } catch (const Error& e) {
        throw MalformedFileError(path.string(), e.what());
    }
    return mesh;
}

namespace {

void write_ply(const fs::path& path, const TriangleMesh& mesh, const LabeledMesh* labels) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path.string());
    const bool colors = mesh.colors.size() == mesh.vertices.size() && !mesh.vertices.empty();
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << mesh.vertices.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (labels) out << "property int instance_id\nproperty uchar clutter\n";
    out << "element face " << mesh.triangles.size() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        for (int k = 0; k < 3; ++k) put(out, static_cast<float>(mesh.vertices[i][k]));
        if (colors)
            for (int k = 0; k < 3; ++k) put(out, mesh.colors[i][k]);
        if (labels) {
            put(out, static_cast<std::int32_t>(labels->instance_id[i]));
            put(out, static_cast<std::uint8_t>(labels->clutter[i]));
        }
    }
    for (const auto& t : mesh.triangles) {
        put(out, static_cast<std::uint8_t>(3));
        for (int k = 0; k < 3; ++k) put(out, static_cast<std::int32_t>(t[k]));
    }
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

void write_mesh_ply(const fs::path& path, const LabeledMesh& mesh) {
    mesh.validate();
    write_ply(path, mesh, &mesh);
}

void write_mesh_ply(const fs::path& path, const TriangleMesh& mesh) { write_ply(path, mesh, nullptr); }

}  // namespace viewfuse::io
