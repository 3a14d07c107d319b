#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <unistd.h>

#include "viewfuse/inpaint.hpp"
#include "viewfuse/io.hpp"

namespace viewfuse {

namespace {

namespace fs = std::filesystem;

/// Bounds the number of concurrently running backend processes.
class ProcessLimiter {
public:
    void acquire(int limit) {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return running_ < limit; });
        ++running_;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            --running_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int running_ = 0;
};

ProcessLimiter& limiter() {
    static ProcessLimiter l;
    return l;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

class ScratchDir {
public:
    explicit ScratchDir(int frame_id) {
        static std::atomic<long> counter{0};
        path_ = fs::temp_directory_path() /
                ("viewfuse-" + std::to_string(::getpid()) + "-" + std::to_string(frame_id) + "-" +
                 std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

/// Writes the request, runs the command and returns the output path.
void run_external(const InpaintRequest& req, const BackendSpec& spec, const ScratchDir& dir,
                  const fs::path& out_path) {
    const auto color = dir.path() / "color.png";
    const auto depth = dir.path() / "depth.vfd";
    const auto mask = dir.path() / "mask.png";
    io::write_color_png(color, req.guidance ? *req.guidance : req.color);
    io::write_depth_vfd(depth, req.depth);
    io::write_mask_png(mask, req.hole);

    // Exported, so the command line itself can expand $VF_OUT and friends.
    const std::string cmd = "export VF_IN_COLOR=" + shell_quote(color.string()) +
                            " VF_IN_DEPTH=" + shell_quote(depth.string()) +
                            " VF_IN_MASK=" + shell_quote(mask.string()) +
                            " VF_OUT=" + shell_quote(out_path.string()) + "; " + spec.command;
    limiter().acquire(spec.max_parallel);
    const int status = std::system(cmd.c_str());
    limiter().release();
    if (status != 0)
        throw BackendError("external backend exited with status " + std::to_string(status) +
                           " for frame " + std::to_string(req.frame_id));
    if (!fs::exists(out_path))
        throw BackendError("external backend produced no output at " + out_path.string());
}

}  // namespace

ColorImage external_inpaint_color(const InpaintRequest& req, const BackendSpec& spec) {
    ScratchDir dir(req.frame_id);
    const auto out_path = dir.path() / "out.png";
    // Color requests send the holed color image itself.
    InpaintRequest color_req = req;
    color_req.guidance.reset();
    run_external(color_req, spec, dir, out_path);
    ColorImage result;
    try {
        result = io::read_color_png(out_path);
    } catch (const Error& e) {
        throw BackendError(std::string("external backend output unreadable: ") + e.what());
    }
    if (result.rows() != req.color.rows() || result.cols() != req.color.cols())
        throw BackendError("external backend returned a color image of the wrong size");
    ColorImage out = req.color;
    for (int c = 0; c < 3; ++c) out.channel[c] = (req.hole != 0).select(result.channel[c], req.color.channel[c]);
    return out;
}

DepthMap external_complete_depth(const InpaintRequest& req, const BackendSpec& spec) {
    ScratchDir dir(req.frame_id);
    const auto out_path = dir.path() / "out.vfd";
    run_external(req, spec, dir, out_path);
    DepthMap result;
    try {
        result = io::read_depth_vfd(out_path);
    } catch (const Error& e) {
        throw BackendError(std::string("external backend output unreadable: ") + e.what());
    }
    if (!same_size(result, req.depth))
        throw BackendError("external backend returned a depth map of the wrong size");
    return (req.hole != 0).select(result, req.depth);
}

}  // namespace viewfuse
