#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>

#include "viewfuse/errors.hpp"

namespace viewfuse {

/// Single-channel raster, row = v (image y), column = u (image x).
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Metric depth along camera +z in meters; 0 marks an invalid pixel.
using DepthMap = Image<double>;

/// Binary mask, values in {0,1}.
using Mask = Image<std::uint8_t>;

/// Planar 8-bit RGB image.
struct ColorImage {
    std::array<Image<std::uint8_t>, 3> channel;

    ColorImage() = default;
    ColorImage(Eigen::Index rows, Eigen::Index cols, std::uint8_t fill = 0) {
        for (auto& c : channel) c.setConstant(rows, cols, fill);
    }

    Eigen::Index rows() const { return channel[0].rows(); }
    Eigen::Index cols() const { return channel[0].cols(); }

    bool operator==(const ColorImage& other) const {
        for (int c = 0; c < 3; ++c) {
            if (channel[c].rows() != other.channel[c].rows() ||
                channel[c].cols() != other.channel[c].cols() ||
                !(channel[c] == other.channel[c]).all())
                return false;
        }
        return true;
    }
};

template <typename A, typename B>
bool same_size(const A& a, const B& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* what) {
    if (!same_size(a, b))
        throw DimensionMismatchError(std::string(what) + ": size mismatch");
}

/// Valid-pixel indicator of a depth map.
inline Mask valid_mask(const DepthMap& depth) {
    return (depth > 0.0).cast<std::uint8_t>();
}

inline Eigen::Index count(const Mask& mask) {
    return (mask != 0).count();
}

}  // namespace viewfuse
