#pragma once

#include <optional>
#include <span>
#include <vector>

#include "viewfuse/image.hpp"

#include "json.hpp"

namespace viewfuse {

/// Exact nearest-neighbor queries over a fixed point set.
class KdTree {
public:
    explicit KdTree(std::span<const Eigen::Vector3d> points);

    /// Index and Euclidean distance of the closest point.
    std::pair<std::size_t, double> nearest(const Eigen::Vector3d& q) const;

    std::size_t size() const { return points_.size(); }

private:
    struct Node {
        int axis = -1;  ///< -1 for leaves
        double split = 0.0;
        int left = -1, right = -1;
        int begin = 0, end = 0;
    };
    int build(int begin, int end, int depth);
    void search(int node, const Eigen::Vector3d& q, Eigen::Vector3d& off, double box_d2, std::size_t& best,
                double& best_d2) const;

    std::vector<Eigen::Vector3d> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

/// Mean distance from each point of `from` to its nearest neighbor in `to`.
double mean_nearest_distance(std::span<const Eigen::Vector3d> from, const KdTree& to);

struct ChamferResult {
    double a_to_b_cm;
    double b_to_a_cm;
    double chamfer_cm;  ///< (a_to_b + b_to_a) / 2
};

/// Unsquared mean-of-means Chamfer distance in centimeters for inputs in
/// meters. Throws EmptyInputError when either cloud is empty.
ChamferResult chamfer_detail(std::span<const Eigen::Vector3d> a, std::span<const Eigen::Vector3d> b);
double chamfer(std::span<const Eigen::Vector3d> a, std::span<const Eigen::Vector3d> b);

/// Formula recorded in reports next to Chamfer values.
inline constexpr const char* kChamferFormula =
    "0.5 * (mean_a min_b |a-b| + mean_b min_a |a-b|) * 100, meters to cm";

struct ImageMetrics {
    double l1 = 0.0;    ///< mean absolute error on [0,1] values
    double l2 = 0.0;    ///< root mean squared error on [0,1] values
    double psnr = 0.0;  ///< dB, +infinity for identical inputs
    double ssim = 1.0;
};

/// Per-pixel SSIM of one channel pair on [0,1] values: 11x11 Gaussian
/// window, sigma 1.5, K1 = 0.01, K2 = 0.03, borders replicated.
Image<double> ssim_map(const Image<double>& x, const Image<double>& y);

/// Metrics over all channels of two 8-bit images. With `region`, every
/// statistic is restricted to the region's pixels (SSIM averages its map
/// there). Throws DimensionMismatchError on size mismatch and
/// EmptyInputError for an empty region.
ImageMetrics image_metrics(const ColorImage& render, const ColorImage& truth, const Mask* region = nullptr);

struct MaskMetrics {
    long tp = 0, fp = 0, fn = 0, tn = 0;  ///< clutter is the positive class
    std::optional<double> iou_clutter;      ///< null when gt has no clutter
    std::optional<double> iou_non_clutter;  ///< null when gt has no non-clutter
    std::optional<double> miou;             ///< mean of the defined IoUs
    std::optional<double> precision;        ///< null when nothing is predicted clutter
    std::optional<double> recall;           ///< null when gt has no clutter
};

/// Confusion counts over paired labels (nonzero = clutter).
MaskMetrics mask_metrics(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);
MaskMetrics mask_metrics(const Mask& pred, const Mask& gt);

nlohmann::json to_json(const ImageMetrics& m);
nlohmann::json to_json(const MaskMetrics& m);
nlohmann::json to_json(const ChamferResult& c);

}  // namespace viewfuse
